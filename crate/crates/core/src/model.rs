//! Parameters, closed-form constants and the reduced conservative equation.
//!
//! The warping function `f` of `S¹ ×_f N` satisfies
//!
//! ```text
//! Rt f² + 2(n-1) f f'' + (n-1)(n-2) f'² - R = 0
//! ```
//!
//! Writing `f = x^{2/n}` removes the `f'²` term and leaves the conservative
//! oscillator `x'' + φ(x) = 0` with
//!
//! ```text
//! φ(x) = n Rt / (4(n-1)) · x  -  n R / (4(n-1)) · x^{1 - 4/n}
//! G(x) = n Rt / (8(n-1)) · x²  -  n R / (4(n-1)) · n / (2n-4) · x^{(2n-4)/n}
//! ```
//!
//! normalised so that `G(0⁺) = 0`. Periodic orbits live in `c_min < c < 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension and curvatures of the warped product.
///
/// `R` is the scalar curvature of the fiber `N`, `Rt` the prescribed
/// scalar curvature of the total space. Coefficients of the reduced
/// equation are cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct ModelParams {
    n: u32,
    fiber_curvature: f64,
    target_curvature: f64,
    // n Rt / (4(n-1))
    linear_coef: f64,
    // n R / (4(n-1))
    power_coef: f64,
    // 1 - 4/n
    force_exp: f64,
    // (2n-4)/n
    potential_exp: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: u32,
    #[serde(rename = "R")]
    fiber_curvature: f64,
    #[serde(rename = "Rt")]
    target_curvature: f64,
}

impl TryFrom<ParamsRepr> for ModelParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        ModelParams::new(r.n, r.fiber_curvature, r.target_curvature)
    }
}

impl From<ModelParams> for ParamsRepr {
    fn from(p: ModelParams) -> Self {
        ParamsRepr {
            n: p.n,
            fiber_curvature: p.fiber_curvature,
            target_curvature: p.target_curvature,
        }
    }
}

impl ModelParams {
    pub fn new(n: u32, fiber_curvature: f64, target_curvature: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension n = {n}, need n >= 3")));
        }
        if !(fiber_curvature.is_finite() && fiber_curvature > 0.0) {
            return Err(Error::Domain(format!(
                "fiber scalar curvature R = {fiber_curvature}, need R > 0"
            )));
        }
        if !(target_curvature.is_finite() && target_curvature > 0.0) {
            return Err(Error::Domain(format!(
                "target scalar curvature Rt = {target_curvature}, need Rt > 0"
            )));
        }
        let nf = n as f64;
        Ok(ModelParams {
            n,
            fiber_curvature,
            target_curvature,
            linear_coef: nf * target_curvature / (4.0 * (nf - 1.0)),
            power_coef: nf * fiber_curvature / (4.0 * (nf - 1.0)),
            force_exp: 1.0 - 4.0 / nf,
            potential_exp: (2.0 * nf - 4.0) / nf,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Scalar curvature `R` of the fiber.
    pub fn fiber_curvature(&self) -> f64 {
        self.fiber_curvature
    }

    /// Prescribed scalar curvature `Rt` of the warped product.
    pub fn target_curvature(&self) -> f64 {
        self.target_curvature
    }

    /// Equilibrium of the reduced equation, `(R/Rt)^{n/4}`.
    pub fn x_star(&self) -> f64 {
        (self.fiber_curvature / self.target_curvature).powf(self.n as f64 / 4.0)
    }

    /// Constant solution `sqrt(R/Rt)` of the curvature equation.
    pub fn f_star(&self) -> f64 {
        (self.fiber_curvature / self.target_curvature).sqrt()
    }

    /// Threshold period `2π sqrt(n-1) / sqrt(Rt)`.
    pub fn threshold_period(&self) -> f64 {
        2.0 * PI * ((self.n - 1) as f64).sqrt() / self.target_curvature.sqrt()
    }

    pub fn derive_constants(&self) -> DerivedConstants {
        let x_star = self.x_star();
        DerivedConstants {
            x_star,
            f_star: self.f_star(),
            alpha: x_star,
            t0: self.threshold_period(),
            c_min: self.phi_potential(x_star),
            c_crit: 0.0,
        }
    }

    /// Force `φ(x)` of `x'' + φ(x) = 0`.
    pub fn force(&self, x: f64) -> Result<f64> {
        self.check_positive(x)?;
        Ok(self.phi(x))
    }

    /// `dφ/dx`.
    pub fn force_derivative(&self, x: f64) -> Result<f64> {
        self.check_positive(x)?;
        Ok(self.phi_prime(x))
    }

    /// Potential `G(x)` with `G' = φ` and `G(0⁺) = 0`.
    pub fn potential(&self, x: f64) -> Result<f64> {
        self.check_positive(x)?;
        Ok(self.phi_potential(x))
    }

    /// Energy `v²/2 + G(x)` of a phase state.
    pub fn energy(&self, s: &PhaseState) -> Result<f64> {
        Ok(0.5 * s.v * s.v + self.potential(s.x)?)
    }

    /// Frequency `sqrt(Rt/(n-1))` of the linearisation about the constant solution.
    pub fn linearized_frequency(&self) -> f64 {
        (self.target_curvature / (self.n - 1) as f64).sqrt()
    }

    /// Residual of the curvature equation at a jet `(f, f', f'')`.
    pub fn residual_e(&self, f: f64, fp: f64, fpp: f64) -> f64 {
        let m = (self.n - 1) as f64;
        self.target_curvature * f * f + 2.0 * m * f * fpp + m * (m - 1.0) * fp * fp
            - self.fiber_curvature
    }

    /// Maps a reduced state `(x, v)` to the warping jet `(f, f', f'')`
    /// using `f = x^{2/n}` and `x'' = -φ(x)`.
    pub fn to_f_coords(&self, x: f64, v: f64) -> Result<WarpJet> {
        self.check_positive(x)?;
        Ok(self.jet(x, v))
    }

    pub(crate) fn jet(&self, x: f64, v: f64) -> WarpJet {
        let e = 2.0 / self.n as f64;
        let f = x.powf(e);
        // x^{e-1} and x^{e-2} from f to save two powf calls
        let d1 = e * f / x;
        let d2 = (e - 1.0) * d1 / x;
        WarpJet {
            f,
            fp: d1 * v,
            fpp: d2 * v * v - d1 * self.phi(x),
        }
    }

    /// Inverse of `f = x^{2/n}`.
    pub fn x_from_f(&self, f: f64) -> f64 {
        f.powf(self.n as f64 / 2.0)
    }

    #[inline]
    pub(crate) fn phi(&self, x: f64) -> f64 {
        if self.n == 4 {
            return self.linear_coef * x - self.power_coef;
        }
        self.linear_coef * x - self.power_coef * x.powf(self.force_exp)
    }

    #[inline]
    pub(crate) fn phi_prime(&self, x: f64) -> f64 {
        if self.n == 4 {
            return self.linear_coef;
        }
        self.linear_coef - self.power_coef * self.force_exp * x.powf(self.force_exp - 1.0)
    }

    /// `(A, B, e)` with `G(x) = A x² - B x^e`.
    pub(crate) fn potential_coefficients(&self) -> (f64, f64, f64) {
        (
            0.5 * self.linear_coef,
            self.power_coef / self.potential_exp,
            self.potential_exp,
        )
    }

    /// `G` without the domain check; `G(0) = 0` is returned for `x = 0`.
    #[inline]
    pub(crate) fn phi_potential(&self, x: f64) -> f64 {
        0.5 * self.linear_coef * x * x
            - self.power_coef / self.potential_exp * x.powf(self.potential_exp)
    }

    fn check_positive(&self, x: f64) -> Result<()> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "reduced variable x = {x} must be positive"
            )))
        }
    }
}

/// Closed-form constants attached to a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub x_star: f64,
    pub f_star: f64,
    /// Center of the reduced system; equal to `x_star`.
    pub alpha: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub c_min: f64,
    pub c_crit: f64,
}

/// A point of the reduced phase plane. `v = dx/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

impl PhaseState {
    pub fn new(t: f64, x: f64, v: f64) -> Self {
        PhaseState { t, x, v }
    }
}

/// Value and first two derivatives of the warping function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpJet {
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}
