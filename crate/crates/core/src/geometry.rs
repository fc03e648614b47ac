//! Geometric audits of solved profiles.
//!
//! Both audits differentiate the sampled warping function directly
//! (periodic 4th-order finite differences) instead of using the jets the
//! integrator produced, so a passing audit does not depend on the ODE
//! bookkeeping it is checking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver::SolutionProfile;
use crate::spectral::fd4_derivatives;

const MIN_SAMPLES: usize = 64;

/// Scalar curvature of `dt² + ψ(t)² h` for fiber curvature `R` and fiber
/// dimension `n - 1`.
pub fn warped_scalar_curvature(p: &ModelParams, psi: f64, dpsi: f64, ddpsi: f64) -> f64 {
    let m = (p.n() - 1) as f64;
    (p.fiber_curvature() - 2.0 * m * psi * ddpsi - m * (m - 1.0) * dpsi * dpsi) / (psi * psi)
}

/// How the warping function enters the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpingConvention {
    /// `dt² + f(t)² h`
    Squared,
    /// `dt² + f(t) h`
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionAudit {
    /// Convention the curvature equation corresponds to.
    pub adopted: WarpingConvention,
    /// sup |R̃(t) - Rt| if the metric were read as `dt² + f h` instead.
    pub linear_max_dev: f64,
    /// True when the adopted convention fits strictly better.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    #[serde(rename = "Rt_profile")]
    pub rt_profile: Vec<(f64, f64)>,
    pub max_dev: f64,
    pub tol: f64,
    pub passed: bool,
    pub convention: ConventionAudit,
}

/// Recomputes the scalar curvature of `dt² + f² h` along the profile from
/// the `f` samples alone and compares it with the prescribed `Rt`.
pub fn curvature_audit(prof: &SolutionProfile, tol: f64) -> Result<CurvatureReport> {
    let m = prof.samples.len();
    if m < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: m,
            need: MIN_SAMPLES,
        });
    }
    if let Some((i, s)) = prof.samples.iter().enumerate().find(|(_, s)| !(s.f > 0.0)) {
        return Err(Error::NonPositiveWarp {
            index: i,
            value: s.f,
        });
    }
    let p = &prof.params;
    let rt = p.target_curvature();

    let f: Vec<f64> = prof.samples.iter().map(|s| s.f).collect();
    let (d1, d2) = fd4_derivatives(&f, prof.period);
    let rt_profile: Vec<(f64, f64)> = prof
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (s.t, warped_scalar_curvature(p, f[i], d1[i], d2[i])))
        .collect();
    let max_dev = rt_profile
        .iter()
        .map(|(_, r)| (r - rt).abs())
        .fold(0.0, f64::max);

    // ψ = √f for the linear reading dt² + f h = dt² + ψ² h
    let psi: Vec<f64> = f.iter().map(|v| v.sqrt()).collect();
    let (p1, p2) = fd4_derivatives(&psi, prof.period);
    let linear_max_dev = (0..m)
        .map(|i| (warped_scalar_curvature(p, psi[i], p1[i], p2[i]) - rt).abs())
        .fold(0.0, f64::max);

    Ok(CurvatureReport {
        rt_profile,
        max_dev,
        tol,
        passed: max_dev < tol,
        convention: ConventionAudit {
            adopted: WarpingConvention::Squared,
            linear_max_dev,
            consistent: max_dev < linear_max_dev || linear_max_dev < tol,
        },
    })
}

/// Sup residuals of the two components of `L_X g̃ = 2 f' g̃`, `X = f ∂_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentResiduals {
    /// `|2 (f)' - 2 f'|`
    pub tt: f64,
    /// fiber component, relative to `sup |2 f' · w|` with `w` the fiber warp
    pub fiber: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    pub squared: ComponentResiduals,
    pub linear: ComponentResiduals,
    pub tol: f64,
    pub squared_passes: bool,
    pub linear_passes: bool,
    /// False for a constant profile, where both conventions trivially pass.
    pub adjudicates: bool,
}

/// Relative tolerance for the conformal identity at finite-difference noise.
pub const CONFORMAL_TOL: f64 = 1e-4;

/// Checks the conformal Killing identity `L_X g̃ = 2 f' g̃` for `X = f ∂_t`
/// under both readings of the warped metric.
///
/// Fiber component: `X(w) = f w'` must equal `2 f' w`. With `w = f²` this
/// is an identity; with `w = f` it leaves `f f'`.
pub fn conformal_field_check(prof: &SolutionProfile) -> ConformalReport {
    let f: Vec<f64> = prof.samples.iter().map(|s| s.f).collect();
    let fp: Vec<f64> = prof.samples.iter().map(|s| s.fp).collect();
    let f2: Vec<f64> = f.iter().map(|v| v * v).collect();
    let (df, _) = fd4_derivatives(&f, prof.period);
    let (df2, _) = fd4_derivatives(&f2, prof.period);

    let sup = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let tt_abs = sup(&mut (0..f.len()).map(|i| (2.0 * df[i] - 2.0 * fp[i]).abs()));
    let fp_scale = sup(&mut fp.iter().map(|v| 2.0 * v.abs()));

    let sq_abs = sup(&mut (0..f.len()).map(|i| (f[i] * df2[i] - 2.0 * fp[i] * f2[i]).abs()));
    let sq_scale = sup(&mut (0..f.len()).map(|i| (2.0 * fp[i] * f2[i]).abs()));
    let lin_abs = sup(&mut (0..f.len()).map(|i| (f[i] * df[i] - 2.0 * fp[i] * f[i]).abs()));
    let lin_scale = sup(&mut (0..f.len()).map(|i| (2.0 * fp[i] * f[i]).abs()));

    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    let tt = rel(tt_abs, fp_scale);
    let squared = ComponentResiduals {
        tt,
        fiber: rel(sq_abs, sq_scale),
    };
    let linear = ComponentResiduals {
        tt,
        fiber: rel(lin_abs, lin_scale),
    };
    ConformalReport {
        squared,
        linear,
        tol: CONFORMAL_TOL,
        squared_passes: squared.tt < CONFORMAL_TOL && squared.fiber < CONFORMAL_TOL,
        linear_passes: linear.tt < CONFORMAL_TOL && linear.fiber < CONFORMAL_TOL,
        adjudicates: fp_scale > 0.0,
    }
}
