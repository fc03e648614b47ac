//! Turning points and the period function `T(c)` of the reduced oscillator.
//!
//! `T(c) = √2 ∫_a^b du / √(c - G(u))` has inverse-square-root singularities
//! at both turning points. With `u = (a+b)/2 + (b-a)/2 · sin θ` the
//! integrand becomes bounded on `(-π/2, π/2)` and is integrated with
//! interior Gauss–Legendre panels only.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::roots::{brent, Tolerance};

/// One periodic orbit of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "T")]
    pub period: f64,
}

impl OrbitSpec {
    pub fn amplitude(&self) -> f64 {
        self.b - self.a
    }
}

/// Relative distance kept from the equilibrium energy (`lo`) and from the
/// critical energy `0` (`hi`), both in units of `|c_min|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyClamp {
    pub rel_lo: f64,
    pub rel_hi: f64,
}

impl Default for EnergyClamp {
    fn default() -> Self {
        EnergyClamp {
            rel_lo: 1e-9,
            rel_hi: 1e-9,
        }
    }
}

impl EnergyClamp {
    /// Admissible closed energy interval for `p`.
    pub fn band(&self, p: &ModelParams) -> (f64, f64) {
        let c_min = p.derive_constants().c_min;
        let scale = c_min.abs();
        (c_min + self.rel_lo * scale, -self.rel_hi * scale)
    }

    fn check(&self, c: f64, p: &ModelParams) -> Result<()> {
        let (lo, hi) = self.band(p);
        if c >= lo && c <= hi {
            Ok(())
        } else {
            Err(Error::EnergyOutOfBand { c, lo, hi })
        }
    }
}

const ROOT_TOL: Tolerance = Tolerance {
    rel: 1e-13,
    abs: 0.0,
    max_iter: 300,
};

/// Inner and outer turning points `a < x_star < b` with `G(a) = G(b) = c`.
pub fn turning_points(c: f64, p: &ModelParams) -> Result<(f64, f64)> {
    turning_points_clamped(c, p, &EnergyClamp::default())
}

pub fn turning_points_clamped(c: f64, p: &ModelParams, clamp: &EnergyClamp) -> Result<(f64, f64)> {
    clamp.check(c, p)?;
    let x_star = p.x_star();
    let g = |x: f64| Ok(p.phi_potential(x) - c);

    // G < c at x_star; halve toward 0 until G > c
    let mut inner = x_star;
    let mut lo = 0.5 * x_star;
    while p.phi_potential(lo) <= c {
        inner = lo;
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Bracket(format!(
                "inner turning point for c = {c} below f64 range"
            )));
        }
    }
    let a = brent(g, lo, inner, ROOT_TOL)?;

    let mut outer = x_star;
    let mut hi = 2.0 * x_star;
    while p.phi_potential(hi) <= c {
        outer = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Bracket(format!(
                "outer turning point for c = {c} not bracketed"
            )));
        }
    }
    let b = brent(g, outer, hi, ROOT_TOL)?;
    Ok((a, b))
}

/// Period `T(c)` by the sine-substituted quadrature at the default
/// relative tolerance.
pub fn period_quadrature(c: f64, p: &ModelParams) -> Result<OrbitSpec> {
    period_quadrature_with(c, p, &EnergyClamp::default(), QuadratureConfig::default())
}

pub fn period_quadrature_with(
    c: f64,
    p: &ModelParams,
    clamp: &EnergyClamp,
    cfg: QuadratureConfig,
) -> Result<OrbitSpec> {
    let (a, b) = turning_points_clamped(c, p, clamp)?;
    let half = 0.5 * (b - a);

    // On the upper half c - G(u) = (b - u) G[u, b] with b - u = half (1 - sin θ),
    // computed as half cos²θ / (1 + sin θ) so it keeps full precision at θ → π/2,
    // so half cos θ / √(c - G(u)) = √(half (1 + sin θ) / G[u, b]); the lower
    // half mirrors this with G[a, u]. No cancellation near the turning points
    // or near the centre.
    let integrand = |theta: f64| {
        let (s, co) = theta.sin_cos();
        if s >= 0.0 {
            let gap = half * co * co / (1.0 + s);
            (half * (1.0 + s) / p.potential_divided_difference(b - gap, gap)).sqrt()
        } else {
            let gap = half * co * co / (1.0 - s);
            (half * (1.0 - s) / -p.potential_divided_difference(a, gap)).sqrt()
        }
    };
    // the divided differences lose about log10(x_star / half) digits on
    // tiny orbits; never ask for more than that leaves
    let noise = 16.0 * f64::EPSILON * p.x_star() / half;
    let cfg = QuadratureConfig {
        rel_tol: cfg.rel_tol.max(noise),
        ..cfg
    };
    let q = integrate(integrand, -FRAC_PI_2, FRAC_PI_2, cfg)?;
    Ok(OrbitSpec {
        c,
        a,
        b,
        period: std::f64::consts::SQRT_2 * q.value,
    })
}

/// Period of every energy in `grid`, in grid order. Failures are kept per
/// entry.
pub fn period_scan(grid: &[f64], p: &ModelParams) -> Vec<Result<OrbitSpec>> {
    grid.par_iter().map(|&c| period_quadrature(c, p)).collect()
}

impl ModelParams {
    /// `(G(x + d) - G(x)) / d` for `d > 0`, evaluated without subtracting
    /// nearly equal potentials.
    pub(crate) fn potential_divided_difference(&self, x: f64, d: f64) -> f64 {
        let (lin, pow, e) = self.potential_coefficients();
        let pow_dd = if e == 1.0 {
            1.0
        } else {
            x.powf(e) * (e * (d / x).ln_1p()).exp_m1() / d
        };
        lin * (2.0 * x + d) - pow * pow_dd
    }
}

/// `count` energies log-spaced in `c - c_min` across `[lo, hi]`
/// (default: the clamped admissible band).
pub fn log_energy_grid(p: &ModelParams, count: usize, band: Option<(f64, f64)>) -> Vec<f64> {
    let c_min = p.derive_constants().c_min;
    let (lo, hi) = band.unwrap_or_else(|| EnergyClamp::default().band(p));
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = ((lo - c_min).ln(), (hi - c_min).ln());
            (0..count)
                .map(|i| {
                    let w = i as f64 / (count - 1) as f64;
                    (c_min + (l0 + w * (l1 - l0)).exp()).clamp(lo, hi)
                })
                .collect()
        }
    }
}

/// Energy at fraction `s ∈ (0, 1)` of the way from `c_min` to `0`.
pub fn energy_at_fraction(p: &ModelParams, s: f64) -> f64 {
    let c_min = p.derive_constants().c_min;
    c_min * (1.0 - s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(n: u32, r: f64, rt: f64) -> ModelParams {
        ModelParams::new(n, r, rt).unwrap()
    }

    #[test]
    fn turning_points_solve_potential_level() {
        let q = p(3, 2.0, 2.0);
        let (a, b) = turning_points(-0.5, &q).unwrap();
        assert!(0.0 < a && a < 1.0 && 1.0 < b);
        assert!((q.potential(a).unwrap() + 0.5).abs() < 1e-12);
        assert!((q.potential(b).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn turning_points_agree_with_dense_scan() {
        // independent sign-change scan over (1e-6, 10)
        let q = p(3, 2.0, 2.0);
        let c = -0.5;
        let (a, b) = turning_points(c, &q).unwrap();
        let m = 1_000_000;
        let xs = |i: usize| 1e-6 + (10.0 - 1e-6) * i as f64 / m as f64;
        let mut roots = Vec::new();
        let mut prev = q.phi_potential(xs(0)) - c;
        for i in 1..=m {
            let cur = q.phi_potential(xs(i)) - c;
            if prev.signum() != cur.signum() {
                roots.push(0.5 * (xs(i - 1) + xs(i)));
            }
            prev = cur;
        }
        assert_eq!(roots.len(), 2);
        let cell = 10.0 / m as f64;
        assert!((roots[0] - a).abs() < cell && (roots[1] - b).abs() < cell);
    }

    #[test]
    fn linear_case_turning_points() {
        let q = p(4, 3.0, 3.0);
        for amp in [0.1, 0.5, 0.9] {
            let c = q.potential(1.0).unwrap() + 3.0 * amp * amp / 6.0;
            let (a, b) = turning_points(c, &q).unwrap();
            assert!((a - (1.0 - amp)).abs() < 1e-12, "{a}");
            assert!((b - (1.0 + amp)).abs() < 1e-12, "{b}");
        }
    }

    #[test]
    fn shrinking_orbit_near_center() {
        let q = p(5, 2.0, 2.0);
        let c_min = q.derive_constants().c_min;
        let mut prev = f64::INFINITY;
        for k in 2..9 {
            let dc = 10f64.powi(-k) * c_min.abs();
            let (a, b) = turning_points(c_min + dc, &q).unwrap();
            assert!(b - a < prev);
            prev = b - a;
            assert!((0.5 * (a + b) - 1.0).abs() < 10.0 * dc.sqrt());
        }
    }

    #[test]
    fn out_of_band_energies_are_rejected() {
        let q = p(3, 2.0, 2.0);
        for c in [-0.75, -0.8, 0.0, 0.1, -1e-12] {
            assert!(matches!(
                turning_points(c, &q),
                Err(Error::EnergyOutOfBand { .. })
            ));
            assert!(matches!(
                period_quadrature(c, &q),
                Err(Error::EnergyOutOfBand { .. })
            ));
        }
    }

    #[test]
    fn simple_turning_points() {
        for n in [3, 4, 5, 8] {
            let q = p(n, 2.0, 2.0);
            for c in log_energy_grid(&q, 20, None) {
                let (a, b) = turning_points(c, &q).unwrap();
                assert!(a < q.x_star() && q.x_star() < b);
                assert!(q.phi(a) < 0.0 && q.phi(b) > 0.0);
            }
        }
    }

    #[test]
    fn small_amplitude_limit() {
        let q = p(3, 2.0, 2.0);
        let c_min = q.derive_constants().c_min;
        let o = period_quadrature(c_min + 1e-6 * c_min.abs(), &q).unwrap();
        assert!(
            (o.period - 2.0 * PI).abs() < 1e-6 * 2.0 * PI,
            "{}",
            o.period
        );
    }

    #[test]
    fn n4_is_isochronous() {
        let q = p(4, 3.0, 3.0);
        for c in log_energy_grid(&q, 25, None) {
            let o = period_quadrature(c, &q).unwrap();
            assert!(
                (o.period - 2.0 * PI).abs() < 1e-10 * 2.0 * PI,
                "{c} {}",
                o.period
            );
        }
    }

    #[test]
    fn critical_limit_is_finite() {
        // near c = 0 the orbit reaches x ≈ 0 in finite time; T stays bounded
        let t0 = |q: &ModelParams| q.threshold_period();
        let q = p(5, 2.0, 2.0);
        let c_min = q.derive_constants().c_min;
        let o = period_quadrature(-1e-6 * c_min.abs(), &q).unwrap();
        assert!(
            o.period > 1.1 * t0(&q) && o.period < 1.2 * t0(&q),
            "{}",
            o.period / t0(&q)
        );
        let q3 = p(3, 2.0, 2.0);
        let o3 = period_quadrature(-1e-6 * 0.75, &q3).unwrap();
        assert!(o3.period < t0(&q3) && o3.period > 0.8 * t0(&q3));
    }

    #[test]
    fn empty_scan() {
        assert!(period_scan(&[], &p(3, 2.0, 2.0)).is_empty());
    }

    #[test]
    fn scan_keeps_order_and_errors() {
        let q = p(6, 2.0, 2.0);
        let grid = vec![-0.1, 0.5, -0.05];
        let out = period_scan(&grid, &q);
        assert_eq!(out[0].as_ref().unwrap().c, -0.1);
        assert!(out[1].is_err());
        assert_eq!(out[2].as_ref().unwrap().c, -0.05);
    }

    #[test]
    fn leading_order_flatness_near_center() {
        // (T(c) - T0) / (c - c_min) tends to a finite limit
        let q = p(5, 2.0, 2.0);
        let d = q.derive_constants();
        let band = (
            d.c_min + 1e-7 * d.c_min.abs(),
            d.c_min + 1e-2 * d.c_min.abs(),
        );
        let grid = log_energy_grid(&q, 100, Some(band));
        let slopes: Vec<f64> = period_scan(&grid, &q)
            .into_iter()
            .map(|o| {
                let o = o.unwrap();
                (o.period - d.t0) / (o.c - d.c_min)
            })
            .collect();
        let last = *slopes.last().unwrap();
        let tail = &slopes[60..];
        for s in tail {
            assert!((s - last).abs() < 0.05 * last.abs(), "{s} {last}");
        }
        assert!(last.is_finite() && last > 0.0);
    }
}
