//! Time stepping for `x' = v, v' = -φ(x)`.
//!
//! Two schemes live here: the kick-drift-kick leapfrog, which is
//! symplectic and reversible and is what long runs should use, and an
//! embedded Dormand–Prince 5(4) pair with dense output, used where a state
//! has to be located precisely (section crossings, uniform sampling).

use crate::error::{Error, Result};
use crate::model::{ModelParams, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Base step; the initial step of the adaptive scheme.
    pub dt: f64,
    /// Relative tolerance of the adaptive scheme.
    pub tol: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, tol: f64, max_steps: usize) -> Result<Self> {
        let cfg = IntegratorConfig { dt, tol, max_steps };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults scaled to the linear period of `p`.
    pub fn for_params(p: &ModelParams) -> Self {
        IntegratorConfig {
            dt: p.threshold_period() / 200.0,
            tol: 1e-13,
            max_steps: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain(format!(
                "step dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1e-3) {
            return Err(Error::Domain(format!(
                "tolerance {} outside (0, 1e-3)",
                self.tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// One leapfrog step (half kick, drift, half kick). Negative `dt` runs the
/// step backwards and undoes a forward step up to rounding.
pub fn step_symplectic(s: PhaseState, dt: f64, p: &ModelParams) -> Result<PhaseState> {
    if !(s.x > 0.0) {
        return Err(Error::PositivityViolation { t: s.t, x: s.x });
    }
    let v_half = s.v - 0.5 * dt * p.phi(s.x);
    let x = s.x + dt * v_half;
    if !(x > 0.0) {
        return Err(Error::PositivityViolation { t: s.t + dt, x });
    }
    let v = v_half - 0.5 * dt * p.phi(x);
    Ok(PhaseState { t: s.t + dt, x, v })
}

/// Runs `steps` leapfrog steps, calling `visit` after each.
pub fn leapfrog<V>(
    s0: PhaseState,
    dt: f64,
    steps: usize,
    p: &ModelParams,
    mut visit: V,
) -> Result<PhaseState>
where
    V: FnMut(&PhaseState),
{
    let mut s = s0;
    for _ in 0..steps {
        s = step_symplectic(s, dt, p)?;
        visit(&s);
    }
    Ok(s)
}

/// Which way `v` must cross zero to count as a section hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// `v` goes from negative to non-negative: a minimum of `x`.
    Upward,
    /// `v` goes from positive to non-positive: a maximum of `x`.
    Downward,
}

impl Crossing {
    fn hit(self, v0: f64, v1: f64) -> bool {
        match self {
            Crossing::Upward => v0 < 0.0 && v1 >= 0.0,
            Crossing::Downward => v0 > 0.0 && v1 <= 0.0,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type Vec2 = [f64; 2];

#[inline]
fn axpy(y: Vec2, terms: &[(f64, Vec2)], h: f64) -> Vec2 {
    let mut out = y;
    for (a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// Result of one attempted Dormand–Prince step.
struct Trial {
    y1: Vec2,
    k7: Vec2,
    err: f64,
    cont: [Vec2; 5],
}

/// Adaptive Dormand–Prince integrator of the reduced equation.
pub(crate) struct Dopri<'a> {
    p: &'a ModelParams,
    rtol: f64,
    scale: Vec2,
}

impl<'a> Dopri<'a> {
    pub(crate) fn new(p: &'a ModelParams, rtol: f64) -> Self {
        let x_star = p.x_star();
        let omega = p.linearized_frequency();
        Dopri {
            p,
            rtol,
            // x is kept relative: near-critical orbits pass within 1e-8 x_star
            // of the singular end, where an absolute floor hides the error
            scale: [0.0, omega * x_star],
        }
    }

    #[inline]
    fn rhs(&self, y: Vec2) -> Option<Vec2> {
        if y[0] > 0.0 {
            Some([y[1], -self.p.phi(y[0])])
        } else {
            None
        }
    }

    /// One step of size `h` from `y` with `k1 = rhs(y)`. `None` if a stage
    /// leaves `x > 0`.
    fn attempt(&self, y: Vec2, k1: Vec2, h: f64) -> Option<Trial> {
        let k2 = self.rhs(axpy(y, &[(A21, k1)], h))?;
        let k3 = self.rhs(axpy(y, &[(A31, k1), (A32, k2)], h))?;
        let k4 = self.rhs(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h))?;
        let k5 = self.rhs(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h))?;
        let k6 = self.rhs(axpy(
            y,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            h,
        ))?;
        let y1 = axpy(
            y,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
            h,
        );
        let k7 = self.rhs(y1)?;

        let mut err = 0.0f64;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.rtol * (self.scale[i] + y[i].abs().max(y1[i].abs()));
            err = err.max((e / sc).abs());
        }

        let mut cont = [[0.0; 2]; 5];
        for i in 0..2 {
            let dy = y1[i] - y[i];
            let bspl = h * k1[i] - dy;
            cont[0][i] = y[i];
            cont[1][i] = dy;
            cont[2][i] = bspl;
            cont[3][i] = dy - h * k7[i] - bspl;
            cont[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Some(Trial { y1, k7, err, cont })
    }

    /// Single fixed step of size `h` (no error control), for polishing.
    fn single(&self, y: Vec2, h: f64) -> Option<Vec2> {
        let k1 = self.rhs(y)?;
        Some(self.attempt(y, k1, h)?.y1)
    }

    /// Advances from `s0` by accepted adaptive steps, never stepping past
    /// `t_stop`. `on_step(t0, y0, t1, y1, cont)` may stop the march by
    /// returning `true`.
    fn march<F>(
        &self,
        s0: PhaseState,
        t_stop: f64,
        h0: f64,
        h_max: f64,
        max_steps: usize,
        mut on_step: F,
    ) -> Result<PhaseState>
    where
        F: FnMut(f64, Vec2, f64, Vec2, &[Vec2; 5]) -> Result<bool>,
    {
        let mut t = s0.t;
        let mut y = [s0.x, s0.v];
        let mut k1 = self
            .rhs(y)
            .ok_or(Error::PositivityViolation { t, x: y[0] })?;
        let mut h = h0.min(h_max);
        let h_min = 1e-14 * (h_max + t.abs());
        let mut steps = 0usize;
        while t < t_stop {
            if steps >= max_steps {
                return Err(Error::BudgetExceeded { max_steps, t });
            }
            steps += 1;
            let last = t + h >= t_stop;
            let h_try = if last { t_stop - t } else { h };
            match self.attempt(y, k1, h_try) {
                None => {
                    if h_try < h_min {
                        return Err(Error::PositivityViolation { t, x: y[0] });
                    }
                    h = 0.25 * h_try;
                }
                Some(trial) if trial.err <= 1.0 => {
                    let t1 = if last { t_stop } else { t + h_try };
                    let stop = on_step(t, y, t1, trial.y1, &trial.cont)?;
                    t = t1;
                    y = trial.y1;
                    k1 = trial.k7;
                    let fac = (0.9 * trial.err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                    h = (h_try * fac).min(h_max);
                    if stop {
                        break;
                    }
                }
                Some(trial) => {
                    if h_try < h_min {
                        return Err(Error::PositivityViolation { t, x: y[0] });
                    }
                    let fac = (0.9 * trial.err.powf(-0.2)).clamp(0.1, 0.9);
                    h = h_try * fac;
                }
            }
        }
        Ok(PhaseState {
            t,
            x: y[0],
            v: y[1],
        })
    }

    /// Integrates from `s0` to `s0.t + duration`, returning the states at
    /// `s0.t + offsets[i]` (offsets increasing, within the span) and the end state.
    pub(crate) fn sample(
        &self,
        s0: PhaseState,
        duration: f64,
        offsets: &[f64],
        cfg: &IntegratorConfig,
    ) -> Result<(Vec<PhaseState>, PhaseState)> {
        let mut out = Vec::with_capacity(offsets.len());
        let mut next = 0usize;
        let mut cursor = s0;
        let h_max = self.p.threshold_period() / 32.0;
        // each sample time becomes a step boundary so samples carry the full
        // step accuracy rather than the interpolant's
        let mut targets: Vec<f64> = offsets.iter().map(|o| s0.t + o).collect();
        targets.push(s0.t + duration);
        for &target in &targets {
            if target > cursor.t {
                cursor = self.march(
                    cursor,
                    target,
                    cfg.dt,
                    h_max,
                    cfg.max_steps,
                    |_, _, _, _, _| Ok(false),
                )?;
                cursor.t = target;
            }
            if next < offsets.len() {
                out.push(cursor);
                next += 1;
            }
        }
        Ok((out, cursor))
    }
}

/// Evaluates the dense-output polynomial at fraction `theta` of the step.
fn dense(cont: &[Vec2; 5], theta: f64, i: usize) -> f64 {
    let t1 = 1.0 - theta;
    cont[0][i] + theta * (cont[1][i] + t1 * (cont[2][i] + theta * (cont[3][i] + t1 * cont[4][i])))
}

/// Integrates from `s0` until `v` next crosses zero in the given direction.
/// A start exactly on the section does not count as a crossing. Returns
/// the crossing state and the elapsed time.
pub fn integrate_until_section(
    s0: PhaseState,
    direction: Crossing,
    cfg: &IntegratorConfig,
    p: &ModelParams,
) -> Result<(PhaseState, f64)> {
    cfg.validate()?;
    if !(s0.x > 0.0) {
        return Err(Error::PositivityViolation { t: s0.t, x: s0.x });
    }
    let d = p.derive_constants();
    let omega = p.linearized_frequency();
    let c = p.energy(&s0)?;
    if c - d.c_min <= 1e-14 * d.c_min.abs() {
        return Err(Error::Equilibrium);
    }

    let dop = Dopri::new(p, cfg.tol);
    let h_max = d.t0 / 32.0;
    let mut found: Option<(f64, Vec2, f64, f64)> = None;
    let t_stop = f64::INFINITY;
    dop.march(
        s0,
        t_stop,
        cfg.dt,
        h_max,
        cfg.max_steps,
        |t0, y0, t1, y1, cont| {
            if direction.hit(y0[1], y1[1]) {
                // bracket the zero of the interpolated v on [0, 1]
                let mut lo = 0.0;
                let mut hi = 1.0;
                let v_at = |th: f64| dense(cont, th, 1);
                let sign_lo = v_at(lo).signum();
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if v_at(mid).signum() == sign_lo && v_at(mid) != 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let guess = t0 + 0.5 * (lo + hi) * (t1 - t0);
                found = Some((t0, y0, t1, guess));
                return Ok(true);
            }
            Ok(false)
        },
    )?;

    let (t0, y0, t1, guess) = found.ok_or(Error::BudgetExceeded {
        max_steps: cfg.max_steps,
        t: s0.t,
    })?;

    // polish on the exact one-step map from the accepted step start
    let h_full = t1 - t0;
    let v_after = |tau: f64| -> Result<f64> {
        dop.single(y0, tau)
            .map(|y| y[1])
            .ok_or(Error::PositivityViolation {
                t: t0 + tau,
                x: y0[0],
            })
    };
    let mut a = guess - t0;
    let mut b = a * (1.0 - 1e-7) + 1e-9 * h_full;
    let mut va = v_after(a)?;
    let mut vb = v_after(b)?;
    for _ in 0..8 {
        if va == vb {
            break;
        }
        let next = b - vb * (b - a) / (vb - va);
        if !next.is_finite() {
            break;
        }
        a = b;
        va = vb;
        b = next.clamp(0.0, h_full);
        vb = v_after(b)?;
        if vb == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * h_full {
            break;
        }
    }
    let y = dop.single(y0, b).ok_or(Error::PositivityViolation {
        t: t0 + b,
        x: y0[0],
    })?;
    let state = PhaseState {
        t: t0 + b,
        x: y[0],
        v: y[1],
    };
    let v_tol = cfg.tol * (state.x.abs() * omega).max(1.0);
    if state.v.abs() > v_tol {
        return Err(Error::BudgetExceeded {
            max_steps: cfg.max_steps,
            t: state.t,
        });
    }
    Ok((state, state.t - s0.t))
}

/// Adaptive integration of `duration` from `s0`, sampling at `s0.t + offsets[i]`.
/// Returns the samples and the final state.
pub fn integrate_sampled(
    s0: PhaseState,
    duration: f64,
    offsets: &[f64],
    cfg: &IntegratorConfig,
    p: &ModelParams,
) -> Result<(Vec<PhaseState>, PhaseState)> {
    cfg.validate()?;
    if !(s0.x > 0.0) {
        return Err(Error::PositivityViolation { t: s0.t, x: s0.x });
    }
    Dopri::new(p, cfg.tol).sample(s0, duration, offsets, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32, r: f64, rt: f64) -> ModelParams {
        ModelParams::new(n, r, rt).unwrap()
    }

    #[test]
    fn equilibrium_is_fixed() {
        let q = p(3, 2.0, 2.0);
        let s = step_symplectic(PhaseState::new(0.0, 1.0, 0.0), 0.37, &q).unwrap();
        assert_eq!(s.x, 1.0);
        assert_eq!(s.v, 0.0);
        assert_eq!(s.t, 0.37);
    }

    #[test]
    fn leapfrog_recovers_linear_solution() {
        // n = 4, R = Rt = 3: x(t) = 1 + 0.5 cos t
        let q = p(4, 3.0, 3.0);
        let t0 = q.threshold_period();
        let steps = 2000;
        let dt = t0 / steps as f64;
        let mut worst = 0.0f64;
        leapfrog(PhaseState::new(0.0, 1.5, 0.0), dt, steps, &q, |s| {
            worst = worst.max((s.x - (1.0 + 0.5 * s.t.cos())).abs());
        })
        .unwrap();
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn positivity_violation_on_huge_step() {
        let q = p(3, 2.0, 2.0);
        let r = step_symplectic(PhaseState::new(0.0, 0.2, -3.0), 1.0, &q);
        assert!(matches!(r, Err(Error::PositivityViolation { .. })));
    }

    #[test]
    fn step_is_reversible() {
        let q = p(5, 1.0, 2.0);
        let s = PhaseState::new(0.0, 0.7, 0.3);
        let f = step_symplectic(s, 0.05, &q).unwrap();
        let b = step_symplectic(f, -0.05, &q).unwrap();
        assert!((b.x - s.x).abs() < 1e-15 && (b.v - s.v).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.0, 1e-8, 10).is_err());
        assert!(IntegratorConfig::new(0.1, 1e-2, 10).is_err());
        assert!(IntegratorConfig::new(0.1, 1e-8, 0).is_err());
        assert!(IntegratorConfig::new(0.1, 1e-8, 1).is_ok());
    }

    #[test]
    fn isochronous_return_time() {
        let q = p(4, 3.0, 3.0);
        let cfg = IntegratorConfig::for_params(&q);
        for amp in [0.01, 0.3, 0.8] {
            let (s, elapsed) = integrate_until_section(
                PhaseState::new(0.0, 1.0 - amp, 0.0),
                Crossing::Upward,
                &cfg,
                &q,
            )
            .unwrap();
            assert!(
                (elapsed - q.threshold_period()).abs() < 1e-8 * elapsed,
                "{amp} {elapsed}"
            );
            assert!((s.x - (1.0 - amp)).abs() < 1e-9);
        }
    }

    #[test]
    fn half_period_to_outer_turning_point() {
        let q = p(4, 3.0, 3.0);
        let cfg = IntegratorConfig::for_params(&q);
        let (s, elapsed) =
            integrate_until_section(PhaseState::new(0.0, 0.6, 0.0), Crossing::Downward, &cfg, &q)
                .unwrap();
        assert!((elapsed - std::f64::consts::PI).abs() < 1e-9);
        assert!((s.x - 1.4).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_start_is_rejected() {
        let q = p(3, 2.0, 2.0);
        let cfg = IntegratorConfig::for_params(&q);
        let r = integrate_until_section(PhaseState::new(0.0, 1.0, 0.0), Crossing::Upward, &cfg, &q);
        assert_eq!(r.unwrap_err(), Error::Equilibrium);
    }

    #[test]
    fn sampled_integration_matches_closed_form() {
        let q = p(4, 3.0, 3.0);
        let cfg = IntegratorConfig {
            tol: 1e-12,
            ..IntegratorConfig::for_params(&q)
        };
        let offsets: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let (samples, end) =
            integrate_sampled(PhaseState::new(0.0, 1.5, 0.0), 7.0, &offsets, &cfg, &q).unwrap();
        for s in &samples {
            assert!((s.x - (1.0 + 0.5 * s.t.cos())).abs() < 1e-10);
            assert!((s.v + 0.5 * s.t.sin()).abs() < 1e-10);
        }
        assert_eq!(end.t, 7.0);
        assert!((end.x - (1.0 + 0.5 * 7f64.cos())).abs() < 1e-10);
    }

    #[test]
    fn dense_output_converges_at_high_order() {
        // local interpolation error is O(h^5): halving h cuts it ~32x
        let q = p(4, 3.0, 3.0);
        let dop = Dopri::new(&q, 1e-10);
        let y0 = [1.5, 0.0];
        let k1 = dop.rhs(y0).unwrap();
        let worst = |h: f64| {
            let trial = dop.attempt(y0, k1, h).unwrap();
            let mut w = 0.0f64;
            for th in [0.1, 0.37, 0.5, 0.9] {
                let t: f64 = th * h;
                w = w.max((dense(&trial.cont, th, 0) - (1.0 + 0.5 * t.cos())).abs());
                w = w.max((dense(&trial.cont, th, 1) + 0.5 * t.sin()).abs());
            }
            w
        };
        let (e1, e2) = (worst(0.2), worst(0.1));
        assert!(e1 < 1e-7, "{e1}");
        assert!(e1 / e2 > 20.0, "{e1} {e2}");
    }
}
