//! Shooting on the energy for a prescribed minimal period, and the
//! residual audit of the resulting profile.
//!
//! The period function is tabulated once over the clamped energy band;
//! sign changes of `T(c) - T` in the table give brackets, refined with a
//! safeguarded root finder on the quadrature period. `T(c)` is not assumed
//! monotone: every bracket is counted and the lowest-energy root is used.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate_sampled, IntegratorConfig};
use crate::model::{ModelParams, PhaseState};
use crate::period::{energy_at_fraction, period_quadrature, EnergyClamp, OrbitSpec};
use crate::roots::{brent, Tolerance};
use crate::spectral::spectral_derivatives;

/// Relative spread of the tabulated periods below which `T(c)` is treated
/// as constant.
const ISOCHRONY_TOL: f64 = 1e-9;

/// `T(c)` sampled across the clamped band, clustered toward both ends.
#[derive(Debug, Clone)]
pub struct PeriodTable {
    params: ModelParams,
    orbits: Vec<OrbitSpec>,
}

impl PeriodTable {
    pub fn build(p: &ModelParams) -> Result<Self> {
        let clamp = EnergyClamp::default();
        let mut fractions = Vec::new();
        let edge = 12;
        for i in 0..edge {
            // 1e-9 .. 5e-2, log-spaced
            let w = i as f64 / edge as f64;
            fractions.push((clamp.rel_lo.ln() + w * (0.05f64.ln() - clamp.rel_lo.ln())).exp());
        }
        let middle = 40;
        for i in 0..=middle {
            fractions.push(0.05 + 0.9 * i as f64 / middle as f64);
        }
        for i in (0..edge).rev() {
            let w = i as f64 / edge as f64;
            fractions
                .push(1.0 - (clamp.rel_hi.ln() + w * (0.05f64.ln() - clamp.rel_hi.ln())).exp());
        }
        let (lo, hi) = clamp.band(p);
        let energies: Vec<f64> = fractions
            .iter()
            .map(|&s| energy_at_fraction(p, s).clamp(lo, hi))
            .collect();
        let orbits = energies
            .par_iter()
            .map(|&c| period_quadrature(c, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(PeriodTable { params: *p, orbits })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn orbits(&self) -> &[OrbitSpec] {
        &self.orbits
    }

    /// Smallest and largest tabulated period.
    pub fn range(&self) -> (f64, f64) {
        self.orbits
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
                (lo.min(o.period), hi.max(o.period))
            })
    }

    pub fn is_isochronous(&self) -> bool {
        let (lo, hi) = self.range();
        (hi - lo) <= ISOCHRONY_TOL * lo
    }

    /// Whether `period` lies strictly inside the attainable range.
    pub fn attains(&self, period: f64) -> bool {
        let (lo, hi) = self.range();
        !self.is_isochronous() && period > lo && period < hi
    }

    /// Adjacent table entries whose periods straddle `period`.
    pub fn brackets(&self, period: f64) -> Vec<(OrbitSpec, OrbitSpec)> {
        if self.is_isochronous() {
            return Vec::new();
        }
        self.orbits
            .windows(2)
            .filter(|w| {
                let (d0, d1) = (w[0].period - period, w[1].period - period);
                d0 == 0.0 || d0.signum() != d1.signum()
            })
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Energy whose orbit has minimal period `period`.
    pub fn solve_energy(&self, period: f64) -> Result<EnergySolution> {
        let brackets = self.brackets(period);
        let Some(&(lo, hi)) = brackets.first() else {
            let (t_min, t_max) = self.range();
            let note = if self.is_isochronous() {
                " (T(c) is constant: T(c) ≡ T0)".to_string()
            } else {
                String::new()
            };
            return Err(Error::NoBracket {
                period,
                t_min,
                t_max,
                note,
            });
        };
        let p = self.params;
        let scale = p.derive_constants().c_min.abs();
        let tol = Tolerance {
            rel: 0.0,
            abs: 1e-15 * scale,
            max_iter: 200,
        };
        let c = brent(
            |c| Ok(period_quadrature(c, &p)?.period - period),
            lo.c,
            hi.c,
            tol,
        )?;
        Ok(EnergySolution {
            orbit: period_quadrature(c, &p)?,
            roots: brackets.len(),
        })
    }
}

/// Orbit found for a target period, with the number of bracketed roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySolution {
    pub orbit: OrbitSpec,
    pub roots: usize,
}

/// One sample `(t, x, v, f, f', f'')` of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

impl From<[f64; 6]> for Sample {
    fn from(a: [f64; 6]) -> Self {
        Sample {
            t: a[0],
            x: a[1],
            v: a[2],
            f: a[3],
            fp: a[4],
            fpp: a[5],
        }
    }
}

impl From<Sample> for [f64; 6] {
    fn from(s: Sample) -> Self {
        [s.t, s.x, s.v, s.f, s.fp, s.fpp]
    }
}

/// A periodic solution sampled at `t_i = i T / M`, `i < M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub params: ModelParams,
    #[serde(rename = "T")]
    pub period: f64,
    pub c: f64,
    pub samples: Vec<Sample>,
    pub residual_sup: f64,
    pub closure_error: f64,
    /// Number of energy brackets whose orbit has this period.
    #[serde(default = "one")]
    pub bracketed_roots: usize,
}

fn one() -> usize {
    1
}

impl SolutionProfile {
    /// The constant solution `f ≡ f_star`, sampled like a solved profile.
    pub fn constant(p: &ModelParams, period: f64, n_samples: usize) -> Self {
        let d = p.derive_constants();
        let samples = (0..n_samples)
            .map(|i| Sample {
                t: period * i as f64 / n_samples as f64,
                x: d.x_star,
                v: 0.0,
                f: d.f_star,
                fp: 0.0,
                fpp: 0.0,
            })
            .collect();
        SolutionProfile {
            params: *p,
            period,
            c: d.c_min,
            samples,
            residual_sup: p.residual_e(d.f_star, 0.0, 0.0).abs(),
            closure_error: 0.0,
            bracketed_roots: 1,
        }
    }

    /// Same solution started `offset` samples later.
    pub fn rotated(&self, offset: usize) -> Self {
        let m = self.samples.len();
        let mut samples: Vec<Sample> = (0..m).map(|i| self.samples[(i + offset) % m]).collect();
        for (i, s) in samples.iter_mut().enumerate() {
            s.t = self.period * i as f64 / m as f64;
        }
        SolutionProfile {
            samples,
            ..self.clone()
        }
    }

    pub fn min_f(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.f)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_f(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.f)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of sign changes of `v` around the closed sample loop.
    pub fn velocity_sign_changes(&self) -> usize {
        let signs: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.v != 0.0)
            .map(|s| s.v.signum())
            .collect();
        if signs.is_empty() {
            return 0;
        }
        (0..signs.len())
            .filter(|&i| signs[i] != signs[(i + 1) % signs.len()])
            .count()
    }
}

/// Residual and closure limits a solve must meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveTolerances {
    /// Relative to `R`.
    pub residual: f64,
    /// Relative to `x_star`.
    pub closure: f64,
}

impl Default for SolveTolerances {
    fn default() -> Self {
        SolveTolerances {
            residual: 1e-8,
            closure: 1e-8,
        }
    }
}

/// Positive non-constant solution of minimal period `period`.
pub fn solve_period(period: f64, p: &ModelParams, n_samples: usize) -> Result<SolutionProfile> {
    check_samples(n_samples)?;
    let t0 = p.threshold_period();
    if !(period > t0 * (1.0 + 1e-9)) {
        return Err(Error::ThresholdViolation { period, t0 });
    }
    let table = PeriodTable::build(p)?;
    solve_period_with_table(period, &table, n_samples)
}

/// As [`solve_period`] with a prebuilt table and without the threshold
/// gate: any period the band attains is solved.
pub fn solve_period_with_table(
    period: f64,
    table: &PeriodTable,
    n_samples: usize,
) -> Result<SolutionProfile> {
    check_samples(n_samples)?;
    let sol = table.solve_energy(period)?;
    let mut prof = sample_orbit(
        &sol.orbit,
        table.params(),
        n_samples,
        SolveTolerances::default(),
    )?;
    prof.bracketed_roots = sol.roots;
    Ok(prof)
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < 16 {
        return Err(Error::TooFewSamples {
            got: n_samples,
            need: 16,
        });
    }
    Ok(())
}

/// Integrates one period of `orbit` from its inner turning point and
/// samples it uniformly.
pub fn sample_orbit(
    orbit: &OrbitSpec,
    p: &ModelParams,
    n_samples: usize,
    tol: SolveTolerances,
) -> Result<SolutionProfile> {
    check_samples(n_samples)?;
    let period = orbit.period;
    let x_star = p.x_star();
    let omega = p.linearized_frequency();
    let cfg = IntegratorConfig {
        dt: p.threshold_period() / 400.0,
        tol: 1e-13,
        max_steps: 10_000_000,
    };
    let offsets: Vec<f64> = (0..n_samples)
        .map(|i| period * i as f64 / n_samples as f64)
        .collect();
    let start = PhaseState::new(0.0, orbit.a, 0.0);
    let (states, end) = integrate_sampled(start, period, &offsets, &cfg, p)?;

    let samples: Vec<Sample> = states
        .iter()
        .map(|s| {
            let j = p.jet(s.x, s.v);
            Sample {
                t: s.t,
                x: s.x,
                v: s.v,
                f: j.f,
                fp: j.fp,
                fpp: j.fpp,
            }
        })
        .collect();
    let residual_sup = samples
        .iter()
        .map(|s| p.residual_e(s.f, s.fp, s.fpp).abs())
        .fold(0.0, f64::max);
    let closure_error = ((end.x - orbit.a) / x_star).hypot(end.v / (omega * x_star));

    let r = p.fiber_curvature();
    if residual_sup > tol.residual * r {
        return Err(Error::ToleranceBreach {
            what: "residual_sup",
            value: residual_sup,
            limit: tol.residual * r,
        });
    }
    if closure_error > tol.closure {
        return Err(Error::ToleranceBreach {
            what: "closure_error",
            value: closure_error,
            limit: tol.closure,
        });
    }
    if let Some((i, s)) = samples.iter().enumerate().find(|(_, s)| !(s.f > 0.0)) {
        return Err(Error::NonPositiveWarp {
            index: i,
            value: s.f,
        });
    }
    Ok(SolutionProfile {
        params: *p,
        period,
        c: orbit.c,
        samples,
        residual_sup,
        closure_error,
        bracketed_roots: 1,
    })
}

/// Limits used by [`audit_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditTolerances {
    /// Chain-rule residual, relative to `R`.
    pub chain_rule: f64,
    /// Residual from spectral derivatives of `f`, relative to `R`.
    pub spectral: f64,
    /// Energy mismatch, relative to `|c_min|`.
    pub energy: f64,
    /// Stored jet vs jet recomputed from `(x, v)`, relative.
    pub jet: f64,
}

impl Default for AuditTolerances {
    fn default() -> Self {
        AuditTolerances {
            chain_rule: 1e-8,
            spectral: 1e-5,
            energy: 1e-10,
            jet: 1e-10,
        }
    }
}

/// Three independent recomputations of the curvature-equation residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// sup |residual| with `(f, f', f'')` recomputed from `(x, v)`.
    pub chain_rule_sup: f64,
    /// sup relative difference between stored and recomputed jets.
    pub jet_mismatch_sup: f64,
    /// sup |residual| with `f', f''` from spectral differentiation of `f`.
    pub spectral_sup: f64,
    /// sup |v²/2 + G(x) - c|.
    pub energy_sup: f64,
    pub tolerances: AuditTolerances,
    /// Samples breaching the pointwise checks (chain rule, jet, energy).
    pub flagged: Vec<usize>,
    /// Samples breaching the spectral check.
    pub spectral_flagged: Vec<usize>,
    pub passed: bool,
}

pub fn audit_profile(prof: &SolutionProfile) -> AuditReport {
    audit_profile_with(prof, AuditTolerances::default())
}

pub fn audit_profile_with(prof: &SolutionProfile, tol: AuditTolerances) -> AuditReport {
    let p = &prof.params;
    let r = p.fiber_curvature();
    let c_scale = p.derive_constants().c_min.abs();

    let mut chain_rule_sup = 0.0f64;
    let mut jet_mismatch_sup = 0.0f64;
    let mut energy_sup = 0.0f64;
    let mut flagged = Vec::new();
    for (i, s) in prof.samples.iter().enumerate() {
        let (res, mismatch, energy) = if s.x > 0.0 {
            let j = p.jet(s.x, s.v);
            let res = p
                .residual_e(j.f, j.fp, j.fpp)
                .abs()
                .max(p.residual_e(s.f, s.fp, s.fpp).abs());
            let scale = j.f.abs() + j.fp.abs() + j.fpp.abs();
            let mismatch =
                ((j.f - s.f).abs() + (j.fp - s.fp).abs() + (j.fpp - s.fpp).abs()) / scale;
            let energy = (0.5 * s.v * s.v + p.phi_potential(s.x) - prof.c).abs();
            (res, mismatch, energy)
        } else {
            (f64::INFINITY, f64::INFINITY, f64::INFINITY)
        };
        chain_rule_sup = chain_rule_sup.max(res);
        jet_mismatch_sup = jet_mismatch_sup.max(mismatch);
        energy_sup = energy_sup.max(energy);
        if !(res <= tol.chain_rule * r && mismatch <= tol.jet && energy <= tol.energy * c_scale) {
            flagged.push(i);
        }
    }

    let f: Vec<f64> = prof.samples.iter().map(|s| s.f).collect();
    let (d1, d2) = spectral_derivatives(&f, prof.period);
    let mut spectral_sup = 0.0f64;
    let mut spectral_flagged = Vec::new();
    for i in 0..f.len() {
        let res = p.residual_e(f[i], d1[i], d2[i]).abs();
        spectral_sup = spectral_sup.max(res);
        if !(res <= tol.spectral * r) {
            spectral_flagged.push(i);
        }
    }

    let passed = flagged.is_empty() && spectral_flagged.is_empty();
    AuditReport {
        chain_rule_sup,
        jet_mismatch_sup,
        spectral_sup,
        energy_sup,
        tolerances: tol,
        flagged,
        spectral_flagged,
        passed,
    }
}
