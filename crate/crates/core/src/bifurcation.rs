//! Branches of non-constant solutions off the constant one.
//!
//! On a circle of length `T`, a solution of minimal period `T/k` is also
//! `T`-periodic, so branch `k` at length `T` is the orbit of minimal period
//! `T/k`. Branch points are where the amplitude along a branch vanishes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver::PeriodTable;

/// One solved point of branch `k` at circle length `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    #[serde(rename = "T")]
    pub period: f64,
    pub k: usize,
    pub c: f64,
    /// `b - a` in the reduced variable.
    pub amplitude: f64,
    pub max_f: f64,
    pub min_f: f64,
}

/// Side of `T_k` on which a branch lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Opening {
    Right,
    Left,
    /// Isochronous case: the whole branch sits at `T_k`.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub k: usize,
    #[serde(rename = "T")]
    pub period: f64,
    pub opening: Opening,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub params: ModelParams,
    pub rows: Vec<BranchRow>,
    pub branch_points: Vec<BranchPoint>,
    /// `(T, k, message)` for grid entries whose solve failed.
    pub failures: Vec<(f64, usize, String)>,
    /// Spacing of the `T` grid.
    pub cell: f64,
    /// Set when `T(c)` is constant and every branch is vertical.
    pub degenerate: bool,
}

impl BifurcationDiagram {
    pub fn branch(&self, k: usize) -> impl Iterator<Item = &BranchRow> {
        self.rows.iter().filter(move |r| r.k == k)
    }

    /// Number of branches with a row at (approximately) circle length `period`.
    pub fn families_at(&self, period: f64) -> usize {
        let mut ks: Vec<usize> = self
            .rows
            .iter()
            .filter(|r| (r.period - period).abs() <= 0.5 * self.cell)
            .map(|r| r.k)
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks.len()
    }
}

/// Scans `T ∈ (T0, t_max]` on `grid` equal steps. For each `T` and each
/// `k` with `T/k` inside the attainable period range, records branch `k`.
pub fn scan_branches(t_max: f64, grid: usize, p: &ModelParams) -> Result<BifurcationDiagram> {
    let t0 = p.threshold_period();
    if !(t_max > t0) {
        return Err(Error::Domain(format!(
            "t_max = {t_max} must exceed T0 = {t0}"
        )));
    }
    if grid < 16 {
        return Err(Error::Domain(format!(
            "grid = {grid}, need at least 16 points"
        )));
    }
    let table = PeriodTable::build(p)?;
    let cell = (t_max - t0) / grid as f64;
    let n = p.n() as f64;

    if table.is_isochronous() {
        let branch_points = (1..)
            .map(|k| k as f64 * t0)
            .take_while(|&tk| tk <= t_max)
            .enumerate()
            .map(|(i, tk)| BranchPoint {
                k: i + 1,
                period: tk,
                opening: Opening::Vertical,
            })
            .collect();
        return Ok(BifurcationDiagram {
            params: *p,
            rows: Vec::new(),
            branch_points,
            failures: Vec::new(),
            cell,
            degenerate: true,
        });
    }

    let (t_lo, _) = table.range();
    let k_max = (t_max / t_lo).floor() as usize;
    let jobs: Vec<(f64, usize)> = (1..=grid)
        .flat_map(|i| {
            let t = t0 + cell * i as f64;
            (1..=k_max).map(move |k| (t, k))
        })
        .filter(|&(t, k)| table.attains(t / k as f64))
        .collect();

    let results: Vec<(f64, usize, Result<BranchRow>)> = jobs
        .par_iter()
        .map(|&(t, k)| {
            let row = table.solve_energy(t / k as f64).map(|sol| {
                let o = sol.orbit;
                BranchRow {
                    period: t,
                    k,
                    c: o.c,
                    amplitude: o.amplitude(),
                    max_f: o.b.powf(2.0 / n),
                    min_f: o.a.powf(2.0 / n),
                }
            });
            (t, k, row)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (t, k, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((t, k, e.to_string())),
        }
    }
    rows.sort_by(|a, b| a.k.cmp(&b.k).then(a.period.total_cmp(&b.period)));

    let orbits = table.orbits();
    let t_edge = orbits[0].period;
    let opening = if orbits[1].period >= t_edge {
        Opening::Right
    } else {
        Opening::Left
    };
    let branch_points = (1..=k_max)
        .filter_map(|k| detect_branch_point(&rows, k, cell, k as f64 * t_edge, opening))
        .collect();

    Ok(BifurcationDiagram {
        params: *p,
        rows,
        branch_points,
        failures,
        cell,
        degenerate: false,
    })
}

/// Branch `k` leaves the constant solution at `k` times the small-amplitude
/// period `t_edge`. Accepted only when the branch's smallest-amplitude row
/// sits on the expected side of that point and within one cell of it.
fn detect_branch_point(
    rows: &[BranchRow],
    k: usize,
    cell: f64,
    t_edge: f64,
    opening: Opening,
) -> Option<BranchPoint> {
    let end = rows
        .iter()
        .filter(|r| r.k == k)
        .min_by(|a, b| a.amplitude.total_cmp(&b.amplitude))?;
    let gap = match opening {
        Opening::Right => end.period - t_edge,
        _ => t_edge - end.period,
    };
    (gap >= 0.0 && gap <= cell).then_some(BranchPoint {
        k,
        period: t_edge,
        opening,
    })
}

/// Counts of `T`-periodic non-constant solution families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCount {
    /// Families of minimal period exactly `T` (0 or 1 per bracketed root set).
    pub minimal_period: usize,
    /// Families of minimal period `T/k` for any `k ≥ 1`.
    pub with_harmonics: usize,
}

impl SolutionCount {
    pub fn total(&self) -> usize {
        self.with_harmonics
    }
}

/// Number of branches `k` with `T/k > T0` whose period `T/k` is bracketed
/// on the energy band.
pub fn count_solutions(period: f64, p: &ModelParams) -> Result<SolutionCount> {
    let table = PeriodTable::build(p)?;
    Ok(count_solutions_with_table(period, &table))
}

pub fn count_solutions_with_table(period: f64, table: &PeriodTable) -> SolutionCount {
    let t0 = table.params().threshold_period();
    let mut count = SolutionCount {
        minimal_period: 0,
        with_harmonics: 0,
    };
    if !(period > t0) {
        return count;
    }
    let mut k = 1;
    while period / k as f64 > t0 * (1.0 + 1e-9) {
        if !table.brackets(period / k as f64).is_empty() {
            count.with_harmonics += 1;
            if k == 1 {
                count.minimal_period = 1;
            }
        }
        k += 1;
    }
    count
}
