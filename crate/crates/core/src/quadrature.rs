//! Adaptive Gauss–Legendre panels. Nodes are strictly interior, so an
//! integrand with removable singularities at the interval ends is never
//! evaluated there.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 16;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> f64 {
    let (nodes, weights) = rule();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-12,
            max_panels: 4000,
        }
    }
}

/// Integral with the achieved error estimate and the panel count.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Integrates `f` over `[lo, hi]` by bisecting panels until each split
/// agrees with its parent to the panel's share of the tolerance.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, cfg: QuadratureConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    let width = hi - lo;
    // coarse pass for the magnitude that scales the tolerance
    let seeds = 8;
    let mut stack = Vec::with_capacity(64);
    let mut estimate = 0.0;
    for i in 0..seeds {
        let a = lo + width * i as f64 / seeds as f64;
        let b = lo + width * (i + 1) as f64 / seeds as f64;
        let q = panel(&mut f, a, b);
        estimate += q;
        stack.push((a, b, q));
    }
    let scale = estimate.abs().max(f64::MIN_POSITIVE);

    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    while let Some((a, b, whole)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = panel(&mut f, a, m);
        let right = panel(&mut f, m, b);
        let split = left + right;
        if !split.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                tol: cfg.rel_tol,
                panels,
                estimate: split,
            });
        }
        let err = (split - whole).abs();
        let share = cfg.rel_tol * scale * (b - a) / width;
        panels += 1;
        if err <= share.max(4.0 * f64::EPSILON * split.abs()) || (b - a) < 1e-15 * width {
            value += split;
            error += err;
        } else if panels + stack.len() >= cfg.max_panels {
            return Err(Error::QuadratureNonConvergence {
                tol: cfg.rel_tol,
                panels,
                estimate: value + split + stack.iter().map(|s| s.2).sum::<f64>(),
            });
        } else {
            stack.push((a, m, left));
            stack.push((m, b, right));
        }
    }
    Ok(QuadratureResult {
        value,
        error,
        panels,
    })
}
