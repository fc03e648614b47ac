//! Positive periodic warping functions of constant scalar curvature on
//! `S¹ ×_f N`.
//!
//! The crate is organised bottom-up: [`model`] holds the curvature
//! equation and its reduction to a conservative oscillator, [`integrator`]
//! and [`period`] compute the period function two independent ways,
//! [`solver`] shoots for a prescribed period, [`bifurcation`] scans the
//! branches off the constant solution, and [`geometry`] audits solved
//! profiles against the curvature equation without reusing the ODE's
//! derivatives.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod model;
pub mod period;
pub mod quadrature;
pub mod roots;
pub mod solver;
mod spectral;

pub use bifurcation::{
    count_solutions, count_solutions_with_table, scan_branches, BifurcationDiagram, BranchPoint,
    BranchRow, Opening, SolutionCount,
};
pub use error::{Error, Result};
pub use geometry::{
    conformal_field_check, curvature_audit, warped_scalar_curvature, ComponentResiduals,
    ConformalReport, ConventionAudit, CurvatureReport, WarpingConvention, CONFORMAL_TOL,
};
pub use integrator::{
    integrate_sampled, integrate_until_section, leapfrog, step_symplectic, Crossing,
    IntegratorConfig,
};
pub use model::{DerivedConstants, ModelParams, PhaseState, WarpJet};
pub use period::{
    energy_at_fraction, log_energy_grid, period_quadrature, period_quadrature_with, period_scan,
    turning_points, turning_points_clamped, EnergyClamp, OrbitSpec,
};
pub use quadrature::{gauss_legendre, integrate, QuadratureConfig, QuadratureResult};
pub use roots::{brent, Tolerance};
pub use solver::{
    audit_profile, audit_profile_with, sample_orbit, solve_period, solve_period_with_table,
    AuditReport, AuditTolerances, EnergySolution, PeriodTable, Sample, SolutionProfile,
    SolveTolerances,
};
