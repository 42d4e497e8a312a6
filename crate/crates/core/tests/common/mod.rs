#![allow(dead_code)]

use std::f64::consts::PI;

use apost_core::{Discretisation, Field, GreenFunctionBounds, ParabolicProblem, SpatialGrid};

pub const DEGREE: usize = 31;

/// Lowest discrete eigenpair `(λ, v)` of `L` by inverse iteration, `max|v| = 1`.
pub fn eigenpair(disc: &Discretisation) -> (f64, Field) {
    let mut v = Field::from_fn(&disc.grid, |x| (PI * (1.0 + x) / 2.0).sin());
    for _ in 0..80 {
        let w = disc.operator.solve_elliptic(&v).unwrap();
        v = w.scale(1.0 / w.nodal_max());
    }
    let lv = disc.operator.apply(&v).unwrap();
    let k = (0..v.len())
        .max_by(|&a, &b| v.values()[a].abs().total_cmp(&v.values()[b].abs()))
        .unwrap();
    (lv.values()[k] / v.values()[k], v)
}

/// The test operator with `f = 0` and `u⁰` the lowest discrete eigenvector, so
/// that every scheme acts on `u⁰` like its scalar recurrence with `L = λ`.
pub struct Surrogate {
    pub problem: ParabolicProblem,
    pub disc: Discretisation,
    pub lambda: f64,
    pub mode: Field,
}

impl Surrogate {
    /// Horizon `T = scaled_horizon/λ`, so a single step over `[0, T]` has `τλ = scaled_horizon`.
    pub fn new(scaled_horizon: f64) -> Self {
        let base = ParabolicProblem::tabulated_test_problem();
        let disc = Discretisation::new(&base, DEGREE).unwrap();
        let (lambda, mode) = eigenpair(&disc);
        let grid = SpatialGrid::new(DEGREE).unwrap();
        let shape = mode.clone();
        let problem = ParabolicProblem::new(
            |x| 5.0 * x + 6.0,
            |_, _| 0.0,
            move |x| grid.interpolate(&shape, x),
            scaled_horizon / lambda,
            *base.green(),
        )
        .unwrap();
        Self {
            problem,
            disc,
            lambda,
            mode,
        }
    }

    /// Ratio `U/v` at the node where `|v|` is largest.
    pub fn amplitude(&self, u: &Field) -> f64 {
        let k = (0..self.mode.len())
            .max_by(|&a, &b| self.mode.values()[a].abs().total_cmp(&self.mode.values()[b].abs()))
            .unwrap();
        u.values()[k] / self.mode.values()[k]
    }

    /// `max|U − a·v|`, checking `U` is a multiple of the mode.
    pub fn off_mode(&self, u: &Field, a: f64) -> f64 {
        (u - &self.mode.scale(a)).nodal_max()
    }
}

/// `u⁰ = sin(π(1+x)/2)` with `f = Lu⁰`, so `u(t) = u⁰` for all `t`.
pub fn steady_problem(green: GreenFunctionBounds) -> ParabolicProblem {
    ParabolicProblem::new(
        |x| 5.0 * x + 6.0,
        |x, _| ((PI / 2.0).powi(2) + 5.0 * x + 6.0) * (PI * (1.0 + x) / 2.0).sin(),
        |x| (PI * (1.0 + x) / 2.0).sin(),
        1.0,
        green,
    )
    .unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

use apost_core::estimators::{
    estimate_backward_euler_all, estimate_bdf2, estimate_crank_nicolson_all, estimate_dg1,
    estimate_extrapolated,
};
use apost_core::steppers::{
    final_error, run_backward_euler, run_bdf2, run_crank_nicolson, run_dg1,
    run_extrapolated_euler, run_reference,
};
use apost_core::{
    BackwardEulerVariant as B, CrankNicolsonVariant as C, EstimatorContext, EstimatorReport,
    TimeMesh,
};

/// Every bound on one mesh, each paired with the error it bounds
/// (`None` when no reference run was requested).
pub fn all_reports(
    ctx: &EstimatorContext<'_>,
    mesh: &TimeMesh,
    with_error: bool,
) -> Vec<(EstimatorReport, Option<f64>)> {
    let (p, disc) = (ctx.problem, ctx.disc);
    let sampling = ctx.options.sampling;
    let reference = with_error.then(|| run_reference(p, mesh, disc).unwrap());
    let err = |u: &apost_core::Trajectory| {
        reference
            .as_ref()
            .map(|r| final_error(u, r, &disc.grid, sampling).unwrap())
    };
    let mut out = Vec::new();
    let be = run_backward_euler(p, mesh, disc).unwrap();
    let variants = [B::Dlm, B::Kl1, B::Dlmkl, B::Lr, B::Combined, B::Kl2 { j: 1 }];
    for r in estimate_backward_euler_all(&be, &variants, ctx).unwrap() {
        out.push((r, err(&be)));
    }
    let cn = run_crank_nicolson(p, mesh, disc).unwrap();
    let variants = [C::Cn1, C::Cn2, C::CnComb, C::CnKl2 { j: 1 }];
    for r in estimate_crank_nicolson_all(&cn, &variants, ctx).unwrap() {
        out.push((r, err(&cn)));
    }
    let ex = run_extrapolated_euler(p, mesh, disc).unwrap();
    out.push((estimate_extrapolated(&ex, ctx).unwrap(), err(&ex.extrapolated)));
    let dg = run_dg1(p, mesh, disc).unwrap();
    out.push((estimate_dg1(&dg, ctx).unwrap(), err(&dg)));
    let bdf = run_bdf2(p, mesh, disc).unwrap();
    out.push((estimate_bdf2(&bdf, ctx).unwrap(), err(&bdf)));
    out
}
