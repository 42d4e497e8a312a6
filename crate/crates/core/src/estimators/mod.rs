//! A posteriori bounds for `‖u(T) − U^M‖_∞` computed from recorded trajectories.
//!
//! Every bound has the shape `Σ_j e^{−γ(T−t_j)} η^j` plus, for the
//! `KL2`-type bounds, endpoint terms. Reports keep the per-step components
//! unweighted; weights are applied only when the total is formed.

mod bdf2;
mod crank_nicolson;
mod dg1;
mod euler;
mod extrapolated;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::greens::GreenFunctionBounds;
use crate::problems::ParabolicProblem;
use crate::quadrature;
use crate::spatial::{Field, DEFAULT_SAMPLING};
use crate::steppers::{Discretisation, Method, StepRecord, Trajectory};

pub use bdf2::estimate_bdf2;
pub use crank_nicolson::{estimate_crank_nicolson, estimate_crank_nicolson_all};
pub use dg1::estimate_dg1;
pub use euler::{estimate_backward_euler, estimate_backward_euler_all};
pub use extrapolated::{asymptotic_euler_bounds, estimate_extrapolated, AsymptoticBounds};

/// Quadrature for the data-oscillation integrals `∫_{I_j} ‖f − f_interp‖_∞ ds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadRule {
    Trapezium,
    #[default]
    Simpson,
    /// Composite Simpson on the two halves of `I_j`.
    SimpsonTwoPanel,
    /// Adaptive Gauss–Kronrod on `s ↦ ‖(f − f_interp)(s)‖_∞`, evaluating `f` directly.
    GaussAdaptive,
}

impl fmt::Display for QuadRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuadRule::Trapezium => "trapezium",
            QuadRule::Simpson => "simpson",
            QuadRule::SimpsonTwoPanel => "simpson_two_panel",
            QuadRule::GaussAdaptive => "gauss_adaptive",
        })
    }
}

impl FromStr for QuadRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "trapezium" => Ok(QuadRule::Trapezium),
            "simpson" => Ok(QuadRule::Simpson),
            "simpson_two_panel" => Ok(QuadRule::SimpsonTwoPanel),
            "gauss_adaptive" => Ok(QuadRule::GaussAdaptive),
            _ => Err(Error::Unsupported(format!("quadrature rule {s:?}"))),
        }
    }
}

/// Which deficiency the extrapolated-Euler oscillation term integrates.
///
/// `Paper` integrates `F − F̂ = f − f^{j−1/2} − (s − t_{j−1/2})δₜf^j`, the
/// term that actually appears in the residual; Simpson's rule turns it into
/// `(τ/6)‖f^j − 2f^{j−1/2} + f^{j−1}‖`. `Consistent` integrates `f − f̂`
/// instead, giving `(τ/3)‖·‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FhatVariant {
    #[default]
    Paper,
    Consistent,
}

impl fmt::Display for FhatVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FhatVariant::Paper => "paper",
            FhatVariant::Consistent => "consistent",
        })
    }
}

impl FromStr for FhatVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(FhatVariant::Paper),
            "consistent" => Ok(FhatVariant::Consistent),
            _ => Err(Error::Unsupported(format!("fhat variant {s:?}"))),
        }
    }
}

/// Interpolant of `f` whose defect is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillationKind {
    /// Piecewise constant `f^j`.
    FBar,
    /// Piecewise linear `f̂`.
    FHat,
    /// Piecewise quadratic `f̃`, interpolating at `t_{j−1}`, `t_{j−1/2}`, `t_j`.
    FTilde,
    /// The dG(1) quadratic `f̆`, built from `f^{j−1}`, `f^{j−2/3}`, `f^j`.
    FBreve,
    /// `F̂` of the extrapolated Euler residual, see [`FhatVariant`].
    FHatExtrap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    pub rule: QuadRule,
    /// Sample count of the max-norm; see [`crate::SpatialGrid::max_norm`].
    pub sampling: usize,
    pub fhat_variant: FhatVariant,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            rule: QuadRule::Simpson,
            sampling: DEFAULT_SAMPLING,
            fhat_variant: FhatVariant::Paper,
        }
    }
}

/// Everything an estimator needs besides the trajectory.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorContext<'a> {
    pub problem: &'a ParabolicProblem,
    pub disc: &'a Discretisation,
    pub options: EstimatorOptions,
}

impl<'a> EstimatorContext<'a> {
    pub fn new(
        problem: &'a ParabolicProblem,
        disc: &'a Discretisation,
        options: EstimatorOptions,
    ) -> Self {
        Self {
            problem,
            disc,
            options,
        }
    }

    pub fn green(&self) -> &GreenFunctionBounds {
        self.problem.green()
    }

    pub fn norm(&self, v: &Field) -> f64 {
        self.disc.grid.max_norm(v, self.options.sampling)
    }

    fn weight(&self, t: f64) -> f64 {
        self.green().weight(t, self.problem.horizon())
    }

    /// `Lu` for a state produced by a scheme, with the boundary values taken
    /// from `f` at the same time level: the scheme's relations between `Lu`,
    /// `f` and the discrete time derivative hold up to the boundary, where
    /// the time derivative vanishes.
    fn image(&self, u: &Field, f: &Field) -> Result<Field> {
        let mut lu = self.disc.operator.apply(u)?;
        lu.set_boundary(f);
        Ok(lu)
    }

    /// `Lu − f`; zero on the boundary.
    fn residual(&self, u: &Field, f: &Field) -> Result<Field> {
        Ok(self.disc.operator.apply(u)? - f.interior_part())
    }

    fn check(&self, traj: &Trajectory, accepted: &[Method]) -> Result<()> {
        if !accepted.contains(&traj.method()) {
            return Err(Error::Trajectory(format!(
                "estimator expects a trajectory from {accepted:?}, got {}",
                traj.method()
            )));
        }
        let (t, horizon) = (traj.mesh().horizon(), self.problem.horizon());
        if (t - horizon).abs() > 1e-12 * horizon {
            return Err(Error::Trajectory(format!(
                "trajectory ends at {t} but the problem horizon is {horizon}"
            )));
        }
        self.disc.grid.check(traj.final_state())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackwardEulerVariant {
    Dlm,
    Kl1,
    Dlmkl,
    Lr,
    Combined,
    /// Four-part bound with integration by parts from `t_{J−1}` on.
    Kl2 { j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrankNicolsonVariant {
    Cn1,
    Cn2,
    CnComb,
    CnKl2 { j: usize },
}

/// Which bound a report holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    BackwardEuler(BackwardEulerVariant),
    CrankNicolson(CrankNicolsonVariant),
    ExtrapolatedEuler,
    Dg1,
    Bdf2,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use BackwardEulerVariant as B;
        use CrankNicolsonVariant as C;
        match self {
            Estimator::BackwardEuler(B::Dlm) => f.write_str("DLM"),
            Estimator::BackwardEuler(B::Kl1) => f.write_str("KL1"),
            Estimator::BackwardEuler(B::Dlmkl) => f.write_str("DLMKL"),
            Estimator::BackwardEuler(B::Lr) => f.write_str("LR"),
            Estimator::BackwardEuler(B::Combined) => f.write_str("COMBINED"),
            Estimator::BackwardEuler(B::Kl2 { j }) => write!(f, "KL2(J={j})"),
            Estimator::CrankNicolson(C::Cn1) => f.write_str("CN1"),
            Estimator::CrankNicolson(C::Cn2) => f.write_str("CN2"),
            Estimator::CrankNicolson(C::CnComb) => f.write_str("CNCOMB"),
            Estimator::CrankNicolson(C::CnKl2 { j }) => write!(f, "CNKL2(J={j})"),
            Estimator::ExtrapolatedEuler => f.write_str("EXTRAP"),
            Estimator::Dg1 => f.write_str("DG1"),
            Estimator::Bdf2 => f.write_str("BDF2"),
        }
    }
}

/// Contribution of one interval `I_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEstimate {
    pub j: usize,
    pub t: f64,
    /// `e^{−γ(T−t_j)}`
    pub weight: f64,
    /// Unweighted components, e.g. `("eta_f_bar", …)`.
    pub components: Vec<(&'static str, f64)>,
    /// Unweighted quantity summed into the total for this step.
    pub value: f64,
}

impl StepEstimate {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub estimator: Estimator,
    pub steps: Vec<StepEstimate>,
    /// Terms not attached to a single step (already weighted).
    pub endpoint: Vec<(&'static str, f64)>,
    /// `Σ_j weight_j · value_j + Σ endpoint`.
    pub total: f64,
}

impl EstimatorReport {
    fn assemble(
        estimator: Estimator,
        steps: Vec<StepEstimate>,
        endpoint: Vec<(&'static str, f64)>,
    ) -> Self {
        let total = steps.iter().map(|s| s.weight * s.value).sum::<f64>()
            + endpoint.iter().map(|(_, v)| v).sum::<f64>();
        Self {
            estimator,
            steps,
            endpoint,
            total,
        }
    }

    /// Weighted sum of one named component over all steps.
    pub fn component_sum(&self, name: &str) -> f64 {
        self.steps
            .iter()
            .filter_map(|s| s.component(name).map(|v| s.weight * v))
            .sum()
    }
}

/// One row of [`component_trace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub j: usize,
    pub t: f64,
    pub component: &'static str,
    pub value: f64,
}

/// Flattens a report into `(t_j, component, value)` rows, unweighted,
/// ordered by step and then by component.
pub fn component_trace(report: &EstimatorReport) -> Vec<TraceRow> {
    report
        .steps
        .iter()
        .flat_map(|s| {
            s.components.iter().map(move |&(component, value)| TraceRow {
                j: s.j,
                t: s.t,
                component,
                value,
            })
        })
        .collect()
}

/// Approximates `∫_{I_j} ‖(f − f_interp)(s)‖_∞ ds` for the interpolant
/// selected by `kind`, using the rule in `ctx.options`.
///
/// `FTilde` interpolates `f` at all three Simpson nodes, so under
/// [`QuadRule::Simpson`] it is integrated with the two-panel rule instead.
pub fn data_oscillation(
    kind: OscillationKind,
    step: &StepRecord<'_>,
    ctx: &EstimatorContext<'_>,
) -> Result<f64> {
    let tau = step.tau();
    let fs = &step.forcing;
    if kind == OscillationKind::FBreve && fs.two_thirds.is_none() {
        return Err(Error::MissingData("f^{j-2/3}"));
    }
    let kind = match (kind, ctx.options.fhat_variant) {
        (OscillationKind::FHatExtrap, FhatVariant::Consistent) => OscillationKind::FHat,
        (k, _) => k,
    };
    let defect_at = |theta: f64, f: &Field| -> Field {
        let interp = interpolant(kind, step, theta);
        f - &interp
    };
    let sampled = |theta: f64| -> f64 {
        let f = match theta {
            0.0 => fs.prev,
            0.25 => fs.quarter_early,
            0.5 => fs.half,
            0.75 => fs.quarter_late,
            _ => fs.cur,
        };
        ctx.norm(&defect_at(theta, f))
    };
    let rule = match (kind, ctx.options.rule) {
        (OscillationKind::FTilde, QuadRule::Simpson) => QuadRule::SimpsonTwoPanel,
        (_, r) => r,
    };
    let value = match rule {
        QuadRule::Trapezium => tau / 2.0 * (sampled(0.0) + sampled(1.0)),
        QuadRule::Simpson => tau / 6.0 * (sampled(0.0) + 4.0 * sampled(0.5) + sampled(1.0)),
        QuadRule::SimpsonTwoPanel => {
            tau / 12.0
                * (sampled(0.0)
                    + 4.0 * sampled(0.25)
                    + 2.0 * sampled(0.5)
                    + 4.0 * sampled(0.75)
                    + sampled(1.0))
        }
        QuadRule::GaussAdaptive => {
            let grid = &ctx.disc.grid;
            let integrand = |theta: f64| {
                let f = ctx
                    .problem
                    .forcing_field(grid, step.t_prev + theta * tau);
                ctx.norm(&defect_at(theta, &f))
            };
            tau * quadrature::integrate(integrand, 0.0, 1.0, 1e-14, 1e-8, 200).value
        }
    };
    Ok(value)
}

/// The interpolant of `kind` at `t_{j−1} + θτ_j`, built from the samples
/// carried by the step.
fn interpolant(kind: OscillationKind, step: &StepRecord<'_>, theta: f64) -> Field {
    let fs = &step.forcing;
    let (f0, fh, f1) = (fs.prev, fs.half, fs.cur);
    match kind {
        OscillationKind::FBar => f1.clone(),
        OscillationKind::FHat => Field::lincomb(&[(1.0 - theta, f0), (theta, f1)]),
        OscillationKind::FTilde => {
            // f̂ + β ω with β ω = −2θ(1−θ)(f^j − 2f^{j−1/2} + f^{j−1})
            let c = -2.0 * theta * (1.0 - theta);
            Field::lincomb(&[(1.0 - theta + c, f0), (-2.0 * c, fh), (theta + c, f1)])
        }
        OscillationKind::FBreve => {
            let f23 = fs.two_thirds.expect("checked by data_oscillation");
            // f^j − (3/2)(1−θ)(f^j − f^{j−2/3}) + ½(f^j − 3f^{j−2/3} + 2f^{j−1})ζ(θ)
            let zeta = 3.0 * (theta - 1.0) * (theta - 1.0 / 3.0);
            let a = 1.5 * (1.0 - theta);
            Field::lincomb(&[
                (1.0 - a + 0.5 * zeta, f1),
                (a - 1.5 * zeta, f23),
                (zeta, f0),
            ])
        }
        OscillationKind::FHatExtrap => {
            // f^{j−1/2} + (θ − ½)(f^j − f^{j−1})
            let c = theta - 0.5;
            Field::lincomb(&[(1.0, fh), (c, f1), (-c, f0)])
        }
    }
}

/// `δₜv^j = (v^j − v^{j−1})/τ_j` for `j = 1 … M`; entry `0` is unused.
fn divided_differences(values: &[Field], taus: &[f64]) -> Vec<Field> {
    let mut out = Vec::with_capacity(values.len());
    out.push(Field::zeros(values[0].len()));
    for j in 1..values.len() {
        out.push(Field::lincomb(&[
            (1.0 / taus[j], &values[j]),
            (-1.0 / taus[j], &values[j - 1]),
        ]));
    }
    out
}

/// `τ_j` indexed from 1, entry 0 unused.
fn step_sizes(traj: &Trajectory) -> Vec<f64> {
    std::iter::once(0.0).chain(traj.mesh().taus()).collect()
}

fn check_j(j: usize, m: usize) -> Result<()> {
    if j == 0 || j > m {
        return Err(Error::Domain(format!("J = {j} outside 1..={m}")));
    }
    Ok(())
}
