use super::{
    data_oscillation, Estimator, EstimatorContext, EstimatorReport, OscillationKind, StepEstimate,
};
use crate::error::{Error, Result};
use crate::greens::psi_cap;
use crate::spatial::Field;
use crate::steppers::{Method, Trajectory};

/// dG(1) bound: per step `η_f̆ + Ψ_{2,j}‖χ^j‖` with
/// `χ^j = (ψ^j − 3ψ^{j−2/3} + 2ψ^{j−1})/(2τ_j²)` and `ψ = f − LU`.
///
/// `η_f̆` carries the factor `κ₀` like every other oscillation term.
pub fn estimate_dg1(traj: &Trajectory, ctx: &EstimatorContext<'_>) -> Result<EstimatorReport> {
    ctx.check(traj, &[Method::Dg1])?;
    let green = *ctx.green();
    let mut steps = Vec::with_capacity(traj.len());
    for step in traj.steps() {
        let tau = step.tau();
        let fs = &step.forcing;
        let stage = step.stage.ok_or(Error::MissingData("U^{j-2/3}"))?;
        let f23 = fs.two_thirds.ok_or(Error::MissingData("f^{j-2/3}"))?;
        // residuals are Lu − f; the sign is irrelevant inside the norm
        let c = 1.0 / (2.0 * tau * tau);
        let chi = Field::lincomb(&[
            (c, &ctx.residual(step.u_cur, fs.cur)?),
            (-3.0 * c, &ctx.residual(stage, f23)?),
            (2.0 * c, &ctx.residual(step.u_prev, fs.prev)?),
        ]);
        let eta_chi = psi_cap(&green, 2, &traj.mesh().interval(step.j))? * ctx.norm(&chi);
        let f_breve = green.kappa0 * data_oscillation(OscillationKind::FBreve, &step, ctx)?;
        steps.push(StepEstimate {
            j: step.j,
            t: step.t_cur,
            weight: ctx.weight(step.t_cur),
            components: vec![("eta_f_breve", f_breve), ("eta_chi", eta_chi)],
            value: f_breve + eta_chi,
        });
    }
    Ok(EstimatorReport::assemble(Estimator::Dg1, steps, Vec::new()))
}
