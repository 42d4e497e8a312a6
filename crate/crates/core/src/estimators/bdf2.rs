use super::{
    data_oscillation, divided_differences, step_sizes, Estimator, EstimatorContext,
    EstimatorReport, OscillationKind, StepEstimate,
};
use crate::error::{Error, Result};
use crate::greens::{psi_cap, rho};
use crate::spatial::Field;
use crate::steppers::{Method, Trajectory};

/// BDF-2 bound. Step 1 is a backward Euler step and uses `η_f̄ + min{η_δU, η_δLU}`;
/// step 2 adds `(Ψ_{1,2} + κ₀τ₁τ₂/2)‖δₜ²U²‖`; later steps use
/// `Ψ_{1,j}‖δₜ²U^j‖ + (κ₀τ_{j−1}τ_j/2)‖δₜ²U^j − δₜ²U^{j−1}‖`, where
/// `δₜ²v^j = (δₜv^j − δₜv^{j−1})/(τ_j + τ_{j−1})`.
pub fn estimate_bdf2(traj: &Trajectory, ctx: &EstimatorContext<'_>) -> Result<EstimatorReport> {
    ctx.check(traj, &[Method::Bdf2])?;
    let m = traj.len();
    if m < 3 {
        return Err(Error::Mesh(format!("BDF-2 bound needs M >= 3, got {m}")));
    }
    let green = *ctx.green();
    let mesh = traj.mesh();
    let taus = step_sizes(traj);
    let d_u = divided_differences(traj.states(), &taus);
    let d2_u: Vec<Field> = (0..=m)
        .map(|j| {
            if j < 2 {
                Field::zeros(d_u[0].len())
            } else {
                let s = 1.0 / (taus[j] + taus[j - 1]);
                Field::lincomb(&[(s, &d_u[j]), (-s, &d_u[j - 1])])
            }
        })
        .collect();

    let mut steps = Vec::with_capacity(m);
    for step in traj.steps() {
        let j = step.j;
        let tau = taus[j];
        let iv = mesh.interval(j);
        let (components, value) = if j == 1 {
            let f_bar = green.kappa0 * data_oscillation(OscillationKind::FBar, &step, ctx)?;
            let fs = &step.forcing;
            let d_lu = (ctx.image(step.u_cur, fs.cur)? - ctx.image(step.u_prev, fs.prev)?)
                .scale(1.0 / tau);
            let eta_lu = green.kappa0 * tau * tau / 2.0 * ctx.norm(&d_lu);
            let eta_u = rho(&green, &iv)? * ctx.norm(&d_u[1]);
            let min = eta_lu.min(eta_u);
            (
                vec![
                    ("eta_f_bar", f_bar),
                    ("eta_delta_LU", eta_lu),
                    ("eta_delta_U", eta_u),
                    ("eta_min", min),
                ],
                f_bar + min,
            )
        } else {
            let f_hat = green.kappa0 * data_oscillation(OscillationKind::FHat, &step, ctx)?;
            let psi = psi_cap(&green, 1, &iv)?;
            let tau_prev = taus[j - 1];
            let (curvature, jump) = if j == 2 {
                let c = (psi + green.kappa0 * tau_prev * tau / 2.0) * ctx.norm(&d2_u[2]);
                (c, 0.0)
            } else {
                (
                    psi * ctx.norm(&d2_u[j]),
                    green.kappa0 * tau_prev * tau / 2.0 * ctx.norm(&(&d2_u[j] - &d2_u[j - 1])),
                )
            };
            (
                vec![
                    ("eta_f_hat", f_hat),
                    ("eta_delta2_U", curvature),
                    ("eta_delta3_U", jump),
                ],
                f_hat + curvature + jump,
            )
        };
        steps.push(StepEstimate {
            j,
            t: step.t_cur,
            weight: ctx.weight(step.t_cur),
            components,
            value,
        });
    }
    Ok(EstimatorReport::assemble(Estimator::Bdf2, steps, Vec::new()))
}
