use super::{
    data_oscillation, divided_differences, step_sizes, Estimator, EstimatorContext,
    EstimatorReport, OscillationKind, StepEstimate,
};
use crate::error::{Error, Result};
use crate::greens::{psi_cap, theta};
use crate::spatial::Field;
use crate::steppers::{ExtrapolatedRun, Method};

/// Bound `η_eE` for `U = 2W − V`: per step `η_F̂ + η_δψ + η_Z` with
/// `η_Z = min{κ₀τ_j‖LZ^j‖, θ_j‖Z^j‖}` and
/// `Z^j = W^{j−1/2} − W^{j−1} − (V^j − V^{j−1})/2`.
pub fn estimate_extrapolated(
    run: &ExtrapolatedRun,
    ctx: &EstimatorContext<'_>,
) -> Result<EstimatorReport> {
    let (v, w, u) = (&run.coarse, &run.fine, &run.extrapolated);
    ctx.check(v, &[Method::EulerOneStep])?;
    ctx.check(w, &[Method::EulerTwoStep])?;
    ctx.check(u, &[Method::ExtrapolatedEuler])?;
    if v.mesh() != u.mesh() || w.mesh() != u.mesh() {
        return Err(Error::Trajectory("extrapolation runs use different meshes".into()));
    }
    let green = *ctx.green();
    let m = u.len();
    let taus = step_sizes(u);
    let forcing = u.forcing();
    let psi = (0..=m)
        .map(|j| ctx.residual(u.state(j), forcing.node(j)))
        .collect::<Result<Vec<_>>>()?;
    let d_psi = divided_differences(&psi, &taus);

    let mut steps = Vec::with_capacity(m);
    for step in u.steps() {
        let j = step.j;
        let tau = taus[j];
        let iv = u.mesh().interval(j);
        let w_half = w.stage(j).ok_or(Error::MissingData("W^{j-1/2}"))?;
        let z = Field::lincomb(&[
            (1.0, w_half),
            (-1.0, w.state(j - 1)),
            (-0.5, v.state(j)),
            (0.5, v.state(j - 1)),
        ]);
        let fs = &step.forcing;
        let lz = Field::lincomb(&[
            (1.0, &ctx.image(w_half, fs.half)?),
            (-1.0, &ctx.image(w.state(j - 1), fs.prev)?),
            (-0.5, &ctx.image(v.state(j), fs.cur)?),
            (0.5, &ctx.image(v.state(j - 1), fs.prev)?),
        ]);
        let via_lz = green.kappa0 * tau * ctx.norm(&lz);
        let eta_z = if iv.touches_horizon() && green.kappa1 > 0.0 {
            via_lz
        } else {
            via_lz.min(theta(&green, &iv)? * ctx.norm(&z))
        };
        let f_hat = green.kappa0 * data_oscillation(OscillationKind::FHatExtrap, &step, ctx)?;
        let eta_psi = psi_cap(&green, 1, &iv)? / 2.0 * ctx.norm(&d_psi[j]);
        steps.push(StepEstimate {
            j,
            t: step.t_cur,
            weight: ctx.weight(step.t_cur),
            components: vec![
                ("eta_F_hat", f_hat),
                ("eta_delta_psi", eta_psi),
                ("eta_Z", eta_z),
            ],
            value: f_hat + eta_psi + eta_z,
        });
    }
    Ok(EstimatorReport::assemble(
        Estimator::ExtrapolatedEuler,
        steps,
        Vec::new(),
    ))
}

/// Bounds for the two underlying Euler runs obtained from `u − V = 2(W − V) + (u − U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBounds {
    /// `‖W^M − V^M‖_∞`
    pub wv_gap: f64,
    /// `η_eE` at `T`
    pub eta_ee: f64,
    /// `2‖W^M − V^M‖ + η_eE ≥ ‖u(T) − V^M‖`
    pub bound_for_v: f64,
    /// `‖W^M − V^M‖ + η_eE ≥ ‖u(T) − W^M‖`
    pub bound_for_w: f64,
}

pub fn asymptotic_euler_bounds(
    run: &ExtrapolatedRun,
    report: &EstimatorReport,
    ctx: &EstimatorContext<'_>,
) -> Result<AsymptoticBounds> {
    if report.estimator != Estimator::ExtrapolatedEuler || report.steps.len() != run.fine.len() {
        return Err(Error::Trajectory(
            "report does not belong to this extrapolation run".into(),
        ));
    }
    let wv_gap = ctx.norm(&(run.fine.final_state() - run.coarse.final_state()));
    Ok(AsymptoticBounds {
        wv_gap,
        eta_ee: report.total,
        bound_for_v: 2.0 * wv_gap + report.total,
        bound_for_w: wv_gap + report.total,
    })
}
