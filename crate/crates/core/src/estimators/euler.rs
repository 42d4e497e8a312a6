use super::{
    check_j, data_oscillation, divided_differences, step_sizes, BackwardEulerVariant, Estimator,
    EstimatorContext, EstimatorReport, OscillationKind, StepEstimate,
};
use crate::error::Result;
use crate::greens::{mu_star, rho, theta};
use crate::spatial::Field;
use crate::steppers::{Method, Trajectory};

/// Unweighted per-step terms shared by every backward Euler bound.
struct Terms {
    t: Vec<f64>,
    weight: Vec<f64>,
    f_bar: Vec<f64>,
    f_hat: Vec<f64>,
    delta_lu: Vec<f64>,
    delta_u: Vec<f64>,
    delta2_u: Vec<f64>,
    /// `‖δₜU^j‖`
    du_norm: Vec<f64>,
    /// `U^j − U^{j−1}`
    increments: Vec<Field>,
}

impl Terms {
    fn gather(traj: &Trajectory, ctx: &EstimatorContext<'_>) -> Result<Self> {
        ctx.check(traj, &[Method::BackwardEuler, Method::EulerOneStep])?;
        let green = *ctx.green();
        let m = traj.len();
        let taus = step_sizes(traj);
        let forcing = traj.forcing();
        let images = (0..=m)
            .map(|j| ctx.image(traj.state(j), forcing.node(j)))
            .collect::<Result<Vec<_>>>()?;
        let d_lu = divided_differences(&images, &taus);
        let mut d_u = divided_differences(traj.states(), &taus);
        // δₜU⁰ := f⁰ − LU⁰, consistent with the scheme at j = 0
        d_u[0] = -ctx.residual(traj.state(0), forcing.node(0))?;

        let mut terms = Terms {
            t: Vec::with_capacity(m),
            weight: Vec::with_capacity(m),
            f_bar: Vec::with_capacity(m),
            f_hat: Vec::with_capacity(m),
            delta_lu: Vec::with_capacity(m),
            delta_u: Vec::with_capacity(m),
            delta2_u: Vec::with_capacity(m),
            du_norm: Vec::with_capacity(m),
            increments: Vec::with_capacity(m),
        };
        for step in traj.steps() {
            let j = step.j;
            let tau = taus[j];
            let iv = traj.mesh().interval(j);
            let du = ctx.norm(&d_u[j]);
            let d2u = Field::lincomb(&[(1.0 / tau, &d_u[j]), (-1.0 / tau, &d_u[j - 1])]);
            terms.t.push(step.t_cur);
            terms.weight.push(ctx.weight(step.t_cur));
            terms.f_bar.push(green.kappa0 * data_oscillation(OscillationKind::FBar, &step, ctx)?);
            terms.f_hat.push(green.kappa0 * data_oscillation(OscillationKind::FHat, &step, ctx)?);
            terms.delta_lu.push(green.kappa0 * tau * tau / 2.0 * ctx.norm(&d_lu[j]));
            terms.delta_u.push(rho(&green, &iv)? * du);
            terms.delta2_u.push(green.kappa0 * tau * tau / 2.0 * ctx.norm(&d2u));
            terms.du_norm.push(du);
            terms.increments.push(step.u_cur - step.u_prev);
        }
        Ok(terms)
    }

    fn len(&self) -> usize {
        self.t.len()
    }

    fn step(&self, i: usize, components: Vec<(&'static str, f64)>, value: f64) -> StepEstimate {
        StepEstimate {
            j: i + 1,
            t: self.t[i],
            weight: self.weight[i],
            components,
            value,
        }
    }

    fn report(
        &self,
        variant: BackwardEulerVariant,
        traj: &Trajectory,
        ctx: &EstimatorContext<'_>,
    ) -> Result<EstimatorReport> {
        use BackwardEulerVariant as V;
        let estimator = Estimator::BackwardEuler(variant);
        let m = self.len();
        if let V::Kl2 { j } = variant {
            return self.kl2(j, traj, ctx);
        }
        let steps = (0..m)
            .map(|i| {
                let (fb, fh) = (self.f_bar[i], self.f_hat[i]);
                let (dlu, du, d2u) = (self.delta_lu[i], self.delta_u[i], self.delta2_u[i]);
                let min = dlu.min(du);
                match variant {
                    V::Dlm => self.step(i, vec![("eta_f_bar", fb), ("eta_delta_LU", dlu)], fb + dlu),
                    V::Kl1 => self.step(i, vec![("eta_f_bar", fb), ("eta_delta_U", du)], fb + du),
                    V::Dlmkl => self.step(
                        i,
                        vec![
                            ("eta_f_bar", fb),
                            ("eta_delta_LU", dlu),
                            ("eta_delta_U", du),
                            ("eta_min", min),
                        ],
                        fb + min,
                    ),
                    V::Lr => self.step(i, vec![("eta_f_hat", fh), ("eta_delta2_U", d2u)], fh + d2u),
                    V::Combined => self.step(
                        i,
                        vec![
                            ("eta_f_bar", fb),
                            ("eta_delta_LU", dlu),
                            ("eta_delta_U", du),
                            ("eta_min", min),
                            ("eta_f_hat", fh),
                            ("eta_delta2_U", d2u),
                        ],
                        (fb + min).min(fh + d2u),
                    ),
                    V::Kl2 { .. } => unreachable!(),
                }
            })
            .collect();
        Ok(EstimatorReport::assemble(estimator, steps, Vec::new()))
    }

    fn kl2(&self, big_j: usize, traj: &Trajectory, ctx: &EstimatorContext<'_>) -> Result<EstimatorReport> {
        let m = self.len();
        check_j(big_j, m)?;
        let green = *ctx.green();
        let last = &self.increments[m - 1];
        let mut steps = Vec::with_capacity(m);
        for i in 0..m {
            let j = i + 1;
            let fb = self.f_bar[i];
            if j < big_j || j == m {
                let min = self.delta_lu[i].min(self.delta_u[i]);
                steps.push(self.step(i, vec![("eta_f_bar", fb), ("eta_min", min)], fb + min));
            } else {
                let iv = traj.mesh().interval(j);
                let tau = iv.tau();
                let star = (green.kappa2 * mu_star(&iv)? + green.kappa2p * tau.powi(3) / 6.0)
                    * self.du_norm[i];
                // W^j = ½[τ_jδₜU^j − τ_MδₜU^M]
                let w = ctx.norm(&Field::lincomb(&[(0.5, &self.increments[i]), (-0.5, last)]));
                let eta_w = theta(&green, &iv)? * w;
                steps.push(self.step(
                    i,
                    vec![("eta_f_bar", fb), ("eta_delta_U_star", star), ("eta_W", eta_w)],
                    fb + star + eta_w,
                ));
            }
        }
        let mesh = traj.mesh();
        let tau_m = mesh.tau(m);
        let endpoint = green.kappa0 * tau_m / 2.0
            * (ctx.weight(mesh.t(m - 1)) + ctx.weight(mesh.t(big_j - 1)))
            * self.du_norm[m - 1];
        Ok(EstimatorReport::assemble(
            Estimator::BackwardEuler(BackwardEulerVariant::Kl2 { j: big_j }),
            steps,
            vec![("endpoint", endpoint)],
        ))
    }
}

/// Backward Euler bounds: `DLM` (`η_f̄ + η_δLU`), `KL1` (`η_f̄ + η_δU`),
/// `DLMKL` (`η_f̄ + min`), `LR` (`η_f̂ + η_δ²U`), `COMBINED` (per-step
/// minimum of `DLMKL` and `LR`) and `KL2(J)`.
pub fn estimate_backward_euler(
    traj: &Trajectory,
    variant: BackwardEulerVariant,
    ctx: &EstimatorContext<'_>,
) -> Result<EstimatorReport> {
    Terms::gather(traj, ctx)?.report(variant, traj, ctx)
}

/// Several backward Euler bounds sharing one pass over the trajectory.
pub fn estimate_backward_euler_all(
    traj: &Trajectory,
    variants: &[BackwardEulerVariant],
    ctx: &EstimatorContext<'_>,
) -> Result<Vec<EstimatorReport>> {
    let terms = Terms::gather(traj, ctx)?;
    variants
        .iter()
        .map(|&v| terms.report(v, traj, ctx))
        .collect()
}
