use super::{
    check_j, data_oscillation, divided_differences, step_sizes, CrankNicolsonVariant, Estimator,
    EstimatorContext, EstimatorReport, OscillationKind, StepEstimate,
};
use crate::error::Result;
use crate::greens::{psi_cap, sigma_star, theta};
use crate::spatial::Field;
use crate::steppers::{Method, Trajectory};

struct Terms {
    t: Vec<f64>,
    weight: Vec<f64>,
    f_hat: Vec<f64>,
    f_tilde: Vec<f64>,
    delta_psi: Vec<f64>,
    dpsi_q: Vec<f64>,
    /// `δₜψ^j`, index 0 unused
    d_psi: Vec<Field>,
}

impl Terms {
    fn gather(traj: &Trajectory, ctx: &EstimatorContext<'_>, with_q: bool) -> Result<Self> {
        ctx.check(traj, &[Method::CrankNicolson])?;
        let green = *ctx.green();
        let m = traj.len();
        let taus = step_sizes(traj);
        let forcing = traj.forcing();
        // ψ^j = (LU − f)^j, with ψ⁰ taken from U⁰ = u⁰
        let psi = (0..=m)
            .map(|j| ctx.residual(traj.state(j), forcing.node(j)))
            .collect::<Result<Vec<_>>>()?;
        let d_psi = divided_differences(&psi, &taus);
        let mut terms = Terms {
            t: Vec::with_capacity(m),
            weight: Vec::with_capacity(m),
            f_hat: Vec::with_capacity(m),
            f_tilde: Vec::with_capacity(m),
            delta_psi: Vec::with_capacity(m),
            dpsi_q: Vec::with_capacity(m),
            d_psi: Vec::new(),
        };
        for step in traj.steps() {
            let j = step.j;
            let tau = taus[j];
            let half_psi = psi_cap(&green, 1, &traj.mesh().interval(j))? / 2.0;
            terms.t.push(step.t_cur);
            terms.weight.push(ctx.weight(step.t_cur));
            terms.f_hat.push(green.kappa0 * data_oscillation(OscillationKind::FHat, &step, ctx)?);
            terms.delta_psi.push(half_psi * ctx.norm(&d_psi[j]));
            if with_q {
                let fs = &step.forcing;
                let c = -4.0 / (tau * tau);
                let beta = Field::lincomb(&[(c, fs.cur), (-2.0 * c, fs.half), (c, fs.prev)]);
                let q = ctx.disc.operator.solve_elliptic(&beta)?;
                terms
                    .f_tilde
                    .push(green.kappa0 * data_oscillation(OscillationKind::FTilde, &step, ctx)?);
                terms.dpsi_q.push(half_psi * ctx.norm(&(&d_psi[j] - &q)));
            }
        }
        terms.d_psi = d_psi;
        Ok(terms)
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
        variant: CrankNicolsonVariant,
        traj: &Trajectory,
        ctx: &EstimatorContext<'_>,
    ) -> Result<EstimatorReport> {
        use CrankNicolsonVariant as V;
        let m = self.t.len();
        if let V::CnKl2 { j } = variant {
            return self.kl2(j, traj, ctx);
        }
        let steps = (0..m)
            .map(|i| {
                let cn1 = self.f_hat[i] + self.delta_psi[i];
                let one = [("eta_f_hat", self.f_hat[i]), ("eta_delta_psi", self.delta_psi[i])];
                match variant {
                    V::Cn1 => self.step(i, one.to_vec(), cn1),
                    V::Cn2 | V::CnComb => {
                        let two = [("eta_f_tilde", self.f_tilde[i]), ("eta_dpsi_q", self.dpsi_q[i])];
                        let cn2 = self.f_tilde[i] + self.dpsi_q[i];
                        if variant == V::Cn2 {
                            self.step(i, two.to_vec(), cn2)
                        } else {
                            self.step(i, [one, two].concat(), cn1.min(cn2))
                        }
                    }
                    V::CnKl2 { .. } => unreachable!(),
                }
            })
            .collect();
        Ok(EstimatorReport::assemble(
            Estimator::CrankNicolson(variant),
            steps,
            Vec::new(),
        ))
    }

    fn kl2(&self, big_j: usize, traj: &Trajectory, ctx: &EstimatorContext<'_>) -> Result<EstimatorReport> {
        let m = self.t.len();
        check_j(big_j, m)?;
        let green = *ctx.green();
        let mesh = traj.mesh();
        let tau_m = mesh.tau(m);
        let mut steps = Vec::with_capacity(m);
        for i in 0..m {
            let j = i + 1;
            let fh = self.f_hat[i];
            if j < big_j || j == m {
                let dp = self.delta_psi[i];
                steps.push(self.step(i, vec![("eta_f_hat", fh), ("eta_delta_psi", dp)], fh + dp));
            } else {
                let iv = mesh.interval(j);
                let tau = iv.tau();
                let star = (green.kappa2 * sigma_star(&iv)? + green.kappa2p * tau.powi(4) / 144.0)
                    * ctx.norm(&self.d_psi[j]);
                // W_ψ^j = (1/12)[τ_j²δₜψ^j − τ_M²δₜψ^M]
                let w = Field::lincomb(&[
                    (tau * tau / 12.0, &self.d_psi[j]),
                    (-tau_m * tau_m / 12.0, &self.d_psi[m]),
                ]);
                let eta_w = theta(&green, &iv)? * ctx.norm(&w);
                steps.push(self.step(
                    i,
                    vec![("eta_f_hat", fh), ("eta_delta_psi_star", star), ("eta_W_psi", eta_w)],
                    fh + star + eta_w,
                ));
            }
        }
        let endpoint = green.kappa0 * tau_m * tau_m / 12.0
            * (ctx.weight(mesh.t(m - 1)) + ctx.weight(mesh.t(big_j - 1)))
            * ctx.norm(&self.d_psi[m]);
        Ok(EstimatorReport::assemble(
            Estimator::CrankNicolson(CrankNicolsonVariant::CnKl2 { j: big_j }),
            steps,
            vec![("endpoint", endpoint)],
        ))
    }
}

/// Crank–Nicolson bounds: `CN1` (`η_f̂ + η_δψ`), `CN2` (`η_f̃ + η_δψq`, with
/// `Lq^j = β^j`), `CNCOMB` (per-step minimum) and `CNKL2(J)`.
pub fn estimate_crank_nicolson(
    traj: &Trajectory,
    variant: CrankNicolsonVariant,
    ctx: &EstimatorContext<'_>,
) -> Result<EstimatorReport> {
    let with_q = matches!(variant, CrankNicolsonVariant::Cn2 | CrankNicolsonVariant::CnComb);
    Terms::gather(traj, ctx, with_q)?.report(variant, traj, ctx)
}

/// Several Crank–Nicolson bounds sharing one pass over the trajectory.
pub fn estimate_crank_nicolson_all(
    traj: &Trajectory,
    variants: &[CrankNicolsonVariant],
    ctx: &EstimatorContext<'_>,
) -> Result<Vec<EstimatorReport>> {
    let with_q = variants
        .iter()
        .any(|v| matches!(v, CrankNicolsonVariant::Cn2 | CrankNicolsonVariant::CnComb));
    let terms = Terms::gather(traj, ctx, with_q)?;
    variants
        .iter()
        .map(|&v| terms.report(v, traj, ctx))
        .collect()
}
