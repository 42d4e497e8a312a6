use std::sync::Arc;

use super::collocation::{CollocationSolver, RADAU_IIA_2, RADAU_IIA_3};
use super::{Discretisation, ForcingSamples, Method, Trajectory};
use crate::error::{Error, Result};
use crate::problems::ParabolicProblem;
use crate::spatial::Field;
use crate::timemesh::TimeMesh;

fn samples(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
    two_thirds: bool,
) -> Result<Arc<ForcingSamples>> {
    if (mesh.horizon() - problem.horizon()).abs() > 1e-12 * problem.horizon() {
        return Err(Error::Domain(format!(
            "mesh ends at {} but the problem horizon is {}",
            mesh.horizon(),
            problem.horizon()
        )));
    }
    Ok(Arc::new(ForcingSamples::gather(
        problem,
        &disc.grid,
        mesh,
        two_thirds,
    )))
}

/// `δₜU^j + LU^j = f^j`, i.e. `(I + τ_j L)U^j = U^{j−1} + τ_j f^j`.
pub fn run_backward_euler(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
) -> Result<Trajectory> {
    let forcing = samples(problem, mesh, disc, false)?;
    let states = euler_states(problem, mesh, disc, &forcing)?;
    Ok(Trajectory::new(
        Method::BackwardEuler,
        mesh.clone(),
        states,
        None,
        forcing,
    ))
}

fn euler_states(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
    forcing: &ForcingSamples,
) -> Result<Vec<Field>> {
    let mut states = Vec::with_capacity(mesh.steps() + 1);
    states.push(problem.initial_field(&disc.grid));
    for j in 1..=mesh.steps() {
        let tau = mesh.tau(j);
        let rhs = Field::lincomb(&[(1.0, &states[j - 1]), (tau, forcing.node(j))]);
        states.push(disc.operator.solve_shifted(tau, &rhs)?);
    }
    Ok(states)
}

/// `(I + τ/2 L)U^j = (I − τ/2 L)U^{j−1} + τ/2 (f^j + f^{j−1})`.
pub fn run_crank_nicolson(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
) -> Result<Trajectory> {
    let forcing = samples(problem, mesh, disc, false)?;
    let mut states = Vec::with_capacity(mesh.steps() + 1);
    states.push(problem.initial_field(&disc.grid));
    for j in 1..=mesh.steps() {
        let half = 0.5 * mesh.tau(j);
        let prev = &states[j - 1];
        let l_prev = disc.operator.apply(prev)?;
        let rhs = Field::lincomb(&[
            (1.0, prev),
            (-half, &l_prev),
            (half, forcing.node(j)),
            (half, forcing.node(j - 1)),
        ]);
        states.push(disc.operator.solve_shifted(half, &rhs)?);
    }
    Ok(Trajectory::new(
        Method::CrankNicolson,
        mesh.clone(),
        states,
        None,
        forcing,
    ))
}

/// The three runs of the extrapolated Euler method.
#[derive(Debug, Clone)]
pub struct ExtrapolatedRun {
    /// `V`: one Euler step per interval.
    pub coarse: Trajectory,
    /// `W`: two Euler half steps per interval; stages hold `W^{j−1/2}`.
    pub fine: Trajectory,
    /// `U = 2W − V`.
    pub extrapolated: Trajectory,
}

pub fn run_extrapolated_euler(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
) -> Result<ExtrapolatedRun> {
    let forcing = samples(problem, mesh, disc, false)?;
    let coarse = euler_states(problem, mesh, disc, &forcing)?;
    let m = mesh.steps();
    let mut fine = Vec::with_capacity(m + 1);
    let mut halves = Vec::with_capacity(m);
    fine.push(problem.initial_field(&disc.grid));
    for j in 1..=m {
        let half = 0.5 * mesh.tau(j);
        let rhs = Field::lincomb(&[(1.0, &fine[j - 1]), (half, forcing.half(j))]);
        let w_half = disc.operator.solve_shifted(half, &rhs)?;
        let rhs = Field::lincomb(&[(1.0, &w_half), (half, forcing.node(j))]);
        fine.push(disc.operator.solve_shifted(half, &rhs)?);
        halves.push(w_half);
    }
    let mut extrapolated = Vec::with_capacity(m + 1);
    extrapolated.push(fine[0].clone());
    for j in 1..=m {
        extrapolated.push(Field::lincomb(&[(2.0, &fine[j]), (-1.0, &coarse[j])]));
    }
    Ok(ExtrapolatedRun {
        coarse: Trajectory::new(
            Method::EulerOneStep,
            mesh.clone(),
            coarse,
            None,
            Arc::clone(&forcing),
        ),
        fine: Trajectory::new(
            Method::EulerTwoStep,
            mesh.clone(),
            fine,
            Some(halves),
            Arc::clone(&forcing),
        ),
        extrapolated: Trajectory::new(
            Method::ExtrapolatedEuler,
            mesh.clone(),
            extrapolated,
            None,
            forcing,
        ),
    })
}

/// dG(1) in time: stage values `U^{j−2/3}` and `U^j` from the coupled system
///
/// ```text
/// U^{j−2/3} − U^{j−1} + τ/12 (5LU^{j−2/3} − LU^j) = τ/12 (5f^{j−2/3} − f^j)
/// U^j       − U^{j−1} + τ/4  (3LU^{j−2/3} + LU^j) = τ/4  (3f^{j−2/3} + f^j)
/// ```
pub fn run_dg1(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
) -> Result<Trajectory> {
    let forcing = samples(problem, mesh, disc, true)?;
    let mut solver = CollocationSolver::new(RADAU_IIA_2, &disc.operator);
    let m = mesh.steps();
    let mut states = Vec::with_capacity(m + 1);
    let mut stages = Vec::with_capacity(m);
    states.push(problem.initial_field(&disc.grid));
    for j in 1..=m {
        let f23 = forcing.two_thirds(j).ok_or(Error::MissingData("f^{j-2/3}"))?;
        let [a, b] = solver.step(mesh.tau(j), &states[j - 1], [f23, forcing.node(j)])?;
        stages.push(a);
        states.push(b);
    }
    Ok(Trajectory::new(
        Method::Dg1,
        mesh.clone(),
        states,
        Some(stages),
        forcing,
    ))
}

/// Variable-step BDF-2 started by one backward Euler step.
///
/// For `j ≥ 2`, `D_tU^j + LU^j = f^j` with
/// `D_t v^j = δₜv^j + τ_j(δₜv^j − δₜv^{j−1})/(τ_j + τ_{j−1})`.
pub fn run_bdf2(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
) -> Result<Trajectory> {
    let m = mesh.steps();
    if m < 2 {
        return Err(Error::Mesh("BDF-2 needs at least two steps".into()));
    }
    let forcing = samples(problem, mesh, disc, false)?;
    let mut states = Vec::with_capacity(m + 1);
    states.push(problem.initial_field(&disc.grid));
    let tau1 = mesh.tau(1);
    let rhs = Field::lincomb(&[(1.0, &states[0]), (tau1, forcing.node(1))]);
    states.push(disc.operator.solve_shifted(tau1, &rhs)?);
    for j in 2..=m {
        let (tau, tau_prev) = (mesh.tau(j), mesh.tau(j - 1));
        let omega = tau / (tau + tau_prev);
        let alpha = tau / (1.0 + omega);
        // (I + αL)U^j = U^{j−1} + α(f^j + ω δₜU^{j−1})
        let rhs = Field::lincomb(&[
            (1.0 + alpha * omega / tau_prev, &states[j - 1]),
            (-alpha * omega / tau_prev, &states[j - 2]),
            (alpha, forcing.node(j)),
        ]);
        states.push(disc.operator.solve_shifted(alpha, &rhs)?);
    }
    Ok(Trajectory::new(Method::Bdf2, mesh.clone(), states, None, forcing))
}

/// Order-5 reference: three-stage Radau IIA collocation on the given mesh.
pub fn run_reference(
    problem: &ParabolicProblem,
    mesh: &TimeMesh,
    disc: &Discretisation,
) -> Result<Trajectory> {
    let forcing = samples(problem, mesh, disc, false)?;
    let mut solver = CollocationSolver::new(RADAU_IIA_3, &disc.operator);
    let m = mesh.steps();
    let mut states = Vec::with_capacity(m + 1);
    states.push(problem.initial_field(&disc.grid));
    for j in 1..=m {
        let (t0, tau) = (mesh.t(j - 1), mesh.tau(j));
        let f: [Field; 3] = std::array::from_fn(|i| {
            problem.forcing_field(&disc.grid, t0 + RADAU_IIA_3.nodes[i] * tau)
        });
        let [_, _, last] = solver.step(tau, &states[j - 1], [&f[0], &f[1], forcing.node(j)])?;
        states.push(last);
    }
    Ok(Trajectory::new(
        Method::Reference,
        mesh.clone(),
        states,
        None,
        forcing,
    ))
}
