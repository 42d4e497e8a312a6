//! Shared setup for the criterion benches.

use apost_core::{Discretisation, ParabolicProblem, TimeMesh};

/// Tabulated test problem at the default spectral degree with a pair-doubling mesh.
pub fn setup(steps: usize) -> (ParabolicProblem, Discretisation, TimeMesh) {
    let problem = ParabolicProblem::tabulated_test_problem();
    let disc = Discretisation::new(&problem, 31).expect("discretisation");
    let mesh = TimeMesh::pair_doubling(steps, problem.horizon()).expect("mesh");
    (problem, disc, mesh)
}
