//! Time-stepping schemes and the trajectories they record.

mod collocation;
mod schemes;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problems::ParabolicProblem;
use crate::spatial::{EllipticOperator, Field, SpatialGrid};
use crate::timemesh::TimeMesh;

pub use collocation::{CollocationTableau, RADAU_IIA_2, RADAU_IIA_3};
pub use schemes::{
    run_backward_euler, run_bdf2, run_crank_nicolson, run_dg1, run_extrapolated_euler,
    run_reference, ExtrapolatedRun,
};

/// Scheme that produced a [`Trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BackwardEuler,
    CrankNicolson,
    /// `V`: one backward Euler step per interval.
    EulerOneStep,
    /// `W`: two backward Euler half steps per interval.
    EulerTwoStep,
    /// `U = 2W − V`.
    ExtrapolatedEuler,
    Dg1,
    Bdf2,
    /// Three-stage Radau IIA collocation, order 5.
    Reference,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::BackwardEuler => "backward-euler",
            Method::CrankNicolson => "crank-nicolson",
            Method::EulerOneStep => "euler-one-step",
            Method::EulerTwoStep => "euler-two-step",
            Method::ExtrapolatedEuler => "extrapolated-euler",
            Method::Dg1 => "dg1",
            Method::Bdf2 => "bdf2",
            Method::Reference => "radau-iia-3",
        };
        f.write_str(name)
    }
}

/// Spatial grid plus the collocated elliptic operator of a problem.
#[derive(Debug)]
pub struct Discretisation {
    pub grid: SpatialGrid,
    pub operator: EllipticOperator,
}

impl Discretisation {
    pub fn new(problem: &ParabolicProblem, degree: usize) -> Result<Self> {
        let grid = SpatialGrid::new(degree)?;
        let operator = EllipticOperator::new(&grid, |x| problem.reaction(x));
        Ok(Self { grid, operator })
    }
}

/// Samples of `f` on every interval of a mesh: the nodes `t_j` and the
/// interior points `t_{j−3/4}`, `t_{j−1/2}`, `t_{j−1/4}` and, for dG(1),
/// `t_{j−2/3}`.
#[derive(Debug, Clone)]
pub struct ForcingSamples {
    nodes: Vec<Field>,
    quarter_early: Vec<Field>,
    half: Vec<Field>,
    quarter_late: Vec<Field>,
    two_thirds: Option<Vec<Field>>,
}

impl ForcingSamples {
    pub fn gather(
        problem: &ParabolicProblem,
        grid: &SpatialGrid,
        mesh: &TimeMesh,
        with_two_thirds: bool,
    ) -> Self {
        let m = mesh.steps();
        let at = |t: f64| problem.forcing_field(grid, t);
        let interior = |back: f64| (1..=m).map(|j| at(mesh.t_frac(j, back))).collect();
        Self {
            nodes: mesh.points().iter().map(|&t| at(t)).collect(),
            quarter_early: interior(0.75),
            half: interior(0.5),
            quarter_late: interior(0.25),
            two_thirds: with_two_thirds.then(|| interior(2.0 / 3.0)),
        }
    }

    /// `f^j`, `0 ≤ j ≤ M`.
    pub fn node(&self, j: usize) -> &Field {
        &self.nodes[j]
    }

    /// `f^{j−1/2}`, `1 ≤ j ≤ M`.
    pub fn half(&self, j: usize) -> &Field {
        &self.half[j - 1]
    }

    pub fn two_thirds(&self, j: usize) -> Option<&Field> {
        self.two_thirds.as_ref().map(|v| &v[j - 1])
    }

    fn step(&self, j: usize) -> StepForcing<'_> {
        StepForcing {
            prev: &self.nodes[j - 1],
            quarter_early: &self.quarter_early[j - 1],
            half: &self.half[j - 1],
            quarter_late: &self.quarter_late[j - 1],
            cur: &self.nodes[j],
            two_thirds: self.two_thirds(j),
        }
    }
}

/// Forcing samples on one interval `I_j`.
#[derive(Debug, Clone, Copy)]
pub struct StepForcing<'a> {
    /// `f^{j−1}`
    pub prev: &'a Field,
    /// `f^{j−3/4}`
    pub quarter_early: &'a Field,
    /// `f^{j−1/2}`
    pub half: &'a Field,
    /// `f^{j−1/4}`
    pub quarter_late: &'a Field,
    /// `f^j`
    pub cur: &'a Field,
    /// `f^{j−2/3}`, dG(1) only
    pub two_thirds: Option<&'a Field>,
}

/// View of step `j` of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<'a> {
    pub j: usize,
    pub t_prev: f64,
    pub t_cur: f64,
    pub u_prev: &'a Field,
    pub u_cur: &'a Field,
    /// `U^{j−2/3}` for dG(1), `W^{j−1/2}` for the two-step Euler run.
    pub stage: Option<&'a Field>,
    pub forcing: StepForcing<'a>,
}

impl StepRecord<'_> {
    pub fn tau(&self) -> f64 {
        self.t_cur - self.t_prev
    }
}

/// All time levels `U⁰ … U^M` of one run, with stage values and forcing samples.
#[derive(Debug, Clone)]
pub struct Trajectory {
    method: Method,
    mesh: TimeMesh,
    states: Vec<Field>,
    stages: Option<Vec<Field>>,
    forcing: Arc<ForcingSamples>,
}

impl Trajectory {
    pub(crate) fn new(
        method: Method,
        mesh: TimeMesh,
        states: Vec<Field>,
        stages: Option<Vec<Field>>,
        forcing: Arc<ForcingSamples>,
    ) -> Self {
        debug_assert_eq!(states.len(), mesh.steps() + 1);
        Self {
            method,
            mesh,
            states,
            stages,
            forcing,
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    /// Number of steps `M`.
    pub fn len(&self) -> usize {
        self.mesh.steps()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `U^j`, `0 ≤ j ≤ M`.
    pub fn state(&self, j: usize) -> &Field {
        &self.states[j]
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn stage(&self, j: usize) -> Option<&Field> {
        self.stages.as_ref().map(|s| &s[j - 1])
    }

    pub fn forcing(&self) -> &ForcingSamples {
        &self.forcing
    }

    pub fn final_state(&self) -> &Field {
        &self.states[self.states.len() - 1]
    }

    pub fn step(&self, j: usize) -> StepRecord<'_> {
        StepRecord {
            j,
            t_prev: self.mesh.t(j - 1),
            t_cur: self.mesh.t(j),
            u_prev: &self.states[j - 1],
            u_cur: &self.states[j],
            stage: self.stage(j),
            forcing: self.forcing.step(j),
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = StepRecord<'_>> {
        (1..=self.len()).map(move |j| self.step(j))
    }
}

/// `‖U^M − U_ref^M‖_∞` sampled on the grid.
pub fn final_error(
    traj: &Trajectory,
    reference: &Trajectory,
    grid: &SpatialGrid,
    sampling: usize,
) -> Result<f64> {
    grid.check(traj.final_state())?;
    grid.check(reference.final_state())?;
    let (t, r) = (traj.mesh.horizon(), reference.mesh.horizon());
    if (t - r).abs() > 1e-12 * t.abs().max(1.0) {
        return Err(Error::Trajectory(format!(
            "final times differ: {t} vs {r}"
        )));
    }
    Ok(grid.max_norm(&(traj.final_state() - reference.final_state()), sampling))
}
