use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::greens::GreenFunctionBounds;
use crate::spatial::{Field, SpatialGrid};

type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `∂ₜu − u_xx + c(x)u = f(x, t)` on `(−1, 1) × (0, T]`, `u(±1, t) = 0`,
/// `u(x, 0) = u⁰(x)`, together with the Green's-function constants that hold
/// for it.
#[derive(Clone)]
pub struct ParabolicProblem {
    reaction: SpaceFn,
    forcing: SpaceTimeFn,
    initial: SpaceFn,
    horizon: f64,
    green: GreenFunctionBounds,
}

impl fmt::Debug for ParabolicProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParabolicProblem")
            .field("horizon", &self.horizon)
            .field("green", &self.green)
            .finish_non_exhaustive()
    }
}

impl ParabolicProblem {
    pub fn new(
        reaction: impl Fn(f64) -> f64 + Send + Sync + 'static,
        forcing: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        initial: impl Fn(f64) -> f64 + Send + Sync + 'static,
        horizon: f64,
        green: GreenFunctionBounds,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        green.validate()?;
        let edge = initial(-1.0).abs().max(initial(1.0).abs());
        if edge > 1e-12 {
            return Err(Error::Boundary(edge));
        }
        Ok(Self {
            reaction: Arc::new(reaction),
            forcing: Arc::new(forcing),
            initial: Arc::new(initial),
            horizon,
            green,
        })
    }

    /// Reaction–diffusion problem with `c(x) = 5x + 6`,
    /// `f = e^{−4t} − cos(π(x+t)³)`, `u⁰ = sin(π(1+x)/2)` and `T = 1`.
    ///
    /// The Green's function obeys `‖G(t)‖₁ ≤ e^{−t/2}` and
    /// `‖∂ₜᵖG(t)‖₁ ≤ 3/2^{3/2} · p! 18^{p−1} t^{−p} e^{−t/2}` for `p = 1, 2`.
    pub fn test_problem() -> Self {
        Self::test_problem_with_sign(-1.0)
    }

    /// The configuration the published error and estimator tables correspond
    /// to: [`Self::test_problem`] with `f = e^{−4t} + cos(π(x+t)³)` and decay
    /// rate `γ = 1/√2` in the weights.
    ///
    /// The plus sign makes `f(±1, 0) = 0 = (Lu⁰)(±1)`, so data and initial
    /// values are compatible at the corners.
    pub fn tabulated_test_problem() -> Self {
        let p = Self::test_problem_with_sign(1.0);
        let green = GreenFunctionBounds {
            gamma: std::f64::consts::FRAC_1_SQRT_2,
            ..p.green
        };
        p.with_green(green)
    }

    fn test_problem_with_sign(sign: f64) -> Self {
        let k1 = 3.0 / 2f64.powf(1.5);
        let green = GreenFunctionBounds {
            kappa0: 1.0,
            kappa1: k1,
            kappa2: k1 * 2.0 * 18.0,
            kappa1p: 0.0,
            kappa2p: 0.0,
            gamma: 0.5,
        };
        Self::new(
            |x| 5.0 * x + 6.0,
            move |x, t| (-4.0 * t).exp() + sign * (PI * (x + t).powi(3)).cos(),
            |x| (PI * (1.0 + x) / 2.0).sin(),
            1.0,
            green,
        )
        .expect("test problem is well posed")
    }

    /// Same operator with forcing and initial data multiplied by `factor`.
    pub fn scaled_data(&self, factor: f64) -> Self {
        let forcing = Arc::clone(&self.forcing);
        let initial = Arc::clone(&self.initial);
        Self {
            reaction: Arc::clone(&self.reaction),
            forcing: Arc::new(move |x, t| factor * forcing(x, t)),
            initial: Arc::new(move |x| factor * initial(x)),
            horizon: self.horizon,
            green: self.green,
        }
    }

    pub fn reaction(&self, x: f64) -> f64 {
        (self.reaction)(x)
    }

    pub fn forcing(&self, x: f64, t: f64) -> f64 {
        (self.forcing)(x, t)
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn green(&self) -> &GreenFunctionBounds {
        &self.green
    }

    pub fn with_green(mut self, green: GreenFunctionBounds) -> Self {
        self.green = green;
        self
    }

    /// `f(·, t)` at the grid nodes.
    pub fn forcing_field(&self, grid: &SpatialGrid, t: f64) -> Field {
        Field::from_fn(grid, |x| self.forcing(x, t))
    }

    /// `u⁰` at the grid nodes, boundary values set to exactly zero.
    pub fn initial_field(&self, grid: &SpatialGrid) -> Field {
        let n = grid.len();
        let mut values: Vec<f64> = grid.nodes().iter().map(|&x| self.initial(x)).collect();
        values[0] = 0.0;
        values[n - 1] = 0.0;
        Field::from_vec(values)
    }
}
