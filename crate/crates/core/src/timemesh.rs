use crate::error::{Error, Result};
use crate::greens::Interval;

/// Strictly increasing time points `0 = t₀ < t₁ < … < t_M = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    points: Vec<f64>,
}

impl TimeMesh {
    /// `M` equal steps of size `T/M`.
    pub fn uniform(steps: usize, horizon: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Mesh("at least one step is required".into()));
        }
        check_horizon(horizon)?;
        let m = steps as f64;
        let mut points: Vec<f64> = (0..=steps).map(|j| j as f64 * horizon / m).collect();
        points[steps] = horizon;
        Self::from_points(points)
    }

    /// Alternating steps `h, 2h, h, 2h, …` with `h = 2T/(3M)`, so that
    /// `τ_j = 2τ_{j−1}` for every even `j`.
    pub fn pair_doubling(steps: usize, horizon: f64) -> Result<Self> {
        if steps == 0 || !steps.is_multiple_of(2) {
            return Err(Error::Mesh(format!(
                "pair-doubling mesh needs an even, positive step count (got {steps})"
            )));
        }
        check_horizon(horizon)?;
        let pairs = (steps / 2) as f64;
        let h = 2.0 * horizon / (3.0 * steps as f64);
        let mut points = Vec::with_capacity(steps + 1);
        for p in 0..steps / 2 {
            // anchor each pair at an exact multiple of 3h to avoid drift
            let start = p as f64 * horizon / pairs;
            points.push(start);
            points.push(start + h);
        }
        points.push(horizon);
        Self::from_points(points)
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Mesh("a mesh needs at least two points".into()));
        }
        if points[0] != 0.0 {
            return Err(Error::Mesh(format!("mesh must start at 0, not {}", points[0])));
        }
        if let Some(w) = points.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Mesh(format!(
                "points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// `t_j`, `0 ≤ j ≤ M`.
    pub fn t(&self, j: usize) -> f64 {
        self.points[j]
    }

    /// `τ_j = t_j − t_{j−1}`, `1 ≤ j ≤ M`.
    pub fn tau(&self, j: usize) -> f64 {
        self.points[j] - self.points[j - 1]
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.windows(2).map(|w| w[1] - w[0])
    }

    /// `t_j − ς τ_j`.
    pub fn t_frac(&self, j: usize, back: f64) -> f64 {
        self.points[j] - back * self.tau(j)
    }

    /// `I_j` as an interval with this mesh's horizon.
    pub fn interval(&self, j: usize) -> Interval {
        Interval {
            t_lo: self.points[j - 1],
            t_hi: self.points[j],
            horizon: self.horizon(),
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::Mesh(format!("horizon must be positive, got {horizon}")))
    }
}
