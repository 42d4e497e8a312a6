use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::spatial::{EllipticOperator, Field};

/// Coefficients of a stiffly accurate collocation method (last node `c = 1`).
#[derive(Debug, Clone, Copy)]
pub struct CollocationTableau<const S: usize> {
    pub nodes: [f64; S],
    pub matrix: [[f64; S]; S],
}

/// Two-stage Radau IIA; on linear problems it coincides with dG(1).
pub const RADAU_IIA_2: CollocationTableau<2> = CollocationTableau {
    nodes: [1.0 / 3.0, 1.0],
    matrix: [[5.0 / 12.0, -1.0 / 12.0], [3.0 / 4.0, 1.0 / 4.0]],
};

const SQRT6: f64 = 2.449_489_742_783_178;

/// Three-stage Radau IIA, classical order 5.
pub const RADAU_IIA_3: CollocationTableau<3> = CollocationTableau {
    nodes: [(4.0 - SQRT6) / 10.0, (4.0 + SQRT6) / 10.0, 1.0],
    matrix: [
        [
            (88.0 - 7.0 * SQRT6) / 360.0,
            (296.0 - 169.0 * SQRT6) / 1800.0,
            (-2.0 + 3.0 * SQRT6) / 225.0,
        ],
        [
            (296.0 + 169.0 * SQRT6) / 1800.0,
            (88.0 + 7.0 * SQRT6) / 360.0,
            (-2.0 - 3.0 * SQRT6) / 225.0,
        ],
        [(16.0 - SQRT6) / 36.0, (16.0 + SQRT6) / 36.0, 1.0 / 9.0],
    ],
};

/// Solves the coupled stage system `K_i + τ Σ a_ik L K_k = U + τ Σ a_ik f_k`
/// as one dense block system, caching factorisations by step size.
pub(crate) struct CollocationSolver<'a, const S: usize> {
    tableau: CollocationTableau<S>,
    operator: &'a EllipticOperator,
    cache: Vec<(f64, LU<f64, Dyn, Dyn>)>,
}

impl<'a, const S: usize> CollocationSolver<'a, S> {
    pub fn new(tableau: CollocationTableau<S>, operator: &'a EllipticOperator) -> Self {
        Self {
            tableau,
            operator,
            cache: Vec::new(),
        }
    }

    fn factorisation(&mut self, tau: f64) -> Result<usize> {
        if let Some(i) = self
            .cache
            .iter()
            .position(|(t, _)| (t - tau).abs() <= 1e-13 * tau)
        {
            return Ok(i);
        }
        let a = self.operator.interior_matrix();
        let n = a.nrows();
        let mut block = DMatrix::zeros(S * n, S * n);
        for i in 0..S {
            for k in 0..S {
                let c = tau * self.tableau.matrix[i][k];
                if c != 0.0 {
                    let mut view = block.view_mut((i * n, k * n), (n, n));
                    view += a * c;
                }
            }
        }
        for d in 0..S * n {
            block[(d, d)] += 1.0;
        }
        let lu = block.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        if self.cache.len() >= 16 {
            self.cache.remove(0);
        }
        self.cache.push((tau, lu));
        Ok(self.cache.len() - 1)
    }

    /// Stage values `K_1 … K_S` for one step of size `tau` from `start`, given
    /// `f` at the stage times.
    pub fn step(&mut self, tau: f64, start: &Field, forcing: [&Field; S]) -> Result<[Field; S]> {
        let idx = self.factorisation(tau)?;
        let len = start.len();
        let n = len - 2;
        let mut rhs = DVector::zeros(S * n);
        for i in 0..S {
            let mut seg = rhs.rows_mut(i * n, n);
            seg.copy_from(&start.as_vector().rows(1, n));
            for k in 0..S {
                let c = tau * self.tableau.matrix[i][k];
                if c != 0.0 {
                    seg.axpy(c, &forcing[k].as_vector().rows(1, n), 1.0);
                }
            }
        }
        let x = self.cache[idx].1.solve(&rhs).ok_or(Error::Singular)?;
        Ok(std::array::from_fn(|i| {
            let mut v = vec![0.0; len];
            for (dst, src) in v[1..len - 1].iter_mut().zip(x.rows(i * n, n).iter()) {
                *dst = *src;
            }
            Field::from_vec(v)
        }))
    }
}
