//! Chebyshev–Gauss–Lobatto collocation on `[−1, 1]` with homogeneous
//! Dirichlet conditions.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};

pub const DEFAULT_DEGREE: usize = 31;
pub const DEFAULT_SAMPLING: usize = 1001;

const BOUNDARY_TOL: f64 = 1e-12;

/// Nodal values of a spatial function, boundary nodes included.
#[derive(Debug, Clone, PartialEq)]
pub struct Field(DVector<f64>);

impl Field {
    pub fn zeros(len: usize) -> Self {
        Self(DVector::zeros(len))
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(DVector::from_vec(values))
    }

    pub fn from_fn(grid: &SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self(DVector::from_iterator(
            grid.len(),
            grid.nodes().iter().map(|&x| f(x)),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    /// `Σ cᵢ vᵢ`; all fields must have the same length.
    pub fn lincomb(terms: &[(f64, &Field)]) -> Field {
        let mut out = terms[0].1 .0.clone() * terms[0].0;
        for (c, v) in &terms[1..] {
            out.axpy(*c, &v.0, 1.0);
        }
        Field(out)
    }

    pub fn scale(&self, c: f64) -> Field {
        Field(&self.0 * c)
    }

    /// Largest absolute nodal value.
    pub fn nodal_max(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn boundary_max(&self) -> f64 {
        let n = self.0.len();
        self.0[0].abs().max(self.0[n - 1].abs())
    }

    /// Copies the two boundary values of `other`.
    pub fn set_boundary(&mut self, other: &Field) {
        let n = self.0.len();
        self.0[0] = other.0[0];
        self.0[n - 1] = other.0[n - 1];
    }

    /// Copy with both boundary values set to zero.
    pub fn interior_part(&self) -> Field {
        let mut v = self.clone();
        let n = v.0.len();
        v.0[0] = 0.0;
        v.0[n - 1] = 0.0;
        v
    }

    fn interior(&self) -> DVector<f64> {
        let n = self.0.len();
        self.0.rows(1, n - 2).into_owned()
    }

    fn from_interior(interior: &DVector<f64>) -> Field {
        let n = interior.len() + 2;
        let mut v = DVector::zeros(n);
        v.rows_mut(1, n - 2).copy_from(interior);
        Field(v)
    }
}

macro_rules! field_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Field> for &Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                Field(&self.0 $op &rhs.0)
            }
        }
        impl $trait<Field> for Field {
            type Output = Field;
            fn $method(self, rhs: Field) -> Field {
                Field(self.0 $op rhs.0)
            }
        }
        impl $trait<&Field> for Field {
            type Output = Field;
            fn $method(self, rhs: &Field) -> Field {
                Field(self.0 $op &rhs.0)
            }
        }
    };
}

field_binop!(Add, add, +);
field_binop!(Sub, sub, -);

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        Field(&self.0 * rhs)
    }
}

impl Mul<f64> for Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        Field(self.0 * rhs)
    }
}

impl Neg for Field {
    type Output = Field;
    fn neg(self) -> Field {
        Field(-self.0)
    }
}

/// Chebyshev–Gauss–Lobatto nodes (ascending) with collocation
/// differentiation matrices.
#[derive(Debug)]
pub struct SpatialGrid {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    diff1: DMatrix<f64>,
    diff2: DMatrix<f64>,
    samplers: Mutex<Vec<(usize, Arc<DMatrix<f64>>)>>,
}

impl SpatialGrid {
    /// Grid for polynomials of degree `N ≥ 2` on the nodes `−cos(iπ/N)`.
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Domain(format!(
                "collocation degree must be at least 2, got {degree}"
            )));
        }
        let n = degree;
        let nodes: Vec<f64> = (0..=n)
            .map(|i| {
                // sin form keeps the nodes exactly antisymmetric
                (PI * (2.0 * i as f64 - n as f64) / (2.0 * n as f64)).sin()
            })
            .collect();
        let weights: Vec<f64> = (0..=n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == n {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
        let mut diff1 = DMatrix::zeros(n + 1, n + 1);
        for i in 0..=n {
            let mut row_sum = 0.0;
            for j in 0..=n {
                if i != j {
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    let d = c(i) / c(j) * sign / (nodes[i] - nodes[j]);
                    diff1[(i, j)] = d;
                    row_sum += d;
                }
            }
            diff1[(i, i)] = -row_sum;
        }
        let mut diff2 = &diff1 * &diff1;
        for i in 0..=n {
            let off: f64 = (0..=n).filter(|&j| j != i).map(|j| diff2[(i, j)]).sum();
            diff2[(i, i)] = -off;
        }
        Ok(Self {
            degree,
            nodes,
            weights,
            diff1,
            diff2,
            samplers: Mutex::new(Vec::new()),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn diff1(&self) -> &DMatrix<f64> {
        &self.diff1
    }

    pub fn diff2(&self) -> &DMatrix<f64> {
        &self.diff2
    }

    pub fn differentiate(&self, u: &Field) -> Field {
        Field(&self.diff1 * &u.0)
    }

    pub fn check(&self, u: &Field) -> Result<()> {
        if u.len() == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.len(),
                found: u.len(),
            })
        }
    }

    /// Barycentric evaluation of the interpolant of `u` at `x`.
    pub fn interpolate(&self, u: &Field, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xi, &wi), &ui) in self.nodes.iter().zip(&self.weights).zip(u.values()) {
            let d = x - xi;
            if d == 0.0 {
                return ui;
            }
            let q = wi / d;
            num += q * ui;
            den += q;
        }
        num / den
    }

    fn sampler(&self, sampling: usize) -> Arc<DMatrix<f64>> {
        let mut cache = self.samplers.lock().unwrap();
        if let Some((_, m)) = cache.iter().find(|(s, _)| *s == sampling) {
            return Arc::clone(m);
        }
        let n = self.len();
        let mut m = DMatrix::zeros(sampling, n);
        for p in 0..sampling {
            let x = -1.0 + 2.0 * p as f64 / (sampling - 1) as f64;
            if let Some(k) = self.nodes.iter().position(|&xi| xi == x) {
                m[(p, k)] = 1.0;
                continue;
            }
            let q: Vec<f64> = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&xi, &wi)| wi / (x - xi))
                .collect();
            let den: f64 = q.iter().sum();
            for (k, qk) in q.iter().enumerate() {
                m[(p, k)] = qk / den;
            }
        }
        let m = Arc::new(m);
        cache.push((sampling, Arc::clone(&m)));
        m
    }

    /// Maximum of `|interpolant of u|` over `sampling` equispaced points on
    /// `[−1, 1]` together with the nodes.
    pub fn max_norm(&self, u: &Field, sampling: usize) -> f64 {
        assert!(sampling >= 2, "max_norm needs at least two sample points");
        let m = self.sampler(sampling);
        let sampled = &*m * &u.0;
        sampled
            .iter()
            .fold(u.nodal_max(), |acc, v| acc.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SystemKey {
    Shifted(f64),
    Pure,
}

type Factorisation = Arc<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>;

/// `L = −d²/dx² + c(x)` on the interior nodes, Dirichlet values eliminated.
#[derive(Debug)]
pub struct EllipticOperator {
    interior: DMatrix<f64>,
    coefficient: Vec<f64>,
    factorisations: Mutex<Vec<(SystemKey, Factorisation)>>,
}

/// Two shifts closer than this (relative) share a factorisation.
const SHIFT_MATCH: f64 = 1e-13;

impl EllipticOperator {
    pub fn new(grid: &SpatialGrid, reaction: impl Fn(f64) -> f64) -> Self {
        let n = grid.len();
        let coefficient: Vec<f64> = grid.nodes().iter().map(|&x| reaction(x)).collect();
        let mut interior = -grid.diff2().view((1, 1), (n - 2, n - 2)).into_owned();
        for i in 0..n - 2 {
            interior[(i, i)] += coefficient[i + 1];
        }
        Self {
            interior,
            coefficient,
            factorisations: Mutex::new(Vec::new()),
        }
    }

    pub fn interior_matrix(&self) -> &DMatrix<f64> {
        &self.interior
    }

    pub fn coefficient(&self) -> &[f64] {
        &self.coefficient
    }

    /// Number of nodes of the underlying grid.
    pub fn nodes(&self) -> usize {
        self.interior.nrows() + 2
    }

    fn check_field(&self, u: &Field) -> Result<()> {
        if u.len() != self.nodes() {
            return Err(Error::GridMismatch {
                expected: self.nodes(),
                found: u.len(),
            });
        }
        Ok(())
    }

    /// `L u` at the interior nodes, zero on the boundary.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        self.check_field(u)?;
        let b = u.boundary_max();
        if b > BOUNDARY_TOL * u.nodal_max().max(1.0) {
            return Err(Error::Boundary(b));
        }
        Ok(Field::from_interior(&(&self.interior * u.interior())))
    }

    fn factorisation(&self, key: SystemKey) -> Result<Factorisation> {
        let mut cache = self.factorisations.lock().unwrap();
        let found = cache.iter().find(|(k, _)| match (k, &key) {
            (SystemKey::Pure, SystemKey::Pure) => true,
            (SystemKey::Shifted(a), SystemKey::Shifted(b)) => {
                (a - b).abs() <= SHIFT_MATCH * a.abs().max(b.abs())
            }
            _ => false,
        });
        if let Some((_, lu)) = found {
            return Ok(Arc::clone(lu));
        }
        let matrix = match key {
            SystemKey::Pure => self.interior.clone(),
            SystemKey::Shifted(alpha) => {
                let mut m = &self.interior * alpha;
                for i in 0..m.nrows() {
                    m[(i, i)] += 1.0;
                }
                m
            }
        };
        let lu = matrix.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        let lu = Arc::new(lu);
        // the pair-doubling mesh has two step sizes; keep the cache small regardless
        if cache.len() >= 16 {
            cache.remove(0);
        }
        cache.push((key, Arc::clone(&lu)));
        Ok(lu)
    }

    fn solve_with(&self, key: SystemKey, rhs: &Field) -> Result<Field> {
        self.check_field(rhs)?;
        let lu = self.factorisation(key)?;
        let x = lu.solve(&rhs.interior()).ok_or(Error::Singular)?;
        Ok(Field::from_interior(&x))
    }

    /// Solves `(I + αL)u = rhs` on the interior; `u` vanishes on the boundary.
    pub fn solve_shifted(&self, alpha: f64, rhs: &Field) -> Result<Field> {
        if !(alpha >= 0.0) {
            return Err(Error::Domain(format!("shift must be non-negative, got {alpha}")));
        }
        self.solve_with(SystemKey::Shifted(alpha), rhs)
    }

    /// Solves `L u = rhs` on the interior.
    pub fn solve_elliptic(&self, rhs: &Field) -> Result<Field> {
        self.solve_with(SystemKey::Pure, rhs)
    }
}
