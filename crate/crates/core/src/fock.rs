//! Truncated Fock-space states and dense operators.
//!
//! Basis state `|n>` is index `n` for `n = 0 .. dim`. Ladder operators are
//! cut at the top basis state, so `[a, a+]` is the identity except for the
//! last diagonal entry, which carries `-(dim - 1)`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Tolerance on the norm for a state to be flagged normalized.
pub const NORMALIZED_TOL: f64 = 1e-10;

/// Relative tolerance of the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Pure state over the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<C64>,
    normalized: bool,
}

impl FockVector {
    /// Wraps raw amplitudes. The normalized flag is computed, not trusted.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, min: 1 });
        }
        let mut v = Self {
            amplitudes,
            normalized: false,
        };
        v.normalized = (v.norm() - 1.0).abs() <= NORMALIZED_TOL;
        Ok(v)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::number_state(0, dim)
    }

    /// `|n>` in a space of dimension `dim`.
    pub fn number_state(n: usize, dim: usize) -> Result<Self> {
        if dim == 0 || n >= dim {
            return Err(Error::InvalidDimension {
                dim,
                min: n + 1,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            normalized: true,
        })
    }

    /// Coherent state `|z>`, amplitudes from the recurrence
    /// `c(n) = c(n-1) z / sqrt(n)` so no factorial is ever formed.
    ///
    /// States whose Poisson tail does not fit in `dim` are still returned,
    /// just without the normalized flag.
    pub fn coherent(z: C64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, min: 1 });
        }
        let mut amplitudes = Vec::with_capacity(dim);
        let mut c = C64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
        amplitudes.push(c);
        for n in 1..dim {
            c = c * z / (n as f64).sqrt();
            amplitudes.push(c);
        }
        Self::from_amplitudes(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes[n]
    }

    /// True when the norm was within [`NORMALIZED_TOL`] of one at creation.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `<a+a>` computed directly from the populations.
    pub fn mean_photon_number(&self) -> f64 {
        photon_number(&self.amplitudes)
    }

    pub fn scaled(&self, s: C64) -> FockVector {
        let amps = self.amplitudes.iter().map(|c| c * s).collect();
        Self::from_amplitudes(amps).expect("dimension preserved")
    }
}

/// `sum n |c_n|^2` over a raw amplitude slice.
pub fn photon_number(amplitudes: &[C64]) -> f64 {
    amplitudes
        .iter()
        .enumerate()
        .map(|(n, c)| n as f64 * c.norm_sqr())
        .sum()
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Square complex matrix over the truncated basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal((0..dim).map(|_| C64::new(1.0, 0.0)))
    }

    pub fn from_diagonal<I: IntoIterator<Item = C64>>(diag: I) -> Self {
        let diag: Vec<C64> = diag.into_iter().collect();
        let mut op = Self::zeros(diag.len());
        for (n, d) in diag.into_iter().enumerate() {
            op[(n, n)] = d;
        }
        op
    }

    /// Real diagonal operator `f(n)`.
    pub fn diagonal_fn(dim: usize, f: impl Fn(usize) -> f64) -> Self {
        Self::from_diagonal((0..dim).map(|n| C64::new(f(n), 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[C64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|n| self[(n, n)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian to [`HERMITIAN_TOL`] relative to the largest entry.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= HERMITIAN_TOL * self.max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    pub fn matmul(&self, rhs: &DenseOperator) -> Result<Self> {
        check_dims(self.dim, rhs.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = &rhs.entries[k * n..(k + 1) * n];
                let out_row = &mut out.entries[i * n..(i + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `y = A x` on raw slices.
    pub fn apply_slice(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self
                .row(i)
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum::<C64>();
        }
    }

    pub fn apply(&self, state: &FockVector) -> Result<FockVector> {
        check_dims(self.dim, state.dim())?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_slice(state.amplitudes(), &mut out);
        FockVector::from_amplitudes(out)
    }

    /// `[self, other] = self other - other self`.
    pub fn commutator(&self, other: &DenseOperator) -> Result<Self> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let m = self.to_matrix();
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub fn from_matrix(m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let dim = m.nrows();
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                op[(i, j)] = m[(i, j)];
            }
        }
        Ok(op)
    }

    /// Matrix exponential, via nalgebra's scaling-and-squaring Padé.
    pub fn exp(&self) -> Self {
        Self::from_matrix(&self.to_matrix().exp()).expect("square")
    }
}

impl std::ops::Index<(usize, usize)> for DenseOperator {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseOperator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        DenseOperator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        DenseOperator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<&DenseOperator> for C64 {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        rhs.scale(self)
    }
}

impl Mul<&DenseOperator> for f64 {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        rhs.scale(C64::new(self, 0.0))
    }
}

/// Truncated annihilation operator: `a(n, n+1) = sqrt(n+1)`.
pub fn build_annihilation(dim: usize) -> Result<DenseOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let mut a = DenseOperator::zeros(dim);
    for n in 0..dim - 1 {
        a[(n, n + 1)] = C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn build_creation(dim: usize) -> Result<DenseOperator> {
    Ok(build_annihilation(dim)?.adjoint())
}

/// Ladder operators and the composites the model needs, all derived from
/// one annihilation matrix by products.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: DenseOperator,
    pub a_dag: DenseOperator,
    pub number: DenseOperator,
    pub a_sq: DenseOperator,
    pub a_dag_sq: DenseOperator,
    pub number_sq: DenseOperator,
    /// `a+^2 a^2`
    pub kerr: DenseOperator,
}

impl Ladder {
    pub fn new(dim: usize) -> Result<Self> {
        let a = build_annihilation(dim)?;
        let a_dag = a.adjoint();
        let number = a_dag.matmul(&a)?;
        let a_sq = a.matmul(&a)?;
        let a_dag_sq = a_dag.matmul(&a_dag)?;
        let number_sq = number.matmul(&number)?;
        let kerr = a_dag_sq.matmul(&a_sq)?;
        Ok(Self {
            a,
            a_dag,
            number,
            a_sq,
            a_dag_sq,
            number_sq,
            kerr,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

/// `<state|op|state>`.
pub fn expectation(op: &DenseOperator, state: &FockVector) -> Result<C64> {
    check_dims(op.dim(), state.dim())?;
    let mut tmp = vec![C64::new(0.0, 0.0); op.dim()];
    op.apply_slice(state.amplitudes(), &mut tmp);
    Ok(state
        .amplitudes()
        .iter()
        .zip(&tmp)
        .map(|(c, t)| c.conj() * t)
        .sum())
}

/// `|<u|v>|^2`.
pub fn fidelity(u: &FockVector, v: &FockVector) -> Result<f64> {
    Ok(u.inner(v)?.norm_sqr())
}
