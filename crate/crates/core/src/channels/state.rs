use nalgebra::DVector;
use num_complex::Complex;

use super::ChannelError;
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const TRACE_TOL: f64 = 1e-12;
pub(crate) const PSD_TOL: f64 = 1e-10;

/// A normalized, positive semidefinite state on a `dim`-dimensional register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<R: Real> {
    matrix: CMatrix<R>,
}

impl<R: Real> DensityMatrix<R> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix<R>) -> Result<Self, ChannelError> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix the caller already knows to be a state. Checked in debug builds.
    pub fn new_unchecked(matrix: CMatrix<R>) -> Self {
        let rho = Self { matrix };
        debug_assert!(rho.validate().is_ok(), "invalid density matrix: {:?}", rho.validate());
        rho
    }

    pub fn pure(psi: &DVector<Complex<R>>) -> Result<Self, ChannelError> {
        let norm = psi.norm();
        if norm <= R::EPSILON {
            return Err(ChannelError::InvalidState("zero state vector".into()));
        }
        let psi = psi.unscale(norm);
        Ok(Self { matrix: &psi * psi.adjoint() })
    }

    /// `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        Self { matrix: linalg::basis_projector(dim, k) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex::new(R::one() / R::lit(dim as f64), R::zero());
        Self { matrix: linalg::identity::<R>(dim) * w }
    }

    /// `|Φ⟩⟨Φ|` with `|Φ⟩ = d^{-1/2} Σ|ii⟩`, on a `d²`-dimensional register.
    pub fn max_entangled(local_dim: usize) -> Self {
        let phi = linalg::max_entangled_vector::<R>(local_dim);
        Self { matrix: &phi * phi.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<R> {
        self.matrix
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { matrix: linalg::kron(&self.matrix, &other.matrix) }
    }

    /// Convex mixture `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Self, w: R) -> Result<Self, ChannelError> {
        if self.dim() != other.dim() {
            return Err(ChannelError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if w < R::zero() || w > R::one() {
            return Err(ChannelError::InvalidState(format!("mixing weight {w} outside [0, 1]")));
        }
        let a = Complex::new(w, R::zero());
        let b = Complex::new(R::one() - w, R::zero());
        Ok(Self { matrix: &self.matrix * a + &other.matrix * b })
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, unitary: &CMatrix<R>) -> Self {
        Self { matrix: unitary * &self.matrix * unitary.adjoint() }
    }

    /// `tr[ρ σ]` (real part; both operands Hermitian).
    pub fn overlap(&self, other: &CMatrix<R>) -> R {
        (&self.matrix * other).trace().re
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let m = &self.matrix;
        if !m.is_square() {
            return Err(ChannelError::InvalidState(format!("non-square {}x{} matrix", m.nrows(), m.ncols())));
        }
        if !linalg::is_hermitian(m, R::tolerance(HERMITIAN_TOL)) {
            return Err(ChannelError::InvalidState("not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - R::one()).abs() > R::tolerance(TRACE_TOL) || tr.im.abs() > R::tolerance(TRACE_TOL) {
            return Err(ChannelError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = linalg::hermitian_eigenvalues(m).into_iter().fold(R::max_value().unwrap(), |a, b| a.min(b));
        if min < -R::tolerance(PSD_TOL) {
            return Err(ChannelError::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }
}

/// One element `E` of a two-outcome POVM `{E, 1 − E}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect<R: Real> {
    matrix: CMatrix<R>,
}

impl<R: Real> Effect<R> {
    pub fn new(matrix: CMatrix<R>) -> Result<Self, ChannelError> {
        let e = Self { matrix };
        e.validate()?;
        Ok(e)
    }

    pub(crate) fn new_unchecked(matrix: CMatrix<R>) -> Self {
        Self { matrix }
    }

    /// `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self { matrix: linalg::basis_projector(dim, k) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.matrix
    }

    /// `tr[E ρ]`.
    pub fn expectation(&self, rho: &DensityMatrix<R>) -> R {
        rho.overlap(&self.matrix)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let m = &self.matrix;
        if !linalg::is_hermitian(m, R::tolerance(HERMITIAN_TOL)) {
            return Err(ChannelError::InvalidEffect("not Hermitian".into()));
        }
        let tol = R::tolerance(PSD_TOL);
        for ev in linalg::hermitian_eigenvalues(m) {
            if ev < -tol || ev > R::one() + tol {
                return Err(ChannelError::InvalidEffect(format!("eigenvalue {ev} outside [0, 1]")));
            }
        }
        Ok(())
    }
}
