use num_complex::Complex;

use super::state::{DensityMatrix, Effect, PSD_TOL};
use super::ChannelError;
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

pub(crate) const COMPLETENESS_TOL: f64 = 1e-10;
/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub(crate) const KRAUS_CUTOFF: f64 = 1e-12;

/// A CPTP map held both as Kraus operators and as its column-stacked superoperator
/// `S = Σ_k conj(K_k) ⊗ K_k`, so that `vec(Λ(ρ)) = S·vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel<R: Real> {
    dim: usize,
    kraus: Vec<CMatrix<R>>,
    superop: CMatrix<R>,
}

fn superop_of<R: Real>(dim: usize, kraus: &[CMatrix<R>]) -> CMatrix<R> {
    kraus.iter().fold(CMatrix::zeros(dim * dim, dim * dim), |acc, k| {
        acc + linalg::kron(&k.conjugate(), k)
    })
}

impl<R: Real> QuantumChannel<R> {
    /// Builds a channel from Kraus operators, checking trace preservation.
    pub fn from_kraus(kraus: Vec<CMatrix<R>>) -> Result<Self, ChannelError> {
        let dim = match kraus.first() {
            Some(k) => k.nrows(),
            None => return Err(ChannelError::InvalidChannel("no Kraus operators".into())),
        };
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(ChannelError::DimensionMismatch { expected: dim, found: k.nrows().max(k.ncols()) });
            }
        }
        let superop = superop_of(dim, &kraus);
        let ch = Self { dim, kraus, superop };
        ch.check_completeness()?;
        Ok(ch)
    }

    /// Builds a channel from a superoperator; Kraus operators come from the eigendecomposition
    /// of the Choi matrix, which also certifies complete positivity.
    pub fn from_superop(dim: usize, superop: CMatrix<R>) -> Result<Self, ChannelError> {
        if superop.nrows() != dim * dim || superop.ncols() != dim * dim {
            return Err(ChannelError::DimensionMismatch { expected: dim * dim, found: superop.nrows() });
        }
        let choi = choi_from_superop(dim, &superop);
        let half = Complex::new(R::lit(0.5), R::zero());
        let herm = (&choi + choi.adjoint()) * half;
        let eig = herm.symmetric_eigen();
        let mut kraus = Vec::new();
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < -R::tolerance(PSD_TOL) {
                return Err(ChannelError::NotCompletelyPositive(lambda.to_f64_lossy()));
            }
            if lambda <= R::lit(KRAUS_CUTOFF) {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            let s = Complex::new(lambda.sqrt(), R::zero());
            // v[i·d + k] = K[k, i]
            kraus.push(CMatrix::from_fn(dim, dim, |k, i| v[i * dim + k] * s));
        }
        if kraus.is_empty() {
            return Err(ChannelError::InvalidChannel("superoperator has no positive Choi weight".into()));
        }
        let ch = Self { dim, kraus, superop };
        ch.check_completeness()?;
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self::unitary(linalg::identity(dim))
    }

    /// `ρ ↦ U ρ U†`. The caller guarantees `U` is unitary.
    pub fn unitary(u: CMatrix<R>) -> Self {
        let dim = u.nrows();
        let superop = linalg::kron(&u.conjugate(), &u);
        Self { dim, kraus: vec![u], superop }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix<R>] {
        &self.kraus
    }

    pub fn superop(&self) -> &CMatrix<R> {
        &self.superop
    }

    /// Choi matrix `J = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix<R> {
        choi_from_superop(self.dim, &self.superop)
    }

    fn check_dim(&self, found: usize) -> Result<(), ChannelError> {
        if found != self.dim {
            Err(ChannelError::DimensionMismatch { expected: self.dim, found })
        } else {
            Ok(())
        }
    }

    pub fn apply(&self, rho: &DensityMatrix<R>) -> Result<DensityMatrix<R>, ChannelError> {
        self.check_dim(rho.dim())?;
        let out = &self.superop * linalg::vectorize(rho.matrix());
        Ok(DensityMatrix::new_unchecked(linalg::unvectorize(&out, self.dim)))
    }

    /// Heisenberg-picture action `Λ†(E) = Σ K† E K` on an effect.
    pub fn apply_dual(&self, effect: &Effect<R>) -> Result<Effect<R>, ChannelError> {
        self.check_dim(effect.dim())?;
        let m = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * effect.matrix() * k);
        Ok(Effect::new_unchecked(m))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Result<Self, ChannelError> {
        self.check_dim(first.dim)?;
        Self::from_superop(self.dim, &self.superop * &first.superop)
    }

    /// Full CPTP check: completeness, Choi positivity, and Kraus/superoperator agreement.
    pub fn validate(&self) -> Result<(), ChannelError> {
        self.check_completeness()?;
        let min = linalg::hermitian_eigenvalues(&self.choi())
            .into_iter()
            .fold(R::max_value().unwrap(), |a, b| a.min(b));
        if min < -R::tolerance(PSD_TOL) {
            return Err(ChannelError::NotCompletelyPositive(min.to_f64_lossy()));
        }
        let dev = linalg::max_abs_diff(&superop_of(self.dim, &self.kraus), &self.superop);
        if dev > R::tolerance(1e-12) {
            return Err(ChannelError::InvalidChannel(format!(
                "Kraus and superoperator disagree by {dev}"
            )));
        }
        Ok(())
    }

    fn check_completeness(&self) -> Result<(), ChannelError> {
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k);
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(self.dim));
        if dev > R::tolerance(COMPLETENESS_TOL) {
            return Err(ChannelError::NotTracePreserving(dev.to_f64_lossy()));
        }
        Ok(())
    }

    /// Largest entry-wise distance between the two superoperators.
    pub fn distance(&self, other: &Self) -> R {
        linalg::max_abs_diff(&self.superop, &other.superop)
    }
}

/// Reshuffles a column-stacked superoperator into the Choi matrix.
fn choi_from_superop<R: Real>(dim: usize, s: &CMatrix<R>) -> CMatrix<R> {
    // Λ(|i⟩⟨j|)[k, l] = S[l·d + k, j·d + i];  J[(i,k), (j,l)] = Λ(|i⟩⟨j|)[k, l]
    CMatrix::from_fn(dim * dim, dim * dim, |row, col| {
        let (i, k) = (row / dim, row % dim);
        let (j, l) = (col / dim, col % dim);
        s[(l * dim + k, j * dim + i)]
    })
}
