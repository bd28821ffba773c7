//! Small dense complex linear algebra helpers shared by the channel code.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::scalar::Real;

pub type CMatrix<R> = DMatrix<Complex<R>>;

pub(crate) fn c<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(R::lit(re), R::lit(im))
}

/// Square matrix from row-major `(re, im)` pairs.
pub fn from_rows<R: Real>(n: usize, entries: &[(f64, f64)]) -> CMatrix<R> {
    assert_eq!(entries.len(), n * n);
    CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        c(re, im)
    })
}

pub fn kron<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    a.kronecker(b)
}

pub fn dagger<R: Real>(a: &CMatrix<R>) -> CMatrix<R> {
    a.adjoint()
}

pub fn trace<R: Real>(a: &CMatrix<R>) -> Complex<R> {
    a.trace()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> R {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).norm_sqr().sqrt())
        .fold(R::zero(), |acc, v| if v > acc { v } else { acc })
}

pub fn is_hermitian<R: Real>(a: &CMatrix<R>, tol: R) -> bool {
    a.is_square() && max_abs_diff(a, &a.adjoint()) <= tol
}

/// Eigenvalues of a Hermitian matrix (symmetrized before decomposition).
pub fn hermitian_eigenvalues<R: Real>(a: &CMatrix<R>) -> Vec<R> {
    let half = Complex::new(R::lit(0.5), R::zero());
    let h = (a + a.adjoint()) * half;
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// Column-stacking vectorization: `vec(ρ)[j·d + i] = ρ[i, j]`.
pub fn vectorize<R: Real>(a: &CMatrix<R>) -> nalgebra::DVector<Complex<R>> {
    nalgebra::DVector::from_column_slice(a.as_slice())
}

pub fn unvectorize<R: Real>(v: &nalgebra::DVector<Complex<R>>, d: usize) -> CMatrix<R> {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Partial trace over the first `d_a` subsystem of a `d_a·d_b` square matrix.
pub fn partial_trace_first<R: Real>(a: &CMatrix<R>, d_a: usize, d_b: usize) -> CMatrix<R> {
    assert_eq!(a.nrows(), d_a * d_b);
    CMatrix::from_fn(d_b, d_b, |i, j| {
        (0..d_a).fold(Complex::new(R::zero(), R::zero()), |acc, k| {
            acc + a[(k * d_b + i, k * d_b + j)]
        })
    })
}

pub fn identity<R: Real>(d: usize) -> CMatrix<R> {
    CMatrix::identity(d, d)
}

/// Single-qubit Paulis `[I, X, Y, Z]`.
pub fn paulis<R: Real>() -> [CMatrix<R>; 4] {
    [
        from_rows(2, &[(1., 0.), (0., 0.), (0., 0.), (1., 0.)]),
        from_rows(2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]),
        from_rows(2, &[(0., 0.), (0., -1.), (0., 1.), (0., 0.)]),
        from_rows(2, &[(1., 0.), (0., 0.), (0., 0.), (-1., 0.)]),
    ]
}

/// Computational basis projector `|k⟩⟨k|` in dimension `d`.
pub fn basis_projector<R: Real>(d: usize, k: usize) -> CMatrix<R> {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = Complex::new(R::one(), R::zero());
    m
}

/// Maximally entangled state `|Φ⟩ = d^{-1/2} Σ_i |ii⟩` as a vector of length d².
pub fn max_entangled_vector<R: Real>(d: usize) -> nalgebra::DVector<Complex<R>> {
    let amp = Complex::new(R::one() / R::lit(d as f64).sqrt(), R::zero());
    let mut v = nalgebra::DVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}
