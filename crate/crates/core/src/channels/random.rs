//! Random states and channels for property tests and Monte-Carlo checks.

use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::channel::QuantumChannel;
use super::state::DensityMatrix;
use crate::linalg::CMatrix;
use crate::scalar::Real;

fn gaussian<R: Real, G: Rng + ?Sized>(rng: &mut G) -> Complex<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(R::lit(re), R::lit(im))
}

pub fn ginibre<R: Real, G: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut G) -> CMatrix<R> {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state vector.
pub fn haar_vector<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> DVector<Complex<R>> {
    let v = DVector::from_fn(dim, |_, _| gaussian::<R, G>(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Mixed state from the Hilbert–Schmidt measure (`G G† / tr`).
pub fn random_density_matrix<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> DensityMatrix<R> {
    let g = ginibre::<R, G>(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new_unchecked(m.unscale(tr.re))
}

/// Random CPTP map with `n_kraus` operators: `K_i = G_i S^{-1/2}`, `S = Σ G_i† G_i`.
pub fn random_channel<R: Real, G: Rng + ?Sized>(dim: usize, n_kraus: usize, rng: &mut G) -> QuantumChannel<R> {
    let gs: Vec<CMatrix<R>> = (0..n_kraus.max(1)).map(|_| ginibre(dim, dim, rng)).collect();
    let s = gs.iter().fold(CMatrix::<R>::zeros(dim, dim), |acc, g| acc + g.adjoint() * g);
    let eig = s.symmetric_eigen();
    let inv_sqrt = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex::new(R::one() / l.sqrt(), R::zero())));
    let s_inv_sqrt = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let kraus = gs.into_iter().map(|g| g * &s_inv_sqrt).collect();
    QuantumChannel::from_kraus(kraus).expect("normalized Kraus set is trace preserving")
}

/// Monte-Carlo estimate of `∫dψ ⟨ψ|Λ(ψ)|ψ⟩`; returns `(mean, standard error)`.
pub fn haar_average_fidelity<R: Real, G: Rng + ?Sized>(
    channel: &QuantumChannel<R>,
    samples: usize,
    rng: &mut G,
) -> (f64, f64) {
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let psi = haar_vector::<R, G>(channel.dim(), rng);
        let rho = DensityMatrix::new_unchecked(&psi * psi.adjoint());
        let out = channel.apply(&rho).expect("dims match");
        let v = (psi.adjoint() * out.matrix() * &psi)[(0, 0)].re.to_f64_lossy();
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}
