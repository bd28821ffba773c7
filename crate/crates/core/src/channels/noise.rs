//! Constructors for the standard noise channels used by the network model.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::channel::QuantumChannel;
use super::state::DensityMatrix;
use super::ChannelError;
use crate::linalg::{self, from_rows, CMatrix};
use crate::scalar::Real;

/// `X^a Z^b` on a `d`-level system.
fn weyl<R: Real>(d: usize, a: usize, b: usize) -> CMatrix<R> {
    let two_pi = R::two_pi();
    CMatrix::from_fn(d, d, |row, col| {
        if row == (col + a) % d {
            let phase = two_pi * R::lit(((b * col) % d) as f64) / R::lit(d as f64);
            Complex::new(phase.cos(), phase.sin())
        } else {
            Complex::new(R::zero(), R::zero())
        }
    })
}

/// Smallest depolarizing fidelity for which `ρ ↦ fρ + (1−f)·1/d` is completely positive.
pub fn depolarizing_lower_bound(d: usize) -> f64 {
    -1.0 / ((d * d) as f64 - 1.0)
}

/// `ρ ↦ f·ρ + (1 − f)·tr(ρ)·1/d`, realized with Weyl-operator Kraus terms.
pub fn depolarizing_channel<R: Real>(d: usize, f: R) -> Result<QuantumChannel<R>, ChannelError> {
    if d < 2 {
        return Err(ChannelError::UnsupportedDimension(d));
    }
    let min = depolarizing_lower_bound(d);
    let tol = R::tolerance(1e-12);
    if !(f >= R::lit(min) - tol && f <= R::one() + tol) {
        return Err(ChannelError::FidelityOutOfRange { f: f.to_f64_lossy(), min, max: 1.0 });
    }
    let d2 = R::lit((d * d) as f64);
    let p_other = ((R::one() - f) / d2).max(R::zero());
    let p_id = (f + p_other).max(R::zero());
    let mut kraus = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let p = if a == 0 && b == 0 { p_id } else { p_other };
            if p > R::zero() {
                kraus.push(weyl::<R>(d, a, b) * Complex::new(p.sqrt(), R::zero()));
            }
        }
    }
    QuantumChannel::from_kraus(kraus)
}

/// Single-qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping<R: Real>(gamma: R) -> Result<QuantumChannel<R>, ChannelError> {
    if !(gamma >= R::zero() && gamma <= R::one()) {
        return Err(ChannelError::InvalidParameter(format!("damping probability {gamma} outside [0, 1]")));
    }
    let mut k0 = linalg::identity::<R>(2);
    k0[(1, 1)] = Complex::new((R::one() - gamma).sqrt(), R::zero());
    let mut k1 = CMatrix::zeros(2, 2);
    k1[(0, 1)] = Complex::new(gamma.sqrt(), R::zero());
    QuantumChannel::from_kraus(vec![k0, k1])
}

/// Pure dephasing that multiplies the off-diagonal entries by `lambda ∈ [0, 1]`.
pub fn phase_damping<R: Real>(lambda: R) -> Result<QuantumChannel<R>, ChannelError> {
    if !(lambda >= R::zero() && lambda <= R::one()) {
        return Err(ChannelError::InvalidParameter(format!("coherence multiplier {lambda} outside [0, 1]")));
    }
    let half = R::lit(0.5);
    let [id, _, _, z] = linalg::paulis::<R>();
    let a = ((R::one() + lambda) * half).sqrt();
    let b = ((R::one() - lambda) * half).sqrt();
    let mut kraus = vec![id * Complex::new(a, R::zero())];
    if b > R::zero() {
        kraus.push(z * Complex::new(b, R::zero()));
    }
    QuantumChannel::from_kraus(kraus)
}

/// `ρ ↦ Σ_k p_k σ_k ρ σ_k` with probabilities for `[I, X, Y, Z]`.
pub fn pauli_channel<R: Real>(probs: [R; 4]) -> Result<QuantumChannel<R>, ChannelError> {
    let total = probs.iter().fold(R::zero(), |a, &b| a + b);
    if probs.iter().any(|&p| p < R::zero()) || (total - R::one()).abs() > R::tolerance(1e-12) {
        return Err(ChannelError::InvalidParameter("Pauli probabilities must be a distribution".into()));
    }
    let kraus = linalg::paulis::<R>()
        .into_iter()
        .zip(probs)
        .filter(|(_, p)| *p > R::zero())
        .map(|(s, p)| s * Complex::new(p.sqrt(), R::zero()))
        .collect();
    QuantumChannel::from_kraus(kraus)
}

/// Applies `X` with probability `p`.
pub fn bit_flip<R: Real>(p: R) -> Result<QuantumChannel<R>, ChannelError> {
    pauli_channel([R::one() - p, p, R::zero(), R::zero()])
}

/// Memory decoherence over an interval `t`: amplitude damping with `γ = 1 − e^{−t/T1}`
/// followed by pure dephasing, so the coherences decay by exactly `e^{−t/T2}`.
/// `None` stands for an infinite lifetime. Requires `T2 ≤ 2·T1`.
pub fn decoherence_channel<R: Real>(t: R, t1: Option<R>, t2: Option<R>) -> Result<QuantumChannel<R>, ChannelError> {
    if !t.is_finite() || t < R::zero() {
        return Err(ChannelError::InvalidDecoherence(format!("invalid duration {t}")));
    }
    for (name, v) in [("T1", t1), ("T2", t2)] {
        if let Some(v) = v {
            if !v.is_finite() || v <= R::zero() {
                return Err(ChannelError::InvalidDecoherence(format!("{name} = {v} must be positive")));
            }
        }
    }
    // Rates; an infinite lifetime is a zero rate.
    let rate1 = t1.map_or(R::zero(), |v| R::one() / v);
    let rate2 = t2.map_or(R::zero(), |v| R::one() / v);
    let pure_dephasing_rate = rate2 - rate1 * R::lit(0.5);
    if pure_dephasing_rate < -R::tolerance(1e-12) * rate2.max(R::one()) {
        return Err(ChannelError::InvalidDecoherence(format!(
            "T2 must not exceed 2·T1 (T1 = {t1:?}, T2 = {t2:?})"
        )));
    }
    let gamma = R::one() - (-t * rate1).exp();
    let lambda = (-t * pure_dephasing_rate.max(R::zero())).exp();
    let damping = amplitude_damping(gamma)?;
    let dephasing = phase_damping(lambda.min(R::one()))?;
    let kraus = dephasing
        .kraus_ops()
        .iter()
        .flat_map(|d| damping.kraus_ops().iter().map(move |a| d * a))
        .collect();
    QuantumChannel::from_kraus(kraus)
}

/// Heralded-entanglement resource `α|Φ⟩⟨Φ| + (1 − α)|00⟩⟨00|`.
pub fn bright_state_resource<R: Real>(alpha: R) -> Result<DensityMatrix<R>, ChannelError> {
    if !(alpha >= R::zero() && alpha <= R::one()) {
        return Err(ChannelError::InvalidParameter(format!("bright state population {alpha} outside [0, 1]")));
    }
    DensityMatrix::max_entangled(2).mix(&DensityMatrix::basis(4, 0), alpha)
}

/// Bell states `(1 ⊗ σ_k)|Φ⟩` for `σ_k ∈ [I, X, Y, Z]`, as projectors on two qubits.
fn bell_projectors<R: Real>() -> [CMatrix<R>; 4] {
    let phi = linalg::max_entangled_vector::<R>(2);
    let id = linalg::identity::<R>(2);
    linalg::paulis::<R>().map(|s| {
        let v = linalg::kron(&id, &s) * &phi;
        &v * v.adjoint()
    })
}

/// Effective channel of standard qubit teleportation through `resource`, with noiseless local
/// operations, simulated as the circuit: joint state `ρ_in ⊗ resource`, Bell measurement on the
/// input and the sender half, Pauli correction `σ_k` on the receiver half, averaged over the
/// four outcomes. The resource's first factor is held by the sender.
pub fn teleportation_channel<R: Real>(resource: &DensityMatrix<R>) -> Result<QuantumChannel<R>, ChannelError> {
    let n = resource.dim();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(ChannelError::NotBipartite(n));
    }
    if d != 2 {
        return Err(ChannelError::UnsupportedDimension(d));
    }
    let projectors = bell_projectors::<R>();
    let corrections = linalg::paulis::<R>();
    let id = linalg::identity::<R>(d);
    let measured: Vec<CMatrix<R>> = projectors.iter().map(|p| linalg::kron(p, &id)).collect();

    let mut superop = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(i, j)] = Complex::new(R::one(), R::zero());
            let joint = linalg::kron(&unit, resource.matrix());
            let mut out: CMatrix<R> = CMatrix::zeros(d, d);
            for (proj, sigma) in measured.iter().zip(corrections.iter()) {
                let post = proj * &joint * proj;
                let receiver = linalg::partial_trace_first(&post, d * d, d);
                out += sigma * receiver * sigma.adjoint();
            }
            superop.set_column(j * d + i, &linalg::vectorize(&out));
        }
    }
    QuantumChannel::from_superop(d, superop)
}

/// Convenience for real diagonal test states.
pub fn diagonal_state<R: Real>(diag: &[f64]) -> Result<DensityMatrix<R>, ChannelError> {
    let n = diag.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(R::lit(diag[i]), R::zero())
        } else {
            Complex::new(R::zero(), R::zero())
        }
    });
    DensityMatrix::new(m)
}

/// `|+⟩⟨+|`.
pub fn plus_state<R: Real>() -> DensityMatrix<R> {
    DensityMatrix::new_unchecked(from_rows(2, &[(0.5, 0.), (0.5, 0.), (0.5, 0.), (0.5, 0.)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::fidelity::{average_fidelity, depolarizing_fidelity, entanglement_fidelity, singlet_fraction};

    #[test]
    fn depolarizing_extremes() {
        let rho = DensityMatrix::<f64>::basis(2, 0);
        let id = depolarizing_channel(2, 1.0).unwrap();
        assert!(id.distance(&QuantumChannel::identity(2)) < 1e-14);
        let full = depolarizing_channel(2, 0.0).unwrap();
        let out = full.apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), DensityMatrix::<f64>::maximally_mixed(2).matrix()) < 1e-14);
        assert!((average_fidelity(&depolarizing_channel(2, 0.9f64).unwrap()) - 0.95).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_range_is_enforced() {
        assert!(depolarizing_channel(2, -1.0 / 3.0).is_ok());
        assert!(matches!(
            depolarizing_channel(2, -0.34_f64),
            Err(ChannelError::FidelityOutOfRange { .. })
        ));
        assert!(depolarizing_channel(2, 1.01_f64).is_err());
        depolarizing_channel(4, -1.0 / 15.0).unwrap().validate().unwrap();
        depolarizing_channel(3, 0.3_f64).unwrap().validate().unwrap();
    }

    #[test]
    fn depolarizing_action_general_dim() {
        let ch = depolarizing_channel(3, 0.6_f64).unwrap();
        let rho = DensityMatrix::basis(3, 1);
        let out = ch.apply(&rho).unwrap();
        let expected = diagonal_state::<f64>(&[0.4 / 3.0, 0.6 + 0.4 / 3.0, 0.4 / 3.0]).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn bit_flip_on_ground_state() {
        let out = bit_flip(0.1_f64).unwrap().apply(&DensityMatrix::basis(2, 0)).unwrap();
        let expected = diagonal_state::<f64>(&[0.9, 0.1]).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn decoherence_limits() {
        let zero = decoherence_channel(0.0_f64, Some(1.0), Some(0.5)).unwrap();
        assert!(zero.distance(&QuantumChannel::identity(2)) < 1e-14);
        let long = decoherence_channel(1e6_f64, Some(1.0), Some(2.0)).unwrap();
        for rho in [DensityMatrix::basis(2, 1), plus_state()] {
            let out = long.apply(&rho).unwrap();
            assert!(linalg::max_abs_diff(out.matrix(), DensityMatrix::<f64>::basis(2, 0).matrix()) < 1e-12);
        }
    }

    #[test]
    fn decoherence_rejects_t2_above_twice_t1() {
        assert!(matches!(
            decoherence_channel(1.0_f64, Some(1.0), Some(2.5)),
            Err(ChannelError::InvalidDecoherence(_))
        ));
        assert!(decoherence_channel(1.0_f64, Some(1.0), None).is_err());
        assert!(decoherence_channel(-1.0_f64, None, None).is_err());
    }

    #[test]
    fn decoherence_matches_lindblad_exponential() {
        // Oracle: exponentiate the Lindblad generator of amplitude damping plus dephasing.
        let (t, t1, t2) = (39e-6_f64, 0.05_f64, 12e-3_f64);
        let ch = decoherence_channel(t, Some(t1), Some(t2)).unwrap();
        let lowering = from_rows::<f64>(2, &[(0., 0.), (1., 0.), (0., 0.), (0., 0.)]);
        let z = linalg::paulis::<f64>()[3].clone();
        let gamma_phi = 1.0 / t2 - 0.5 / t1;
        let dissipator = |l: &CMatrix<f64>, rate: f64| {
            let id = linalg::identity::<f64>(2);
            let ldl = l.adjoint() * l;
            let term = linalg::kron(&l.conjugate(), l)
                - (linalg::kron(&id, &ldl) + linalg::kron(&ldl.transpose(), &id)) * Complex::new(0.5, 0.0);
            term * Complex::new(rate, 0.0)
        };
        let generator = dissipator(&lowering, 1.0 / t1) + dissipator(&z, gamma_phi / 2.0);
        let propagator = (generator * Complex::new(t, 0.0)).exp();
        assert!(linalg::max_abs_diff(ch.superop(), &propagator) < 1e-12);
    }

    #[test]
    fn dephasing_only_coherence_multiplier() {
        let ch = decoherence_channel(39e-6_f64, None, Some(12e-3)).unwrap();
        let out = ch.apply(&plus_state()).unwrap();
        let expected = (-39e-6_f64 / 12e-3).exp();
        assert!((out.matrix()[(0, 1)].re / 0.5 - expected).abs() < 1e-14);
        assert!((expected - 0.996755).abs() < 1e-6);
    }

    #[test]
    fn perfect_teleportation_is_identity() {
        let ch = teleportation_channel(&DensityMatrix::<f64>::max_entangled(2)).unwrap();
        assert!(ch.distance(&QuantumChannel::identity(2)) < 1e-12);
        let ch1 = teleportation_channel(&bright_state_resource(1.0_f64).unwrap()).unwrap();
        assert!(ch1.distance(&QuantumChannel::identity(2)) < 1e-12);
    }

    #[test]
    fn bright_state_teleportation_fidelities() {
        let resource = bright_state_resource(0.95_f64).unwrap();
        assert!((singlet_fraction(&resource).unwrap() - 0.975).abs() < 1e-12);
        let ch = teleportation_channel(&resource).unwrap();
        ch.validate().unwrap();
        assert!((entanglement_fidelity(&ch) - 0.975).abs() < 1e-10);
        assert!((depolarizing_fidelity(&ch) - 2.9 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn teleportation_rejects_bad_resources() {
        assert!(matches!(
            teleportation_channel(&DensityMatrix::<f64>::maximally_mixed(3)),
            Err(ChannelError::NotBipartite(3))
        ));
        assert!(matches!(
            teleportation_channel(&DensityMatrix::<f64>::max_entangled(3)),
            Err(ChannelError::UnsupportedDimension(3))
        ));
    }
}
