use super::channel::QuantumChannel;
use super::state::DensityMatrix;
use super::ChannelError;
use crate::linalg;
use crate::scalar::Real;

/// `⟨Φ|(1 ⊗ Λ)(Φ)|Φ⟩ = Σ_k |tr K_k|² / d²`.
pub fn entanglement_fidelity<R: Real>(channel: &QuantumChannel<R>) -> R {
    let d = R::lit(channel.dim() as f64);
    let sum = channel
        .kraus_ops()
        .iter()
        .fold(R::zero(), |acc, k| acc + k.trace().norm_sqr());
    sum / (d * d)
}

/// Haar-averaged pure-state fidelity, via `F = (d·F_e + 1)/(d + 1)`.
pub fn average_fidelity<R: Real>(channel: &QuantumChannel<R>) -> R {
    let d = R::lit(channel.dim() as f64);
    (d * entanglement_fidelity(channel) + R::one()) / (d + R::one())
}

/// Depolarizing parameter of the twirled channel, `f = (d·F − 1)/(d − 1)`.
pub fn depolarizing_fidelity<R: Real>(channel: &QuantumChannel<R>) -> R {
    let d = R::lit(channel.dim() as f64);
    (d * average_fidelity(channel) - R::one()) / (d - R::one())
}

/// `⟨Φ|ρ|Φ⟩` for a state on two equal-dimension subsystems.
pub fn singlet_fraction<R: Real>(state: &DensityMatrix<R>) -> Result<R, ChannelError> {
    let n = state.dim();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(ChannelError::NotBipartite(n));
    }
    let phi = linalg::max_entangled_vector::<R>(d);
    Ok((phi.adjoint() * state.matrix() * &phi)[(0, 0)].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::noise::depolarizing_channel;

    #[test]
    fn identity_channel_fidelities() {
        let id = QuantumChannel::<f64>::identity(2);
        assert!((entanglement_fidelity(&id) - 1.0).abs() < 1e-15);
        assert!((average_fidelity(&id) - 1.0).abs() < 1e-15);
        assert!((depolarizing_fidelity(&id) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_entanglement_fidelity() {
        for f in [0.0f64, 0.3, 0.8, 0.95] {
            let ch = depolarizing_channel(2, f).unwrap();
            // Choi state f·Φ + (1−f)·1/4 overlaps Φ with f + (1−f)/4.
            assert!((entanglement_fidelity(&ch) - (3.0 * f + 1.0) / 4.0).abs() < 1e-12);
            assert!((depolarizing_fidelity(&ch) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_fraction_examples() {
        assert!((singlet_fraction(&DensityMatrix::<f64>::max_entangled(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((singlet_fraction(&DensityMatrix::<f64>::basis(4, 0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            singlet_fraction(&DensityMatrix::<f64>::maximally_mixed(2)),
            Err(ChannelError::NotBipartite(2))
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let ch = depolarizing_channel(2, 0.9_f32).unwrap();
        assert!((average_fidelity(&ch) - 0.95).abs() < 1e-6);
    }
}
