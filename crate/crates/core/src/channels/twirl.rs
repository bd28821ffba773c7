use num_complex::Complex;

use super::channel::QuantumChannel;
use super::ChannelError;
use crate::cliffords::CliffordGroup;
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

/// Group average `(1/|G|) Σ_G G† Λ(G ρ G†) G` over the Clifford group.
pub fn twirl<R: Real>(channel: &QuantumChannel<R>, group: &CliffordGroup) -> Result<QuantumChannel<R>, ChannelError> {
    if group.dim() != channel.dim() {
        return Err(ChannelError::DimensionMismatch { expected: channel.dim(), found: group.dim() });
    }
    twirl_over(channel, group.elements().iter().map(|e| e.unitary_as::<R>()))
}

/// Twirl over an arbitrary finite list of unitaries, weighted uniformly.
pub fn twirl_over<R, I>(channel: &QuantumChannel<R>, unitaries: I) -> Result<QuantumChannel<R>, ChannelError>
where
    R: Real,
    I: IntoIterator<Item = CMatrix<R>>,
{
    let d = channel.dim();
    let mut acc = CMatrix::<R>::zeros(d * d, d * d);
    let mut count = 0usize;
    for u in unitaries {
        if u.nrows() != d {
            return Err(ChannelError::DimensionMismatch { expected: d, found: u.nrows() });
        }
        let s_u = linalg::kron(&u.conjugate(), &u);
        let s_u_dag = s_u.adjoint();
        acc += s_u_dag * channel.superop() * s_u;
        count += 1;
    }
    if count == 0 {
        return Err(ChannelError::InvalidChannel("twirl over an empty gate set".into()));
    }
    let scale = Complex::new(R::one() / R::lit(count as f64), R::zero());
    QuantumChannel::from_superop(d, acc * scale)
}
