//! The one- and two-qubit Clifford groups as explicit unitary lists, generated by closure
//! and indexed through a phase-canonical matrix hash for exact inverse lookup.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{self, from_rows, CMatrix};
use crate::scalar::Real;

const PHASE_TOL: f64 = 1e-9;
const GRID: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("unsupported number of qubits {0} (only 1 and 2)")]
    UnsupportedQubits(usize),
    #[error("matrix not found in the group table")]
    LookupMiss,
    #[error("cannot sample from an empty gate set")]
    EmptyGroup,
    #[error("cannot invert an empty sequence")]
    EmptySequence,
    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("unitary dimension {found} does not match group dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    index: usize,
    unitary: CMatrix<f64>,
}

impl CliffordElement {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Unitary in canonical global phase (first nonzero entry real and positive).
    pub fn unitary(&self) -> &CMatrix<f64> {
        &self.unitary
    }

    pub fn unitary_as<R: Real>(&self) -> CMatrix<R> {
        self.unitary.map(|z| Complex::new(R::lit(z.re), R::lit(z.im)))
    }
}

type PhaseKey = Vec<i64>;

/// Rescales `u` so that its first entry with modulus above tolerance is real positive.
pub fn canonical_phase(u: &CMatrix<f64>) -> CMatrix<f64> {
    // nalgebra is column-major; "first" is taken in row-major reading order.
    let mut pivot = None;
    'outer: for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            if u[(i, j)].norm() > PHASE_TOL {
                pivot = Some(u[(i, j)]);
                break 'outer;
            }
        }
    }
    match pivot {
        Some(z) => {
            let phase = z.conj() / z.norm();
            u * phase
        }
        None => u.clone(),
    }
}

fn phase_key(u: &CMatrix<f64>) -> PhaseKey {
    let c = canonical_phase(u);
    let mut key = Vec::with_capacity(2 * c.len());
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            let z = c[(i, j)];
            key.push((z.re * GRID).round() as i64);
            key.push((z.im * GRID).round() as i64);
        }
    }
    key
}

/// Standard gates.
pub mod gates {
    use super::*;

    pub fn hadamard() -> CMatrix<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        from_rows(2, &[(h, 0.), (h, 0.), (h, 0.), (-h, 0.)])
    }

    pub fn phase() -> CMatrix<f64> {
        from_rows(2, &[(1., 0.), (0., 0.), (0., 0.), (0., 1.)])
    }

    pub fn pauli_x() -> CMatrix<f64> {
        linalg::paulis::<f64>()[1].clone()
    }

    pub fn pauli_y() -> CMatrix<f64> {
        linalg::paulis::<f64>()[2].clone()
    }

    pub fn pauli_z() -> CMatrix<f64> {
        linalg::paulis::<f64>()[3].clone()
    }

    /// Control on the first (most significant) qubit.
    pub fn cnot() -> CMatrix<f64> {
        let mut m = CMatrix::zeros(4, 4);
        let one = Complex::new(1.0, 0.0);
        m[(0, 0)] = one;
        m[(1, 1)] = one;
        m[(2, 3)] = one;
        m[(3, 2)] = one;
        m
    }

    /// `σ ⊗ σ ⊗ …` on `n` qubits.
    pub fn tensor_power(u: &CMatrix<f64>, n: usize) -> CMatrix<f64> {
        (1..n).fold(u.clone(), |acc, _| linalg::kron(&acc, u))
    }
}

#[derive(Debug, Clone)]
pub struct CliffordGroup {
    n_qubits: usize,
    dim: usize,
    elements: Vec<CliffordElement>,
    lookup: HashMap<PhaseKey, usize>,
}

impl CliffordGroup {
    /// The full Clifford group on `n_qubits ∈ {1, 2}`, by breadth-first closure from the
    /// identity under `{H, S}` (plus CNOT on two qubits). Ordering is deterministic.
    pub fn generate(n_qubits: usize) -> Result<Self, CliffordError> {
        let id2 = linalg::identity::<f64>(2);
        let gens = match n_qubits {
            1 => vec![gates::hadamard(), gates::phase()],
            2 => vec![
                linalg::kron(&gates::hadamard(), &id2),
                linalg::kron(&id2, &gates::hadamard()),
                linalg::kron(&gates::phase(), &id2),
                linalg::kron(&id2, &gates::phase()),
                gates::cnot(),
            ],
            n => return Err(CliffordError::UnsupportedQubits(n)),
        };
        Self::from_generators(n_qubits, &gens)
    }

    /// Closure of `generators` (up to global phase), identity first.
    pub fn from_generators(n_qubits: usize, generators: &[CMatrix<f64>]) -> Result<Self, CliffordError> {
        let mut group = Self::empty(n_qubits)?;
        for g in generators {
            group.check_dim(g)?;
        }
        let mut queue = VecDeque::new();
        let id = linalg::identity::<f64>(group.dim);
        group.insert(id.clone());
        queue.push_back(id);
        while let Some(u) = queue.pop_front() {
            for g in generators {
                let v = g * &u;
                if group.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
        Ok(group)
    }

    /// An explicit gate set without closure, deduplicated up to phase.
    pub fn from_unitaries(n_qubits: usize, unitaries: &[CMatrix<f64>]) -> Result<Self, CliffordError> {
        let mut group = Self::empty(n_qubits)?;
        for u in unitaries {
            group.check_dim(u)?;
            group.insert(u.clone());
        }
        Ok(group)
    }

    fn empty(n_qubits: usize) -> Result<Self, CliffordError> {
        if n_qubits == 0 || n_qubits > 2 {
            return Err(CliffordError::UnsupportedQubits(n_qubits));
        }
        Ok(Self { n_qubits, dim: 1 << n_qubits, elements: Vec::new(), lookup: HashMap::new() })
    }

    fn check_dim(&self, u: &CMatrix<f64>) -> Result<(), CliffordError> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(CliffordError::DimensionMismatch { expected: self.dim, found: u.nrows() });
        }
        Ok(())
    }

    fn insert(&mut self, u: CMatrix<f64>) -> bool {
        let key = phase_key(&u);
        if self.lookup.contains_key(&key) {
            return false;
        }
        let index = self.elements.len();
        self.lookup.insert(key, index);
        self.elements.push(CliffordElement { index, unitary: canonical_phase(&u) });
        true
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> Result<&CliffordElement, CliffordError> {
        self.elements.get(index).ok_or(CliffordError::IndexOutOfRange(index))
    }

    /// Index of the element equal to `u` up to global phase.
    pub fn index_of(&self, u: &CMatrix<f64>) -> Option<usize> {
        if u.nrows() != self.dim {
            return None;
        }
        self.lookup.get(&phase_key(u)).copied()
    }

    /// Ideal product of a gate sequence in application order (`U_n ⋯ U_1`).
    pub fn product<I>(&self, sequence: I) -> Result<CMatrix<f64>, CliffordError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut acc = linalg::identity::<f64>(self.dim);
        for idx in sequence {
            acc = self.element(idx)?.unitary() * acc;
        }
        Ok(acc)
    }

    /// The element equal to `(U_n ⋯ U_1)†` up to phase.
    pub fn invert_sequence<I>(&self, sequence: I) -> Result<&CliffordElement, CliffordError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut iter = sequence.into_iter().peekable();
        if iter.peek().is_none() {
            return Err(CliffordError::EmptySequence);
        }
        let total = self.product(iter)?;
        let inverse = total.adjoint();
        let idx = self.index_of(&inverse).ok_or(CliffordError::LookupMiss)?;
        Ok(&self.elements[idx])
    }

    /// Uniform draw over the elements.
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> Result<&CliffordElement, CliffordError> {
        if self.elements.is_empty() {
            return Err(CliffordError::EmptyGroup);
        }
        Ok(&self.elements[rng.random_range(0..self.elements.len())])
    }
}

fn overlap_fourth(u: &CMatrix<f64>, v: &CMatrix<f64>) -> f64 {
    // tr(U†V) = Σ conj(U_ij) V_ij
    let t = u.iter().zip(v.iter()).fold(Complex::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
    t.norm_sqr().powi(2)
}

/// `(1/|G|²) Σ_{U,V} |tr(U†V)|⁴`; equals 2 exactly for a unitary 2-design.
pub fn frame_potential_2(group: &CliffordGroup) -> f64 {
    let els = group.elements();
    let n = els.len() as f64;
    let mut sum = 0.0;
    for u in els {
        for v in els {
            sum += overlap_fourth(u.unitary(), v.unitary());
        }
    }
    sum / (n * n)
}

/// Monte-Carlo estimate of the frame potential from `pairs` independent uniform pairs.
pub fn frame_potential_2_sampled<G: Rng + ?Sized>(group: &CliffordGroup, pairs: usize, rng: &mut G) -> Result<f64, CliffordError> {
    let mut sum = 0.0;
    for _ in 0..pairs {
        let u = group.sample(rng)?;
        let v = group.sample(rng)?;
        sum += overlap_fourth(u.unitary(), v.unitary());
    }
    Ok(sum / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_qubit_group_order_and_members() {
        let g = CliffordGroup::generate(1).unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g.index_of(&linalg::identity(2)), Some(0));
        for u in [gates::hadamard(), gates::phase(), gates::pauli_x(), gates::pauli_y(), gates::pauli_z()] {
            assert!(g.index_of(&u).is_some());
        }
        // global phase is ignored
        let iz = gates::pauli_z() * Complex::new(0.0, 1.0);
        assert_eq!(g.index_of(&iz), g.index_of(&gates::pauli_z()));
    }

    #[test]
    fn non_clifford_is_a_lookup_miss() {
        let g = CliffordGroup::generate(1).unwrap();
        let t = from_rows(2, &[(1., 0.), (0., 0.), (0., 0.), (0.5f64.sqrt(), 0.5f64.sqrt())]);
        assert_eq!(g.index_of(&t), None);
    }

    #[test]
    fn closure_under_multiplication() {
        let g = CliffordGroup::generate(1).unwrap();
        for a in g.elements() {
            for b in g.elements() {
                assert!(g.index_of(&(a.unitary() * b.unitary())).is_some());
            }
        }
    }

    #[test]
    fn unsupported_sizes() {
        assert_eq!(CliffordGroup::generate(3).unwrap_err(), CliffordError::UnsupportedQubits(3));
        assert_eq!(CliffordGroup::generate(0).unwrap_err(), CliffordError::UnsupportedQubits(0));
    }

    #[test]
    fn generation_order_is_stable() {
        let a = CliffordGroup::generate(1).unwrap();
        let b = CliffordGroup::generate(1).unwrap();
        for (x, y) in a.elements().iter().zip(b.elements()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn inverse_of_trivial_sequences() {
        let g = CliffordGroup::generate(1).unwrap();
        assert_eq!(g.invert_sequence([0]).unwrap().index(), 0);
        let h = g.index_of(&gates::hadamard()).unwrap();
        assert_eq!(g.invert_sequence([h]).unwrap().index(), h);
        assert_eq!(g.invert_sequence(std::iter::empty()).unwrap_err(), CliffordError::EmptySequence);
    }

    #[test]
    fn frame_potentials() {
        let g = CliffordGroup::generate(1).unwrap();
        assert!((frame_potential_2(&g) - 2.0).abs() < 1e-9);
        let trivial = CliffordGroup::from_unitaries(1, &[linalg::identity(2)]).unwrap();
        assert!((frame_potential_2(&trivial) - 16.0).abs() < 1e-12);
        let paulis = CliffordGroup::from_generators(1, &[gates::pauli_x(), gates::pauli_z()]).unwrap();
        assert_eq!(paulis.len(), 4);
        assert!((frame_potential_2(&paulis) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_seeded_and_guarded() {
        let g = CliffordGroup::generate(1).unwrap();
        let a = g.sample(&mut ChaCha8Rng::seed_from_u64(7)).unwrap().index();
        let b = g.sample(&mut ChaCha8Rng::seed_from_u64(7)).unwrap().index();
        assert_eq!(a, b);
        let empty = CliffordGroup::from_unitaries(1, &[]).unwrap();
        assert_eq!(empty.sample(&mut ChaCha8Rng::seed_from_u64(1)).unwrap_err(), CliffordError::EmptyGroup);
    }
}
