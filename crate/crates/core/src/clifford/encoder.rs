use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gates::{apply_xx_vec, clifford_gates, NUM_SINGLE_QUBIT_CLIFFORDS};
use crate::error::{Error, Result};
use crate::qcore::{apply_1q_vec, ComplexMatrix};

/// Dense statevector budget for encoders.
pub const MAX_ENCODER_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    /// One index into [`super::SINGLE_QUBIT_CLIFFORD_WORDS`] per qubit.
    SingleQubit(Vec<u8>),
    /// Disjoint qubit pairs, each receiving `exp(-i (pi/4) X X)`.
    Entangling(Vec<(usize, usize)>),
}

/// Layered Clifford circuit: odd layers are random single-qubit Cliffords,
/// even layers are XX(pi/4) rotations on a random pairing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    n_qubits: usize,
    seed: u64,
    layers: Vec<Layer>,
}

impl EncoderSpec {
    /// Empty circuit, i.e. the identity.
    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, seed: 0, layers: vec![] }
    }

    pub fn from_layers(n_qubits: usize, seed: u64, layers: Vec<Layer>) -> Result<Self> {
        check_size(n_qubits)?;
        for layer in &layers {
            match layer {
                Layer::SingleQubit(idx) => {
                    if idx.len() != n_qubits || idx.iter().any(|&c| c as usize >= NUM_SINGLE_QUBIT_CLIFFORDS) {
                        return Err(Error::InvalidParameter("malformed single-qubit layer".into()));
                    }
                }
                Layer::Entangling(pairs) => {
                    let mut used = vec![false; n_qubits];
                    for &(a, b) in pairs {
                        if a >= n_qubits || b >= n_qubits || a == b || used[a] || used[b] {
                            return Err(Error::InvalidParameter(format!("bad pair ({a}, {b})")));
                        }
                        used[a] = true;
                        used[b] = true;
                    }
                }
            }
        }
        Ok(Self { n_qubits, seed, layers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// `U |v>` in place.
    pub fn apply_to_vector(&self, v: &mut [C64]) {
        assert_eq!(v.len(), 1usize << self.n_qubits);
        let gates = clifford_gates();
        for layer in &self.layers {
            match layer {
                Layer::SingleQubit(idx) => {
                    for (q, &c) in idx.iter().enumerate() {
                        if c != 0 {
                            apply_1q_vec(v, &gates[c as usize], q, self.n_qubits);
                        }
                    }
                }
                Layer::Entangling(pairs) => {
                    for &(a, b) in pairs {
                        apply_xx_vec(v, a, b, self.n_qubits);
                    }
                }
            }
        }
    }

    /// `U |x>` for a computational basis index.
    pub fn image_of_basis(&self, x: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 1 << self.n_qubits];
        v[x] = C64::new(1.0, 0.0);
        self.apply_to_vector(&mut v);
        v
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ENCODER_QUBITS {
        return Err(Error::Capacity(format!("encoders support 1..={MAX_ENCODER_QUBITS} qubits, got {n}")));
    }
    Ok(())
}

/// Samples the depth-`4n` layered encoder from `seed`. Pairings are
/// resampled on every entangling layer by a Fisher-Yates shuffle of the
/// qubit labels, paired consecutively.
pub fn sample_encoder(n: usize, seed: u64) -> Result<EncoderSpec> {
    if n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("encoder needs an even qubit count, got {n}")));
    }
    sample_layered(n, seed)
}

/// Like [`sample_encoder`] but also accepts odd `n`, leaving one qubit idle
/// in every entangling layer.
pub fn sample_layered(n: usize, seed: u64) -> Result<EncoderSpec> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(4 * n);
    let mut labels: Vec<usize> = (0..n).collect();
    for layer in 0..4 * n {
        if layer % 2 == 0 {
            let idx = (0..n).map(|_| rng.gen_range(0..NUM_SINGLE_QUBIT_CLIFFORDS as u8)).collect();
            layers.push(Layer::SingleQubit(idx));
        } else {
            labels.sort_unstable();
            labels.shuffle(&mut rng);
            let pairs = labels.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            layers.push(Layer::Entangling(pairs));
        }
    }
    Ok(EncoderSpec { n_qubits: n, seed, layers })
}

/// Dense unitary of the encoder circuit.
pub fn encoder_unitary(spec: &EncoderSpec) -> ComplexMatrix {
    let d = 1usize << spec.n_qubits;
    let mut u = ComplexMatrix::zeros(d, d);
    for x in 0..d {
        let col = spec.image_of_basis(x);
        for (r, v) in col.into_iter().enumerate() {
            u[(r, x)] = v;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::is_stabilizer_state;
    use crate::qcore::PauliString;

    #[test]
    fn degenerate_spec_is_identity() {
        let u = encoder_unitary(&EncoderSpec::identity(2));
        assert_eq!(u, ComplexMatrix::identity(4));
    }

    #[test]
    fn sampled_specs_have_expected_structure() {
        for n in [2usize, 4, 6] {
            let spec = sample_encoder(n, 17).unwrap();
            assert_eq!(spec.depth(), 4 * n);
            for (i, layer) in spec.layers().iter().enumerate() {
                match layer {
                    Layer::SingleQubit(idx) => {
                        assert_eq!(i % 2, 0);
                        assert_eq!(idx.len(), n);
                    }
                    Layer::Entangling(pairs) => {
                        assert_eq!(i % 2, 1);
                        assert_eq!(pairs.len(), n / 2);
                        let mut seen: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
                        seen.sort_unstable();
                        assert_eq!(seen, (0..n).collect::<Vec<_>>());
                    }
                }
            }
        }
        assert!(sample_encoder(3, 1).is_err());
        assert!(sample_layered(3, 1).is_ok());
        assert!(sample_encoder(12, 1).is_err());
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = sample_encoder(4, 99).unwrap();
        let b = sample_encoder(4, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a, sample_encoder(4, 100).unwrap());
    }

    #[test]
    fn sampled_unitary_is_unitary_and_maps_zero_to_stabilizer() {
        for seed in 0..20 {
            let spec = sample_encoder(2, seed).unwrap();
            let u = encoder_unitary(&spec);
            assert!(u.unitarity_defect() < 1e-10);
            let psi = spec.image_of_basis(0);
            let e = crate::qcore::pauli_expectations_pure(&psi);
            let ones = e.iter().filter(|x| (x.abs() - 1.0).abs() < 1e-9).count();
            let zeros = e.iter().filter(|x| x.abs() < 1e-9).count();
            assert_eq!((ones, zeros), (4, 12));
            assert!(is_stabilizer_state(&psi).unwrap());
        }
    }

    #[test]
    fn from_layers_validates() {
        assert!(EncoderSpec::from_layers(2, 0, vec![Layer::Entangling(vec![(0, 0)])]).is_err());
        assert!(EncoderSpec::from_layers(2, 0, vec![Layer::SingleQubit(vec![30, 0])]).is_err());
        assert!(EncoderSpec::from_layers(4, 0, vec![Layer::Entangling(vec![(0, 1), (1, 2)])]).is_err());
        let s = EncoderSpec::from_layers(2, 0, vec![Layer::SingleQubit(vec![1, 0])]).unwrap();
        let u = encoder_unitary(&s);
        let h = super::super::single_qubit_clifford(1).unwrap().kron(&ComplexMatrix::identity(2));
        assert!(u.max_abs_diff(&h) < 1e-14);
        // sanity: Pauli conjugation of this one-layer circuit
        let x0 = "XI".parse::<PauliString>().unwrap().matrix();
        let z0 = "ZI".parse::<PauliString>().unwrap().matrix();
        assert!(u.matmul(&x0).matmul(&u.adjoint()).max_abs_diff(&z0) < 1e-14);
    }
}
