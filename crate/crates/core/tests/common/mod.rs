#![allow(dead_code)]

use noisemagic::qcore::{ComplexMatrix, DensityMatrix, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(1e-300..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_pure(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let d = 1usize << n;
    let v: Vec<C64> = (0..d).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Ginibre-distributed mixed state of the given rank.
pub fn random_mixed(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let d = 1usize << n;
    let g = ComplexMatrix::from_fn(d, rank, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr)).unwrap()
}

pub fn h_state() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::from_pure(&[C64::new(h, 0.0), C64::from_polar(h, std::f64::consts::FRAC_PI_4)]).unwrap()
}

pub fn plus_state() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::from_pure(&[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap()
}
