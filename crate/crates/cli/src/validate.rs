//! Invariant suite behind `noisemagic validate`.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noisemagic::analytic::{fidelity_ad, fidelity_mixed, CodeParams};
use noisemagic::channels::{
    amplitude_damping, depolarizing_global, depolarizing_local, gadc, mixed_error, z_rotation, KrausChannel,
};
use noisemagic::clifford::{
    encoder_unitary, enumerate_stabilizer_states, is_stabilizer_state, sample_encoder, single_qubit_clifford,
    stabilizer_state_count, StabilizerTable,
};
use noisemagic::magic::{
    rom_column_generation, rom_exact, rom_single_qubit_oracle, sre2, sre_depolarizing_analytic, InitialColumns,
    StabilizerSource,
};
use noisemagic::qcore::{bloch_vector, from_bloch, BlochVector, ComplexMatrix, DensityMatrix, C64};

use crate::config::Settings;
use crate::output::{Run, Table};

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-300..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_bloch(rng: &mut ChaCha8Rng) -> Result<BlochVector> {
    let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = rng.gen::<f64>().cbrt() / norm;
    Ok(BlochVector::new(v[0] * r, v[1] * r, v[2] * r)?)
}

fn random_mixed(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let d = 1usize << n;
    let g = ComplexMatrix::from_fn(d, rank, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    Ok(DensityMatrix::new(m.scale_real(1.0 / tr))?)
}

fn grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

fn channel_completeness() -> Result<Check> {
    let mut channels: Vec<KrausChannel> = Vec::new();
    for p in grid() {
        channels.push(amplitude_damping(p)?);
        channels.push(depolarizing_local(p)?);
        for eta in [0.0, 0.3, 1.0] {
            channels.push(gadc(p, eta)?);
        }
        for alpha in [0.0, 0.4, 1.3, -2.0] {
            channels.push(mixed_error(p, alpha)?);
            channels.push(z_rotation(alpha)?);
        }
    }
    let worst = channels.iter().map(KrausChannel::completeness_defect).fold(0.0, f64::max);
    Ok(check("channel_completeness", worst <= 1e-12, format!("{} channels, max defect {worst:e}", channels.len())))
}

fn stabilizer_counts(tables: &[StabilizerTable]) -> Check {
    let expected = [6usize, 60, 1080, 36720];
    let found: Vec<usize> = tables.iter().map(StabilizerTable::len).collect();
    let formula = (1..=4).all(|n| stabilizer_state_count(n) == expected[n - 1] as u128);
    check("stabilizer_counts", formula && found == expected, format!("{found:?}"))
}

fn amplitude_damping_bloch(rng: &mut ChaCha8Rng, count: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..count {
        let r = random_bloch(rng)?;
        let p: f64 = rng.gen();
        let out = bloch_vector(&amplitude_damping(p)?.apply(&from_bloch(r)?)?)?;
        let s = (1.0 - p).sqrt();
        let want = BlochVector::new(r.rx * s, r.ry * s, p + r.rz * (1.0 - p))?;
        worst = worst.max(out.distance(&want));
    }
    Ok(check("amplitude_damping_bloch", worst <= 1e-12, format!("{count} states, max deviation {worst:e}")))
}

fn rom_oracle(rng: &mut ChaCha8Rng, t1: &StabilizerTable, count: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut below_one = 0;
    for _ in 0..count {
        let rho = from_bloch(random_bloch(rng)?)?;
        let r = rom_exact(&rho, t1)?;
        worst = worst.max((r.value - rom_single_qubit_oracle(&rho)?).abs());
        if r.value < 1.0 - 1e-9 {
            below_one += 1;
        }
    }
    Ok(check(
        "rom_single_qubit_oracle",
        worst <= 1e-7 && below_one == 0,
        format!("{count} states, max deviation {worst:e}"),
    ))
}

fn rom_invariants(rng: &mut ChaCha8Rng, t2: &StabilizerTable, count: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for i in 0..count {
        let rho = random_mixed(2, 1 + i % 4, rng)?;
        let r = rom_exact(&rho, t2)?;
        let l1: f64 = r.decomposition.iter().map(|(_, x)| x.abs()).sum();
        let mut rebuilt = ComplexMatrix::zeros(4, 4);
        for &(j, x) in &r.decomposition {
            let psi = t2.state(j);
            rebuilt.axpy(C64::new(x, 0.0), &ComplexMatrix::outer(psi, psi));
        }
        worst = worst
            .max((r.weight_sum() - 1.0).abs())
            .max((l1 - r.value).abs())
            .max(rebuilt.max_abs_diff(rho.matrix()) * 1e-1)
            .max(r.residual * 1e-1)
            .max((1.0 - r.value).max(0.0) * 1e-1);
    }
    Ok(check("rom_decomposition", worst <= 1e-8, format!("{count} states, worst scaled defect {worst:e}")))
}

fn column_generation(rng: &mut ChaCha8Rng, t2: &StabilizerTable, count: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    for i in 0..count {
        let rho = random_mixed(2, 1 + i % 4, rng)?;
        let exact = rom_exact(&rho, t2)?.value;
        for source in [StabilizerSource::Table(t2), StabilizerSource::Stream { n_qubits: 2 }] {
            let cg = rom_column_generation(&rho, source, InitialColumns::ProductFrame)?.value;
            worst = worst.max((cg - exact).abs());
        }
    }
    Ok(check("column_generation_vs_exact", worst <= 1e-6, format!("{count} states, max deviation {worst:e}")))
}

fn clifford_invariance(rng: &mut ChaCha8Rng, t2: &StabilizerTable, count: usize) -> Result<Check> {
    let (mut rom_gap, mut sre_gap) = (0.0f64, 0.0f64);
    for i in 0..count {
        let rho = random_mixed(2, 1 + i % 2, rng)?;
        let u = if i % 2 == 0 {
            encoder_unitary(&sample_encoder(2, rng.gen())?)
        } else {
            single_qubit_clifford(rng.gen_range(0..24))?.kron(&single_qubit_clifford(rng.gen_range(0..24))?)
        };
        let moved = rho.conjugate(&u);
        rom_gap = rom_gap.max((rom_exact(&rho, t2)?.value - rom_exact(&moved, t2)?.value).abs());
        sre_gap = sre_gap.max((sre2(&rho)? - sre2(&moved)?).abs());
    }
    Ok(check(
        "clifford_invariance",
        rom_gap <= 1e-6 && sre_gap <= 1e-10,
        format!("{count} states, ROM gap {rom_gap:e}, SRE gap {sre_gap:e}"),
    ))
}

fn encoders(rng: &mut ChaCha8Rng) -> Result<Check> {
    let (mut unitarity, mut non_stabilizer, mut irreproducible) = (0.0f64, 0, 0);
    let mut total = 0;
    for n in [2usize, 4, 6] {
        for _ in 0..4 {
            let seed: u64 = rng.gen();
            let spec = sample_encoder(n, seed)?;
            if spec != sample_encoder(n, seed)? {
                irreproducible += 1;
            }
            if n <= 4 {
                unitarity = unitarity.max(encoder_unitary(&spec).unitarity_defect());
            }
            for x in [0usize, 1, (1 << n) - 1] {
                total += 1;
                if !is_stabilizer_state(&spec.image_of_basis(x))? {
                    non_stabilizer += 1;
                }
            }
        }
    }
    Ok(check(
        "encoder_clifford",
        unitarity <= 1e-10 && non_stabilizer == 0 && irreproducible == 0,
        format!("{total} outputs, {non_stabilizer} non-stabilizer, unitarity defect {unitarity:e}"),
    ))
}

fn depolarizing(tables: &[StabilizerTable]) -> Result<Check> {
    let (mut sre_gap, mut rom_gap) = (0.0f64, 0.0f64);
    for table in tables.iter().take(3) {
        let n = table.n_qubits();
        for p in grid() {
            let channel = depolarizing_global(p)?;
            let analytic = sre_depolarizing_analytic(p, n)?;
            for (i, psi) in table.states().iter().enumerate() {
                let rho = channel.apply(&DensityMatrix::from_pure(psi)?);
                sre_gap = sre_gap.max((sre2(&rho)? - analytic).abs());
                if n == 2 && i % 6 == 0 {
                    rom_gap = rom_gap.max((rom_exact(&rho, table)?.value - 1.0).abs());
                }
            }
        }
    }
    Ok(check(
        "depolarizing_stabilizer",
        sre_gap <= 1e-10 && rom_gap <= 1e-7,
        format!("SRE deviation {sre_gap:e}, ROM - 1 {rom_gap:e}"),
    ))
}

fn mixed_alpha_zero() -> Result<Check> {
    let mut worst = 0.0f64;
    for (n, k) in [(4usize, 2usize), (6, 3), (6, 1)] {
        let params = CodeParams::new(n, k)?;
        for p in grid() {
            worst = worst.max((fidelity_mixed(p, 0.0, params)? - fidelity_ad(p, params)?).abs());
        }
    }
    Ok(check("mixed_noise_alpha_zero", worst <= 1e-12, format!("max deviation {worst:e}")))
}

/// Runs every check and writes `validate.csv`. Returns whether all checks
/// passed together with one printable line per check.
pub fn run(run: &mut Run, s: &Settings) -> Result<(bool, Vec<String>)> {
    let count = s.samples_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let tables: Vec<StabilizerTable> = (1..=4).map(enumerate_stabilizer_states).collect::<Result<_, _>>()?;
    let checks = vec![
        channel_completeness()?,
        stabilizer_counts(&tables),
        amplitude_damping_bloch(&mut rng, count)?,
        rom_oracle(&mut rng, &tables[0], count)?,
        rom_invariants(&mut rng, &tables[1], count.min(50))?,
        column_generation(&mut rng, &tables[1], count.min(50))?,
        clifford_invariance(&mut rng, &tables[1], count.min(20))?,
        encoders(&mut rng)?,
        depolarizing(&tables)?,
        mixed_alpha_zero()?,
    ];
    let mut table = Table::new("validate", &["check", "passed", "detail"]);
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut lines = Vec::new();
    for c in &checks {
        lines.push(format!("{:<width$}  {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail));
        table.push(vec![c.name.into(), c.passed.into(), c.detail.clone().into()]);
    }
    run.write_table(&table)?;
    Ok((checks.iter().all(|c| c.passed), lines))
}
