//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not change
//! the exit status; every other failure does.

use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noisemagic::analytic::{
    alpha_boundary, fidelity_ad, fidelity_mixed, p_critical, purity_mean, tau_effective, CodeParams,
};
use noisemagic::channels::{amplitude_damping, depolarizing_global};
use noisemagic::clifford::{enumerate_stabilizer_states, StabilizerTable};
use noisemagic::magic::{
    rom_column_generation, rom_exact, rom_single_qubit_oracle, sre2, sre_depolarizing_analytic, witness_w2,
    InitialColumns, StabilizerSource,
};
use noisemagic::par::Execution;
use noisemagic::protocol::{
    ensemble_run_with, no_click_distill, post_error_layer_rom, Estimate, EnsembleSummary, MeanWeighting, Measures,
    NoiseModel, ProtocolConfig,
};
use noisemagic::qcore::{from_bloch, BlochVector, ComplexMatrix, DensityMatrix, C64};
use noisemagic_cli::commands::{execute_with, resolve_settings, Cli};

const SEED: u64 = 2024;
const EXEC: Execution = Execution::Parallel;
const KNOWN_FAILURES: [usize; 2] = [8, 9];
/// Standard errors allowed before an ordering between sizes counts as violated.
const ORDER_Z: f64 = 2.0;
/// Floating-point slack below the lower bound ROM >= 1.
const ROUNDOFF: f64 = 1e-12;
/// z-scores are reported only where the standard error is resolvable.
const MIN_STDERR: f64 = 1e-9;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-300..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_qubit(rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = rng.gen::<f64>().cbrt() / norm;
    Ok(from_bloch(BlochVector::new(v[0] * r, v[1] * r, v[2] * r)?)?)
}

fn random_mixed(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let d = 1usize << n;
    let g = ComplexMatrix::from_fn(d, rank, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    Ok(DensityMatrix::new(m.scale_real(1.0 / tr))?)
}

fn h_state() -> Result<DensityMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(DensityMatrix::from_pure(&[C64::new(h, 0.0), C64::from_polar(h, std::f64::consts::FRAC_PI_4)])?)
}

/// `b` is not above `a` beyond `ORDER_Z` combined standard errors.
fn not_above(a: &Estimate, b: &Estimate) -> bool {
    b.mean <= a.mean + ORDER_Z * a.stderr.hypot(b.stderr)
}

fn fmt(e: &Estimate) -> String {
    format!("{:.5}±{:.5}", e.mean, e.stderr)
}

/// Shared ensembles over the damping grid at N = 4 and 6, k = N/2.
struct Sweeps {
    runs: Vec<(usize, Vec<(f64, EnsembleSummary)>)>,
    seconds: Vec<f64>,
}

fn damping_sweeps() -> Result<Sweeps> {
    let mut runs = Vec::new();
    let mut seconds = Vec::new();
    for n in [4usize, 6] {
        let start = Instant::now();
        let mut points = Vec::new();
        for p in grid() {
            let cfg = ProtocolConfig::new(n, n / 2, NoiseModel::AmplitudeDamping { p }, 500, SEED)
                .with_measures(Measures { witness: n == 4, alpha_beta_xi: true, ..Measures::default() })
                .with_weighting(MeanWeighting::SuccessWeighted);
            points.push((p, ensemble_run_with(&cfg, EXEC)?));
        }
        seconds.push(start.elapsed().as_secs_f64());
        runs.push((n, points));
    }
    Ok(Sweeps { runs, seconds })
}

fn c1(tables: &[StabilizerTable], seconds: f64) -> Result<Verdict> {
    let counts: Vec<usize> = tables.iter().map(StabilizerTable::len).collect();
    verdict(counts == [6, 60, 1080, 36720] && seconds < 60.0, format!("counts {counts:?}, built in {seconds:.1} s"))
}

fn c2(tables: &[StabilizerTable]) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut oracle = 0.0f64;
    for _ in 0..1000 {
        let rho = random_qubit(&mut rng)?;
        oracle = oracle.max((rom_exact(&rho, &tables[0])?.value - rom_single_qubit_oracle(&rho)?).abs());
    }
    let mut cg = 0.0f64;
    for i in 0..200 {
        let rho = random_mixed(2, 1 + i % 4, &mut rng)?;
        let exact = rom_exact(&rho, &tables[1])?.value;
        let gen = rom_column_generation(&rho, StabilizerSource::Table(&tables[1]), InitialColumns::ProductFrame)?.value;
        cg = cg.max((gen - exact).abs());
    }
    verdict(
        oracle <= 1e-7 && cg <= 1e-6,
        format!("oracle deviation {oracle:.2e} (1000 states), column generation deviation {cg:.2e} (200 states)"),
    )
}

fn c3(tables: &[StabilizerTable]) -> Result<Verdict> {
    let t2 = &tables[1];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for psi in t2.states() {
        let rho = DensityMatrix::from_pure(psi)?;
        for p in grid() {
            let r = rom_exact(&depolarizing_global(p)?.apply(&rho), t2)?.value;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    verdict(
        lo >= 1.0 - ROUNDOFF && hi <= 1.0 + 1e-7,
        format!("{} states x 21 p, ROM - 1 in [{:.2e}, {:.2e}]", t2.len(), lo - 1.0, hi - 1.0),
    )
}

fn c4(tables: &[StabilizerTable]) -> Result<Verdict> {
    let mut worst = 0.0f64;
    for table in &tables[..3] {
        for p in grid() {
            let analytic = sre_depolarizing_analytic(p, table.n_qubits())?;
            let channel = depolarizing_global(p)?;
            for psi in table.states() {
                worst = worst.max((sre2(&channel.apply(&DensityMatrix::from_pure(psi)?))? - analytic).abs());
            }
        }
    }
    verdict(worst <= 1e-10, format!("N = 1..3, all stabilizer states, max deviation {worst:.2e}"))
}

/// Midpoint of the grid interval with the most negative slope.
fn steepest(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0), 0.5 * (w[0].0 + w[1].0)))
        .fold((f64::INFINITY, f64::NAN), |best, s| if s.0 < best.0 { s } else { best })
        .1
}

fn c5(sweeps: &Sweeps) -> Result<Verdict> {
    let mut misses = Vec::new();
    let mut worst_z = 0.0f64;
    let mut n6 = Vec::new();
    for (n, points) in &sweeps.runs {
        let params = CodeParams::new(*n, n / 2)?;
        for (p, sum) in points {
            let q = sum.quenched_fidelity;
            let fa = fidelity_ad(*p, params)?;
            if q.stderr > MIN_STDERR {
                worst_z = worst_z.max((q.mean - fa).abs() / q.stderr);
            }
            if !q.within(fa, 3.0, 1e-12) {
                misses.push(format!("N={n} p={p}"));
            }
            if *n == 6 {
                n6.push((*p, q.mean));
            }
        }
    }
    let pc = p_critical(0.5)?;
    let ps = steepest(&n6);
    let t6 = sweeps.seconds[1];
    verdict(
        misses.is_empty() && (ps - pc).abs() <= 0.1 && t6 < 600.0,
        format!(
            "max |z| {worst_z:.2}, misses {misses:?}, steepest N=6 descent at {ps:.3} vs p_c {pc:.5}, N=6 sweep {t6:.1} s"
        ),
    )
}

fn c6() -> Result<Verdict> {
    let mut misses = Vec::new();
    let mut worst_z = 0.0f64;
    let mut analytic_gap = 0.0f64;
    for n in [4usize, 6] {
        let params = CodeParams::new(n, n / 2)?;
        for p in grid() {
            analytic_gap = analytic_gap.max((fidelity_mixed(p, 0.0, params)? - fidelity_ad(p, params)?).abs());
            for alpha in [0.0, 0.5, 1.3] {
                let cfg = ProtocolConfig::new(n, n / 2, NoiseModel::Mixed { p, alpha }, 500, SEED);
                let q = ensemble_run_with(&cfg, EXEC)?.quenched_fidelity;
                let f = fidelity_mixed(p, alpha, params)?;
                if q.stderr > MIN_STDERR {
                    worst_z = worst_z.max((q.mean - f).abs() / q.stderr);
                }
                if !q.within(f, 3.0, 1e-12) {
                    misses.push(format!("N={n} p={p} alpha={alpha}"));
                }
            }
        }
    }
    verdict(
        misses.is_empty() && analytic_gap <= 1e-12,
        format!("max |z| {worst_z:.2}, misses {misses:?}, alpha=0 analytic gap {analytic_gap:.2e}"),
    )
}

fn c7(sweeps: &Sweeps) -> Result<Verdict> {
    let mut misses = Vec::new();
    let mut worst_z = 0.0f64;
    for (n, points) in &sweeps.runs {
        let params = CodeParams::new(*n, n / 2)?;
        for (p, sum) in points {
            let target = purity_mean(tau_effective(*p, params)?, params);
            let j = sum.mean_state_purity_jackknife;
            if j.stderr > MIN_STDERR {
                worst_z = worst_z.max((j.mean - target).abs() / j.stderr);
            }
            if !j.within(target, 3.0, 1e-12) {
                misses.push(format!("N={n} p={p}"));
            }
        }
    }
    verdict(misses.is_empty(), format!("jackknife purity, max |z| {worst_z:.2}, misses {misses:?}"))
}

fn concentration(n: usize, noise: NoiseModel) -> Result<Estimate> {
    let cfg = ProtocolConfig::new(n, n / 2, noise, 500, SEED)
        .with_measures(Measures { distances: true, ..Measures::default() });
    ensemble_run_with(&cfg, EXEC)?.hs_concentration.context("missing distances")
}

fn c8() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    let alpha_c = alpha_boundary(0.0, 0.5)?;
    let cases = [
        ("AD p=0.2", NoiseModel::AmplitudeDamping { p: 0.2 }, true),
        ("AD p=0.6", NoiseModel::AmplitudeDamping { p: 0.6 }, true),
        ("coherent 0.4", NoiseModel::Coherent { alpha: 0.4 }, true),
        ("coherent 1.3", NoiseModel::Coherent { alpha: 1.3 }, false),
    ];
    for (label, noise, decreasing) in cases {
        let e: Vec<Estimate> = [2usize, 4, 6].iter().map(|&n| concentration(n, noise.clone())).collect::<Result<_>>()?;
        let holds = if decreasing {
            e[1].mean < e[0].mean && e[2].mean < e[1].mean
        } else {
            e[2].mean >= e[1].mean - ORDER_Z * e[1].stderr.hypot(e[2].stderr)
        };
        ok &= holds;
        let trend = if decreasing { "decreasing" } else { "not decreasing 4->6" };
        parts.push(format!(
            "{label} [{}, {}, {}] {trend}: {}",
            fmt(&e[0]),
            fmt(&e[1]),
            fmt(&e[2]),
            if holds { "yes" } else { "no" }
        ));
    }
    let boundary = alpha_c.map_or("none".to_string(), |a| format!("{a:.4}"));
    verdict(ok, format!("alpha_c(p=0) {boundary}; {}", parts.join("; ")))
}

fn c9() -> Result<Verdict> {
    let p = 0.7;
    let mut logical = Vec::new();
    for (n, samples) in [(2usize, 1000usize), (4, 500), (6, 300)] {
        let cfg = ProtocolConfig::new(n, n / 2, NoiseModel::AmplitudeDamping { p }, samples, SEED)
            .with_measures(Measures { rom: true, ..Measures::default() });
        logical.push(ensemble_run_with(&cfg, EXEC)?.mean_rom.context("missing ROM")?);
    }
    let mut post = Vec::new();
    for (n, samples) in [(2usize, 200usize), (3, 100), (4, 32)] {
        let table = enumerate_stabilizer_states(n)?;
        let cfg = ProtocolConfig::new(n, 1, NoiseModel::AmplitudeDamping { p }, samples, SEED);
        post.push(post_error_layer_rom(&cfg, &table, EXEC)?);
    }
    let logical_ok = not_above(&logical[0], &logical[1]) && not_above(&logical[1], &logical[2]);
    let post_ok = post.iter().all(|e| e.mean > 1.0) && not_above(&post[1], &post[0]) && not_above(&post[2], &post[1]);
    let list = |v: &[Estimate]| v.iter().map(fmt).collect::<Vec<_>>().join(", ");
    verdict(
        logical_ok && post_ok,
        format!(
            "logical ROM N=2,4,6 [{}] non-increasing: {}; post-error-layer ROM N=2,3,4 [{}] >1 and non-decreasing: {}",
            list(&logical),
            if logical_ok { "yes" } else { "no" },
            list(&post),
            if post_ok { "yes" } else { "no" }
        ),
    )
}

fn c10(tables: &[StabilizerTable]) -> Result<Verdict> {
    let t1 = &tables[0];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::from_pure(&[C64::new(h, 0.0), C64::new(h, 0.0)])?;
    let ps: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let mut worst = 0.0f64;
    let mut peak = (0.0, f64::NEG_INFINITY);
    let mut h_curve = Vec::new();
    for &p in &ps {
        let ad = amplitude_damping(p)?;
        let r = rom_exact(&ad.apply(&plus)?, t1)?.value;
        worst = worst.max((r - ((1.0 - p).sqrt() + p).max(1.0)).abs());
        if r > peak.1 {
            peak = (p, r);
        }
        h_curve.push(rom_exact(&ad.apply(&h_state()?)?, t1)?.value);
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let h0 = (h_curve[0] - sqrt2).abs();
    let h_peak = h_curve.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let h_peak_at = h_curve.iter().position(|&v| v == h_peak).unwrap_or(0);
    let enhanced = h_curve[1] > sqrt2 && h_peak > sqrt2;
    let decreases = h_curve[h_peak_at..].windows(2).all(|w| w[1] <= w[0] + 1e-9) && *h_curve.last().unwrap() < sqrt2;
    let step = ps[1] - ps[0];
    verdict(
        worst <= 1e-7
            && (peak.1 - 1.25).abs() <= 1e-7
            && (peak.0 - 0.75).abs() <= step
            && h0 <= 1e-7
            && enhanced
            && decreases,
        format!(
            "|+> deviation {worst:.2e}, max {:.9} at p={}; |H> starts {:.9}, peaks {h_peak:.6} at p={}, ends {:.6}",
            peak.1,
            peak.0,
            h_curve[0],
            ps[h_peak_at],
            h_curve.last().unwrap()
        ),
    )
}

fn c11() -> Result<Verdict> {
    let mut prob = 0.0f64;
    let mut min_inner = f64::INFINITY;
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let out = no_click_distill(p)?;
        prob = prob.max((out.probability - (1.0 - p / 2.0)).abs());
        let m2 = sre2(&DensityMatrix::from_pure(&out.state)?)?;
        if i == 0 || i == 10 {
            if m2.abs() > 1e-10 {
                return verdict(false, format!("SRE {m2:e} at p = {p}"));
            }
        } else {
            min_inner = min_inner.min(m2);
        }
    }
    verdict(
        prob <= 1e-12 && min_inner > 0.0,
        format!("probability deviation {prob:.2e}, min SRE on 0.1..0.9 {min_inner:.4}, zero at p=0,1"),
    )
}

fn c12(sweeps: &Sweeps) -> Result<Verdict> {
    let (mut defect, mut violations, mut records) = (0.0f64, 0usize, 0usize);
    for (_, points) in &sweeps.runs {
        for (_, sum) in points {
            let m = sum.alpha_beta_xi.as_ref().context("missing decomposition")?;
            defect = defect.max(m.max_identity_defect);
            violations += m.master_inequality_violations;
            records += sum.records.len();
        }
    }
    verdict(
        defect <= 1e-10 && violations == 0,
        format!("{records} trajectories, max identity defect {defect:.2e}, {violations} master-inequality violations"),
    )
}

fn c13(sweeps: &Sweeps) -> Result<Verdict> {
    let (_, points) = &sweeps.runs[0];
    let mut worst_ensemble = f64::NEG_INFINITY;
    let mut worst_mean = f64::NEG_INFINITY;
    let mut worst_single = f64::NEG_INFINITY;
    for (_, sum) in points {
        worst_ensemble = worst_ensemble.max(witness_w2(&sum.mean_state)?);
        worst_mean = worst_mean.max(sum.mean_w2.context("missing witness")?.mean);
        worst_single = worst_single.max(sum.records.iter().filter_map(|r| r.w2).fold(f64::NEG_INFINITY, f64::max));
    }
    let wh = witness_w2(&h_state()?)?;
    verdict(
        worst_ensemble <= 1e-9 && worst_mean <= 1e-9 && (wh - (4.0f64 / 3.0).ln()).abs() <= 1e-9 && (wh - 0.28768).abs() < 5e-6,
        format!(
            "N=4 max W2 of mean state {worst_ensemble:.3e}, max mean W2 {worst_mean:.3e} (largest single trajectory {worst_single:.3}); W2(|H>) {wh:.9}"
        ),
    )
}

fn run_cli(args: &[&str], out: &std::path::Path) -> Result<Vec<(String, String)>> {
    let mut all = vec!["noisemagic"];
    all.extend_from_slice(args);
    all.extend(["--seed", "7", "--out", out.to_str().context("path")?]);
    let cli = <Cli as clap::Parser>::try_parse_from(&all)?;
    let settings = resolve_settings(&cli.command)?;
    let outcome = execute_with(&cli.command, settings, &all.join(" "))?;
    anyhow::ensure!(outcome.passed, "{} reported failures", args[0]);
    Ok(outcome.manifest.outputs.into_iter().map(|o| (o.path, o.sha256)).collect())
}

fn c14() -> Result<Verdict> {
    let dir = tempfile::tempdir()?;
    let commands: [&[&str]; 3] = [
        &["validate", "--samples", "50"],
        &["fidelity-sweep", "--n", "4", "--p-steps", "5", "--samples", "50"],
        &["rom-sweep", "--n", "2,4", "--p-steps", "3", "--samples", "20"],
    ];
    let mut digests = [Vec::new(), Vec::new()];
    for (round, digest) in digests.iter_mut().enumerate() {
        for (i, args) in commands.iter().enumerate() {
            digest.extend(run_cli(args, &dir.path().join(format!("{round}-{i}")))?);
        }
    }
    let csv = digests[0].iter().filter(|(p, _)| p.ends_with(".csv")).count();
    verdict(
        digests[0] == digests[1] && csv >= 3,
        format!("{} output files ({csv} CSV), identical checksums: {}", digests[0].len(), digests[0] == digests[1]),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let total = Instant::now();
    let mut unexpected = 0;
    let mut report = |id: usize, name: &str, result: Result<Verdict>| {
        let known = KNOWN_FAILURES.contains(&id);
        let line = match result {
            Ok(v) if v.passed => format!("C{id:<2} PASS  {name}: {}", v.detail),
            Ok(v) => {
                unexpected += usize::from(!known);
                let tag = if known { " (known deviation)" } else { "" };
                format!("C{id:<2} FAIL{tag}  {name}: {}", v.detail)
            }
            Err(e) => {
                unexpected += 1;
                format!("C{id:<2} FAIL  {name}: error {e:#}")
            }
        };
        println!("{line}");
        let _ = std::io::stdout().flush();
    };

    let start = Instant::now();
    let tables: Result<Vec<StabilizerTable>> =
        (1..=4).map(|n| Ok(enumerate_stabilizer_states(n)?)).collect();
    let built = start.elapsed().as_secs_f64();
    let tables = match tables {
        Ok(t) => t,
        Err(e) => {
            report(1, "stabilizer enumeration", Err(e));
            std::process::exit(1);
        }
    };
    report(1, "stabilizer enumeration", c1(&tables, built));
    report(2, "ROM oracle equivalence", c2(&tables));
    report(3, "depolarizing generates no magic", c3(&tables));
    report(4, "depolarizing SRE", c4(&tables));
    match damping_sweeps() {
        Ok(sweeps) => {
            report(5, "fidelity transition", c5(&sweeps));
            report(6, "mixed-noise fidelity", c6());
            report(7, "effective channel purity", c7(&sweeps));
            report(8, "concentration dichotomy", c8());
            report(9, "logical ROM vs post-error-layer ROM", c9());
            report(10, "single-state curves", c10(&tables));
            report(11, "no-click distillation", c11());
            report(12, "decomposition audit", c12(&sweeps));
            report(13, "witness", c13(&sweeps));
        }
        Err(e) => {
            let msg = format!("{e:#}");
            for (id, name) in [(5, "fidelity transition"), (7, "effective channel purity")] {
                report(id, name, Err(anyhow::anyhow!("{msg}")));
            }
            report(6, "mixed-noise fidelity", c6());
            report(8, "concentration dichotomy", c8());
            report(9, "logical ROM vs post-error-layer ROM", c9());
            report(10, "single-state curves", c10(&tables));
            report(11, "no-click distillation", c11());
            for (id, name) in [(12, "decomposition audit"), (13, "witness")] {
                report(id, name, Err(anyhow::anyhow!("{msg}")));
            }
        }
    }
    report(14, "determinism", c14());
    println!("acceptance finished in {:.0} s", total.elapsed().as_secs_f64());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
