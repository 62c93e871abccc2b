use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use noisemagic::analytic::{
    alpha_boundary, fidelity_ad, fidelity_mixed, p_critical, purity_mean, tau_effective, transfer_factor_mixed,
    CodeParams,
};
use noisemagic::channels::{apply_all, gadc};
use noisemagic::clifford::{enumerate_stabilizer_states, StabilizerTable};
use noisemagic::magic::{rom_exact, rom_single_qubit_oracle, sre2, sre_depolarizing_analytic, witness_w2};
use noisemagic::par::Execution;
use noisemagic::protocol::{
    ensemble_run_with, no_click_distill, post_error_layer_rom, EnsembleSummary, MeanWeighting, Measures, NoiseModel,
    ProtocolConfig, MAX_ROM_LOGICAL_QUBITS,
};
use noisemagic::qcore::{DensityMatrix, C64};

use crate::config::{Defaults, Grid, Overrides, Settings, OUT_DIR_ENV};
use crate::output::{Cell, Manifest, Run, Table};
use crate::plot::{Heatmap, LinePlot, Series};
use crate::validate;

#[derive(Debug, Parser)]
#[command(name = "noisemagic", version, about = "Noisy random Clifford encoding-decoding experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub flags: Overrides,
    /// JSON file with the same keys as the flags (kebab-case).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Decoding fidelity under amplitude damping against the annealed closed form.
    FidelitySweep(RunArgs),
    /// Mean logical robustness of magic under amplitude damping.
    RomSweep(RunArgs),
    /// Robustness of damped single-qubit states.
    SingleState(RunArgs),
    /// Damping versus coherent rotation phase diagram.
    PhaseDiagram(RunArgs),
    /// Logical robustness under damping plus a fixed coherent rotation.
    RomMixed(RunArgs),
    /// Concentration of postselected outputs around their mean.
    Concentration(RunArgs),
    /// Magic of the no-click heralded state.
    Distill(RunArgs),
    /// Robustness under generalized amplitude damping over (p, eta).
    GadcMap(RunArgs),
    /// Auxiliary sweeps: depolarizing SRE, quenched/annealed gap, witness,
    /// post-error-layer robustness, mean-state purity and decomposition audit.
    AppendixChecks(RunArgs),
    /// Runs the invariant suite; exits nonzero if any check fails.
    Validate(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FidelitySweep(_) => "fidelity-sweep",
            Command::RomSweep(_) => "rom-sweep",
            Command::SingleState(_) => "single-state",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::RomMixed(_) => "rom-mixed",
            Command::Concentration(_) => "concentration",
            Command::Distill(_) => "distill",
            Command::GadcMap(_) => "gadc-map",
            Command::AppendixChecks(_) => "appendix-checks",
            Command::Validate(_) => "validate",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::FidelitySweep(a)
            | Command::RomSweep(a)
            | Command::SingleState(a)
            | Command::PhaseDiagram(a)
            | Command::RomMixed(a)
            | Command::Concentration(a)
            | Command::Distill(a)
            | Command::GadcMap(a)
            | Command::AppendixChecks(a)
            | Command::Validate(a) => a,
        }
    }

    pub fn defaults(&self) -> Defaults {
        let d = Defaults::default();
        match self {
            Command::FidelitySweep(_) => Defaults { sizes: vec![4, 6], samples: Some(500), ..d },
            Command::RomSweep(_) | Command::RomMixed(_) => Defaults { sizes: vec![2, 4, 6], ..d },
            Command::Concentration(_) => Defaults {
                sizes: vec![2, 4, 6],
                p: Grid::new(0.2, 0.6, 2),
                alpha_grid: Grid::new(0.4, 1.3, 2),
                samples: Some(500),
                ..d
            },
            Command::AppendixChecks(_) => Defaults { sizes: vec![2, 4, 6], samples: Some(500), ..d },
            Command::PhaseDiagram(_) => Defaults { sizes: vec![6], ..d },
            Command::Validate(_) => Defaults { samples: Some(200), ..d },
            _ => d,
        }
    }
}

/// Result of one command: its manifest and, for `validate`, whether every
/// check passed and the per-check report.
pub struct Outcome {
    pub manifest: Manifest,
    pub passed: bool,
    pub report: Vec<String>,
}

pub fn resolve_settings(command: &Command) -> Result<Settings> {
    let args = command.args();
    let file = match &args.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    Settings::resolve(command.defaults(), file, env_out, args.flags.clone())
}

fn configure_threads(threads: Option<usize>) -> Execution {
    match threads {
        Some(1) => Execution::Sequential,
        #[cfg(feature = "parallel")]
        Some(t) => {
            // a pool may already exist when several commands run in one process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            Execution::Parallel
        }
        _ => Execution::Parallel,
    }
}

/// Runs a command with fully resolved settings. `command_line` is echoed into the manifest.
pub fn execute_with(command: &Command, settings: Settings, command_line: &str) -> Result<Outcome> {
    let exec = configure_threads(settings.threads);
    let mut run = Run::start(command_line, settings.clone())?;
    let s = &settings;
    let mut report = Vec::new();
    let passed = match command {
        Command::FidelitySweep(_) => fidelity_sweep(&mut run, s, exec).map(|_| true)?,
        Command::RomSweep(_) => rom_sweep(&mut run, s, exec, None).map(|_| true)?,
        Command::RomMixed(_) => rom_sweep(&mut run, s, exec, Some(s.alpha)).map(|_| true)?,
        Command::SingleState(_) => single_state(&mut run, s).map(|_| true)?,
        Command::PhaseDiagram(_) => phase_diagram(&mut run, s, exec).map(|_| true)?,
        Command::Concentration(_) => concentration(&mut run, s, exec).map(|_| true)?,
        Command::Distill(_) => distill(&mut run, s).map(|_| true)?,
        Command::GadcMap(_) => gadc_map(&mut run, s).map(|_| true)?,
        Command::AppendixChecks(_) => appendix_checks(&mut run, s, exec).map(|_| true)?,
        Command::Validate(_) => {
            let (passed, lines) = validate::run(&mut run, s)?;
            report = lines;
            passed
        }
    };
    Ok(Outcome { manifest: run.finish()?, passed, report })
}

pub fn execute(command: &Command, command_line: &str) -> Result<Outcome> {
    let settings = resolve_settings(command)?;
    execute_with(command, settings, command_line)
}

fn check_sizes(sizes: &[usize], max: usize) -> Result<()> {
    for &n in sizes {
        if n < 2 || n % 2 == 1 || n > max {
            bail!("system size N = {n} must be even and between 2 and {max}");
        }
    }
    Ok(())
}

fn ensemble(
    run: &mut Run,
    exec: Execution,
    config: ProtocolConfig,
) -> Result<EnsembleSummary> {
    let label = format!("N = {}, k = {}, {:?}", config.n_qubits, config.n_logical, config.noise);
    let summary = ensemble_run_with(&config, exec).with_context(|| label)?;
    run.add_excluded(summary.n_excluded);
    Ok(summary)
}

fn code(n: usize, k: usize) -> Result<CodeParams> {
    Ok(CodeParams::new(n, k)?)
}

fn dense(lo: f64, hi: f64) -> Vec<f64> {
    Grid::new(lo, hi, 201).points()
}

fn fidelity_sweep(run: &mut Run, s: &Settings, exec: Execution) -> Result<()> {
    check_sizes(&s.sizes, 6)?;
    let mut table = Table::new("fidelity", &["N", "k", "p", "F_quenched", "stderr", "F_annealed_eq3"]);
    let mut series = Vec::new();
    let mut markers = Vec::new();
    for &n in &s.sizes {
        let k = s.logical(n);
        let params = code(n, k)?;
        let mut mc = Vec::new();
        for p in s.p.points() {
            let cfg = ProtocolConfig::new(n, k, NoiseModel::AmplitudeDamping { p }, s.samples_or(500), s.seed);
            let sum = ensemble(run, exec, cfg)?;
            let q = sum.quenched_fidelity;
            table.push(vec![n.into(), k.into(), p.into(), q.mean.into(), q.stderr.into(), fidelity_ad(p, params)?.into()]);
            mc.push((p, q.mean));
        }
        let curve = dense(s.p.min, s.p.max).into_iter().map(|p| Ok((p, fidelity_ad(p, params)?))).collect::<Result<_>>()?;
        series.push(Series::markers(format!("N={n} Monte Carlo"), mc));
        series.push(Series::line(format!("N={n} annealed"), curve));
        let pc = p_critical(params.rate())?;
        if !markers.iter().any(|(x, _): &(f64, String)| (*x - pc).abs() < 1e-12) {
            markers.push((pc, format!("p_c(r={})", params.rate())));
        }
    }
    run.write_table(&table)?;
    run.write_plot("fidelity", || {
        LinePlot {
            title: "Decoding fidelity under amplitude damping".into(),
            x_label: "p".into(),
            y_label: "F".into(),
            series,
            markers,
        }
        .render()
    })
}

fn default_rom_samples(n: usize) -> usize {
    match n {
        2 => 1000,
        4 => 500,
        _ => 300,
    }
}

fn rom_sweep(run: &mut Run, s: &Settings, exec: Execution, alpha: Option<f64>) -> Result<()> {
    check_sizes(&s.sizes, 6)?;
    let (name, headers): (&str, &[&str]) = match alpha {
        None => ("rom_sweep", &["N", "p", "mean_rom", "stderr", "rom_of_mean"]),
        Some(_) => ("rom_mixed", &["N", "alpha", "p", "mean_rom", "stderr", "rom_of_mean"]),
    };
    let mut table = Table::new(name, headers);
    let mut series = Vec::new();
    for &n in &s.sizes {
        let k = s.logical(n);
        if k > MAX_ROM_LOGICAL_QUBITS {
            bail!("logical ROM needs k <= {MAX_ROM_LOGICAL_QUBITS}, got k = {k}");
        }
        let mut pts = Vec::new();
        for p in s.p.points() {
            let noise = match alpha {
                None => NoiseModel::AmplitudeDamping { p },
                Some(a) => NoiseModel::Mixed { p, alpha: a },
            };
            let cfg = ProtocolConfig::new(n, k, noise, s.samples.unwrap_or(default_rom_samples(n)), s.seed)
                .with_measures(Measures { rom: true, ..Measures::default() });
            let sum = ensemble(run, exec, cfg)?;
            let r = sum.mean_rom.context("missing ROM estimate")?;
            let rom_of_mean = sum.rom_of_mean.context("missing mean-state ROM")?;
            let mut row: Vec<Cell> = vec![n.into()];
            if let Some(a) = alpha {
                row.push(a.into());
            }
            row.extend([p.into(), r.mean.into(), r.stderr.into(), rom_of_mean.into()]);
            table.push(row);
            pts.push((p, r.mean));
        }
        series.push(Series::line(format!("N={n}, k={k}"), pts));
    }
    run.write_table(&table)?;
    let title = match alpha {
        None => "Mean logical robustness under amplitude damping".to_string(),
        Some(a) => format!("Mean logical robustness, damping plus rotation alpha = {a}"),
    };
    run.write_plot(name, || {
        LinePlot { title, x_label: "p".into(), y_label: "mean ROM".into(), series, markers: vec![] }.render()
    })
}

fn single_qubit_states() -> Vec<(&'static str, DensityMatrix)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::from_pure(&[C64::new(h, 0.0), C64::new(h, 0.0)]).expect("valid state");
    let magic = DensityMatrix::from_pure(&[C64::new(h, 0.0), C64::from_polar(h, std::f64::consts::FRAC_PI_4)])
        .expect("valid state");
    vec![("plus", plus), ("H", magic), ("zero", DensityMatrix::zero_state(1))]
}

fn single_state(run: &mut Run, s: &Settings) -> Result<()> {
    let t1 = enumerate_stabilizer_states(1)?;
    let mut table = Table::new("single_state", &["state", "p", "rom", "rom_oracle", "sre2"]);
    let mut series = Vec::new();
    for (name, rho) in single_qubit_states() {
        let mut pts = Vec::new();
        for p in s.p.points() {
            let out = noisemagic::channels::amplitude_damping(p)?.apply(&rho)?;
            let rom = rom_exact(&out, &t1)?.value;
            table.push(vec![
                name.into(),
                p.into(),
                rom.into(),
                rom_single_qubit_oracle(&out)?.into(),
                sre2(&out)?.into(),
            ]);
            pts.push((p, rom));
        }
        series.push(Series::line(name, pts));
    }
    run.write_table(&table)?;
    run.write_plot("single_state", || {
        LinePlot {
            title: "Robustness of damped single-qubit states".into(),
            x_label: "p".into(),
            y_label: "ROM".into(),
            series,
            markers: vec![],
        }
        .render()
    })
}

fn phase_diagram(run: &mut Run, s: &Settings, exec: Execution) -> Result<()> {
    let n = s.sizes[0];
    check_sizes(&[n], 10)?;
    let k = s.logical(n);
    let params = code(n, k)?;
    let r = params.rate();
    let threshold = 2f64.powf(1.0 + r);
    let (ps, alphas) = (s.p.points(), s.alpha_grid.points());
    let mut table = Table::new("phase_diagram", &["N", "k", "p", "alpha", "B", "F_annealed", "resilient"]);
    let mut values = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        let mut row = Vec::with_capacity(ps.len());
        for &p in &ps {
            let b = transfer_factor_mixed(p, a)?;
            let f = fidelity_mixed(p, a, params)?;
            table.push(vec![n.into(), k.into(), p.into(), a.into(), b.into(), f.into(), (b > threshold).into()]);
            row.push(f);
        }
        values.push(row);
    }
    run.write_table(&table)?;
    let mut boundary = Table::new("phase_boundary", &["r", "p", "alpha_c"]);
    let mut overlay = Vec::new();
    for p in dense(s.p.min, s.p.max) {
        if let Some(a) = alpha_boundary(p, r)? {
            boundary.push(vec![r.into(), p.into(), a.into()]);
            overlay.push((p, a));
        }
    }
    run.write_table(&boundary)?;
    if let Some(samples) = s.samples {
        let mut mc = Table::new("phase_diagram_mc", &["N", "k", "p", "alpha", "F_quenched", "stderr"]);
        for &a in &alphas {
            for &p in &ps {
                let cfg = ProtocolConfig::new(n, k, NoiseModel::Mixed { p, alpha: a }, samples, s.seed);
                let q = ensemble(run, exec, cfg)?.quenched_fidelity;
                mc.push(vec![n.into(), k.into(), p.into(), a.into(), q.mean.into(), q.stderr.into()]);
            }
        }
        run.write_table(&mc)?;
    }
    run.write_plot("phase_diagram", || {
        Heatmap {
            title: format!("Annealed fidelity, N = {n}, r = {r}"),
            x_label: "p".into(),
            y_label: "alpha".into(),
            xs: ps,
            ys: alphas,
            values,
            overlay,
        }
        .render()
    })
}

fn concentration(run: &mut Run, s: &Settings, exec: Execution) -> Result<()> {
    check_sizes(&s.sizes, 10)?;
    let mut table = Table::new(
        "concentration",
        &["channel", "param", "N", "k", "hs_mean", "hs_stderr", "trace_mean", "trace_stderr", "sre_mean", "sre_stderr"],
    );
    let mut series = Vec::new();
    let mut cases: Vec<(&str, f64, NoiseModel)> = Vec::new();
    for p in s.p.points() {
        cases.push(("amplitude_damping", p, NoiseModel::AmplitudeDamping { p }));
    }
    for a in s.alpha_grid.points() {
        cases.push(("coherent", a, NoiseModel::Coherent { alpha: a }));
    }
    for (label, param, noise) in cases {
        let mut pts = Vec::new();
        for &n in &s.sizes {
            let k = s.logical(n);
            let cfg = ProtocolConfig::new(n, k, noise.clone(), s.samples_or(500), s.seed)
                .with_measures(Measures { distances: true, sre: true, ..Measures::default() });
            let sum = ensemble(run, exec, cfg)?;
            let hs = sum.hs_concentration.context("missing distances")?;
            let tr = sum.trace_concentration.context("missing distances")?;
            let m2 = sum.mean_sre.context("missing SRE")?;
            table.push(vec![
                label.into(),
                param.into(),
                n.into(),
                k.into(),
                hs.mean.into(),
                hs.stderr.into(),
                tr.mean.into(),
                tr.stderr.into(),
                m2.mean.into(),
                m2.stderr.into(),
            ]);
            pts.push((n as f64, hs.mean));
        }
        series.push(Series::line(format!("{label} {param}"), pts));
    }
    run.write_table(&table)?;
    run.write_plot("concentration", || {
        LinePlot {
            title: "Hilbert-Schmidt distance to the ensemble mean".into(),
            x_label: "N".into(),
            y_label: "E ||rho_U - rho_bar||_2".into(),
            series,
            markers: vec![],
        }
        .render()
    })
}

fn distill(run: &mut Run, s: &Settings) -> Result<()> {
    let mut table = Table::new("distill", &["p", "probability", "sre2", "amplitude_0", "amplitude_1"]);
    let mut pts = Vec::new();
    for p in s.p.points() {
        let out = no_click_distill(p)?;
        let m2 = sre2(&DensityMatrix::from_pure(&out.state)?)?;
        table.push(vec![p.into(), out.probability.into(), m2.into(), out.state[0].re.into(), out.state[1].re.into()]);
        pts.push((p, m2));
    }
    run.write_table(&table)?;
    run.write_plot("distill", || {
        LinePlot {
            title: "Stabilizer Renyi entropy of the no-click state".into(),
            x_label: "p".into(),
            y_label: "M2".into(),
            series: vec![Series::line("M2", pts)],
            markers: vec![],
        }
        .render()
    })
}

fn gadc_map(run: &mut Run, s: &Settings) -> Result<()> {
    let t1 = enumerate_stabilizer_states(1)?;
    let etas = match s.eta {
        Some(e) => vec![e],
        None => Grid::new(0.0, 1.0, s.p.steps).points(),
    };
    let ps = s.p.points();
    let mut table = Table::new("gadc_map", &["state", "p", "eta", "rom", "rom_ratio"]);
    let mut maps = Vec::new();
    for (name, rho) in single_qubit_states().into_iter().take(2) {
        let base = rom_exact(&rho, &t1)?.value;
        let mut values = Vec::new();
        for &eta in &etas {
            let mut row = Vec::new();
            for &p in &ps {
                let rom = rom_exact(&apply_all(&gadc(p, eta)?, &rho)?, &t1)?.value;
                table.push(vec![name.into(), p.into(), eta.into(), rom.into(), (rom / base).into()]);
                row.push(rom / base);
            }
            values.push(row);
        }
        maps.push((name, values));
    }
    run.write_table(&table)?;
    for (name, values) in maps {
        let (xs, ys) = (ps.clone(), etas.clone());
        run.write_plot(&format!("gadc_map_{name}"), || {
            Heatmap {
                title: format!("ROM ratio under generalized damping, |{name}>"),
                x_label: "p".into(),
                y_label: "eta".into(),
                xs,
                ys,
                values,
                overlay: vec![],
            }
            .render()
        })?;
    }
    Ok(())
}

const HIST_BINS: usize = 10;

fn histogram(values: &[f64]) -> Vec<(f64, f64, usize)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return vec![];
    }
    let width = if hi > lo { (hi - lo) / HIST_BINS as f64 } else { 1.0 };
    let mut counts = vec![0usize; HIST_BINS];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(HIST_BINS - 1);
        counts[b] += 1;
    }
    counts.into_iter().enumerate().map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c)).collect()
}

/// Sizes and sample counts for the full-system robustness after the noise layer.
const POST_ERROR_SIZES: [(usize, usize); 3] = [(2, 200), (3, 100), (4, 16)];
const POST_ERROR_P: [f64; 2] = [0.5, 0.7];

fn appendix_checks(run: &mut Run, s: &Settings, exec: Execution) -> Result<()> {
    check_sizes(&s.sizes, 10)?;
    let ps = s.p.points();

    let mut dep = Table::new("depolarizing_sre", &["N", "p", "sre_analytic", "max_abs_error"]);
    for n in 1..=3 {
        let table = enumerate_stabilizer_states(n)?;
        for &p in &ps {
            let analytic = sre_depolarizing_analytic(p, n)?;
            let channel = noisemagic::channels::depolarizing_global(p)?;
            let mut worst = 0.0f64;
            for psi in table.states() {
                let rho = channel.apply(&DensityMatrix::from_pure(psi)?);
                worst = worst.max((sre2(&rho)? - analytic).abs());
            }
            dep.push(vec![n.into(), p.into(), analytic.into(), worst.into()]);
        }
    }
    run.write_table(&dep)?;

    let mut gap = Table::new(
        "quenched_annealed",
        &["N", "k", "p", "F_quenched", "stderr", "F_ratio_of_means", "F_annealed_eq3", "gap"],
    );
    let mut wit = Table::new("witness", &["N", "k", "p", "mean_w2", "stderr", "max_w2", "w2_of_mean"]);
    let mut pur = Table::new(
        "mean_purity",
        &["N", "k", "p", "purity_plugin", "purity_jackknife", "stderr", "purity_analytic", "tau"],
    );
    let mut dec = Table::new(
        "decomposition",
        &[
            "N",
            "k",
            "p",
            "alpha_mean",
            "alpha_stderr",
            "beta_mean",
            "beta_stderr",
            "xi_norm_mean",
            "xi_norm_stderr",
            "max_identity_defect",
            "master_violations",
            "master_max_gap",
        ],
    );
    let mut hist = Table::new("decomposition_hist", &["N", "p", "quantity", "bin_lo", "bin_hi", "count"]);
    let mut gap_series = Vec::new();
    for &n in &s.sizes {
        let k = s.logical(n);
        let params = code(n, k)?;
        let mut gap_pts = Vec::new();
        for &p in &ps {
            let cfg = ProtocolConfig::new(n, k, NoiseModel::AmplitudeDamping { p }, s.samples_or(500), s.seed)
                .with_measures(Measures { witness: true, alpha_beta_xi: true, ..Measures::default() })
                .with_weighting(MeanWeighting::SuccessWeighted);
            let sum = ensemble(run, exec, cfg)?;
            let q = sum.quenched_fidelity;
            let fa = fidelity_ad(p, params)?;
            gap.push(vec![
                n.into(),
                k.into(),
                p.into(),
                q.mean.into(),
                q.stderr.into(),
                sum.ratio_of_means_fidelity.into(),
                fa.into(),
                (q.mean - sum.ratio_of_means_fidelity).into(),
            ]);
            gap_pts.push((p, q.mean - sum.ratio_of_means_fidelity));

            let w = sum.mean_w2.context("missing witness")?;
            let max_w = sum.records.iter().filter_map(|r| r.w2).fold(f64::NEG_INFINITY, f64::max);
            wit.push(vec![
                n.into(),
                k.into(),
                p.into(),
                w.mean.into(),
                w.stderr.into(),
                max_w.into(),
                witness_w2(&sum.mean_state)?.into(),
            ]);

            let tau = tau_effective(p, params)?;
            let j = sum.mean_state_purity_jackknife;
            pur.push(vec![
                n.into(),
                k.into(),
                p.into(),
                sum.mean_state_purity.into(),
                j.mean.into(),
                j.stderr.into(),
                purity_mean(tau, params).into(),
                tau.into(),
            ]);

            let m = sum.alpha_beta_xi.as_ref().context("missing decomposition")?;
            dec.push(vec![
                n.into(),
                k.into(),
                p.into(),
                m.alpha.mean.into(),
                m.alpha.stderr.into(),
                m.beta.mean.into(),
                m.beta.stderr.into(),
                m.xi_trace_norm.mean.into(),
                m.xi_trace_norm.stderr.into(),
                m.max_identity_defect.into(),
                m.master_inequality_violations.into(),
                m.master_inequality_max_gap.into(),
            ]);
            let parts: [(&str, Vec<f64>); 3] = [
                ("alpha_over_s", sum.records.iter().filter_map(|r| Some(r.decomposition.as_ref()?.alpha / r.s_u)).collect()),
                ("beta_over_s", sum.records.iter().filter_map(|r| Some(r.decomposition.as_ref()?.beta / r.s_u)).collect()),
                (
                    "xi_norm_over_s",
                    sum.records.iter().filter_map(|r| Some(r.decomposition.as_ref()?.xi_trace_norm / r.s_u)).collect(),
                ),
            ];
            for (name, values) in parts {
                for (lo, hi, c) in histogram(&values) {
                    hist.push(vec![n.into(), p.into(), name.into(), lo.into(), hi.into(), c.into()]);
                }
            }
        }
        gap_series.push(Series::line(format!("N={n}, k={k}"), gap_pts));
    }
    run.write_table(&gap)?;
    run.write_table(&wit)?;
    run.write_table(&pur)?;
    run.write_table(&dec)?;
    run.write_table(&hist)?;

    let mut post = Table::new("post_error_rom", &["N", "p", "mean_rom", "stderr", "samples"]);
    let tables: Vec<StabilizerTable> =
        POST_ERROR_SIZES.iter().map(|&(n, _)| enumerate_stabilizer_states(n)).collect::<Result<_, _>>()?;
    for p in POST_ERROR_P {
        for (&(n, default_samples), table) in POST_ERROR_SIZES.iter().zip(&tables) {
            let samples = s.samples.map_or(default_samples, |m| m.min(default_samples));
            let cfg = ProtocolConfig::new(n, 1, NoiseModel::AmplitudeDamping { p }, samples, s.seed);
            let r = post_error_layer_rom(&cfg, table, exec)?;
            post.push(vec![n.into(), p.into(), r.mean.into(), r.stderr.into(), samples.into()]);
        }
    }
    run.write_table(&post)?;
    run.write_plot("quenched_annealed", || {
        LinePlot {
            title: "Quenched minus annealed fidelity".into(),
            x_label: "p".into(),
            y_label: "F_q - F_a".into(),
            series: gap_series,
            markers: vec![],
        }
        .render()
    })
}
