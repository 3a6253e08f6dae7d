//! Command-line front end for the `cvclone` simulator.
//!
//! Every flag can also come from a JSON object passed with `--config`, keyed
//! by the long flag name (`{"vmin": 0.25, "phase-known": true}`). Flags win
//! over the file.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvclone::benchmarks::{
    average_fidelity, classical_gaussian_alphabet, classical_known_phase, optimal_gaussian_fidelity,
    phase_known_optimal_bound, ClassicalKnownPhase, PhaseKnownBound,
};
use cvclone::cloner::heisenberg_clone_stats;
use cvclone::montecarlo::{compare_with_analytic, reproduce_figure3, run_batch_with_threads, Figure3Options};
use cvclone::optimizer::optimize_t1;
use cvclone::{Alphabet, Ancilla, CloneStatistics, ClonerConfig, Estimate, Regime};
use serde::Serialize;
use std::collections::BTreeMap;

pub mod output;
pub mod settings;
pub mod verify;

use output::{emit, to_json, SweepRow};
use settings::{resolve_seed, FileLayer};

/// A z-score above this fails `cvclone mc`.
pub const Z_FAIL: f64 = 5.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<cvclone::Error> for CliError {
    fn from(e: cvclone::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "cvclone", version, about = "Coherent-state cloning by linear optics and feedforward")]
pub struct Cli {
    /// JSON file with default values for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity versus alphabet width, as CSV or JSON.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Best tap transmittance for a symmetric Gaussian alphabet.
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
    /// Report for the known-phase cloner.
    #[command(allow_negative_numbers = true)]
    PhaseKnown(PhaseKnownArgs),
    /// Sampled trajectories compared with the analytic statistics.
    #[command(allow_negative_numbers = true)]
    Mc(McArgs),
    /// Closed-form identity checks.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphabetKind {
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Tap tuned to the ideal optimum at each width.
    Optimal,
    /// Fixed tap and gains.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AncillaKind {
    Vacuum,
    Squeezed,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub alphabet: Option<AlphabetKind>,
    #[arg(long)]
    pub vmin: Option<f64>,
    #[arg(long)]
    pub vmax: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Feedforward detector efficiency.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Feedforward mode overlap.
    #[arg(long)]
    pub visibility: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<SweepMode>,
    #[arg(long)]
    pub t1: Option<f64>,
    /// Amplitude gain (defaults to the matched gain for `--t1`).
    #[arg(long)]
    pub gx: Option<f64>,
    #[arg(long)]
    pub gp: Option<f64>,
    /// Output file; standard output if absent or `-`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Alphabet width V.
    #[arg(long = "V")]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PhaseKnownArgs {
    #[arg(long, value_enum)]
    pub ancilla: Option<AncillaKind>,
    /// Phase variance of the tap ancilla (squeezed only).
    #[arg(long = "p1-var")]
    pub p1_var: Option<f64>,
    /// Amplitude variance of the output ancilla (squeezed only).
    #[arg(long = "x3-var")]
    pub x3_var: Option<f64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Symmetric Gaussian alphabet of width V, machine at its optimum.
    #[arg(long = "V", conflicts_with = "phase_known")]
    pub v: Option<f64>,
    /// Known-phase alphabet and machine.
    #[arg(long = "phase-known")]
    pub phase_known: bool,
    #[arg(long, value_enum)]
    pub ancilla: Option<AncillaKind>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Defaults to `CVCLONE_SEED`, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Noise variance added to each fed-forward outcome (SNU).
    #[arg(long = "elec-noise")]
    pub elec_noise: Option<f64>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command, writing reports to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}").map_err(|e| CliError::Io(e.to_string()))?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let file = FileLayer::load(cli.config.as_deref())?;
    match cli.command {
        Command::Sweep(a) => cmd_sweep(a, &file, stdout),
        Command::Optimize(a) => cmd_optimize(a, &file, stdout),
        Command::PhaseKnown(a) => cmd_phase_known(a, &file, stdout),
        Command::Mc(a) => cmd_mc(a, &file, std::env::var("CVCLONE_SEED").ok().as_deref(), stdout),
        Command::Verify => cmd_verify(stdout),
    }
}

fn unit_interval(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("--{name} must lie in (0, 1], got {x}")))
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

/// Linear grid with inclusive endpoints.
pub fn linear_grid(vmin: f64, vmax: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                vmax
            } else {
                vmin + (vmax - vmin) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// Rows of the sweep described by `a` and the config file.
pub fn sweep_rows(a: &SweepArgs, file: &FileLayer) -> Result<Vec<SweepRow>, CliError> {
    let _alphabet = file.pick_or(a.alphabet, "alphabet", AlphabetKind::Gaussian)?;
    let vmin = required(file.pick(a.vmin, "vmin")?, "vmin")?;
    let vmax = required(file.pick(a.vmax, "vmax")?, "vmax")?;
    let steps = required(file.pick(a.steps, "steps")?, "steps")?;
    if !(vmin > 0.0 && vmin.is_finite()) {
        return Err(CliError::Usage(format!("--vmin must be positive, got {vmin}")));
    }
    if !(vmax > vmin && vmax.is_finite()) {
        return Err(CliError::Usage(format!("--vmax must exceed --vmin, got {vmax}")));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    let eta = unit_interval("eta", file.pick_or(a.eta, "eta", cvclone::montecarlo::EXPERIMENT_ETA)?)?;
    let visibility = unit_interval(
        "visibility",
        file.pick_or(a.visibility, "visibility", cvclone::montecarlo::EXPERIMENT_VISIBILITY)?,
    )?;
    let grid = linear_grid(vmin, vmax, steps);

    match file.pick_or(a.mode, "mode", SweepMode::Optimal)? {
        SweepMode::Optimal => {
            let opts = Figure3Options {
                eta_ff: eta,
                visibility,
                ..Default::default()
            };
            Ok(reproduce_figure3(&grid, &opts)?
                .into_iter()
                .map(|r| SweepRow {
                    sqrt_v: r.sqrt_v,
                    v: r.v,
                    t1: r.t1,
                    gain: r.gain,
                    f_ideal: r.f_ideal,
                    f_imperfect: r.f_imperfect,
                    f_classical: r.f_classical,
                })
                .collect())
        }
        SweepMode::Fixed => {
            let t1 = required(file.pick(a.t1, "t1")?, "t1")?;
            let matched = ClonerConfig::matched(t1);
            let gx = file.pick_or(a.gx, "gx", matched.g_x)?;
            let gp = file.pick_or(a.gp, "gp", matched.g_p)?;
            let ideal = ClonerConfig { g_x: gx, g_p: gp, ..matched };
            ideal.validate()?;
            // Lossy feedforward with gains raised to keep the optical gain.
            let lossy_base = ClonerConfig::matched_imperfect(t1, eta, visibility);
            let boost = lossy_base.feedforward_transmission().sqrt().recip();
            let lossy = ClonerConfig {
                g_x: gx * boost,
                g_p: gp * boost,
                ..lossy_base
            };
            let ideal_stats = heisenberg_clone_stats(&ideal)?;
            let lossy_stats = heisenberg_clone_stats(&lossy)?;
            grid.into_iter()
                .map(|v| {
                    let alphabet = Alphabet::SymmetricGaussian { v };
                    Ok(SweepRow {
                        sqrt_v: v.sqrt(),
                        v,
                        t1,
                        gain: gx,
                        f_ideal: average_fidelity(&ideal_stats, &alphabet)?,
                        f_imperfect: average_fidelity(&lossy_stats, &alphabet)?,
                        f_classical: classical_gaussian_alphabet(v)?.fidelity,
                    })
                })
                .collect()
        }
    }
}

#[derive(Serialize)]
struct SweepJson<'a> {
    columns: [&'static str; 7],
    /// Provenance of columns that are not machine outputs.
    notes: BTreeMap<&'static str, &'static str>,
    rows: &'a [SweepRow],
}

fn cmd_sweep(a: SweepArgs, file: &FileLayer, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = sweep_rows(&a, file)?;
    let text = match file.pick_or(a.format, "format", Format::Csv)? {
        Format::Csv => output::csv(&rows),
        Format::Json => to_json(&SweepJson {
            columns: ["sqrtV", "V", "T1", "gain", "F_ideal", "F_imperfect", "F_classical"],
            notes: BTreeMap::from([(
                "F_classical",
                "derived curve: best heterodyne measure-and-prepare fidelity (1+2V)/(1+4V)",
            )]),
            rows: &rows,
        }),
    };
    let out: Option<PathBuf> = file.pick(a.out, "out")?;
    emit(out.as_deref(), &text, stdout)
}

#[derive(Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct OptimizeReport {
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    pub gain: f64,
    pub lambda: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub regime: Regime,
    pub iterations: usize,
    /// Gaps between the numerical optimum and the closed form.
    pub certificate: BTreeMap<String, f64>,
}

pub fn optimize_report(v: f64) -> Result<OptimizeReport, CliError> {
    let r = optimize_t1(v)?;
    Ok(OptimizeReport {
        v,
        t1: r.argument("T1"),
        gain: r.argument("gain"),
        lambda: r.argument("lambda"),
        f: r.f_value,
        regime: optimal_gaussian_fidelity(v)?.regime,
        iterations: r.iterations,
        certificate: r.certificate,
    })
}

fn cmd_optimize(a: OptimizeArgs, file: &FileLayer, stdout: &mut dyn Write) -> Result<(), CliError> {
    let v = required(file.pick(a.v, "V")?, "V")?;
    emit(None, &to_json(&optimize_report(v)?), stdout)
}

#[derive(Debug, Serialize)]
pub struct ClassicalReport {
    #[serde(flatten)]
    pub benchmark: ClassicalKnownPhase,
    /// The same expression with the two radicands that appear in print.
    pub radicand_3_plus_2sqrt2: f64,
    pub radicand_3_plus_sqrt2: f64,
}

#[derive(Debug, Serialize)]
pub struct PhaseKnownReport {
    pub ancilla: AncillaKind,
    pub anc1: Ancilla,
    pub anc3: Ancilla,
    pub stats: CloneStatistics,
    #[serde(rename = "F")]
    pub f: f64,
    pub noise_db_x: f64,
    pub noise_db_p: f64,
    pub bound: PhaseKnownBound,
    pub classical: ClassicalReport,
}

pub fn phase_known_report(a: &PhaseKnownArgs, file: &FileLayer) -> Result<PhaseKnownReport, CliError> {
    let ancilla = file.pick_or(a.ancilla, "ancilla", AncillaKind::Vacuum)?;
    let p1_var: Option<f64> = file.pick(a.p1_var, "p1-var")?;
    let x3_var: Option<f64> = file.pick(a.x3_var, "x3-var")?;
    let (anc1, anc3) = match ancilla {
        AncillaKind::Vacuum => {
            if p1_var.is_some() || x3_var.is_some() {
                return Err(CliError::Usage("--p1-var/--x3-var need --ancilla squeezed".into()));
            }
            (Ancilla::VACUUM, Ancilla::VACUUM)
        }
        AncillaKind::Squeezed => (
            Ancilla::squeezed_p(p1_var.unwrap_or(cvclone::optimizer::SQUEEZE_FLOOR))?,
            Ancilla::squeezed_x(x3_var.unwrap_or((8.0f64 / 5.0).sqrt()))?,
        ),
    };
    let stats = heisenberg_clone_stats(&ClonerConfig::phase_known(anc1, anc3))?;
    Ok(PhaseKnownReport {
        ancilla,
        anc1,
        anc3,
        stats,
        f: average_fidelity(&stats, &Alphabet::KnownPhase { phase: 0.0 })?,
        noise_db_x: stats.noise_db_x(),
        noise_db_p: stats.noise_db_p(),
        bound: phase_known_optimal_bound(),
        classical: ClassicalReport {
            benchmark: classical_known_phase(),
            radicand_3_plus_2sqrt2: 2.0 / (3.0 + 2.0 * std::f64::consts::SQRT_2).sqrt(),
            radicand_3_plus_sqrt2: 2.0 / (3.0 + std::f64::consts::SQRT_2).sqrt(),
        },
    })
}

fn cmd_phase_known(a: PhaseKnownArgs, file: &FileLayer, stdout: &mut dyn Write) -> Result<(), CliError> {
    emit(None, &to_json(&phase_known_report(&a, file)?), stdout)
}

#[derive(Debug, Serialize)]
pub struct McReport {
    pub alphabet: Alphabet,
    pub config: ClonerConfig,
    pub trajectories: usize,
    pub seed: u64,
    pub empirical: BTreeMap<String, Estimate>,
    pub analytic: BTreeMap<String, f64>,
    pub z_scores: BTreeMap<String, f64>,
    pub max_abs_z: f64,
}

pub fn mc_report(a: &McArgs, file: &FileLayer, env_seed: Option<&str>) -> Result<McReport, CliError> {
    let phase_known = file.switch(a.phase_known, "phase-known")?;
    let v: Option<f64> = file.pick(a.v, "V")?;
    let trajectories = required(file.pick(a.trajectories, "trajectories")?, "trajectories")?;
    if trajectories == 0 {
        return Err(CliError::Usage("--trajectories must be at least 1".into()));
    }
    let seed = resolve_seed(a.seed, file, env_seed)?;
    let eta = unit_interval("eta", file.pick_or(a.eta, "eta", 1.0)?)?;
    let visibility = unit_interval("visibility", file.pick_or(a.visibility, "visibility", 1.0)?)?;
    let elec_noise = file.pick_or(a.elec_noise, "elec-noise", 0.0)?;
    let threads: Option<usize> = file.pick(a.threads, "threads")?;

    let (alphabet, base) = match (v, phase_known) {
        (Some(_), true) => return Err(CliError::Usage("give either --V or --phase-known, not both".into())),
        (None, false) => return Err(CliError::Usage("give --V or --phase-known".into())),
        (Some(v), false) => (
            Alphabet::SymmetricGaussian { v },
            ClonerConfig::matched_imperfect(optimal_gaussian_fidelity(v)?.t1, eta, visibility),
        ),
        (None, true) => {
            let (anc1, anc3) = match file.pick_or(a.ancilla, "ancilla", AncillaKind::Vacuum)? {
                AncillaKind::Vacuum => (Ancilla::VACUUM, Ancilla::VACUUM),
                AncillaKind::Squeezed => (
                    Ancilla::squeezed_p(cvclone::optimizer::SQUEEZE_FLOOR)?,
                    Ancilla::squeezed_x((8.0f64 / 5.0).sqrt())?,
                ),
            };
            (
                Alphabet::KnownPhase { phase: 0.0 },
                ClonerConfig::phase_known_imperfect(anc1, anc3, eta, visibility),
            )
        }
    };
    let config = ClonerConfig { elec_noise, ..base };
    let batch = run_batch_with_threads(&config, &alphabet, trajectories, seed, threads)?;
    let cmp = compare_with_analytic(&batch)?;
    Ok(McReport {
        alphabet,
        config,
        trajectories,
        seed,
        max_abs_z: cmp.max_abs_z(),
        empirical: cmp.empirical,
        analytic: cmp.analytic,
        z_scores: cmp.z_scores,
    })
}

fn cmd_mc(a: McArgs, file: &FileLayer, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let report = mc_report(&a, file, env_seed)?;
    let out: Option<PathBuf> = file.pick(a.out, "out")?;
    emit(out.as_deref(), &to_json(&report), stdout)?;
    if report.max_abs_z > Z_FAIL {
        return Err(CliError::Check(format!(
            "sampled statistics disagree with the analytic map: max |z| = {:.2}",
            report.max_abs_z
        )));
    }
    Ok(())
}

fn cmd_verify(stdout: &mut dyn Write) -> Result<(), CliError> {
    let results = verify::run_checks(&verify::Constants::default());
    emit(None, &verify::table(&results), stdout)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::Check(format!("{failed} check(s) failed")));
    }
    Ok(())
}
