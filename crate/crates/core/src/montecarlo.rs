//! Shot-by-shot simulation of the cloning experiment.
//!
//! Each trajectory draws an input coherent state from the alphabet, runs the
//! circuit with sampled detector outcomes and records the conditional clone
//! moments. Gains are estimated by regressing clone means on input means, and
//! total variances as the (outcome-independent) conditional variance plus the
//! residual scatter of the clone means.
//!
//! Trajectory `i` draws from the ChaCha8 stream `i` of the batch seed, and
//! results are reduced in index order, so batches are bit-identical for any
//! thread count.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    average_fidelity, classical_gaussian_alphabet, optimal_gaussian_fidelity, Alphabet, THRESHOLD_V,
};
use crate::cloner::{build_circuit, heisenberg_clone_stats, Ancilla, CloneStatistics, ClonerConfig};
use crate::error::{Error, Result};
use crate::gaussian::{coherent_overlap, GaussianState, Quadrature};

/// Input amplitudes cycled through when sampling the known-phase alphabet.
pub const KNOWN_PHASE_AMPLITUDES: [f64; 4] = [0.0, 2.0, 4.0, 8.0];

/// Feedforward detector efficiency and mode overlap of the experiment.
pub const EXPERIMENT_ETA: f64 = 0.95;
pub const EXPERIMENT_VISIBILITY: f64 = 0.99;

/// Relative rounding scale used as the smallest standard error.
pub const ROUNDING_SE: f64 = 1e-12;

/// Value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Deviation from `reference` in standard errors. The SE is floored at
    /// rounding level (`1e-12` relative) so that statistics which are
    /// deterministic up to rounding score near zero instead of blowing up.
    pub fn z_score(&self, reference: f64) -> f64 {
        let floor = ROUNDING_SE * reference.abs().max(1.0);
        (self.value - reference) / self.se.max(floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub input_mean: (f64, f64),
    /// Outcomes fed forward, `[x, p]` (zero for an undetected quadrature).
    pub outcomes: [f64; 2],
    pub clone_means: [(f64, f64); 2],
    /// Conditional `(σx, σp)` of each clone.
    pub clone_vars: [(f64, f64); 2],
}

/// Empirical statistics of one clone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloneAggregates {
    /// `None` when the inputs carry no signal in that quadrature.
    pub lambda_x: Option<Estimate>,
    pub lambda_p: Option<Estimate>,
    pub sigma_x: Estimate,
    pub sigma_p: Estimate,
    pub fidelity: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    pub n_traj: usize,
    pub seed: u64,
    pub config: ClonerConfig,
    pub alphabet: Alphabet,
    pub records: Vec<TrajectoryRecord>,
    pub aggregates: [CloneAggregates; 2],
}

/// Sum in a fixed binary-tree order.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

fn mean_estimate(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let m = mean(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).powi(2)).collect();
    let var = if values.len() > 1 {
        pairwise_sum(&dev) / (n - 1.0)
    } else {
        0.0
    };
    Estimate {
        value: m,
        se: (var / n).sqrt(),
    }
}

/// Gain estimate and residuals of `outputs` against `inputs`.
fn regress(inputs: &[f64], outputs: &[f64]) -> (Option<Estimate>, Vec<f64>) {
    let n = inputs.len() as f64;
    let (mu, my) = (mean(inputs), mean(outputs));
    let sxx = pairwise_sum(&inputs.iter().map(|u| (u - mu).powi(2)).collect::<Vec<_>>());
    let spread = (sxx / n).sqrt();
    if spread > 1e-12 * mu.abs().max(1.0) && inputs.len() > 2 {
        let sxy = pairwise_sum(
            &inputs
                .iter()
                .zip(outputs)
                .map(|(u, y)| (u - mu) * (y - my))
                .collect::<Vec<_>>(),
        );
        let slope = sxy / sxx;
        let intercept = my - slope * mu;
        let resid: Vec<f64> = inputs
            .iter()
            .zip(outputs)
            .map(|(u, y)| y - intercept - slope * u)
            .collect();
        let s2 = pairwise_sum(&resid.iter().map(|r| r * r).collect::<Vec<_>>()) / (n - 2.0);
        (
            Some(Estimate {
                value: slope,
                se: (s2 / sxx).sqrt(),
            }),
            resid,
        )
    } else {
        let est = mean_estimate(outputs);
        let resid = outputs.iter().map(|y| y - my).collect();
        let gain = (mu.abs() > 1e-12).then(|| Estimate {
            value: est.value / mu,
            se: est.se / mu.abs(),
        });
        (gain, resid)
    }
}

/// Total variance estimate: mean conditional variance plus residual scatter.
fn total_variance(cond: &[f64], resid: &[f64]) -> Estimate {
    let squares: Vec<f64> = resid.iter().map(|r| r * r).collect();
    let scatter = mean_estimate(&squares);
    Estimate {
        value: mean(cond) + scatter.value,
        se: scatter.se,
    }
}

fn aggregate(records: &[TrajectoryRecord], clone: usize) -> CloneAggregates {
    let ux: Vec<f64> = records.iter().map(|r| r.input_mean.0).collect();
    let up: Vec<f64> = records.iter().map(|r| r.input_mean.1).collect();
    let yx: Vec<f64> = records.iter().map(|r| r.clone_means[clone].0).collect();
    let yp: Vec<f64> = records.iter().map(|r| r.clone_means[clone].1).collect();
    let cx: Vec<f64> = records.iter().map(|r| r.clone_vars[clone].0).collect();
    let cp: Vec<f64> = records.iter().map(|r| r.clone_vars[clone].1).collect();
    let (lambda_x, rx) = regress(&ux, &yx);
    let (lambda_p, rp) = regress(&up, &yp);
    CloneAggregates {
        lambda_x,
        lambda_p,
        sigma_x: total_variance(&cx, &rx),
        sigma_p: total_variance(&cp, &rp),
        fidelity: mean_estimate(&shot_fidelities(records, clone)),
    }
}

/// Single-shot fidelity of each trajectory's clone with its input state.
pub fn shot_fidelities(records: &[TrajectoryRecord], clone: usize) -> Vec<f64> {
    records
        .iter()
        .map(|r| {
            let (mx, mp) = r.clone_means[clone];
            let (vx, vp) = r.clone_vars[clone];
            coherent_overlap(mx - r.input_mean.0, mp - r.input_mean.1, vx, vp)
        })
        .collect()
}

fn sample_input<R: Rng>(alphabet: &Alphabet, index: usize, rng: &mut R) -> (f64, f64) {
    match *alphabet {
        Alphabet::SymmetricGaussian { v } => {
            let sd = 2.0 * v.sqrt();
            let x: f64 = rng.sample(StandardNormal);
            let p: f64 = rng.sample(StandardNormal);
            (sd * x, sd * p)
        }
        Alphabet::Single { x_mean, p_mean } => (x_mean, p_mean),
        Alphabet::KnownPhase { .. } => (KNOWN_PHASE_AMPLITUDES[index % KNOWN_PHASE_AMPLITUDES.len()], 0.0),
        Alphabet::FlatLimit => unreachable!("rejected before sampling"),
    }
}

/// Random stream of trajectory `index`.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_trajectory(cfg: &ClonerConfig, alphabet: &Alphabet, seed: u64, index: usize) -> Result<TrajectoryRecord> {
    let mut rng = trajectory_rng(seed, index);
    let input_mean = sample_input(alphabet, index, &mut rng);
    let circuit = build_circuit(cfg, &GaussianState::coherent(input_mean.0, input_mean.1))?;
    let shot = circuit.run_shot(&mut rng)?;
    let clones = &shot.clones;
    let vars = |m: usize| (clones.variance(Quadrature::x(m)), clones.variance(Quadrature::p(m)));
    Ok(TrajectoryRecord {
        input_mean,
        outcomes: shot.fed_forward,
        clone_means: [clones.mode_mean(0), clones.mode_mean(1)],
        clone_vars: [vars(0), vars(1)],
    })
}

/// Runs `n_traj` trajectories on the global thread pool.
pub fn run_batch(cfg: &ClonerConfig, alphabet: &Alphabet, n_traj: usize, seed: u64) -> Result<TrajectoryBatch> {
    run_batch_with_threads(cfg, alphabet, n_traj, seed, None)
}

/// Runs `n_traj` trajectories on a dedicated pool of `threads` workers.
pub fn run_batch_with_threads(
    cfg: &ClonerConfig,
    alphabet: &Alphabet,
    n_traj: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<TrajectoryBatch> {
    if n_traj == 0 {
        return Err(Error::EmptyBatch);
    }
    alphabet.validate()?;
    if let Alphabet::FlatLimit = alphabet {
        return Err(Error::NotSamplable("the flat alphabet is an analytic limit"));
    }
    cfg.validate()?;

    let work = || -> Result<Vec<TrajectoryRecord>> {
        (0..n_traj)
            .into_par_iter()
            .map(|i| run_trajectory(cfg, alphabet, seed, i))
            .collect()
    };
    let records = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool")
            .install(work)?,
        None => work()?,
    };
    let aggregates = [aggregate(&records, 0), aggregate(&records, 1)];
    Ok(TrajectoryBatch {
        n_traj,
        seed,
        config: *cfg,
        alphabet: *alphabet,
        records,
        aggregates,
    })
}

/// Mean single-shot fidelity of one clone, with its standard error.
pub fn empirical_fidelity(batch: &TrajectoryBatch, clone: usize) -> Estimate {
    batch.aggregates[clone].fidelity
}

impl TrajectoryBatch {
    /// Fidelity estimates grouped by input amplitude `x`, ascending.
    pub fn fidelity_by_amplitude(&self, clone: usize) -> Vec<(f64, Estimate)> {
        let fids = shot_fidelities(&self.records, clone);
        let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for (r, f) in self.records.iter().zip(fids) {
            groups.entry(r.input_mean.0.to_bits()).or_default().push(f);
        }
        let mut out: Vec<(f64, Estimate)> = groups
            .into_iter()
            .map(|(bits, fs)| (f64::from_bits(bits), mean_estimate(&fs)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// Empirical statistics next to their analytic values, with z-scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub empirical: BTreeMap<String, Estimate>,
    pub analytic: BTreeMap<String, f64>,
    pub z_scores: BTreeMap<String, f64>,
}

impl Comparison {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.values().fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Compares both clones of a batch with the analytic map and the closed-form
/// average fidelity for the batch's alphabet.
pub fn compare_with_analytic(batch: &TrajectoryBatch) -> Result<Comparison> {
    let stats = heisenberg_clone_stats(&batch.config)?;
    let f = average_fidelity(&stats, &batch.alphabet)?;
    let mut empirical = BTreeMap::new();
    let mut analytic = BTreeMap::new();
    let mut z_scores = BTreeMap::new();
    for (c, agg) in batch.aggregates.iter().enumerate() {
        let entries = [
            ("lambda_x", agg.lambda_x, stats.lambda_x),
            ("lambda_p", agg.lambda_p, stats.lambda_p),
            ("sigma_x", Some(agg.sigma_x), stats.sigma_x),
            ("sigma_p", Some(agg.sigma_p), stats.sigma_p),
            ("F", Some(agg.fidelity), f),
        ];
        for (name, est, reference) in entries {
            if let Some(est) = est {
                let key = format!("clone{}.{name}", c + 1);
                z_scores.insert(key.clone(), est.z_score(reference));
                empirical.insert(key.clone(), est);
                analytic.insert(key, reference);
            }
        }
    }
    Ok(Comparison {
        empirical,
        analytic,
        z_scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure3Options {
    pub eta_ff: f64,
    pub visibility: f64,
    /// Trajectories per grid point; 0 skips the Monte Carlo column.
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for Figure3Options {
    fn default() -> Self {
        Figure3Options {
            eta_ff: EXPERIMENT_ETA,
            visibility: EXPERIMENT_VISIBILITY,
            n_traj: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure3Row {
    pub sqrt_v: f64,
    pub v: f64,
    pub t1: f64,
    /// Matched electronic gain of the ideal machine.
    pub gain: f64,
    pub f_ideal: f64,
    pub f_imperfect: f64,
    pub f_classical: f64,
    pub f_mc: Option<Estimate>,
}

/// Ideal, imperfect, classical and (optionally) sampled fidelity versus the
/// alphabet width, with the machine tuned to the ideal optimum at each `V`.
pub fn reproduce_figure3(v_grid: &[f64], opts: &Figure3Options) -> Result<Vec<Figure3Row>> {
    v_grid
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let alphabet = Alphabet::SymmetricGaussian { v };
            let opt = optimal_gaussian_fidelity(v)?;
            let ideal_cfg = ClonerConfig::matched(opt.t1);
            let lossy_cfg = ClonerConfig::matched_imperfect(opt.t1, opts.eta_ff, opts.visibility);
            let f_ideal = average_fidelity(&heisenberg_clone_stats(&ideal_cfg)?, &alphabet)?;
            let f_imperfect = average_fidelity(&heisenberg_clone_stats(&lossy_cfg)?, &alphabet)?;
            let f_mc = if opts.n_traj > 0 {
                let batch = run_batch(&lossy_cfg, &alphabet, opts.n_traj, opts.seed.wrapping_add(i as u64))?;
                Some(empirical_fidelity(&batch, 0))
            } else {
                None
            };
            Ok(Figure3Row {
                sqrt_v: v.sqrt(),
                v,
                t1: opt.t1,
                gain: ideal_cfg.g_x,
                f_ideal,
                f_imperfect,
                f_classical: classical_gaussian_alphabet(v)?.fidelity,
                f_mc,
            })
        })
        .collect()
}

/// Whether `v` lies in the regime where a bare beam splitter is optimal.
pub fn beam_splitter_regime(v: f64) -> bool {
    v < THRESHOLD_V
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure4Options {
    pub anc1: Ancilla,
    pub anc3: Ancilla,
    pub eta_ff: f64,
    pub visibility: f64,
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for Figure4Options {
    fn default() -> Self {
        Figure4Options {
            anc1: Ancilla::VACUUM,
            anc3: Ancilla::VACUUM,
            eta_ff: EXPERIMENT_ETA,
            visibility: EXPERIMENT_VISIBILITY,
            n_traj: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure4Report {
    /// Amplitude noise of the ideal machine, dB above shot noise.
    pub noise_db_ideal: f64,
    /// Amplitude noise with the lossy feedforward.
    pub noise_db: f64,
    pub fidelity_ideal: f64,
    pub fidelity: f64,
    pub stats: CloneStatistics,
    /// Sampled amplitude noise of clones 1 and 2, in dB.
    pub mc_noise_db: Option<[f64; 2]>,
    pub mc_fidelity: Option<[Estimate; 2]>,
}

/// Amplitude-noise and fidelity report of the known-phase machine.
pub fn reproduce_figure4(opts: &Figure4Options) -> Result<Figure4Report> {
    let known = Alphabet::KnownPhase { phase: 0.0 };
    let ideal = heisenberg_clone_stats(&ClonerConfig::phase_known(opts.anc1, opts.anc3))?;
    let cfg = ClonerConfig::phase_known_imperfect(opts.anc1, opts.anc3, opts.eta_ff, opts.visibility);
    let stats = heisenberg_clone_stats(&cfg)?;
    let (mut mc_noise_db, mut mc_fidelity) = (None, None);
    if opts.n_traj > 0 {
        let batch = run_batch(&cfg, &known, opts.n_traj, opts.seed)?;
        let [a, b] = batch.aggregates;
        mc_noise_db = Some([10.0 * a.sigma_x.value.log10(), 10.0 * b.sigma_x.value.log10()]);
        mc_fidelity = Some([a.fidelity, b.fidelity]);
    }
    Ok(Figure4Report {
        noise_db_ideal: ideal.noise_db_x(),
        noise_db: stats.noise_db_x(),
        fidelity_ideal: average_fidelity(&ideal, &known)?,
        fidelity: average_fidelity(&stats, &known)?,
        stats,
        mc_noise_db,
        mc_fidelity,
    })
}
