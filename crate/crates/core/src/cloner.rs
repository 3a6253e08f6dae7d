//! The 1→2 feedforward cloning machine.
//!
//! The input is tapped on a beam splitter of transmittance `T1`. The reflected
//! part is split on `T2` and homodyned in `x` (and, for `T2 < 1`, in `p`); the
//! outcomes, scaled by the electronic gains, displace the transmitted part,
//! which is finally divided on a 50/50 splitter into two clones.
//!
//! Two evaluation routes are provided: [`heisenberg_clone_stats`] expands the
//! machine into explicit linear input-output coefficients, while
//! [`CloningCircuit`] runs the same machine on [`GaussianState`]s, either shot
//! by shot with sampled outcomes or as an outcome-averaged ensemble.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::gaussian::{GaussianState, MeasurementRecord, Quadrature};

/// Quadrature variances of a squeezed-vacuum ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ancilla {
    pub var_x: f64,
    pub var_p: f64,
}

impl Ancilla {
    pub const VACUUM: Ancilla = Ancilla {
        var_x: 1.0,
        var_p: 1.0,
    };

    pub fn new(var_x: f64, var_p: f64) -> Result<Self> {
        let a = Ancilla { var_x, var_p };
        a.validate()?;
        Ok(a)
    }

    /// Minimum-uncertainty ancilla with the given `x` variance.
    pub fn squeezed_x(var_x: f64) -> Result<Self> {
        Ancilla::new(var_x, 1.0 / var_x)
    }

    /// Minimum-uncertainty ancilla with the given `p` variance.
    pub fn squeezed_p(var_p: f64) -> Result<Self> {
        Ancilla::new(1.0 / var_p, var_p)
    }

    pub fn validate(&self) -> Result<()> {
        GaussianState::squeezed_vacuum(self.var_x, self.var_p).map(|_| ())
    }

    pub fn state(&self) -> Result<GaussianState> {
        GaussianState::squeezed_vacuum(self.var_x, self.var_p)
    }
}

impl Default for Ancilla {
    fn default() -> Self {
        Ancilla::VACUUM
    }
}

/// Parameters of the cloning machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClonerConfig {
    /// Tap beam-splitter transmittance.
    pub t1: f64,
    /// Transmittance splitting the tapped beam between the `x` and `p`
    /// detectors; 1/2 is heterodyne, 1 is `x` homodyne only.
    pub t2: f64,
    pub g_x: f64,
    pub g_p: f64,
    /// Ancilla entering the tap splitter.
    pub anc1: Ancilla,
    /// Ancilla entering the output splitter.
    pub anc3: Ancilla,
    /// Detector efficiency in the feedforward arm.
    pub eta_ff: f64,
    /// Mode overlap of the feedforward detection.
    pub visibility: f64,
    /// Classical noise variance (SNU) added to each fed-forward outcome.
    #[serde(default)]
    pub elec_noise: f64,
}

impl ClonerConfig {
    /// Heterodyne machine with the gain `√(2(1-T1)/T1)` that removes `a1`
    /// and gives cloning gain `1/√(2 T1)`.
    pub fn matched(t1: f64) -> Self {
        Self::matched_imperfect(t1, 1.0, 1.0)
    }

    /// Like [`ClonerConfig::matched`] with a lossy feedforward arm. The gains
    /// are raised by `1/√(η ξ²)` so the optical cloning gain is unchanged.
    pub fn matched_imperfect(t1: f64, eta_ff: f64, visibility: f64) -> Self {
        let transmission = eta_ff * visibility * visibility;
        let g = (2.0 * (1.0 - t1) / (t1 * transmission)).sqrt();
        ClonerConfig {
            t1,
            t2: 0.5,
            g_x: g,
            g_p: g,
            anc1: Ancilla::VACUUM,
            anc3: Ancilla::VACUUM,
            eta_ff,
            visibility,
            elec_noise: 0.0,
        }
    }

    /// Known-phase machine: `T1 = 1/2`, `T2 = 1`, no phase feedforward and an
    /// amplitude gain that cancels `a1` from the clones' `x` quadrature.
    pub fn phase_known(anc1: Ancilla, anc3: Ancilla) -> Self {
        Self::phase_known_imperfect(anc1, anc3, 1.0, 1.0)
    }

    pub fn phase_known_imperfect(anc1: Ancilla, anc3: Ancilla, eta_ff: f64, visibility: f64) -> Self {
        let transmission = eta_ff * visibility * visibility;
        ClonerConfig {
            t1: 0.5,
            t2: 1.0,
            g_x: 1.0 / transmission.sqrt(),
            g_p: 0.0,
            anc1,
            anc3,
            eta_ff,
            visibility,
            elec_noise: 0.0,
        }
    }

    /// Power transmission seen by the feedforward detectors, `η ξ²`.
    pub fn feedforward_transmission(&self) -> f64 {
        self.eta_ff * self.visibility * self.visibility
    }

    /// Whether the phase quadrature is detected at all.
    pub fn measures_p(&self) -> bool {
        self.t2 < 1.0
    }

    pub fn validate(&self) -> Result<()> {
        check_range("T1", self.t1, 0.0, 1.0, "[0, 1]")?;
        check_range("T2", self.t2, 0.0, 1.0, "[0, 1]")?;
        check_range("g_x", self.g_x, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
        check_range("g_p", self.g_p, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
        check_range("eta_ff", self.eta_ff, f64::MIN_POSITIVE, 1.0, "(0, 1]")?;
        check_range("visibility", self.visibility, f64::MIN_POSITIVE, 1.0, "(0, 1]")?;
        check_range("elec_noise", self.elec_noise, 0.0, f64::INFINITY, "[0, inf)")?;
        self.anc1.validate()?;
        self.anc3.validate()
    }
}

/// Mean gains and total quadrature variances of one clone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloneStatistics {
    pub lambda_x: f64,
    pub lambda_p: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

impl CloneStatistics {
    /// Noise referred to the input, `(σ - λ²)/λ²`, per quadrature.
    pub fn referred_noise(&self) -> (f64, f64) {
        let refer = |sigma: f64, lambda: f64| (sigma - lambda * lambda) / (lambda * lambda);
        (
            refer(self.sigma_x, self.lambda_x),
            refer(self.sigma_p, self.lambda_p),
        )
    }

    /// Amplitude-quadrature noise relative to shot noise, in dB.
    pub fn noise_db_x(&self) -> f64 {
        10.0 * self.sigma_x.log10()
    }

    pub fn noise_db_p(&self) -> f64 {
        10.0 * self.sigma_p.log10()
    }
}

/// Independent noise sources entering the clones, in coefficient order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Input = 0,
    Anc1 = 1,
    Loss = 2,
    Anc2 = 3,
    Anc3 = 4,
    Electronic = 5,
}

pub const N_SOURCES: usize = 6;

/// Explicit input-output coefficients of both clones.
///
/// `x[c][s]` is the coefficient of source `s`'s `x` quadrature in clone `c`'s
/// `x` quadrature; likewise for `p`. The machine never mixes `x` and `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCloneMap {
    pub x: [[f64; N_SOURCES]; 2],
    pub p: [[f64; N_SOURCES]; 2],
}

impl LinearCloneMap {
    pub fn new(cfg: &ClonerConfig) -> Self {
        let (t1, t2) = (cfg.t1, cfg.t2);
        let (ct1, rt1) = (t1.sqrt(), (1.0 - t1).sqrt());
        let l = cfg.feedforward_transmission();
        let (cl, rl) = (l.sqrt(), (1.0 - l).sqrt());
        let (ct2, rt2) = (t2.sqrt(), (1.0 - t2).sqrt());
        let h = std::f64::consts::FRAC_1_SQRT_2;

        // Transmitted beam before feedforward, and the lossy reflected beam.
        let transmitted = [ct1, rt1, 0.0, 0.0, 0.0, 0.0];
        let reflected = [rt1 * cl, -ct1 * cl, rl, 0.0, 0.0, 0.0];

        let mut meas_x = reflected.map(|c| ct2 * c);
        meas_x[Source::Anc2 as usize] = rt2;
        meas_x[Source::Electronic as usize] = 1.0;

        let mut meas_p = [0.0; N_SOURCES];
        if cfg.measures_p() {
            meas_p = reflected.map(|c| rt2 * c);
            meas_p[Source::Anc2 as usize] = -ct2;
            meas_p[Source::Electronic as usize] = 1.0;
        }

        let displaced = |meas: &[f64; N_SOURCES], g: f64| {
            let mut out = transmitted;
            for (o, m) in out.iter_mut().zip(meas) {
                *o += g * m;
            }
            out
        };
        let split = |beam: [f64; N_SOURCES], sign: f64| {
            let mut out = beam.map(|c| h * c);
            out[Source::Anc3 as usize] = sign * h;
            out
        };
        let dx = displaced(&meas_x, cfg.g_x);
        let dp = displaced(&meas_p, cfg.g_p);
        LinearCloneMap {
            x: [split(dx, 1.0), split(dx, -1.0)],
            p: [split(dp, 1.0), split(dp, -1.0)],
        }
    }

    fn variances(cfg: &ClonerConfig, input_var: (f64, f64)) -> ([f64; N_SOURCES], [f64; N_SOURCES]) {
        (
            [input_var.0, cfg.anc1.var_x, 1.0, 1.0, cfg.anc3.var_x, cfg.elec_noise],
            [input_var.1, cfg.anc1.var_p, 1.0, 1.0, cfg.anc3.var_p, cfg.elec_noise],
        )
    }
}

fn weighted_dot(a: &[f64; N_SOURCES], b: &[f64; N_SOURCES], w: &[f64; N_SOURCES]) -> f64 {
    a.iter().zip(b).zip(w).map(|((a, b), w)| a * b * w).sum()
}

/// Exact gains and variances of either clone for a coherent input.
pub fn heisenberg_clone_stats(cfg: &ClonerConfig) -> Result<CloneStatistics> {
    cfg.validate()?;
    if cfg.t1 <= 0.0 {
        return Err(Error::OutOfRange {
            name: "T1",
            value: cfg.t1,
            range: "(0, 1]",
        });
    }
    let map = LinearCloneMap::new(cfg);
    let (vx, vp) = LinearCloneMap::variances(cfg, (1.0, 1.0));
    Ok(CloneStatistics {
        lambda_x: map.x[0][Source::Input as usize],
        lambda_p: map.p[0][Source::Input as usize],
        sigma_x: weighted_dot(&map.x[0], &map.x[0], &vx),
        sigma_p: weighted_dot(&map.p[0], &map.p[0], &vp),
    })
}

/// Statistics of the known-phase machine with the given ancillas.
pub fn phase_known_clone_stats(anc1: Ancilla, anc3: Ancilla) -> Result<CloneStatistics> {
    heisenberg_clone_stats(&ClonerConfig::phase_known(anc1, anc3))
}

fn single_mode_input(input: &GaussianState) -> Result<()> {
    if input.n_modes() != 1 {
        return Err(Error::ModeCount {
            expected: 1,
            got: input.n_modes(),
        });
    }
    let xp = input.cov()[(0, 1)];
    if xp.abs() > crate::gaussian::DIAGONAL_TOL {
        return Err(Error::NonDiagonal(xp));
    }
    Ok(())
}

/// Outcome-averaged two-clone state from the analytic map, including the
/// correlations between clones created by the shared noise terms.
pub fn clone_output_state(cfg: &ClonerConfig, input: &GaussianState) -> Result<GaussianState> {
    cfg.validate()?;
    single_mode_input(input)?;
    let map = LinearCloneMap::new(cfg);
    let (vx, vp) = LinearCloneMap::variances(cfg, (input.cov()[(0, 0)], input.cov()[(1, 1)]));
    let (mx, mp) = input.mode_mean(0);
    let i = Source::Input as usize;
    let mean = nalgebra::DVector::from_vec(vec![
        map.x[0][i] * mx,
        map.p[0][i] * mp,
        map.x[1][i] * mx,
        map.p[1][i] * mp,
    ]);
    let mut cov = nalgebra::DMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            cov[(2 * a, 2 * b)] = weighted_dot(&map.x[a], &map.x[b], &vx);
            cov[(2 * a + 1, 2 * b + 1)] = weighted_dot(&map.p[a], &map.p[b], &vp);
        }
    }
    GaussianState::new(mean, cov)
}

/// One sampled run of the machine.
#[derive(Debug, Clone)]
pub struct Shot {
    /// Raw detector outcomes (before electronic noise).
    pub outcomes: Vec<MeasurementRecord>,
    /// Outcomes actually fed forward, `[x, p]`.
    pub fed_forward: [f64; 2],
    /// Conditional two-clone state.
    pub clones: GaussianState,
}

/// The machine assembled from Gaussian primitives for a given input.
///
/// Mode layout after [`CloningCircuit::pre_measurement`]:
/// 0 transmitted beam, 1 `x` detector arm, 2 `p` detector arm, 3 ancilla `a3`.
#[derive(Debug, Clone)]
pub struct CloningCircuit {
    cfg: ClonerConfig,
    prepared: GaussianState,
}

pub fn build_circuit(cfg: &ClonerConfig, input: &GaussianState) -> Result<CloningCircuit> {
    cfg.validate()?;
    single_mode_input(input)?;
    let state = input
        .tensor(&cfg.anc1.state()?)
        .tensor(&GaussianState::vacuum(1))
        .tensor(&cfg.anc3.state()?);
    // modes: 0 input, 1 a1, 2 a2, 3 a3
    let prepared = state
        .beam_splitter(0, 1, cfg.t1)?
        .loss(1, cfg.feedforward_transmission())?
        .beam_splitter(1, 2, cfg.t2)?;
    Ok(CloningCircuit { cfg: *cfg, prepared })
}

impl CloningCircuit {
    pub fn config(&self) -> &ClonerConfig {
        &self.cfg
    }

    /// Joint state of all four modes just before detection.
    pub fn pre_measurement(&self) -> &GaussianState {
        &self.prepared
    }

    /// Samples detector outcomes, applies the feedforward and returns the
    /// conditional clone state.
    pub fn run_shot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Shot> {
        let cfg = &self.cfg;
        let elec_sd = cfg.elec_noise.sqrt();
        let mut outcomes = Vec::with_capacity(2);
        let mut fed = [0.0; 2];

        let state = if cfg.measures_p() {
            let (rec, rest) = self.prepared.measure_quadrature(Quadrature::p(2), rng)?;
            outcomes.push(rec);
            fed[1] = rec.outcome;
            rest
        } else {
            self.prepared.partial_trace(&[0, 1, 3])?
        };
        let (rec, state) = state.measure_quadrature(Quadrature::x(1), rng)?;
        fed[0] = rec.outcome;
        outcomes.insert(0, rec);

        if elec_sd > 0.0 {
            fed[0] += elec_sd * rng.sample::<f64, _>(StandardNormal);
            if cfg.measures_p() {
                fed[1] += elec_sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let gp = if cfg.measures_p() { cfg.g_p } else { 0.0 };
        // modes: 0 transmitted, 1 a3
        let clones = state
            .displace(0, cfg.g_x * fed[0], gp * fed[1])?
            .beam_splitter(0, 1, 0.5)?;
        Ok(Shot {
            outcomes,
            fed_forward: fed,
            clones,
        })
    }

    /// Outcome-averaged clone state, obtained by applying the feedforward as a
    /// classical linear map before discarding the detected modes.
    pub fn ensemble(&self) -> Result<GaussianState> {
        let cfg = &self.cfg;
        let mut state = self
            .prepared
            .add_noise(Quadrature::x(1), cfg.elec_noise)?
            .feed_forward(Quadrature::x(1), Quadrature::x(0), cfg.g_x)?;
        if cfg.measures_p() {
            state = state
                .add_noise(Quadrature::p(2), cfg.elec_noise)?
                .feed_forward(Quadrature::p(2), Quadrature::p(0), cfg.g_p)?;
        }
        state.partial_trace(&[0, 3])?.beam_splitter(0, 1, 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn unity_gain_machine() {
        let s = heisenberg_clone_stats(&ClonerConfig::matched(0.5)).unwrap();
        close(s.lambda_x, 1.0, 1e-15);
        close(s.lambda_p, 1.0, 1e-15);
        close(s.sigma_x, 2.0, 1e-14);
        close(s.sigma_p, 2.0, 1e-14);
    }

    #[test]
    fn experimental_operating_point() {
        let cfg = ClonerConfig::matched(0.83);
        close(cfg.g_x, 0.64, 5e-4);
        let s = heisenberg_clone_stats(&cfg).unwrap();
        close(s.lambda_x, 0.776, 1e-3);
        close(s.lambda_p, 0.776, 1e-3);
        close(s.sigma_x, 1.205, 5e-4);
        close(s.sigma_p, 1.205, 5e-4);
    }

    #[test]
    fn beam_splitter_only_machine() {
        let s = heisenberg_clone_stats(&ClonerConfig::matched(1.0)).unwrap();
        assert_eq!(ClonerConfig::matched(1.0).g_x, 0.0);
        close(s.lambda_x, std::f64::consts::FRAC_1_SQRT_2, 1e-15);
        close(s.sigma_x, 1.0, 1e-15);
        close(s.sigma_p, 1.0, 1e-15);
    }

    #[test]
    fn zero_tap_transmittance_is_rejected() {
        let mut cfg = ClonerConfig::matched(0.5);
        cfg.t1 = 0.0;
        assert!(heisenberg_clone_stats(&cfg).is_err());
        cfg.t1 = 1.2;
        assert!(heisenberg_clone_stats(&cfg).is_err());
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ClonerConfig::matched(0.5);
        cfg.eta_ff = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ClonerConfig::matched(0.5);
        cfg.anc3 = Ancilla {
            var_x: 0.5,
            var_p: 0.5,
        };
        assert!(cfg.validate().is_err());
        assert!(Ancilla::new(0.5, 1.0).is_err());
    }

    #[test]
    fn phase_known_vacuum() {
        let s = phase_known_clone_stats(Ancilla::VACUUM, Ancilla::VACUUM).unwrap();
        close(s.lambda_x, 1.0, 1e-15);
        close(s.lambda_p, 0.5, 1e-15);
        close(s.sigma_x, 1.5, 1e-15);
        close(s.sigma_p, 1.0, 1e-15);
        close(s.noise_db_x(), 1.7609, 1e-4);
    }

    #[test]
    fn phase_known_matches_closed_form_for_squeezed_ancillas() {
        let anc1 = Ancilla::new(4.0, 0.3).unwrap();
        let anc3 = Ancilla::squeezed_x(1.7).unwrap();
        let s = phase_known_clone_stats(anc1, anc3).unwrap();
        close(s.sigma_x, 1.0 + anc3.var_x / 2.0, 1e-14);
        close(s.sigma_p, 0.25 * (1.0 + anc1.var_p) + anc3.var_p / 2.0, 1e-14);
    }

    #[test]
    fn imperfect_gains_keep_optical_gain() {
        let ideal = heisenberg_clone_stats(&ClonerConfig::matched(0.83)).unwrap();
        let lossy = heisenberg_clone_stats(&ClonerConfig::matched_imperfect(0.83, 0.95, 0.99)).unwrap();
        close(lossy.lambda_x, ideal.lambda_x, 1e-14);
        assert!(lossy.sigma_x > ideal.sigma_x);
        let pk = heisenberg_clone_stats(&ClonerConfig::phase_known_imperfect(
            Ancilla::VACUUM,
            Ancilla::VACUUM,
            0.95,
            0.99,
        ))
        .unwrap();
        close(pk.lambda_x, 1.0, 1e-14);
        let l = 0.95 * 0.99 * 0.99;
        close(pk.sigma_x, 1.5 + (1.0 - l) / (2.0 * l), 1e-14);
    }

    #[test]
    fn output_state_is_symmetric_and_centred_for_vacuum_input() {
        let cfg = ClonerConfig::matched(0.7);
        let out = clone_output_state(&cfg, &GaussianState::vacuum(1)).unwrap();
        assert_eq!(out.mode_mean(0), (0.0, 0.0));
        assert_eq!(out.mode_mean(1), (0.0, 0.0));
        close(out.cov()[(0, 0)], out.cov()[(2, 2)], 1e-15);
        close(out.cov()[(1, 1)], out.cov()[(3, 3)], 1e-15);
    }

    #[test]
    fn inter_clone_covariance_at_unity_gain() {
        // t' = √2 a_in + a2†, clones (t' ± a3)/√2: Cov = (Var t' - Var a3)/2 = (3 - 1)/2.
        let out = clone_output_state(&ClonerConfig::matched(0.5), &GaussianState::vacuum(1)).unwrap();
        close(out.cov()[(0, 2)], 1.0, 1e-14);
        close(out.cov()[(1, 3)], 1.0, 1e-14);
    }

    #[test]
    fn beam_splitter_only_circuit_halves_the_input() {
        let input = GaussianState::coherent(2.0, -1.0);
        let circuit = build_circuit(&ClonerConfig::matched(1.0), &input).unwrap();
        let arm = circuit.pre_measurement().partial_trace(&[1, 2]).unwrap();
        assert_eq!(arm.mean().amax(), 0.0);
        let out = circuit.ensemble().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        close(out.mode_mean(0).0, 2.0 * h, 1e-15);
        close(out.mode_mean(1).1, -h, 1e-15);
    }

    #[test]
    fn circuit_rejects_multimode_input() {
        assert!(build_circuit(&ClonerConfig::matched(0.5), &GaussianState::vacuum(2)).is_err());
    }
}
