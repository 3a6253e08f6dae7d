//! Input alphabets, closed-form average fidelities and classical
//! (measure-and-prepare) benchmarks.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::cloner::{heisenberg_clone_stats, CloneStatistics, ClonerConfig};
use crate::error::{check_range, Error, Result};
use crate::gaussian::coherent_overlap;

/// Alphabet width above which feedforward beats a bare beam splitter.
pub const THRESHOLD_V: f64 = 0.5 + FRAC_1_SQRT_2;

/// Tolerance on the unit amplitude gain required by the known-phase alphabet.
pub const KNOWN_PHASE_GAIN_TOL: f64 = 1e-9;

/// Ensemble of coherent input states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Alphabet {
    /// `p(α) = exp(-|α|²/2V)/(2πV)`; each quadrature mean has variance `4V`.
    SymmetricGaussian { v: f64 },
    /// Fixed, known phase with a completely random amplitude.
    KnownPhase { phase: f64 },
    /// A single known coherent state.
    Single { x_mean: f64, p_mean: f64 },
    /// `V → ∞` limit of the symmetric Gaussian alphabet.
    FlatLimit,
}

impl Alphabet {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Alphabet::SymmetricGaussian { v } => check_range("V", v, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)"),
            Alphabet::KnownPhase { phase } => {
                check_range("phase", phase, 0.0, std::f64::consts::TAU, "[0, 2pi)")?;
                if phase == std::f64::consts::TAU {
                    return Err(Error::OutOfRange {
                        name: "phase",
                        value: phase,
                        range: "[0, 2pi)",
                    });
                }
                Ok(())
            }
            Alphabet::Single { x_mean, p_mean } => {
                if x_mean.is_finite() && p_mean.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonFinite("coherent amplitude"))
                }
            }
            Alphabet::FlatLimit => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Feedforward,
    BeamSplitterOnly,
}

/// Average fidelity of clones with the given statistics over an alphabet.
///
/// For the symmetric Gaussian alphabet this is
/// `2/√((1+σx+4V(1-λx)²)(1+σp+4V(1-λp)²))`. The known-phase alphabet is taken
/// in the frame where its phase is zero, so only `λx = 1` gives a non-zero
/// average.
pub fn average_fidelity(stats: &CloneStatistics, alphabet: &Alphabet) -> Result<f64> {
    alphabet.validate()?;
    let CloneStatistics {
        lambda_x,
        lambda_p,
        sigma_x,
        sigma_p,
    } = *stats;
    match *alphabet {
        Alphabet::SymmetricGaussian { v } => {
            let ax = 1.0 + sigma_x + 4.0 * v * (1.0 - lambda_x).powi(2);
            let ap = 1.0 + sigma_p + 4.0 * v * (1.0 - lambda_p).powi(2);
            Ok(2.0 / (ax * ap).sqrt())
        }
        Alphabet::Single { x_mean, p_mean } => Ok(coherent_overlap(
            (lambda_x - 1.0) * x_mean,
            (lambda_p - 1.0) * p_mean,
            sigma_x,
            sigma_p,
        )),
        Alphabet::KnownPhase { .. } => {
            if (lambda_x - 1.0).abs() > KNOWN_PHASE_GAIN_TOL {
                return Err(Error::KnownPhaseGain(lambda_x));
            }
            Ok(2.0 / ((1.0 + sigma_x) * (1.0 + sigma_p)).sqrt())
        }
        Alphabet::FlatLimit => {
            let unity = (lambda_x - 1.0).abs() <= KNOWN_PHASE_GAIN_TOL
                && (lambda_p - 1.0).abs() <= KNOWN_PHASE_GAIN_TOL;
            Ok(if unity {
                2.0 / ((1.0 + sigma_x) * (1.0 + sigma_p)).sqrt()
            } else {
                0.0
            })
        }
    }
}

/// Average fidelity of the matched heterodyne machine with tap `T1` over a
/// symmetric Gaussian alphabet: `2T1 / (2V(1-√(2T1))² + T1 + 1)`.
pub fn gaussian_alphabet_fidelity(t1: f64, v: f64) -> Result<f64> {
    check_range("T1", t1, f64::MIN_POSITIVE, 1.0, "(0, 1]")?;
    check_range("V", v, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
    Ok(2.0 * t1 / (2.0 * v * (1.0 - (2.0 * t1).sqrt()).powi(2) + t1 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalGaussian {
    pub fidelity: f64,
    pub t1: f64,
    pub regime: Regime,
}

impl OptimalGaussian {
    /// Matched electronic gain for this operating point.
    pub fn gain(&self) -> f64 {
        ClonerConfig::matched(self.t1).g_x
    }
}

/// Best Gaussian cloning fidelity for a symmetric Gaussian alphabet.
pub fn optimal_gaussian_fidelity(v: f64) -> Result<OptimalGaussian> {
    check_range("V", v, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
    Ok(if v >= THRESHOLD_V {
        OptimalGaussian {
            fidelity: upper_branch(v),
            t1: 0.5 * (1.0 / (2.0 * v) + 1.0).powi(2),
            regime: Regime::Feedforward,
        }
    } else {
        OptimalGaussian {
            fidelity: lower_branch(v),
            t1: 1.0,
            regime: Regime::BeamSplitterOnly,
        }
    })
}

/// Feedforward branch, `(4V+2)/(6V+1)`.
pub fn upper_branch(v: f64) -> f64 {
    (4.0 * v + 2.0) / (6.0 * v + 1.0)
}

/// Beam-splitter branch, `1/((3-2√2)V+1)`.
pub fn lower_branch(v: f64) -> f64 {
    1.0 / ((3.0 - 2.0 * SQRT_2) * v + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalGaussian {
    pub fidelity: f64,
    /// Gain applied to the heterodyne estimate when repreparing.
    pub gain: f64,
}

/// Heterodyne-and-reprepare benchmark for the symmetric Gaussian alphabet:
/// `F = (1+2V)/(1+4V)` at gain `2V/(1+2V)`.
pub fn classical_gaussian_alphabet(v: f64) -> Result<ClassicalGaussian> {
    check_range("V", v, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
    Ok(ClassicalGaussian {
        fidelity: (1.0 + 2.0 * v) / (1.0 + 4.0 * v),
        gain: 2.0 * v / (1.0 + 2.0 * v),
    })
}

/// Average fidelity of heterodyne + coherent repreparation at gain `g`, in
/// closed form (Gaussian-alphabet formula with `λ = g`, `σ = 1 + 2g²`).
pub fn classical_gaussian_fidelity_at(v: f64, gain: f64) -> f64 {
    2.0 / (2.0 + 2.0 * gain * gain + 4.0 * v * (1.0 - gain).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalKnownPhase {
    pub fidelity: f64,
    pub prep_var_x: f64,
    pub prep_var_p: f64,
}

/// Homodyne-and-reprepare benchmark for the known-phase alphabet. The
/// prepared state is squeezed to `(√2, 1/√2)` and displaced to the outcome.
pub fn classical_known_phase() -> ClassicalKnownPhase {
    ClassicalKnownPhase {
        fidelity: 2.0 / (3.0 + 2.0 * SQRT_2).sqrt(),
        prep_var_x: SQRT_2,
        prep_var_p: FRAC_1_SQRT_2,
    }
}

/// Known-phase measure-and-prepare fidelity for preparation variances
/// `(s_x, 1/s_x)`: `2/√((2+s_x)(1+1/s_x))`.
pub fn known_phase_prepare_fidelity(s_x: f64) -> f64 {
    2.0 / ((2.0 + s_x) * (1.0 + 1.0 / s_x)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseKnownBound {
    pub fidelity: f64,
    pub lambda_p: f64,
    /// Input-referred amplitude noise `Δ²n_x`.
    pub dn_x: f64,
    /// Input-referred phase noise `Δ²n_p`.
    pub dn_p: f64,
}

/// Known-phase fidelity of symmetric clones with unit amplitude gain, phase
/// gain `lambda_p` and input-referred noises `dn_x`, `dn_p`.
pub fn known_phase_noise_fidelity(lambda_p: f64, dn_x: f64, dn_p: f64) -> f64 {
    let sigma_x = 1.0 + dn_x;
    let sigma_p = lambda_p * lambda_p * (1.0 + dn_p);
    2.0 / ((1.0 + sigma_x) * (1.0 + sigma_p)).sqrt()
}

/// Best known-phase fidelity allowed by the two-clone uncertainty relation
/// `Δ²n_x Δ²n_p ≥ 1` and the single-clone bound
/// `Δ²n_x Δ²n_p ≥ ((1-λp)/λp)²`.
///
/// Both constraints meet at `λp = 1/2`, where the product is pinned to 1 and
/// `(2+n)(5/4+1/(4n))` is minimal at `n = √(2/5)`.
pub fn phase_known_optimal_bound() -> PhaseKnownBound {
    let dn_x = (2.0f64 / 5.0).sqrt();
    let dn_p = 1.0 / dn_x;
    PhaseKnownBound {
        fidelity: known_phase_noise_fidelity(0.5, dn_x, dn_p),
        lambda_p: 0.5,
        dn_x,
        dn_p,
    }
}

/// Fidelities of a machine against its optimum and the classical limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub f_machine: f64,
    pub f_optimal_gaussian: f64,
    pub f_classical: f64,
    pub regime: Regime,
    pub params_used: ClonerConfig,
}

/// Report for the optimally tuned machine on a symmetric Gaussian alphabet,
/// with the given feedforward detector efficiency and visibility.
pub fn gaussian_report(v: f64, eta_ff: f64, visibility: f64) -> Result<FidelityReport> {
    let opt = optimal_gaussian_fidelity(v)?;
    let cfg = ClonerConfig::matched_imperfect(opt.t1, eta_ff, visibility);
    let stats = heisenberg_clone_stats(&cfg)?;
    Ok(FidelityReport {
        f_machine: average_fidelity(&stats, &Alphabet::SymmetricGaussian { v })?,
        f_optimal_gaussian: opt.fidelity,
        f_classical: classical_gaussian_alphabet(v)?.fidelity,
        regime: opt.regime,
        params_used: cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloner::{phase_known_clone_stats, Ancilla};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn stats(lx: f64, lp: f64, sx: f64, sp: f64) -> CloneStatistics {
        CloneStatistics {
            lambda_x: lx,
            lambda_p: lp,
            sigma_x: sx,
            sigma_p: sp,
        }
    }

    #[test]
    fn measured_operating_point() {
        let f = average_fidelity(&stats(0.775, 0.775, 1.21, 1.26), &Alphabet::SymmetricGaussian { v: 1.72 }).unwrap();
        close(f, 0.774, 0.002);
    }

    #[test]
    fn flat_alphabet_limit() {
        let s = stats(1.0, 1.0, 2.0, 2.0);
        close(average_fidelity(&s, &Alphabet::SymmetricGaussian { v: 1e6 }).unwrap(), 2.0 / 3.0, 1e-12);
        close(average_fidelity(&s, &Alphabet::FlatLimit).unwrap(), 2.0 / 3.0, 1e-15);
        assert_eq!(average_fidelity(&stats(0.9, 1.0, 2.0, 2.0), &Alphabet::FlatLimit).unwrap(), 0.0);
    }

    #[test]
    fn known_phase_requires_unit_gain() {
        let kp = Alphabet::KnownPhase { phase: 0.0 };
        close(average_fidelity(&stats(1.0, 0.5, 1.5, 1.0), &kp).unwrap(), 2.0 / 5f64.sqrt(), 1e-15);
        assert!(matches!(
            average_fidelity(&stats(0.98, 0.5, 1.5, 1.0), &kp),
            Err(Error::KnownPhaseGain(_))
        ));
    }

    #[test]
    fn single_state_delegates_to_overlap() {
        let s = stats(0.8, 0.9, 1.3, 1.1);
        let clone = crate::gaussian::GaussianState::squeezed_vacuum(1.3, 1.1)
            .unwrap()
            .displace(0, 0.8 * 2.0, -0.9)
            .unwrap();
        let direct = crate::gaussian::fidelity_coherent_vs_gaussian((2.0, -1.0), &clone).unwrap();
        close(
            average_fidelity(&s, &Alphabet::Single { x_mean: 2.0, p_mean: -1.0 }).unwrap(),
            direct,
            1e-15,
        );
    }

    #[test]
    fn invalid_alphabets() {
        let s = stats(1.0, 1.0, 2.0, 2.0);
        assert!(average_fidelity(&s, &Alphabet::SymmetricGaussian { v: 0.0 }).is_err());
        assert!(average_fidelity(&s, &Alphabet::SymmetricGaussian { v: -1.0 }).is_err());
        assert!(average_fidelity(&s, &Alphabet::KnownPhase { phase: 7.0 }).is_err());
        assert!(average_fidelity(&s, &Alphabet::Single { x_mean: f64::NAN, p_mean: 0.0 }).is_err());
    }

    #[test]
    fn eq3_reference_values() {
        close(gaussian_alphabet_fidelity(0.83, 1.72).unwrap(), 0.7845, 5e-4);
        for v in [0.1, 1.0, 3.3, 1e4] {
            close(gaussian_alphabet_fidelity(0.5, v).unwrap(), 2.0 / 3.0, 1e-15);
        }
        close(gaussian_alphabet_fidelity(1.0, 1.0).unwrap(), 1.0 / (1.0 + (3.0 - 2.0 * SQRT_2)), 1e-15);
        assert!(gaussian_alphabet_fidelity(0.0, 1.0).is_err());
        assert!(gaussian_alphabet_fidelity(0.5, 0.0).is_err());
    }

    #[test]
    fn eq3_agrees_with_machine_statistics() {
        for &(t1, v) in &[(0.6, 0.4), (0.83, 1.72), (0.97, 5.0)] {
            let s = heisenberg_clone_stats(&ClonerConfig::matched(t1)).unwrap();
            close(
                average_fidelity(&s, &Alphabet::SymmetricGaussian { v }).unwrap(),
                gaussian_alphabet_fidelity(t1, v).unwrap(),
                1e-14,
            );
        }
    }

    #[test]
    fn optimum_reference_values() {
        let o = optimal_gaussian_fidelity(1.72).unwrap();
        close(o.fidelity, 0.7845, 5e-5);
        close(o.t1, 0.833, 5e-4);
        assert_eq!(o.regime, Regime::Feedforward);

        close(upper_branch(THRESHOLD_V), lower_branch(THRESHOLD_V), 1e-12);
        close(upper_branch(THRESHOLD_V), 0.8284, 1e-4);
        close(optimal_gaussian_fidelity(THRESHOLD_V).unwrap().t1, 1.0, 1e-12);

        let tiny = optimal_gaussian_fidelity(1e-9).unwrap();
        close(tiny.fidelity, 1.0, 1e-9);
        assert_eq!(tiny.regime, Regime::BeamSplitterOnly);
        assert_eq!(optimal_gaussian_fidelity(0.5).unwrap().gain(), 0.0);
    }

    #[test]
    fn classical_gaussian_reference_values() {
        close(classical_gaussian_alphabet(1e9).unwrap().fidelity, 0.5, 1e-9);
        close(classical_gaussian_alphabet(1.72).unwrap().fidelity, 0.5635, 1e-4);
        close(classical_gaussian_alphabet(1e-9).unwrap().fidelity, 1.0, 1e-8);
        let c = classical_gaussian_alphabet(1.0).unwrap();
        close(c.gain, 2.0 / 3.0, 1e-15);
        close(classical_gaussian_fidelity_at(1.0, c.gain), c.fidelity, 1e-15);
    }

    #[test]
    fn classical_known_phase_reference_values() {
        let c = classical_known_phase();
        close(c.prep_var_p, 0.5f64.sqrt(), 1e-15);
        close(c.fidelity, 0.828, 5e-4);
        close(known_phase_prepare_fidelity(c.prep_var_x), c.fidelity, 1e-15);
        close(known_phase_prepare_fidelity(1.0), 2.0 / 6f64.sqrt(), 1e-15);
    }

    #[test]
    fn phase_known_bound_and_its_realization() {
        let b = phase_known_optimal_bound();
        close(b.fidelity, 4.0 * (10f64.sqrt() - 1.0) / 9.0, 1e-14);
        close(b.dn_p, 2.5f64.sqrt(), 1e-14);
        let anc3 = Ancilla::new((8.0f64 / 5.0).sqrt(), (5.0f64 / 8.0).sqrt()).unwrap();
        let anc1 = Ancilla::squeezed_p(1e-6).unwrap();
        let s = phase_known_clone_stats(anc1, anc3).unwrap();
        let f = average_fidelity(&s, &Alphabet::KnownPhase { phase: 0.0 }).unwrap();
        close(f, b.fidelity, 1e-6);
    }

    #[test]
    fn quantum_machine_beats_classical_everywhere() {
        for k in 1..=50 {
            let v = 0.1 * k as f64;
            let r = gaussian_report(v, 1.0, 1.0).unwrap();
            close(r.f_machine, r.f_optimal_gaussian, 1e-12);
            assert!(r.f_machine > r.f_classical, "V = {v}");
        }
    }

    #[test]
    fn fidelity_decreases_with_alphabet_width() {
        let s = heisenberg_clone_stats(&ClonerConfig::matched(0.8)).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let f = average_fidelity(&s, &Alphabet::SymmetricGaussian { v: 0.1 * k as f64 }).unwrap();
            assert!(f < prev);
            prev = f;
        }
    }
}
