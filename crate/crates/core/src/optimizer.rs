//! Numerical maximization of average fidelities over machine parameters,
//! with certificates against the closed-form optima.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    average_fidelity, classical_gaussian_alphabet, classical_known_phase, gaussian_alphabet_fidelity,
    known_phase_noise_fidelity, optimal_gaussian_fidelity, phase_known_optimal_bound, Alphabet,
};
use crate::cloner::{heisenberg_clone_stats, Ancilla, ClonerConfig};
use crate::error::{check_range, Error, Result};
use crate::gaussian::coherent_overlap;
use crate::search::{golden_section_max, grid_golden_max, Maximum};

/// Coarse grid size used before golden-section refinement.
pub const DEFAULT_GRID: usize = 64;
const XTOL: f64 = 1e-12;
/// Lower edge of the tap transmittance search.
const T1_MIN: f64 = 1e-6;
/// Floor for squeezed ancilla variances when realizing an optimum.
pub const SQUEEZE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// Machine realizing the optimum, when there is one.
    pub params: Option<ClonerConfig>,
    /// Coordinates of the optimum by name.
    pub arguments: BTreeMap<String, f64>,
    pub f_value: f64,
    pub iterations: usize,
    /// Absolute gaps between numeric and closed-form values.
    pub certificate: BTreeMap<String, f64>,
}

impl OptimizationResult {
    pub fn argument(&self, name: &str) -> f64 {
        self.arguments.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn gap(&self, name: &str) -> f64 {
        self.certificate.get(name).copied().unwrap_or(f64::NAN)
    }
}

fn map(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
}

/// Best tap transmittance for a symmetric Gaussian alphabet of width `v`.
pub fn optimize_t1(v: f64) -> Result<OptimizationResult> {
    optimize_t1_with_grid(v, DEFAULT_GRID)
}

pub fn optimize_t1_with_grid(v: f64, n_grid: usize) -> Result<OptimizationResult> {
    check_range("V", v, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
    let objective = |t1: f64| gaussian_alphabet_fidelity(t1, v).unwrap_or(f64::NEG_INFINITY);
    let best = grid_golden_max(objective, T1_MIN, 1.0, n_grid, XTOL);
    let closed = optimal_gaussian_fidelity(v)?;
    let params = ClonerConfig::matched(best.x);
    Ok(OptimizationResult {
        params: Some(params),
        arguments: map(&[
            ("T1", best.x),
            ("gain", params.g_x),
            ("lambda", 1.0 / (2.0 * best.x).sqrt()),
        ]),
        f_value: best.value,
        iterations: best.iterations,
        certificate: map(&[
            ("T1", (best.x - closed.t1).abs()),
            ("F", (best.value - closed.fidelity).abs()),
        ]),
    })
}

/// Family of known-phase machines to optimize over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AncillaModel {
    /// Vacuum ancillas; the tap transmittance is free and the amplitude
    /// feedforward keeps unit amplitude gain.
    VacuumAncillas,
    /// Arbitrary Gaussian noise obeying both clone uncertainty relations.
    SqueezedAncillas,
    /// Single-clone bound only (two-clone relation dropped).
    Relaxed,
}

/// Known-phase machine with tap `t1`, `x` homodyne feedforward tuned for unit
/// amplitude gain, and vacuum ancillas.
fn unity_gain_phase_known(t1: f64) -> ClonerConfig {
    let g = (std::f64::consts::SQRT_2 - t1.sqrt()) / (1.0 - t1).sqrt();
    ClonerConfig {
        t1,
        t2: 1.0,
        g_x: g,
        g_p: 0.0,
        ..ClonerConfig::phase_known(Ancilla::VACUUM, Ancilla::VACUUM)
    }
}

/// Maximizes the known-phase fidelity within the given machine family.
pub fn optimize_phase_known(model: AncillaModel) -> Result<OptimizationResult> {
    let known = Alphabet::KnownPhase { phase: 0.0 };
    let bound = phase_known_optimal_bound();
    match model {
        AncillaModel::VacuumAncillas => {
            let objective = |t1: f64| {
                heisenberg_clone_stats(&unity_gain_phase_known(t1))
                    .and_then(|s| average_fidelity(&s, &known))
                    .unwrap_or(f64::NEG_INFINITY)
            };
            let best = grid_golden_max(objective, 0.01, 0.99, DEFAULT_GRID, XTOL);
            let params = unity_gain_phase_known(best.x);
            let stats = heisenberg_clone_stats(&params)?;
            let (dn_x, dn_p) = stats.referred_noise();
            Ok(OptimizationResult {
                params: Some(params),
                arguments: map(&[
                    ("T1", best.x),
                    ("lambda_p", stats.lambda_p),
                    ("dn_x", dn_x),
                    ("dn_p", dn_p),
                ]),
                f_value: best.value,
                iterations: best.iterations,
                certificate: map(&[("F", (best.value - 2.0 / 5f64.sqrt()).abs())]),
            })
        }
        AncillaModel::SqueezedAncillas | AncillaModel::Relaxed => {
            let two_clone = model == AncillaModel::SqueezedAncillas;
            let product_floor = |lambda_p: f64| {
                let single = ((1.0 - lambda_p) / lambda_p).powi(2);
                if two_clone {
                    single.max(1.0)
                } else {
                    single
                }
            };
            // Inner search over ln Δ²n_x with Δ²n_p = c/Δ²n_x (constraint active).
            let inner = |lambda_p: f64| -> Maximum {
                let c = product_floor(lambda_p);
                let f = |ln_nx: f64| {
                    let nx = ln_nx.exp();
                    known_phase_noise_fidelity(lambda_p, nx, c / nx)
                };
                grid_golden_max(f, SQUEEZE_FLOOR.ln(), 1e3f64.ln(), DEFAULT_GRID, XTOL)
            };
            let outer = grid_golden_max(|lp| inner(lp).value, 0.05, 2.0, DEFAULT_GRID, 1e-10);
            let lambda_p = outer.x;
            let best_inner = inner(lambda_p);
            let dn_x = best_inner.x.exp();
            let dn_p = product_floor(lambda_p) / dn_x;
            let mut certificate = BTreeMap::new();
            let mut params = None;
            if two_clone {
                certificate.insert("F".to_owned(), (outer.value - bound.fidelity).abs());
                certificate.insert("lambda_p".to_owned(), (lambda_p - bound.lambda_p).abs());
                certificate.insert("dn_x".to_owned(), (dn_x - bound.dn_x).abs());
                certificate.insert("dn_p".to_owned(), (dn_p - bound.dn_p).abs());
                // a1 perfectly squeezed in p, a3 carries all the added noise.
                params = Some(ClonerConfig::phase_known(
                    Ancilla::squeezed_p(SQUEEZE_FLOOR)?,
                    Ancilla::squeezed_x(2.0 * dn_x)?,
                ));
            } else {
                certificate.insert("F".to_owned(), (outer.value - 1.0).abs());
            }
            Ok(OptimizationResult {
                params,
                arguments: map(&[("lambda_p", lambda_p), ("dn_x", dn_x), ("dn_p", dn_p)]),
                f_value: outer.value,
                iterations: outer.iterations + best_inner.iterations,
                certificate,
            })
        }
    }
}

/// Measure-and-prepare strategies used as classical benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalStrategy {
    /// Heterodyne both quadratures, reprepare a coherent state at `gain`
    /// times the estimate.
    HeterodyneCoherent,
    /// Homodyne `x`, reprepare a state squeezed to `(s_x, 1/s_x)` displaced
    /// to the outcome.
    HomodyneSqueezed,
}

/// Trapezoid nodes and weights for the standard normal density on `[-9, 9]`.
fn normal_nodes(step: f64) -> Vec<(f64, f64)> {
    let n = (9.0 / step).round() as i64;
    let norm = step / (2.0 * std::f64::consts::PI).sqrt();
    (-n..=n)
        .map(|k| {
            let z = k as f64 * step;
            (z, norm * (-0.5 * z * z).exp())
        })
        .collect()
}

/// Average single-shot fidelity of heterodyne + coherent repreparation over a
/// symmetric Gaussian alphabet, by direct quadrature over the input mean and
/// the heterodyne noise of each quadrature.
pub fn heterodyne_prepare_average(v: f64, gain: f64) -> f64 {
    let nodes = normal_nodes(0.1);
    let (mean_sd, noise_sd) = (2.0 * v.sqrt(), 2f64.sqrt());
    // Quadratures are independent, so average one and square.
    let mut one_quadrature = 0.0;
    for &(za, wa) in &nodes {
        let input = mean_sd * za;
        for &(zn, wn) in &nodes {
            let clone = gain * (input + noise_sd * zn);
            // Per-quadrature factor of the coherent-vs-coherent overlap.
            one_quadrature += wa * wn * coherent_overlap(clone - input, 0.0, 1.0, 1.0);
        }
    }
    one_quadrature * one_quadrature
}

/// Average single-shot fidelity of homodyne + squeezed repreparation over the
/// known-phase alphabet (independent of the amplitude).
pub fn homodyne_prepare_average(s_x: f64) -> f64 {
    normal_nodes(0.01)
        .iter()
        .map(|&(z, w)| w * coherent_overlap(z, 0.0, s_x, 1.0 / s_x))
        .sum()
}

/// Optimizes a classical strategy by quadrature of the single-shot fidelity,
/// certified against the closed-form benchmark.
pub fn optimize_classical(strategy: ClassicalStrategy, alphabet: &Alphabet) -> Result<OptimizationResult> {
    alphabet.validate()?;
    match (strategy, *alphabet) {
        (ClassicalStrategy::HeterodyneCoherent, Alphabet::SymmetricGaussian { v }) => {
            let best = grid_golden_max(|g| heterodyne_prepare_average(v, g), 0.0, 1.0, DEFAULT_GRID, 1e-9);
            let closed = classical_gaussian_alphabet(v)?;
            Ok(OptimizationResult {
                params: None,
                arguments: map(&[("gain", best.x)]),
                f_value: best.value,
                iterations: best.iterations,
                certificate: map(&[
                    ("gain", (best.x - closed.gain).abs()),
                    ("F", (best.value - closed.fidelity).abs()),
                ]),
            })
        }
        (ClassicalStrategy::HomodyneSqueezed, Alphabet::KnownPhase { .. }) => {
            let best = grid_golden_max(
                |ln_s| homodyne_prepare_average(ln_s.exp()),
                (0.01f64).ln(),
                100f64.ln(),
                DEFAULT_GRID,
                1e-12,
            );
            let s_x = best.x.exp();
            let closed = classical_known_phase();
            Ok(OptimizationResult {
                params: None,
                arguments: map(&[("s_x", s_x), ("s_p", 1.0 / s_x)]),
                f_value: best.value,
                iterations: best.iterations,
                certificate: map(&[
                    ("s_x", (s_x - closed.prep_var_x).abs()),
                    ("F", (best.value - closed.fidelity).abs()),
                ]),
            })
        }
        _ => Err(Error::Unsupported(
            "heterodyne-coherent needs a symmetric Gaussian alphabet, homodyne-squeezed a known-phase one",
        )),
    }
}

/// Golden-section refinement only (no grid), exposed for grid-independence
/// checks.
pub fn refine_t1(v: f64, lo: f64, hi: f64) -> Maximum {
    golden_section_max(
        |t1| gaussian_alphabet_fidelity(t1, v).unwrap_or(f64::NEG_INFINITY),
        lo,
        hi,
        XTOL,
        500,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::THRESHOLD_V;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn t1_at_experimental_width() {
        let r = optimize_t1(1.72).unwrap();
        close(r.argument("T1"), 0.8329, 1e-4);
        close(r.f_value, 0.7845, 1e-4);
        assert!(r.gap("T1") < 1e-6);
        assert!(r.gap("F") < 1e-12);
    }

    #[test]
    fn t1_boundary_and_flat_limits() {
        let r = optimize_t1(0.5).unwrap();
        assert_eq!(r.argument("T1"), 1.0);
        assert_eq!(r.argument("gain"), 0.0);
        close(r.f_value, 1.0 / (1.0 + 0.5 * (3.0 - 2.0 * 2f64.sqrt())), 1e-15);

        let r = optimize_t1(1e6).unwrap();
        close(r.argument("T1"), 0.5, 1e-5);
        close(r.f_value, 2.0 / 3.0, 1e-6);
        assert!(optimize_t1(-1.0).is_err());
    }

    #[test]
    fn certificates_over_width_grid() {
        for k in 1..=25 {
            let v = 0.2 * k as f64;
            let r = optimize_t1(v).unwrap();
            assert!(r.gap("T1") <= 1e-4, "V = {v}: {:?}", r.certificate);
            assert!(r.gap("F") <= 1e-6, "V = {v}: {:?}", r.certificate);
        }
    }

    #[test]
    fn grid_doubling_does_not_move_the_optimum() {
        for v in [0.3, THRESHOLD_V + 0.01, 1.72, 4.0] {
            let a = optimize_t1_with_grid(v, 64).unwrap();
            let b = optimize_t1_with_grid(v, 128).unwrap();
            close(a.argument("T1"), b.argument("T1"), 1e-6);
            close(a.f_value, b.f_value, 1e-12);
        }
    }

    #[test]
    fn plain_golden_section_matches_grid_route() {
        let r = refine_t1(2.5, 0.5, 1.0);
        close(r.x, optimize_t1(2.5).unwrap().argument("T1"), 1e-6);
    }

    #[test]
    fn phase_known_squeezed_optimum() {
        let r = optimize_phase_known(AncillaModel::SqueezedAncillas).unwrap();
        close(r.argument("lambda_p"), 0.5, 1e-4);
        close(r.argument("dn_x"), 0.4f64.sqrt(), 1e-4);
        close(r.argument("dn_p"), 2.5f64.sqrt(), 1e-4);
        close(r.f_value, 4.0 * (10f64.sqrt() - 1.0) / 9.0, 1e-9);
        let params = r.params.unwrap();
        close(params.anc3.var_x, 1.6f64.sqrt(), 1e-4);
    }

    #[test]
    fn phase_known_vacuum_optimum() {
        let r = optimize_phase_known(AncillaModel::VacuumAncillas).unwrap();
        close(r.f_value, 2.0 / 5f64.sqrt(), 1e-12);
        close(r.argument("T1"), 0.5, 1e-4);
    }

    #[test]
    fn dropping_two_clone_relation_allows_perfect_clones() {
        let r = optimize_phase_known(AncillaModel::Relaxed).unwrap();
        close(r.f_value, 1.0, 1e-6);
        let bound = optimize_phase_known(AncillaModel::SqueezedAncillas).unwrap();
        assert!(r.f_value > bound.f_value + 0.03);
    }

    #[test]
    fn classical_known_phase_oracle() {
        let r = optimize_classical(ClassicalStrategy::HomodyneSqueezed, &Alphabet::KnownPhase { phase: 0.0 }).unwrap();
        close(r.argument("s_x"), 2f64.sqrt(), 1e-3);
        close(r.f_value, 2.0 / (3.0 + 2.0 * 2f64.sqrt()).sqrt(), 1e-6);
        // Coherent repreparation (s = 1).
        close(homodyne_prepare_average(1.0), 2.0 / 6f64.sqrt(), 1e-9);
    }

    #[test]
    fn classical_gaussian_oracle() {
        let r = optimize_classical(ClassicalStrategy::HeterodyneCoherent, &Alphabet::SymmetricGaussian { v: 1.0 })
            .unwrap();
        close(r.argument("gain"), 2.0 / 3.0, 1e-3);
        assert!(r.gap("F") < 1e-6);
        let tiny = optimize_classical(ClassicalStrategy::HeterodyneCoherent, &Alphabet::SymmetricGaussian { v: 1e-6 })
            .unwrap();
        close(tiny.argument("gain"), 0.0, 1e-4);
        close(tiny.f_value, 1.0, 1e-5);
        assert!(optimize_classical(ClassicalStrategy::HeterodyneCoherent, &Alphabet::FlatLimit).is_err());
    }
}
