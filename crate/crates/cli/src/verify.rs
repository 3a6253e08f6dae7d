//! Closed-form identity checks behind `cvclone verify`.

use std::f64::consts::SQRT_2;

use cvclone::benchmarks::{
    average_fidelity, classical_gaussian_alphabet, lower_branch, optimal_gaussian_fidelity, upper_branch,
};
use cvclone::cloner::{heisenberg_clone_stats, phase_known_clone_stats};
use cvclone::optimizer::{
    heterodyne_prepare_average, optimize_classical, optimize_phase_known, optimize_t1, AncillaModel,
    ClassicalStrategy,
};
use cvclone::{Alphabet, Ancilla, ClonerConfig};
use serde::Serialize;

/// Reference values the checks compare against.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub flat_limit: f64,
    pub threshold_v: f64,
    pub vacuum_known_phase: f64,
    pub optimal_known_phase: f64,
    pub classical_known_phase: f64,
    pub classical_prep_var: f64,
    pub classical_wide_limit: f64,
    pub amplitude_noise_db: f64,
    pub optimal_t1_at_172: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            flat_limit: 2.0 / 3.0,
            threshold_v: 0.5 + 1.0 / SQRT_2,
            vacuum_known_phase: 2.0 / 5f64.sqrt(),
            optimal_known_phase: 4.0 * (10f64.sqrt() - 1.0) / 9.0,
            classical_known_phase: 2.0 / (3.0 + 2.0 * SQRT_2).sqrt(),
            classical_prep_var: SQRT_2,
            classical_wide_limit: 0.5,
            amplitude_noise_db: 10.0 * 1.5f64.log10(),
            optimal_t1_at_172: 0.5 * (1.0 / 3.44 + 1.0f64).powi(2),
        }
    }
}

impl Constants {
    /// Mutable access to every constant by name.
    pub fn fields_mut(&mut self) -> Vec<(&'static str, &mut f64)> {
        vec![
            ("flat_limit", &mut self.flat_limit),
            ("threshold_v", &mut self.threshold_v),
            ("vacuum_known_phase", &mut self.vacuum_known_phase),
            ("optimal_known_phase", &mut self.optimal_known_phase),
            ("classical_known_phase", &mut self.classical_known_phase),
            ("classical_prep_var", &mut self.classical_prep_var),
            ("classical_wide_limit", &mut self.classical_wide_limit),
            ("amplitude_noise_db", &mut self.amplitude_noise_db),
            ("optimal_t1_at_172", &mut self.optimal_t1_at_172),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: &'static str, value: f64, expected: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        value,
        expected,
        tolerance,
        pass: (value - expected).abs() <= tolerance,
    }
}

fn v_grid() -> impl Iterator<Item = f64> {
    (1..=50).map(|k| 0.1 * k as f64)
}

/// Runs every check against `c`. Numerical failures count as failed checks.
pub fn run_checks(c: &Constants) -> Vec<CheckResult> {
    let nan = f64::NAN;
    let mut out = Vec::new();

    let half = heisenberg_clone_stats(&ClonerConfig::matched(0.5)).ok();
    let f = |a: Alphabet| half.and_then(|s| average_fidelity(&s, &a).ok()).unwrap_or(nan);
    out.push(check("flat limit, T1 = 1/2", f(Alphabet::FlatLimit), c.flat_limit, 1e-12));
    out.push(check("V = 1e6, T1 = 1/2", f(Alphabet::SymmetricGaussian { v: 1e6 }), c.flat_limit, 1e-4));

    let worst = v_grid()
        .map(|v| {
            let closed = optimal_gaussian_fidelity(v).map(|o| o.fidelity).unwrap_or(nan);
            let numeric = optimize_t1(v).map(|r| r.f_value).unwrap_or(nan);
            (numeric - closed).abs()
        })
        .fold(0.0, f64::max);
    out.push(check("numeric vs piecewise optimum, V = 0.1..5", worst, 0.0, 1e-9));
    out.push(check(
        "branch continuity at threshold",
        upper_branch(c.threshold_v) - lower_branch(c.threshold_v),
        0.0,
        1e-12,
    ));
    out.push(check(
        "optimal T1 = 1 at threshold",
        0.5 * (1.0 / (2.0 * c.threshold_v) + 1.0).powi(2),
        1.0,
        1e-12,
    ));
    out.push(check(
        "optimal T1 at V = 1.72",
        optimize_t1(1.72).map(|r| r.argument("T1")).unwrap_or(nan),
        c.optimal_t1_at_172,
        1e-7,
    ));

    let known = Alphabet::KnownPhase { phase: 0.0 };
    let vacuum = phase_known_clone_stats(Ancilla::VACUUM, Ancilla::VACUUM).ok();
    out.push(check(
        "known phase, vacuum ancillas",
        vacuum.and_then(|s| average_fidelity(&s, &known).ok()).unwrap_or(nan),
        c.vacuum_known_phase,
        1e-9,
    ));
    out.push(check(
        "known phase, amplitude noise dB",
        vacuum.map(|s| s.noise_db_x()).unwrap_or(nan),
        c.amplitude_noise_db,
        1e-9,
    ));
    let squeezed = Ancilla::squeezed_p(1e-6)
        .and_then(|a1| Ancilla::squeezed_x((8.0f64 / 5.0).sqrt()).map(|a3| (a1, a3)))
        .and_then(|(a1, a3)| phase_known_clone_stats(a1, a3))
        .and_then(|s| average_fidelity(&s, &known))
        .unwrap_or(nan);
    out.push(check("known phase, squeezed ancillas", squeezed, c.optimal_known_phase, 1e-5));
    out.push(check(
        "known phase, constrained optimizer",
        optimize_phase_known(AncillaModel::SqueezedAncillas).map(|r| r.f_value).unwrap_or(nan),
        c.optimal_known_phase,
        1e-9,
    ));

    let classical = optimize_classical(ClassicalStrategy::HomodyneSqueezed, &known).ok();
    out.push(check(
        "classical known phase, quadrature oracle",
        classical.as_ref().map(|r| r.f_value).unwrap_or(nan),
        c.classical_known_phase,
        1e-6,
    ));
    out.push(check(
        "classical known phase, prepared x variance",
        classical.as_ref().map(|r| r.argument("s_x")).unwrap_or(nan),
        c.classical_prep_var,
        1e-4,
    ));
    let worst = v_grid()
        .map(|v| match classical_gaussian_alphabet(v) {
            Ok(b) => (heterodyne_prepare_average(v, b.gain) - b.fidelity).abs(),
            Err(_) => nan,
        })
        .fold(0.0, f64::max);
    out.push(check("classical Gaussian alphabet, quadrature oracle", worst, 0.0, 1e-6));
    out.push(check(
        "classical Gaussian alphabet, V -> inf",
        classical_gaussian_alphabet(1e12).map(|b| b.fidelity).unwrap_or(nan),
        c.classical_wide_limit,
        1e-9,
    ));
    out
}

/// Plain-text table of results.
pub fn table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in results {
        s.push_str(&format!(
            "{}  {:<width$}  value {:<16} expected {:<16} tol {:e}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            crate::output::sig9(r.value),
            crate::output::sig9(r.expected),
            r.tolerance,
        ));
    }
    let passed = results.iter().filter(|r| r.pass).count();
    s.push_str(&format!("{passed}/{} checks passed\n", results.len()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_constants_pass() {
        let results = run_checks(&Constants::default());
        assert!(results.iter().all(|r| r.pass), "{}", table(&results));
    }

    #[test]
    fn every_constant_is_load_bearing() {
        let names: Vec<&str> = Constants::default().fields_mut().into_iter().map(|(n, _)| n).collect();
        for (i, name) in names.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let mut c = Constants::default();
                let mut fields = c.fields_mut();
                *fields[i].1 *= 1.0 + sign * 1e-3;
                drop(fields);
                let results = run_checks(&c);
                assert!(results.iter().any(|r| !r.pass), "perturbing {name} went unnoticed");
            }
        }
    }
}
