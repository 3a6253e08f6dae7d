use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub const CSV_HEADER: &str = "sqrtV,V,T1,gain,F_ideal,F_imperfect,F_classical";

/// One row of a fidelity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SweepRow {
    #[serde(rename = "sqrtV")]
    pub sqrt_v: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    pub gain: f64,
    #[serde(rename = "F_ideal")]
    pub f_ideal: f64,
    #[serde(rename = "F_imperfect")]
    pub f_imperfect: f64,
    #[serde(rename = "F_classical")]
    pub f_classical: f64,
}

/// Formats `x` with 9 significant digits, in plain notation when the
/// magnitude allows it.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

pub fn csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [r.sqrt_v, r.v, r.t1, r.gain, r.f_ideal, r.f_imperfect, r.f_classical].map(sig9);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to `stdout` when no path (or `-`) is given.
pub fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))
        }
        _ => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write output: {e}"))),
    }
}
