//! Multimode Gaussian states in shot-noise units.
//!
//! Quadratures are scaled as `x = a + a†`, `p = -i(a - a†)`, so the vacuum has
//! unit variance in both quadratures and a coherent state `|α⟩` has mean
//! `(2 Re α, 2 Im α)`. Means and covariances are stored in `(x0, p0, x1, p1, ...)`
//! order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Tolerance on `cov + iΩ ⪰ 0`, applied to the smallest eigenvalue.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Relative tolerance on covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Maximum x-p correlation accepted by the coherent-state fidelity.
pub const DIAGONAL_TOL: f64 = 1e-10;
/// Marginal variance below which a measurement is treated as deterministic.
const DEGENERATE_VAR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadratureKind {
    /// Amplitude quadrature.
    X,
    /// Phase quadrature.
    P,
}

/// A single quadrature of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadrature {
    pub kind: QuadratureKind,
    pub mode: usize,
}

impl Quadrature {
    pub fn x(mode: usize) -> Self {
        Quadrature {
            kind: QuadratureKind::X,
            mode,
        }
    }

    pub fn p(mode: usize) -> Self {
        Quadrature {
            kind: QuadratureKind::P,
            mode,
        }
    }

    /// Position of this quadrature in the xpxp-ordered phase-space vector.
    pub fn index(&self) -> usize {
        match self.kind {
            QuadratureKind::X => 2 * self.mode,
            QuadratureKind::P => 2 * self.mode + 1,
        }
    }
}

/// Outcome of a homodyne measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub quadrature: Quadrature,
    pub outcome: f64,
}

/// Gaussian state of `n_modes` optical modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Standard symplectic form with `[[0, 1], [-1, 0]]` blocks on the diagonal.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Phase-space matrix of the beam splitter
/// `a' = √T a + √(1-T) b`, `b' = √(1-T) a - √T b`.
pub fn beam_splitter_matrix(n_modes: usize, mode_a: usize, mode_b: usize, t: f64) -> DMatrix<f64> {
    let (ct, rt) = (t.sqrt(), (1.0 - t).sqrt());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for k in 0..2 {
        let (i, j) = (2 * mode_a + k, 2 * mode_b + k);
        s[(i, i)] = ct;
        s[(i, j)] = rt;
        s[(j, i)] = rt;
        s[(j, j)] = -ct;
    }
    s
}

impl GaussianState {
    /// Builds a state from raw moments, checking symmetry and physicality.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) || cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::ModeCount {
                expected: dim / 2,
                got: cov.nrows() / 2,
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moments"));
        }
        let scale = cov.amax().max(1.0);
        for i in 0..dim {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Asymmetric);
                }
            }
        }
        let state = GaussianState { mean, cov };
        state.check_physical()?;
        Ok(state)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        GaussianState {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Coherent state with the given quadrature means.
    pub fn coherent(x_mean: f64, p_mean: f64) -> Self {
        GaussianState {
            mean: DVector::from_vec(vec![x_mean, p_mean]),
            cov: DMatrix::identity(2, 2),
        }
    }

    /// Single-mode squeezed (or thermal, if the product exceeds one) vacuum.
    pub fn squeezed_vacuum(var_x: f64, var_p: f64) -> Result<Self> {
        check_range("var_x", var_x, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
        check_range("var_p", var_p, f64::MIN_POSITIVE, f64::INFINITY, "(0, inf)")?;
        if var_x * var_p < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Unphysical { var_x, var_p });
        }
        Ok(GaussianState {
            mean: DVector::zeros(2),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vec![var_x, var_p])),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `(x, p)` mean of one mode.
    pub fn mode_mean(&self, mode: usize) -> (f64, f64) {
        (self.mean[2 * mode], self.mean[2 * mode + 1])
    }

    pub fn variance(&self, q: Quadrature) -> f64 {
        self.cov[(q.index(), q.index())]
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::ModeOutOfRange {
                index: mode,
                n_modes: self.n_modes(),
            });
        }
        Ok(())
    }

    /// Smallest eigenvalue of `cov + iΩ`, via its real symmetric embedding
    /// `[[cov, -Ω], [Ω, cov]]` (same spectrum, each eigenvalue doubled).
    pub fn min_physical_eigenvalue(&self) -> f64 {
        let dim = self.mean.len();
        let omega = symplectic_form(self.n_modes());
        let mut big = DMatrix::zeros(2 * dim, 2 * dim);
        big.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        big.view_mut((dim, dim), (dim, dim)).copy_from(&self.cov);
        big.view_mut((0, dim), (dim, dim)).copy_from(&(-&omega));
        big.view_mut((dim, 0), (dim, dim)).copy_from(&omega);
        SymmetricEigen::new(big).eigenvalues.min()
    }

    pub fn check_physical(&self) -> Result<()> {
        let min = self.min_physical_eigenvalue();
        if min < -PHYSICALITY_TOL {
            return Err(Error::NotPhysical(min));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (da, db) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(da + db);
        mean.rows_mut(0, da).copy_from(&self.mean);
        mean.rows_mut(da, db).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(da + db, da + db);
        cov.view_mut((0, 0), (da, da)).copy_from(&self.cov);
        cov.view_mut((da, da), (db, db)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<GaussianState> {
        for &m in keep {
            self.check_mode(m)?;
        }
        let idx: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(GaussianState { mean, cov })
    }

    pub fn beam_splitter(&self, mode_a: usize, mode_b: usize, t: f64) -> Result<GaussianState> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::SameMode(mode_a));
        }
        check_range("transmittance", t, 0.0, 1.0, "[0, 1]")?;
        let (ct, rt) = (t.sqrt(), (1.0 - t).sqrt());
        let mut out = self.clone();
        for k in 0..2 {
            let (i, j) = (2 * mode_a + k, 2 * mode_b + k);
            let (mi, mj) = (out.mean[i], out.mean[j]);
            out.mean[i] = ct * mi + rt * mj;
            out.mean[j] = rt * mi - ct * mj;
            mix_rows(&mut out.cov, i, j, ct, rt);
            mix_cols(&mut out.cov, i, j, ct, rt);
        }
        Ok(out)
    }

    pub fn displace(&self, mode: usize, dx: f64, dp: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        let mut out = self.clone();
        out.mean[2 * mode] += dx;
        out.mean[2 * mode + 1] += dp;
        Ok(out)
    }

    /// Pure-loss channel of the given transmission acting on one mode.
    pub fn loss(&self, mode: usize, transmission: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        check_range("transmission", transmission, 0.0, 1.0, "[0, 1]")?;
        let s = transmission.sqrt();
        let mut out = self.clone();
        for i in [2 * mode, 2 * mode + 1] {
            out.mean[i] *= s;
            out.cov.row_mut(i).scale_mut(s);
            out.cov.column_mut(i).scale_mut(s);
            out.cov[(i, i)] += 1.0 - transmission;
        }
        Ok(out)
    }

    /// Classical feedforward on the ensemble: `dst += gain * src`.
    ///
    /// This is the outcome-averaged effect of measuring `src` and displacing
    /// `dst` by `gain` times the outcome; `src` must be traced out afterwards.
    pub fn feed_forward(&self, src: Quadrature, dst: Quadrature, gain: f64) -> Result<GaussianState> {
        self.check_mode(src.mode)?;
        self.check_mode(dst.mode)?;
        let (s, d) = (src.index(), dst.index());
        let mut out = self.clone();
        out.mean[d] += gain * out.mean[s];
        let row = out.cov.row(s).clone_owned();
        for c in 0..out.cov.ncols() {
            out.cov[(d, c)] += gain * row[c];
        }
        let col = out.cov.column(s).clone_owned();
        for r in 0..out.cov.nrows() {
            out.cov[(r, d)] += gain * col[r];
        }
        Ok(out)
    }

    /// Adds classical Gaussian noise of the given variance to one quadrature.
    pub fn add_noise(&self, q: Quadrature, variance: f64) -> Result<GaussianState> {
        self.check_mode(q.mode)?;
        check_range("noise variance", variance, 0.0, f64::INFINITY, "[0, inf)")?;
        let mut out = self.clone();
        out.cov[(q.index(), q.index())] += variance;
        Ok(out)
    }

    /// Conditions on `outcome` for quadrature `q` and removes the measured mode.
    pub fn condition(&self, q: Quadrature, outcome: f64) -> Result<GaussianState> {
        self.check_mode(q.mode)?;
        let qi = q.index();
        let var = self.cov[(qi, qi)];
        let rest: Vec<usize> = (0..self.mean.len())
            .filter(|&i| i / 2 != q.mode)
            .collect();
        let cross = DVector::from_iterator(rest.len(), rest.iter().map(|&i| self.cov[(i, qi)]));
        let gain = if var < DEGENERATE_VAR {
            if var < -PHYSICALITY_TOL || cross.amax() > DEGENERATE_VAR {
                return Err(Error::DegenerateMarginal(var));
            }
            DVector::zeros(rest.len())
        } else {
            &cross / var
        };
        let innovation = outcome - self.mean[qi];
        let mean = DVector::from_iterator(
            rest.len(),
            rest.iter().enumerate().map(|(k, &i)| self.mean[i] + gain[k] * innovation),
        );
        let cov = DMatrix::from_fn(rest.len(), rest.len(), |r, c| {
            self.cov[(rest[r], rest[c])] - gain[r] * cross[c]
        });
        Ok(GaussianState { mean, cov })
    }

    /// Homodyne measurement of `q`: samples the outcome from its marginal and
    /// returns the conditional state of the remaining modes.
    pub fn measure_quadrature<R: Rng + ?Sized>(
        &self,
        q: Quadrature,
        rng: &mut R,
    ) -> Result<(MeasurementRecord, GaussianState)> {
        self.check_mode(q.mode)?;
        let var = self.cov[(q.index(), q.index())];
        let z: f64 = rng.sample(StandardNormal);
        let outcome = self.mean[q.index()] + var.max(0.0).sqrt() * z;
        let state = self.condition(q, outcome)?;
        Ok((
            MeasurementRecord {
                quadrature: q,
                outcome,
            },
            state,
        ))
    }
}

fn mix_rows(m: &mut DMatrix<f64>, i: usize, j: usize, ct: f64, rt: f64) {
    for c in 0..m.ncols() {
        let (a, b) = (m[(i, c)], m[(j, c)]);
        m[(i, c)] = ct * a + rt * b;
        m[(j, c)] = rt * a - ct * b;
    }
}

fn mix_cols(m: &mut DMatrix<f64>, i: usize, j: usize, ct: f64, rt: f64) {
    for r in 0..m.nrows() {
        let (a, b) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = ct * a + rt * b;
        m[(r, j)] = rt * a - ct * b;
    }
}

/// Fidelity `⟨α|ρ|α⟩` between a coherent state with quadrature means
/// `alpha_mean` and a single-mode Gaussian state with diagonal covariance:
///
/// `F = 2/√((1+σx)(1+σp)) · exp(-½[δx²/(1+σx) + δp²/(1+σp)])`.
pub fn fidelity_coherent_vs_gaussian(alpha_mean: (f64, f64), clone: &GaussianState) -> Result<f64> {
    if clone.n_modes() != 1 {
        return Err(Error::ModeCount {
            expected: 1,
            got: clone.n_modes(),
        });
    }
    let xp = clone.cov[(0, 1)];
    if xp.abs() > DIAGONAL_TOL {
        return Err(Error::NonDiagonal(xp));
    }
    let (sx, sp) = (clone.cov[(0, 0)], clone.cov[(1, 1)]);
    let (dx, dp) = (clone.mean[0] - alpha_mean.0, clone.mean[1] - alpha_mean.1);
    Ok(coherent_overlap(dx, dp, sx, sp))
}

/// Fidelity kernel shared by the analytic and sampled paths.
pub(crate) fn coherent_overlap(dx: f64, dp: f64, sigma_x: f64, sigma_p: f64) -> f64 {
    let (ax, ap) = (1.0 + sigma_x, 1.0 + sigma_p);
    2.0 / (ax * ap).sqrt() * (-0.5 * (dx * dx / ax + dp * dp / ap)).exp()
}
