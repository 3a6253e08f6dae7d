//! Derivative-free scalar maximization: a coarse grid to bracket the peak,
//! then golden-section refinement inside the bracket.

/// `1/φ`, the fraction by which each golden-section step shrinks the bracket.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// Golden-section iterations spent after the grid stage.
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Maximum {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while (b - a).abs() > xtol && iterations < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Maximum { x, value, iterations }
}

/// Maximizes `f` on `[lo, hi]`: evaluates `n_grid` equispaced points, refines
/// around the best one by golden section, and keeps an endpoint when it beats
/// the interior refinement (boundary optima).
pub fn grid_golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n_grid: usize, xtol: f64) -> Maximum {
    let n = n_grid.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let grid = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };
    let best = (0..n)
        .map(|i| (i, f(grid(i))))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let left = grid(best.0.saturating_sub(1));
    let right = grid((best.0 + 1).min(n - 1));
    let mut result = golden_section_max(&f, left, right, xtol, 500);
    for edge in [lo, hi] {
        let v = f(edge);
        if v >= result.value {
            result.x = edge;
            result.value = v;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let m = golden_section_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10, 500);
        assert!((m.x - 0.3).abs() < 1e-9);
        let m = grid_golden_max(|x| (x * 3.0).sin(), 0.0, 2.0, 16, 1e-10);
        assert!((m.x - std::f64::consts::FRAC_PI_6).abs() < 1e-7);
        assert!((m.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn keeps_boundary_maximum() {
        let m = grid_golden_max(|x| x, 0.0, 1.0, 8, 1e-10);
        assert_eq!(m.x, 1.0);
        assert_eq!(m.value, 1.0);
        let m = grid_golden_max(|x| -x, 0.5, 1.0, 8, 1e-10);
        assert_eq!(m.x, 0.5);
    }

    #[test]
    fn picks_global_peak_from_grid() {
        // Two bumps; the grid must select the taller one.
        let f = |x: f64| (-(x - 0.2).powi(2) * 200.0).exp() * 0.5 + (-(x - 0.8).powi(2) * 200.0).exp();
        let m = grid_golden_max(f, 0.0, 1.0, 64, 1e-12);
        assert!((m.x - 0.8).abs() < 1e-6);
    }
}
