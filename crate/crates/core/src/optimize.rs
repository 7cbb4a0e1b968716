//! One-dimensional maximisation: coarse grid followed by golden-section
//! refinement of the best bracket.

use crate::error::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`. Returns the best point seen.
pub(crate) fn golden_max(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Evaluates `f` on `grid` (ascending), then refines between the neighbours
/// of the best grid point. Ties resolve to the earliest point.
pub(crate) fn grid_then_golden(
    mut f: impl FnMut(f64) -> Result<f64>,
    grid: &[f64],
    tol: f64,
) -> Result<(f64, f64)> {
    assert!(!grid.is_empty(), "search grid must not be empty");
    let mut best = (grid[0], f(grid[0])?);
    let mut best_index = 0;
    for (i, &x) in grid.iter().enumerate().skip(1) {
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
            best_index = i;
        }
    }
    if grid.len() < 2 {
        return Ok(best);
    }
    let lo = grid[best_index.saturating_sub(1)];
    let hi = grid[(best_index + 1).min(grid.len() - 1)];
    let refined = golden_max(&mut f, lo, hi, tol)?;
    // Bracket endpoints are only probed by the grid, so keep the grid winner
    // when the maximum sits on one of them.
    Ok(if refined.1 > best.1 { refined } else { best })
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub(crate) fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let mut out: Vec<f64> = linspace(la, lb, n).into_iter().map(f64::exp).collect();
    if let Some(first) = out.first_mut() {
        *first = a;
    }
    if let Some(end) = out.last_mut() {
        *end = b;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_interior_maximum() {
        let (x, v) = golden_max(|x| Ok(-(x - 0.3f64).powi(2) + 2.0), 0.0, 1.0, 1e-8).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_refinement_handles_edge_maximum() {
        let grid = linspace(0.0, 1.0, 11);
        let (x, _) = grid_then_golden(|x| Ok(x), &grid, 1e-6).unwrap();
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-6);
        let (x, _) = grid_then_golden(|x| Ok((7.0 * x).sin()), &grid, 1e-9).unwrap();
        assert_abs_diff_eq!(x, std::f64::consts::FRAC_PI_2 / 7.0, epsilon = 1e-7);
    }

    #[test]
    fn spaced_grids_hit_endpoints() {
        let g = logspace(0.01, 2.0, 32);
        assert_eq!(g.len(), 32);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[31], 2.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(linspace(0.0, 1.0, 1), vec![0.0]);
    }
}
