//! Frequency grids and supremum search over the imaginary axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-spaced evaluation grid in rad/s. The `0⁺` and `∞` limits are probed
/// separately by [`sup_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
    /// Relative ω-width at which golden-section refinement stops.
    pub refine_tol: f64,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid::log_spaced(1e-4, 1e4, 600).expect("default grid is valid")
    }
}

impl FrequencyGrid {
    pub fn log_spaced(w_min: f64, w_max: f64, points: usize) -> Result<Self> {
        if !(w_min > 0.0) || !(w_max > w_min) || points < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs 0 < w_min < w_max and >= 2 points (got {w_min}, {w_max}, {points})"
            )));
        }
        let (l0, l1) = (w_min.log10(), w_max.log10());
        let step = (l1 - l0) / (points - 1) as f64;
        let mut omegas: Vec<f64> = (0..points).map(|i| 10f64.powf(l0 + step * i as f64)).collect();
        omegas[0] = w_min;
        omegas[points - 1] = w_max;
        Ok(FrequencyGrid { omegas, refine_tol: 1e-6 })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.omegas[0]
    }

    pub fn max(&self) -> f64 {
        *self.omegas.last().unwrap()
    }
}

/// Outcome of a supremum search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupResult {
    pub value: f64,
    /// Maximizing frequency; `0.0` or `f64::INFINITY` for the limit probes.
    pub omega: f64,
    /// Largest value seen on the grid itself.
    pub grid_max: f64,
    /// Grid indices bracketing the refinement interval.
    pub bracket: (usize, usize),
}

impl SupResult {
    pub fn at_zero(&self) -> bool {
        self.omega == 0.0
    }

    pub fn at_infinity(&self) -> bool {
        self.omega.is_infinite()
    }
}

/// Supremum of `f(ω)` over `ω ∈ [0, ∞]`: grid sweep, golden-section
/// refinement around the best grid point, and the two limit probes. The
/// probes only win when strictly larger than the refined grid value.
pub fn sup_search(f: impl Fn(f64) -> f64, grid: &FrequencyGrid) -> Result<SupResult> {
    let w = grid.omegas();
    let vals: Vec<f64> = w.iter().map(|&x| f(x)).collect();
    let f0 = f(0.0);
    let finf = f(f64::INFINITY);
    if !f0.is_finite() || !finf.is_finite() || vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::UnboundedOnAxis);
    }
    let mut idx = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v > vals[idx] {
            idx = i;
        }
    }
    let grid_max = vals[idx];
    let lo = idx.saturating_sub(1);
    let hi = (idx + 1).min(w.len() - 1);
    let mut best = (grid_max, w[idx]);
    if grid_max > 0.0 {
        let (xr, fr) = golden_max(|x| f(x.exp()), w[lo].ln(), w[hi].ln(), grid.refine_tol);
        if !fr.is_finite() {
            return Err(Error::UnboundedOnAxis);
        }
        if fr > best.0 {
            best = (fr, xr.exp());
        }
    }
    if f0 > best.0 {
        best = (f0, 0.0);
    }
    if finf > best.0 {
        best = (finf, f64::INFINITY);
    }
    Ok(SupResult {
        value: best.0,
        omega: best.1,
        grid_max,
        bracket: (lo, hi),
    })
}

/// Same as [`sup_search`], under the name used for H∞ norms of scalar
/// frequency functions.
pub fn hinf_norm(f: impl Fn(f64) -> f64, grid: &FrequencyGrid) -> Result<SupResult> {
    sup_search(f, grid)
}

/// Golden-section search for the maximum of `f` on `[a, b]`; stops when the
/// interval is narrower than `tol` (absolute, in the search variable).
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut best = if f(a) >= f(b) { (a, f(a)) } else { (b, f(b)) };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn default_grid_shape() {
        let g = FrequencyGrid::default();
        assert_eq!(g.len(), 600);
        assert_eq!(g.min(), 1e-4);
        assert_eq!(g.max(), 1e4);
        assert!(g.omegas().windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn low_pass_peak_at_zero() {
        let r = hinf_norm(
            |w| if w.is_infinite() { 0.0 } else { Complex64::new(1.0, w).inv().norm() },
            &FrequencyGrid::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.at_zero());
    }

    #[test]
    fn high_pass_peak_at_infinity() {
        let f = |w: f64| {
            if w.is_infinite() {
                1.0
            } else {
                (Complex64::new(0.0, w) / Complex64::new(1.0, w)).norm()
            }
        };
        let r = hinf_norm(f, &FrequencyGrid::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.at_infinity());
    }

    #[test]
    fn resonance_is_refined() {
        // |1/(s^2 + 0.02 s + 1)| peaks near w = 1 with value ~ 50
        let f = |w: f64| {
            if w.is_infinite() {
                return 0.0;
            }
            let s = Complex64::new(0.0, w);
            (s * s + s * 0.02 + 1.0).inv().norm()
        };
        let r = hinf_norm(f, &FrequencyGrid::default()).unwrap();
        let exact = 1.0 / (0.02 * (1.0 - 0.0001f64).sqrt());
        assert!((r.value - exact).abs() / exact < 1e-4);
        assert!(r.value >= r.grid_max);
    }

    #[test]
    fn unbounded_is_reported() {
        let f = |w: f64| if w == 0.0 { f64::INFINITY } else { 1.0 / w };
        assert_eq!(hinf_norm(f, &FrequencyGrid::default()), Err(Error::UnboundedOnAxis));
    }
}
