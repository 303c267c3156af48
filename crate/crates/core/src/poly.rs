//! Real polynomials in `s`, stored with descending powers.

use std::fmt;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Real polynomial `c[0] s^n + c[1] s^(n-1) + ... + c[n]`.
///
/// The leading coefficient is nonzero unless the polynomial is identically
/// zero, in which case the coefficient list is empty.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}

impl Polynomial {
    /// Builds a polynomial, dropping exactly-zero leading coefficients.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        let first = coeffs.iter().position(|&c| c != 0.0).unwrap_or(coeffs.len());
        coeffs.drain(..first);
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Polynomial::new(vec![1.0, 0.0])
    }

    /// Monic real polynomial with the given roots. Complex roots must come in
    /// conjugate pairs; the imaginary residue of the expansion is discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= ci * r;
            }
            c = next;
        }
        Polynomial::new(c.into_iter().map(|z| z.re).collect::<Vec<_>>())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Coefficient of `s^k`.
    pub fn coeff(&self, k: usize) -> f64 {
        if k > self.degree() || self.is_zero() {
            0.0
        } else {
            self.coeffs[self.degree() - k]
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// Evaluates at `s = jω`.
    pub fn eval_jw(&self, omega: f64) -> Complex64 {
        self.eval_c(Complex64::new(0.0, omega))
    }

    /// Drops leading coefficients whose magnitude is below `rel * ‖p‖∞`.
    pub fn trimmed(&self, rel: f64) -> Polynomial {
        let scale = self.norm_inf();
        if scale == 0.0 {
            return Polynomial::zero();
        }
        let first = self
            .coeffs
            .iter()
            .position(|c| c.abs() > rel * scale)
            .unwrap_or(self.coeffs.len());
        Polynomial::new(self.coeffs[first..].to_vec())
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.coeffs.iter().rev().enumerate() {
            out[n - 1 - i] += c;
        }
        for (i, c) in other.coeffs.iter().rev().enumerate() {
            out[n - 1 - i] += c;
        }
        Polynomial::new(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// `p(-s)`.
    pub fn reflect(&self) -> Polynomial {
        let n = self.degree();
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if (n - i) % 2 == 1 { -c } else { c })
                .collect::<Vec<_>>(),
        )
    }

    pub fn derivative(&self) -> Polynomial {
        let n = self.degree();
        Polynomial::new(
            self.coeffs
                .iter()
                .take(n)
                .enumerate()
                .map(|(i, &c)| c * (n - i) as f64)
                .collect::<Vec<_>>(),
        )
    }

    /// Polynomial long division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if divisor.is_zero() {
            return Err(Error::DegeneratePolynomial);
        }
        if self.degree() < divisor.degree() || self.is_zero() {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        let qlen = self.degree() - dd + 1;
        let mut quot = vec![0.0; qlen];
        for i in 0..qlen {
            let q = rem[i] / lead;
            quot[i] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= q * d;
            }
            rem[i] = 0.0;
        }
        Ok((Polynomial::new(quot), Polynomial::new(rem[qlen..].to_vec())))
    }

    /// Monic copy.
    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(1.0 / self.leading())
    }

    /// All `degree()` roots, sorted by real part and then imaginary part.
    ///
    /// Roots come from the eigenvalues of the balanced companion matrix,
    /// followed by a guarded Newton polish and conjugate-pair matching.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::DegeneratePolynomial);
        }
        let mut coeffs = self.coeffs.clone();
        let mut roots = Vec::with_capacity(self.degree());
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
            roots.push(Complex64::new(0.0, 0.0));
        }
        let core = Polynomial::new(coeffs);
        let n = core.degree();
        if n == 1 {
            roots.push(Complex64::new(-core.coeffs[1] / core.coeffs[0], 0.0));
        } else if n >= 2 {
            let lead = core.leading();
            let mut comp = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                comp[(0, j)] = -core.coeffs[j + 1] / lead;
            }
            for i in 1..n {
                comp[(i, i - 1)] = 1.0;
            }
            let (bal, _) = linalg::balance(&comp);
            let deriv = core.derivative();
            let eig: Vec<Complex64> = match Schur::try_new(bal, f64::EPSILON, 100 * n) {
                Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
                None => aberth(&core),
            };
            for z in eig {
                roots.push(polish_root(&core, &deriv, z));
            }
        }
        Ok(canonicalize_roots(roots))
    }
}

/// Simultaneous Aberth–Ehrlich iteration; used when the QR iteration on the
/// companion matrix stalls (e.g. spectra symmetric under `s → −s`).
fn aberth(p: &Polynomial) -> Vec<Complex64> {
    let n = p.degree();
    let dp = p.derivative();
    let c = p.coeffs();
    // Cauchy-type bound on root moduli
    let radius = 1.0 + c[1..].iter().map(|x| (x / c[0]).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let pv = p.eval_c(z[k]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dp.eval_c(z[k]);
            let sum: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn polish_root(p: &Polynomial, dp: &Polynomial, mut r: Complex64) -> Complex64 {
    let mut res = p.eval_c(r).norm();
    for _ in 0..3 {
        let d = dp.eval_c(r);
        if d.norm() == 0.0 || !res.is_finite() {
            break;
        }
        let cand = r - p.eval_c(r) / d;
        let cres = p.eval_c(cand).norm();
        if cres.is_finite() && cres < res {
            r = cand;
            res = cres;
        } else {
            break;
        }
    }
    r
}

/// Snaps near-real roots onto the real axis, symmetrizes conjugate pairs and
/// sorts by (real, imaginary).
fn canonicalize_roots(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    const TOL: f64 = 1e-10;
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let r = roots[i];
        if r.im.abs() <= TOL * (1.0 + r.norm()) {
            roots[i] = Complex64::new(r.re, 0.0);
            used[i] = true;
            continue;
        }
        // nearest unused partner with the opposite imaginary sign
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == i || used[j] || roots[j].im * r.im >= 0.0 {
                continue;
            }
            let dist = (roots[j] - r.conj()).norm();
            if best.is_none_or(|(_, bd)| dist < bd) {
                best = Some((j, dist));
            }
        }
        used[i] = true;
        if let Some((j, _)) = best {
            let avg = (r + roots[j].conj()) * 0.5;
            roots[i] = avg;
            roots[j] = avg.conj();
            used[j] = true;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_factored_quadratic() {
        let r = Polynomial::new(vec![1.0, 3.0, 2.0]).roots().unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].re + 2.0).abs() < 1e-12 && r[0].im == 0.0);
        assert!((r[1].re + 1.0).abs() < 1e-12 && r[1].im == 0.0);
    }

    #[test]
    fn roots_imaginary_pair() {
        let r = Polynomial::new(vec![1.0, 0.0, 1.0]).roots().unwrap();
        assert!(r[0].re.abs() < 1e-12 && (r[0].im + 1.0).abs() < 1e-12);
        assert!(r[1].re.abs() < 1e-12 && (r[1].im - 1.0).abs() < 1e-12);
        assert_eq!(r[0], r[1].conj());
    }

    #[test]
    fn roots_cubic_residual() {
        let p = Polynomial::new(vec![1.0, 2.0, 2.0, 1.0]);
        for r in p.roots().unwrap() {
            assert!(p.eval_c(r).norm() <= 1e-10);
        }
    }

    #[test]
    fn roots_of_zero_polynomial_fail() {
        assert_eq!(Polynomial::zero().roots(), Err(Error::DegeneratePolynomial));
        assert!(Polynomial::constant(3.0).roots().unwrap().is_empty());
    }

    #[test]
    fn zero_roots_are_exact() {
        let r = Polynomial::new(vec![1.0, 1.0, 0.0, 0.0]).roots().unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn reflect_and_divide() {
        let p = Polynomial::new(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.reflect().coeffs(), &[-1.0, 2.0, -3.0, 4.0]);
        let (q, r) = Polynomial::new(vec![1.0, 3.0, 2.0])
            .div_rem(&Polynomial::new(vec![1.0, 1.0]))
            .unwrap();
        assert_eq!(q.coeffs(), &[1.0, 2.0]);
        assert!(r.is_zero());
    }

    #[test]
    fn from_roots_round_trip() {
        let roots = [
            Complex64::new(-1.0, 2.0),
            Complex64::new(-1.0, -2.0),
            Complex64::new(-3.0, 0.0),
        ];
        let p = Polynomial::from_roots(&roots);
        assert_eq!(p.degree(), 3);
        let back = p.roots().unwrap();
        for (a, b) in back.iter().zip([roots[2], roots[1], roots[0]].iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn even_quartic_converges() {
        // four roots ±a±bj; plain QR on the companion matrix stalls here
        let p = Polynomial::new(vec![1.0, 0.0, -1.225654172736534, 0.0, 1.4628974069031195]);
        let r = p.roots().unwrap();
        assert_eq!(r.len(), 4);
        for z in &r {
            assert!(p.eval_c(*z).norm() <= 1e-10);
        }
        assert_eq!(r.iter().filter(|z| z.re > 0.0).count(), 2);
    }

    #[test]
    fn aberth_matches_known_roots() {
        let p = Polynomial::new(vec![1.0, -6.0, 11.0, -6.0]);
        let mut r: Vec<f64> = aberth(&p).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
