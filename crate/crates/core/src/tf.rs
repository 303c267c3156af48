//! Real-rational SISO transfer functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Default relative root distance below which a numerator and a denominator
/// root are treated as a common factor.
pub const CANCEL_TOL: f64 = 1e-8;

/// Default absolute margin on pole real parts separating stable poles from
/// the imaginary axis.
pub const EPS_STAB: f64 = 1e-9;

/// Value of a transfer function at a point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Response {
    Finite(Complex64),
    Infinite,
}

impl Response {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Response::Finite(z) => Some(z),
            Response::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Response::Infinite)
    }

    /// Homogeneous coordinates `(a, b)` with value `b / a`.
    pub fn homogeneous(self) -> (Complex64, Complex64) {
        match self {
            Response::Finite(z) => (Complex64::new(1.0, 0.0), z),
            Response::Infinite => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        }
    }

    pub fn from_homogeneous(a: Complex64, b: Complex64) -> Response {
        if a.norm() == 0.0 {
            Response::Infinite
        } else {
            Response::Finite(b / a)
        }
    }
}

impl From<Complex64> for Response {
    fn from(z: Complex64) -> Self {
        Response::Finite(z)
    }
}

impl From<f64> for Response {
    fn from(x: f64) -> Self {
        Response::Finite(Complex64::new(x, 0.0))
    }
}

/// Location of the poles of a system relative to the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

/// Proper real-rational transfer function `num / den`, stored coprime with a
/// monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTf", into = "RawTf")]
pub struct RationalTF {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct RawTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TryFrom<RawTf> for RationalTF {
    type Error = Error;
    fn try_from(raw: RawTf) -> Result<Self> {
        RationalTF::new(&raw.num, &raw.den)
    }
}

impl From<RationalTF> for RawTf {
    fn from(tf: RationalTF) -> Self {
        RawTf {
            num: if tf.num.is_zero() {
                vec![0.0]
            } else {
                tf.num.coeffs().to_vec()
            },
            den: tf.den.coeffs().to_vec(),
        }
    }
}

impl RationalTF {
    /// Builds a canonical transfer function from descending coefficient lists:
    /// common roots are cancelled, the denominator is made monic and improper
    /// fractions are rejected.
    pub fn new(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::from_polys(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()), CANCEL_TOL)
    }

    pub fn from_polys(num: Polynomial, den: Polynomial, cancel_tol: f64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let num = num.trimmed(1e-14);
        if num.is_zero() {
            return Ok(RationalTF {
                num: Polynomial::zero(),
                den: Polynomial::constant(1.0),
            });
        }
        if num.degree() > den.degree() {
            return Err(Error::ImproperSystem);
        }
        let (num, den) = cancel_common_roots(num, den, cancel_tol)?;
        if num.degree() > den.degree() {
            return Err(Error::ImproperSystem);
        }
        // dividing (not multiplying by the reciprocal) keeps a monic
        // denominator exactly monic, so canonicalization is idempotent
        let lead = den.leading();
        let div = |p: &Polynomial| Polynomial::new(p.coeffs().iter().map(|c| c / lead).collect::<Vec<_>>());
        Ok(RationalTF {
            num: div(&num),
            den: div(&den),
        })
    }

    pub fn gain(k: f64) -> Self {
        RationalTF::new(&[k], &[1.0]).expect("static gain is always valid")
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    /// McMillan degree.
    pub fn order(&self) -> usize {
        self.den.degree()
    }

    pub fn is_static(&self) -> bool {
        self.den.degree() == 0
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Feedthrough `G(∞)`.
    pub fn feedthrough(&self) -> f64 {
        self.num.coeff(self.den.degree()) / self.den.leading()
    }

    pub fn eval(&self, s: Complex64) -> Response {
        let (a, b) = self.homogeneous(s);
        Response::from_homogeneous(a, b)
    }

    /// Frequency response at `s = jω`; `ω = ±∞` gives the limit value.
    pub fn eval_jw(&self, omega: f64) -> Response {
        let (a, b) = self.homogeneous_jw(omega);
        Response::from_homogeneous(a, b)
    }

    /// `(den(s), num(s))` scaled by `s^-n` when `|s| > 1`, so that large
    /// arguments neither overflow nor lose the ratio.
    pub fn homogeneous(&self, s: Complex64) -> (Complex64, Complex64) {
        if s.norm() <= 1.0 {
            return (self.den.eval_c(s), self.num.eval_c(s));
        }
        let z = s.inv();
        let n = self.den.degree();
        (eval_reversed(&self.den, n, z), eval_reversed(&self.num, n, z))
    }

    pub fn homogeneous_jw(&self, omega: f64) -> (Complex64, Complex64) {
        if omega.is_infinite() {
            let n = self.den.degree();
            return (
                Complex64::new(self.den.leading(), 0.0),
                Complex64::new(self.num.coeff(n), 0.0),
            );
        }
        self.homogeneous(Complex64::new(0.0, omega))
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots().unwrap_or_default()
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        if self.num.is_zero() {
            return Vec::new();
        }
        self.num.roots().unwrap_or_default()
    }

    pub fn stability(&self) -> Stability {
        classify_roots(&self.poles(), EPS_STAB)
    }

    pub fn stability_with(&self, eps_stab: f64) -> Stability {
        classify_roots(&self.poles(), eps_stab)
    }

    pub fn is_stable(&self) -> bool {
        self.stability() == Stability::Stable
    }

    /// Number of poles with positive real part (beyond `EPS_STAB`).
    pub fn unstable_pole_count(&self) -> usize {
        self.poles().iter().filter(|p| p.re > EPS_STAB).count()
    }

    /// Re-runs cancellation with a custom tolerance.
    pub fn cancelled(&self, tol: f64) -> Result<Self> {
        Self::from_polys(self.num.clone(), self.den.clone(), tol)
    }

    pub fn neg(&self) -> RationalTF {
        RationalTF {
            num: self.num.scale(-1.0),
            den: self.den.clone(),
        }
    }
}

fn eval_reversed(p: &Polynomial, n: usize, z: Complex64) -> Complex64 {
    // p(s) / s^n = sum_k coeff(k) z^(n-k)
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        acc = acc * z + p.coeff(k);
    }
    acc
}

pub(crate) fn classify_roots(roots: &[Complex64], eps: f64) -> Stability {
    if roots.iter().any(|r| r.re > eps || !r.re.is_finite()) {
        Stability::Unstable
    } else if roots.iter().any(|r| r.re >= -eps) {
        Stability::Marginal
    } else {
        Stability::Stable
    }
}

fn relative_residual(p: &Polynomial, r: Complex64) -> f64 {
    let m = r.norm();
    let scale: f64 = p
        .coeffs()
        .iter()
        .rev()
        .enumerate()
        .map(|(k, c)| c.abs() * m.powi(k as i32))
        .sum();
    if scale == 0.0 {
        return 0.0;
    }
    p.eval_c(r).norm() / scale
}

fn cancel_common_roots(
    mut num: Polynomial,
    mut den: Polynomial,
    tol: f64,
) -> Result<(Polynomial, Polynomial)> {
    while num.degree() > 0 && den.degree() > 0 {
        let nr = num.roots()?;
        let dr = den.roots()?;
        let mut common: Option<Complex64> = None;
        'outer: for &a in &nr {
            for &b in &dr {
                let close = (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0);
                if close {
                    common = Some((a + b) * 0.5);
                    break 'outer;
                }
            }
            if relative_residual(&den, a) <= 1e-13 {
                common = Some(a);
                break;
            }
        }
        let Some(r) = common else { break };
        let factor = if r.im == 0.0 {
            Polynomial::new(vec![1.0, -r.re])
        } else {
            Polynomial::new(vec![1.0, -2.0 * r.re, r.norm_sqr()])
        };
        if factor.degree() > num.degree() || factor.degree() > den.degree() {
            break;
        }
        num = num.div_rem(&factor)?.0;
        den = den.div_rem(&factor)?.0;
    }
    Ok((num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_simple() {
        let g = RationalTF::new(&[1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g.num().coeffs(), &[1.0]);
        assert_eq!(g.den().coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn make_cancels_common_factor() {
        let g = RationalTF::new(&[1.0, 1.0], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(g.order(), 1);
        assert!((g.num().coeffs()[0] - 1.0).abs() < 1e-12);
        assert!((g.den().coeffs()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn make_normalizes_monic() {
        let g = RationalTF::new(&[2.0, 0.0], &[2.0, 2.0]).unwrap();
        assert_eq!(g.num().coeffs(), &[1.0, 0.0]);
        assert_eq!(g.den().coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn make_rejects_improper_and_zero_den() {
        assert_eq!(RationalTF::new(&[1.0, 0.0, 0.0], &[1.0, 1.0]), Err(Error::ImproperSystem));
        assert_eq!(RationalTF::new(&[1.0], &[0.0]), Err(Error::ZeroDenominator));
    }

    #[test]
    fn eval_examples() {
        let g = RationalTF::new(&[1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g.eval(c(0.0, 0.0)), Response::Finite(c(1.0, 0.0)));
        let v = g.eval(c(0.0, 1.0)).finite().unwrap();
        assert!((v - c(0.5, -0.5)).norm() < 1e-15);
        let integ = RationalTF::new(&[1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(integ.eval(c(0.0, 0.0)), Response::Infinite);
    }

    #[test]
    fn eval_at_infinity_is_limit() {
        let g = RationalTF::new(&[3.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(g.eval_jw(f64::INFINITY), Response::Finite(c(3.0, 0.0)));
        let big = g.eval_jw(1e12).finite().unwrap();
        assert!((big - c(3.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn stability_classes() {
        assert_eq!(RationalTF::new(&[1.0], &[1.0, 1.0]).unwrap().stability(), Stability::Stable);
        assert_eq!(RationalTF::new(&[1.0], &[1.0, -1.0]).unwrap().stability(), Stability::Unstable);
        let integ = RationalTF::new(&[1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(integ.stability(), Stability::Marginal);
        assert!(!integ.is_stable());
    }

    #[test]
    fn serde_shape() {
        let g = RationalTF::new(&[2.0], &[1.0, 3.0]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"num":[2.0],"den":[1.0,3.0]}"#);
        let back: RationalTF = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<RationalTF>(r#"{"num":[1,0,0],"den":[1,1]}"#).is_err());
    }
}
