//! Normalized coprime factorizations, graph symbols and the maximum
//! stability margin.
//!
//! For `G = n/m` the normalized right factors are `M = m/d`, `N = n/d` with
//! `d` the Hurwitz spectral factor of `n(−s)n(s) + m(−s)m(s)`. Scalar
//! transfer functions commute, so the left factors coincide with the right
//! ones; a MIMO extension would have to compute them separately.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::ss;
use crate::tf::RationalTF;

/// Relative distance from the imaginary axis below which a spectral zero is
/// considered to lie on it.
const SPECTRAL_AXIS_TOL: f64 = 1e-9;

/// Hurwitz `d` with `d(−s)d(s) = n(−s)n(s) + m(−s)m(s)` and positive leading
/// coefficient.
pub fn spectral_factor(n: &Polynomial, m: &Polynomial) -> Result<Polynomial> {
    if m.is_zero() {
        return Err(Error::DegeneratePolynomial);
    }
    let phi = n.reflect().mul(n).add(&m.reflect().mul(m));
    let k = n.degree().max(m.degree());
    if phi.is_zero() || phi.degree() != 2 * k {
        return Err(Error::BoundarySpectralZero);
    }
    // phi only carries even powers: phi(s) = q(s²)
    let q = Polynomial::new((0..=k).rev().map(|i| phi.coeff(2 * i)).collect::<Vec<_>>());
    let gain = phi.leading().abs().sqrt();
    if k == 0 {
        return Ok(Polynomial::constant(gain));
    }
    let mut roots = Vec::with_capacity(k);
    for y in q.roots()? {
        let r = y.sqrt();
        if r.re.abs() <= SPECTRAL_AXIS_TOL * (1.0 + r.norm()) {
            return Err(Error::BoundarySpectralZero);
        }
        roots.push(-r);
    }
    // conjugate symmetry of `q` roots carries over to `roots`
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(Polynomial::from_roots(&roots).scale(gain))
}

/// Normalized image (`J = [M; N]`) and kernel (`K = [−N, M]`) symbols of a
/// SISO plant, stored as numerator polynomials over the spectral factor.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSymbols {
    /// Plant numerator.
    pub n: Polynomial,
    /// Plant denominator.
    pub m: Polynomial,
    /// Hurwitz spectral factor.
    pub d: Polynomial,
}

impl GraphSymbols {
    pub fn new(g: &RationalTF) -> Result<Self> {
        let n = g.num().clone();
        let m = g.den().clone();
        let d = spectral_factor(&n, &m)?;
        Ok(GraphSymbols { n, m, d })
    }

    /// Right factor `M = m/d`.
    pub fn m_tf(&self) -> Result<RationalTF> {
        RationalTF::from_polys(self.m.clone(), self.d.clone(), 0.0)
    }

    /// Right factor `N = n/d`.
    pub fn n_tf(&self) -> Result<RationalTF> {
        RationalTF::from_polys(self.n.clone(), self.d.clone(), 0.0)
    }

    /// Left factors; equal to the right factors for scalar plants.
    pub fn mhat_tf(&self) -> Result<RationalTF> {
        self.m_tf()
    }

    pub fn nhat_tf(&self) -> Result<RationalTF> {
        self.n_tf()
    }

    /// `(M(jω), N(jω))`, with `ω = ∞` giving the limit.
    pub fn image_jw(&self, omega: f64) -> (Complex64, Complex64) {
        let k = self.d.degree();
        if omega.is_infinite() {
            let dk = self.d.leading();
            return (
                Complex64::new(self.m.coeff(k) / dk, 0.0),
                Complex64::new(self.n.coeff(k) / dk, 0.0),
            );
        }
        let s = Complex64::new(0.0, omega);
        if omega.abs() <= 1.0 {
            let dv = self.d.eval_c(s);
            return (self.m.eval_c(s) / dv, self.n.eval_c(s) / dv);
        }
        let z = s.inv();
        let rev = |p: &Polynomial| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..=k {
                acc = acc * z + p.coeff(i);
            }
            acc
        };
        let dv = rev(&self.d);
        (rev(&self.m) / dv, rev(&self.n) / dv)
    }

    /// `J(jω) = [M; N]`.
    pub fn j_jw(&self, omega: f64) -> [Complex64; 2] {
        let (m, n) = self.image_jw(omega);
        [m, n]
    }

    /// `K(jω) = [−N, M]`.
    pub fn k_jw(&self, omega: f64) -> [Complex64; 2] {
        let (m, n) = self.image_jw(omega);
        [-n, m]
    }

    /// Kernel symbol as a state-space row over `d`.
    pub fn kernel_realization(&self) -> Result<ss::StateSpace> {
        ss::realize_over(&self.d, &[self.n.scale(-1.0), self.m.clone()])
    }

    /// `√(1 − ‖K‖_H²)`.
    pub fn b_max(&self) -> Result<f64> {
        let h = self.kernel_realization()?.balanced().hankel_norm()?;
        Ok((1.0 - h * h).max(0.0).sqrt())
    }
}

pub fn graph_symbols(g: &RationalTF) -> Result<GraphSymbols> {
    GraphSymbols::new(g)
}

/// Maximum stability margin over all stabilizing controllers.
pub fn b_max(g: &RationalTF) -> Result<f64> {
    GraphSymbols::new(g)?.b_max()
}
