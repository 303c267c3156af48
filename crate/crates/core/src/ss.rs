//! State-space realizations, gramians, Hankel norm and step simulation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Polynomial;
use crate::tf::RationalTF;

/// `ẋ = A x + B u`, `y = C x + D u` with a scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    /// Transfer row `C (sI − A)⁻¹ B + D` at a complex point.
    pub fn transfer_at(&self, s: Complex64) -> Vec<Complex64> {
        let n = self.order();
        let k = self.d.ncols();
        if n == 0 {
            return (0..k).map(|j| Complex64::new(self.d[(0, j)], 0.0)).collect();
        }
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let bc = self.b.map(|v| Complex64::new(v, 0.0));
        let x = m.lu().solve(&bc).unwrap_or_else(|| DMatrix::from_element(n, k, Complex64::new(f64::NAN, 0.0)));
        let cc = self.c.map(|v| Complex64::new(v, 0.0));
        let y = cc * x;
        (0..k)
            .map(|j| y[(0, j)] + self.d[(0, j)])
            .collect()
    }

    /// Applies `x → T⁻¹ x`, i.e. `(T⁻¹AT, T⁻¹B, CT, D)`.
    pub fn similarity(&self, t: &DMatrix<f64>) -> Result<StateSpace> {
        let tinv = t.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        Ok(StateSpace {
            a: &tinv * &self.a * t,
            b: &tinv * &self.b,
            c: &self.c * t,
            d: self.d.clone(),
        })
    }

    /// Diagonally balanced equivalent realization.
    pub fn balanced(&self) -> StateSpace {
        if self.order() == 0 {
            return self.clone();
        }
        let (a, dscale) = linalg::balance(&self.a);
        let mut b = self.b.clone();
        let mut c = self.c.clone();
        for (i, &di) in dscale.iter().enumerate() {
            b.row_mut(i).scale_mut(1.0 / di);
            c.column_mut(i).scale_mut(di);
        }
        StateSpace { a, b, c, d: self.d.clone() }
    }

    /// Transfer function of a single-input realization.
    pub fn to_tf(&self) -> Result<RationalTF> {
        if self.inputs() != 1 {
            return Err(Error::InvalidArgument("to_tf needs a single-input realization".into()));
        }
        let d = self.d[(0, 0)];
        let n = self.order();
        if n == 0 {
            return Ok(RationalTF::gain(d));
        }
        let sys = self.balanced();
        let den = char_poly(&sys.a)?;
        // det(sI − A + αBC) − det(sI − A) = α C adj(sI − A) B
        let bc = &sys.b * &sys.c;
        let alpha = if bc.norm() > 0.0 {
            sys.a.norm().max(1.0) / bc.norm()
        } else {
            1.0
        };
        let shifted = char_poly(&(&sys.a - &bc * alpha))?;
        let strictly = shifted.sub(&den).scale(1.0 / alpha);
        let num = strictly.add(&den.scale(d));
        RationalTF::from_polys(num, den, crate::tf::CANCEL_TOL)
    }

    /// Hankel norm `√λmax(P Q)` of the strictly proper stable part.
    pub fn hankel_norm(&self) -> Result<f64> {
        if self.order() == 0 {
            return Ok(0.0);
        }
        let (p, q) = self.gramians()?;
        Ok(linalg::max_eig_psd_product(&p, &q).max(0.0).sqrt())
    }

    /// Controllability and observability gramians.
    pub fn gramians(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let p = linalg::lyapunov(&self.a, &(&self.b * self.b.transpose()))?;
        let q = linalg::lyapunov(&self.a.transpose(), &(self.c.transpose() * &self.c))?;
        Ok((p, q))
    }

    /// Unit-step response under exact zero-order-hold discretization.
    pub fn step_response(&self, t_end: f64, dt: f64) -> Result<TimeSeries> {
        if !(dt > 0.0) || !(t_end > 0.0) {
            return Err(Error::InvalidArgument("step_response needs dt > 0 and t_end > 0".into()));
        }
        let steps = (t_end / dt).round() as usize;
        let n = self.order();
        let k = self.inputs();
        let u = DVector::from_element(k, 1.0);
        let feed = (&self.d * &u)[0];
        let mut t = Vec::with_capacity(steps + 1);
        let mut y = Vec::with_capacity(steps + 1);
        if n == 0 {
            for i in 0..=steps {
                t.push(i as f64 * dt);
                y.push(feed);
            }
            return Ok(TimeSeries { t, y });
        }
        let mut aug = DMatrix::<f64>::zeros(n + k, n + k);
        aug.view_mut((0, 0), (n, n)).copy_from(&(&self.a * dt));
        aug.view_mut((0, n), (n, k)).copy_from(&(&self.b * dt));
        let e = linalg::expm(&aug);
        let phi = e.view((0, 0), (n, n)).into_owned();
        let gam = e.view((0, n), (n, k)).into_owned() * &u;
        let mut x = DVector::<f64>::zeros(n);
        for i in 0..=steps {
            t.push(i as f64 * dt);
            y.push((&self.c * &x)[0] + feed);
            x = &phi * &x + &gam;
        }
        Ok(TimeSeries { t, y })
    }
}

/// Sampled scalar signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

/// Characteristic polynomial `det(sI − A)` from the eigenvalues of `A`.
pub fn char_poly(a: &DMatrix<f64>) -> Result<Polynomial> {
    if a.nrows() == 0 {
        return Ok(Polynomial::constant(1.0));
    }
    let mut roots = crate::linalg::eigenvalues(a)?;
    if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    // pair conjugates so the expansion is real up to rounding
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(Polynomial::from_roots(&roots))
}

/// Least common multiple of monic denominators, matched root by root.
fn lcm_denominator(dens: &[&Polynomial]) -> Result<Polynomial> {
    let mut acc = dens[0].monic();
    for d in &dens[1..] {
        if d.degree() == acc.degree()
            && d.monic()
                .coeffs()
                .iter()
                .zip(acc.coeffs())
                .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + y.abs()))
        {
            continue;
        }
        let mut have = if acc.degree() > 0 { acc.roots()? } else { Vec::new() };
        let mut extra = Vec::new();
        for r in if d.degree() > 0 { d.roots()? } else { Vec::new() } {
            let pos = have
                .iter()
                .position(|h| (h - r).norm() <= 1e-8 * r.norm().max(1.0));
            match pos {
                Some(i) => {
                    have.remove(i);
                }
                None => extra.push(r),
            }
        }
        if !extra.is_empty() {
            acc = acc.mul(&Polynomial::from_roots(&extra));
        }
    }
    Ok(acc)
}

/// Observer-canonical realization of a transfer row over the least common
/// denominator of its entries; the state dimension equals the degree of that
/// denominator.
pub fn realize_row(entries: &[RationalTF]) -> Result<StateSpace> {
    if entries.is_empty() {
        return Err(Error::InvalidArgument("empty transfer row".into()));
    }
    let dens: Vec<&Polynomial> = entries.iter().map(|g| g.den()).collect();
    let l = lcm_denominator(&dens)?;
    let mut nums = Vec::with_capacity(entries.len());
    for g in entries {
        let (cofactor, _) = l.div_rem(&g.den().monic())?;
        nums.push(g.num().scale(1.0 / g.den().leading()).mul(&cofactor));
    }
    realize_over(&l, &nums)
}

/// Observer-canonical realization of the row `[nums[0], nums[1], ...] / den`.
pub fn realize_over(den: &Polynomial, nums: &[Polynomial]) -> Result<StateSpace> {
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let l = den.monic();
    let n = l.degree();
    let k = nums.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, k);
    let mut c = DMatrix::<f64>::zeros(1, n);
    let mut d = DMatrix::<f64>::zeros(1, k);
    for i in 0..n {
        a[(i, 0)] = -l.coeff(n - 1 - i);
        if i + 1 < n {
            a[(i, i + 1)] = 1.0;
        }
    }
    if n > 0 {
        c[(0, 0)] = 1.0;
    }
    for (j, raw) in nums.iter().enumerate() {
        if !raw.is_zero() && raw.degree() > n {
            return Err(Error::ImproperSystem);
        }
        let num = raw.scale(1.0 / den.leading());
        let dj = num.coeff(n);
        d[(0, j)] = dj;
        let rem = num.sub(&l.scale(dj));
        for i in 0..n {
            b[(i, j)] = rem.coeff(n - 1 - i);
        }
    }
    Ok(StateSpace { a, b, c, d })
}

/// Realization of a single transfer function.
pub fn realize(g: &RationalTF) -> Result<StateSpace> {
    realize_row(std::slice::from_ref(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realize_first_order() {
        let ss = realize(&RationalTF::new(&[1.0], &[1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(ss.order(), 1);
        assert_eq!(ss.a[(0, 0)], -1.0);
    }

    #[test]
    fn realize_biproper_splits_feedthrough() {
        let ss = realize(&RationalTF::new(&[1.0, 0.0], &[1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(ss.d[(0, 0)], 1.0);
        assert_eq!(ss.b[(0, 0)] * ss.c[(0, 0)], -1.0);
    }

    #[test]
    fn realize_row_round_trip() {
        let r2 = 2f64.sqrt();
        let row = vec![
            RationalTF::new(&[-1.0], &[1.0, r2]).unwrap(),
            RationalTF::new(&[1.0, 1.0], &[1.0, r2]).unwrap(),
        ];
        let ss = realize_row(&row).unwrap();
        assert_eq!(ss.order(), 1);
        for w in [0.0, 0.1, 1.0, 10.0, 1e3] {
            let s = Complex64::new(0.0, w);
            let got = ss.transfer_at(s);
            for (g, v) in row.iter().zip(got) {
                let want = g.eval(s).finite().unwrap();
                assert!((want - v).norm() <= 1e-8 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn row_with_different_denominators() {
        let row = vec![
            RationalTF::new(&[1.0], &[1.0, 1.0]).unwrap(),
            RationalTF::new(&[1.0], &[1.0, 2.0]).unwrap(),
        ];
        let ss = realize_row(&row).unwrap();
        assert_eq!(ss.order(), 2);
        let s = Complex64::new(0.3, 1.7);
        for (g, v) in row.iter().zip(ss.transfer_at(s)) {
            assert!((g.eval(s).finite().unwrap() - v).norm() < 1e-12);
        }
    }

    #[test]
    fn to_tf_round_trip() {
        let g = RationalTF::new(&[2.0, -1.0, 3.0], &[1.0, 3.0, 4.0, 5.0]).unwrap();
        let back = realize(&g).unwrap().to_tf().unwrap();
        for (x, y) in back.num().coeffs().iter().zip(g.num().coeffs()) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in back.den().coeffs().iter().zip(g.den().coeffs()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn hankel_norm_examples() {
        let static_ss = realize(&RationalTF::gain(3.0)).unwrap();
        assert_eq!(static_ss.hankel_norm().unwrap(), 0.0);

        let nskr_integrator = StateSpace {
            a: DMatrix::from_element(1, 1, -1.0),
            b: DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]),
            c: DMatrix::from_element(1, 1, 1.0),
            d: DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
        };
        assert!((nskr_integrator.hankel_norm().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hankel_norm_rejects_unstable() {
        let ss = realize(&RationalTF::new(&[1.0], &[1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(ss.hankel_norm(), Err(Error::UnstableLyapunov));
    }

    #[test]
    fn step_first_order() {
        let ss = realize(&RationalTF::new(&[1.0], &[1.0, 1.0]).unwrap()).unwrap();
        let r = ss.step_response(2.0, 0.01).unwrap();
        assert_eq!(r.y[0], 0.0);
        assert!((r.y[100] - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn step_gain_and_integrator() {
        let gain = realize(&RationalTF::gain(1.0)).unwrap().step_response(1.0, 0.1).unwrap();
        assert!(gain.y.iter().all(|&v| v == 1.0));
        let integ = realize(&RationalTF::new(&[1.0], &[1.0, 0.0]).unwrap())
            .unwrap()
            .step_response(2.0, 0.01)
            .unwrap();
        assert!((integ.y.last().unwrap() - 2.0).abs() < 1e-9);
    }
}
