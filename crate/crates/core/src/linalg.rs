//! Dense linear-algebra kernels: balancing, Lyapunov and Riccati solvers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Order up to which Lyapunov equations are solved through the Kronecker
/// linear system; larger problems go through a complex Schur form.
pub const KRONECKER_MAX_ORDER: usize = 20;

/// Diagonal similarity balancing with radix-2 scale factors.
///
/// Returns `(D⁻¹ A D, d)` with `D = diag(d)`.
pub fn balance(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut d = vec![1.0; n];
    for _sweep in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / 2.0 {
                f *= 2.0;
                cc *= 2.0;
                rr /= 2.0;
            }
            while cc >= rr * 2.0 {
                f /= 2.0;
                cc /= 2.0;
                rr *= 2.0;
            }
            if f != 1.0 && cc + rr < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    m[(j, i)] *= f;
                    m[(i, j)] /= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    (m, d)
}

/// Eigenvalues with a bounded QR iteration. If it stalls, the matrix is
/// rotated by a fixed orthogonal similarity and the iteration retried.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (bal, _) = balance(a);
    let mut m = bal;
    for attempt in 0..4u32 {
        if let Some(schur) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 100 * n.max(10)) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
        let seed = DMatrix::<f64>::from_fn(n, n, |i, j| {
            ((i * 7 + j * 13 + attempt as usize * 3) as f64 * 0.618_033_988_75).fract() - 0.5
        });
        let q = seed.qr().q();
        m = q.transpose() * m * q;
    }
    Err(Error::InvalidArgument("eigenvalue iteration did not converge".into()))
}

/// True when every eigenvalue of `a` has a strictly negative real part.
pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    match eigenvalues(a) {
        Ok(eig) => eig.iter().all(|z| z.re < 0.0 && z.re.is_finite()),
        Err(_) => false,
    }
}

/// Solves `A P + P Aᵀ + Q = 0` for Hurwitz `A`.
pub fn lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::InvalidArgument("lyapunov: dimension mismatch".into()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if !is_hurwitz(a) {
        return Err(Error::UnstableLyapunov);
    }
    let p = if n <= KRONECKER_MAX_ORDER {
        lyapunov_kronecker(a, q)?
    } else {
        lyapunov_schur(a, q)?
    };
    Ok(symmetrize(&p))
}

pub(crate) fn lyapunov_kronecker(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let big = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = nalgebra::DVector::from_iterator(n * n, q.iter().map(|v| -v));
    let sol = big.lu().solve(&rhs).ok_or(Error::SingularMatrix)?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

pub(crate) fn lyapunov_schur(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let qc = q.map(|v| Complex64::new(v, 0.0));
    let schur = nalgebra::Schur::try_new(ac, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::InvalidArgument("Schur decomposition did not converge".into()))?;
    let (u, t) = schur.unpack();
    let c = u.adjoint() * &qc * &u;
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let mut acc = -c[(i, j)];
            for k in (i + 1)..n {
                acc -= t[(i, k)] * y[(k, j)];
            }
            for k in (j + 1)..n {
                acc -= y[(i, k)] * t[(j, k)].conj();
            }
            let denom = t[(i, i)] + t[(j, j)].conj();
            if denom.norm() == 0.0 {
                return Err(Error::SingularMatrix);
            }
            y[(i, j)] = acc / denom;
        }
    }
    let p = &u * y * u.adjoint();
    Ok(p.map(|z| z.re))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest eigenvalue of `P Q` for symmetric positive semidefinite `P`, `Q`.
pub fn max_eig_psd_product(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    if p.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(symmetrize(p));
    let mut l = eig.eigenvectors.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        l.column_mut(j).scale_mut(s);
    }
    let m = l.transpose() * symmetrize(q) * &l;
    SymmetricEigen::new(symmetrize(&m))
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &v| acc.max(v))
}

/// Stabilizing solution of `Aᵀ X + X A − X G X + Q = 0` via the matrix sign
/// function of the Hamiltonian `[[A, −G], [−Q, −Aᵀ]]`.
pub fn care(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let mut z = h;
    let mut converged = false;
    for _ in 0..200 {
        let lu = z.clone().lu();
        // determinant scaling, computed in log space to avoid overflow
        let log_det: f64 = lu.u().diagonal().iter().map(|v| v.abs().ln()).sum();
        let zinv = lu
            .try_inverse()
            .ok_or_else(|| Error::Riccati("Hamiltonian has eigenvalues on the imaginary axis".into()))?;
        let c = (-log_det / (2 * n) as f64).exp();
        let c = if c.is_finite() && c > 0.0 { c } else { 1.0 };
        let next = (&z * c + zinv / c) * 0.5;
        let diff = (&next - &z).norm() / next.norm().max(1e-300);
        z = next;
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::Riccati("sign iteration diverged".into()));
        }
        if diff < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::debug!("care: sign iteration reached the iteration cap");
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::<f64>::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&z.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n))
        .copy_from(&(z.view((n, n), (n, n)) + &eye));
    let mut rhs = DMatrix::<f64>::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n))
        .copy_from(&(-(z.view((0, 0), (n, n)) + &eye)));
    rhs.view_mut((n, 0), (n, n)).copy_from(&(-z.view((n, 0), (n, n))));
    let svd = lhs.svd(true, true);
    let x = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Riccati(e.to_string()))?;
    let x = symmetrize(&x);
    let res = a.transpose() * &x + &x * a - &x * g * &x + q;
    let scale = 1.0 + q.norm() + (a.norm() * x.norm()) + (x.norm().powi(2) * g.norm());
    if !(res.norm() / scale).is_finite() || res.norm() / scale > 1e-6 {
        return Err(Error::Riccati(format!(
            "residual {:.3e} too large",
            res.norm() / scale
        )));
    }
    Ok(x)
}

/// Matrix exponential.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().exp()
}
