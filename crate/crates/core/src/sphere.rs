//! Min-max chordal center of a set of points of the extended complex plane.
//!
//! Points are lifted onto the Riemann sphere of diameter one, where chordal
//! distance is Euclidean distance. The smallest enclosing ball of the lifted
//! points gives the cap center, which is projected back and then polished by
//! Nelder–Mead on the original min-max objective.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::kappa;
use crate::tf::Response;

/// Chordal radius of a hemisphere on the diameter-one sphere.
const HEMISPHERE: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevPoint {
    pub h: Response,
    /// Achieved `max_i κ(h, values[i])`.
    pub radius: f64,
    /// The enclosing cap reached a hemisphere and the plain 2-D search was used.
    pub fallback: bool,
}

#[derive(Serialize)]
struct PointJson {
    re: Option<f64>,
    im: Option<f64>,
    infinite: bool,
}

/// Point on the sphere centered at `(0, 0, 1/2)` with radius `1/2`.
pub fn lift(v: Response) -> Vector3<f64> {
    match v {
        Response::Infinite => Vector3::new(0.0, 0.0, 1.0),
        Response::Finite(z) => {
            let q = 1.0 + z.norm_sqr();
            Vector3::new(z.re / q, z.im / q, z.norm_sqr() / q)
        }
    }
}

/// Inverse of [`lift`] for a point on (or radially projected onto) the sphere.
pub fn unlift(p: Vector3<f64>) -> Response {
    let c = Vector3::new(0.0, 0.0, 0.5);
    let u = p - c;
    let n = u.norm();
    if n == 0.0 {
        return Response::Finite(Complex64::new(0.0, 0.0));
    }
    let q = c + u * (0.5 / n);
    let den = 1.0 - q.z;
    if den <= 1e-15 {
        return Response::Infinite;
    }
    Response::Finite(Complex64::new(q.x / den, q.y / den))
}

fn max_kappa(h: Response, values: &[Response]) -> f64 {
    values.iter().map(|&v| kappa(h, v)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy)]
struct Ball {
    c: Vector3<f64>,
    r: f64,
}

impl Ball {
    fn contains(&self, p: &Vector3<f64>) -> bool {
        (p - self.c).norm() <= self.r * (1.0 + 1e-12) + 1e-14
    }
}

fn ball_two(a: &Vector3<f64>, b: &Vector3<f64>) -> Ball {
    let c = (a + b) * 0.5;
    Ball { c, r: (a - c).norm() }
}

fn ball_three(p: &[Vector3<f64>]) -> Ball {
    let a = p[1] - p[0];
    let b = p[2] - p[0];
    let axb = a.cross(&b);
    let den = 2.0 * axb.norm_squared();
    if den <= 1e-30 {
        return widest_pair(p);
    }
    let off = (b * a.norm_squared() - a * b.norm_squared()).cross(&axb) / den;
    Ball {
        c: p[0] + off,
        r: off.norm(),
    }
}

fn ball_four(p: &[Vector3<f64>]) -> Ball {
    let m = Matrix3::from_rows(&[
        (p[1] - p[0]).transpose() * 2.0,
        (p[2] - p[0]).transpose() * 2.0,
        (p[3] - p[0]).transpose() * 2.0,
    ]);
    let rhs = Vector3::new(
        p[1].norm_squared() - p[0].norm_squared(),
        p[2].norm_squared() - p[0].norm_squared(),
        p[3].norm_squared() - p[0].norm_squared(),
    );
    match m.lu().solve(&rhs) {
        Some(c) if c.iter().all(|x| x.is_finite()) => Ball {
            c,
            r: (p[0] - c).norm(),
        },
        _ => {
            // coplanar support: best circumscribing triple
            let mut best: Option<Ball> = None;
            for skip in 0..4 {
                let tri: Vec<_> = (0..4).filter(|&i| i != skip).map(|i| p[i]).collect();
                let b = ball_three(&tri);
                if p.iter().all(|x| b.contains(x)) && best.is_none_or(|o| b.r < o.r) {
                    best = Some(b);
                }
            }
            best.unwrap_or_else(|| widest_pair(p))
        }
    }
}

fn widest_pair(p: &[Vector3<f64>]) -> Ball {
    let mut best = Ball { c: p[0], r: 0.0 };
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            let b = ball_two(&p[i], &p[j]);
            if b.r > best.r {
                best = b;
            }
        }
    }
    best
}

fn trivial(r: &[Vector3<f64>]) -> Ball {
    match r.len() {
        0 => Ball {
            c: Vector3::zeros(),
            r: -1.0,
        },
        1 => Ball { c: r[0], r: 0.0 },
        2 => ball_two(&r[0], &r[1]),
        3 => ball_three(r),
        _ => ball_four(r),
    }
}

fn welzl(p: &[Vector3<f64>], r: &mut Vec<Vector3<f64>>) -> Ball {
    if p.is_empty() || r.len() == 4 {
        return trivial(r);
    }
    let (last, rest) = p.split_last().expect("non-empty");
    let ball = welzl(rest, r);
    if ball.r >= 0.0 && ball.contains(last) {
        return ball;
    }
    r.push(*last);
    let ball = welzl(rest, r);
    r.pop();
    ball
}

/// Smallest enclosing ball of 3-D points (Welzl, fixed shuffle).
pub fn enclosing_ball(points: &[Vector3<f64>]) -> (Vector3<f64>, f64) {
    let mut pts = points.to_vec();
    pts.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let b = welzl(&pts, &mut Vec::with_capacity(4));
    (b.c, b.r.max(0.0))
}

/// Point `h` minimizing `max_i κ(h, values[i])`.
pub fn chebyshev_point(values: &[Response]) -> Result<ChebyshevPoint> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("Chebyshev point of an empty set".into()));
    }
    let lifted: Vec<Vector3<f64>> = values.iter().map(|&v| lift(v)).collect();
    let (center, _) = enclosing_ball(&lifted);
    let offset = center - Vector3::new(0.0, 0.0, 0.5);
    let mut start = unlift(center);
    let mut fallback = offset.norm() < 1e-12 || max_kappa(start, values) >= HEMISPHERE - 1e-12;
    if fallback {
        let mean = lifted.iter().fold(Vector3::zeros(), |a, p| a + p) / lifted.len() as f64;
        start = if (mean - Vector3::new(0.0, 0.0, 0.5)).norm() < 1e-12 {
            values[0]
        } else {
            unlift(mean)
        };
    }
    let polished = polish(start, values);
    let (h, radius) = if max_kappa(polished, values) < max_kappa(start, values) {
        (polished, max_kappa(polished, values))
    } else {
        (start, max_kappa(start, values))
    };
    if radius >= HEMISPHERE - 1e-12 {
        fallback = true;
    }
    Ok(ChebyshevPoint { h, radius, fallback })
}

/// Nelder–Mead on the min-max objective, in the chart `h` (|h| ≤ 1) or
/// `1/h` (|h| > 1) so that values near infinity stay well-conditioned.
fn polish(start: Response, values: &[Response]) -> Response {
    let inverted = match start {
        Response::Infinite => true,
        Response::Finite(z) => z.norm() > 1.0,
    };
    let to_h = |x: [f64; 2]| {
        let z = Complex64::new(x[0], x[1]);
        if !inverted {
            Response::Finite(z)
        } else if z.norm() == 0.0 {
            Response::Infinite
        } else {
            Response::Finite(z.inv())
        }
    };
    let x0 = match start {
        Response::Infinite => [0.0, 0.0],
        Response::Finite(z) => {
            let w = if inverted { z.inv() } else { z };
            [w.re, w.im]
        }
    };
    let f = |x: [f64; 2]| max_kappa(to_h(x), values);
    to_h(nelder_mead(f, x0, 0.05, 1e-13, 4000))
}

/// Derivative-free minimization in two variables.
pub fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: f64, tol: f64, max_iter: usize) -> [f64; 2] {
    let mut s = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut v = [f(s[0]), f(s[1]), f(s[2])];
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        s = [s[idx[0]], s[idx[1]], s[idx[2]]];
        v = [v[idx[0]], v[idx[1]], v[idx[2]]];
        let size = (s[1][0] - s[0][0]).abs().max((s[1][1] - s[0][1]).abs())
            .max((s[2][0] - s[0][0]).abs())
            .max((s[2][1] - s[0][1]).abs());
        if size < tol || (v[2] - v[0]).abs() < 1e-16 && size < 1e-9 {
            break;
        }
        let c = lerp(s[0], s[1], 0.5);
        let xr = lerp(c, s[2], -1.0);
        let fr = f(xr);
        if fr < v[0] {
            let xe = lerp(c, s[2], -2.0);
            let fe = f(xe);
            if fe < fr {
                s[2] = xe;
                v[2] = fe;
            } else {
                s[2] = xr;
                v[2] = fr;
            }
        } else if fr < v[1] {
            s[2] = xr;
            v[2] = fr;
        } else {
            let xc = if fr < v[2] { lerp(c, xr, 0.5) } else { lerp(c, s[2], 0.5) };
            let fc = f(xc);
            if fc < v[2].min(fr) {
                s[2] = xc;
                v[2] = fc;
            } else {
                for k in 1..3 {
                    s[k] = lerp(s[0], s[k], 0.5);
                    v[k] = f(s[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| v[i].total_cmp(&v[j])).expect("three vertices");
    s[best]
}

impl Serialize for ChebyshevPoint {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let h = match self.h {
            Response::Finite(z) => PointJson {
                re: Some(z.re),
                im: Some(z.im),
                infinite: false,
            },
            Response::Infinite => PointJson {
                re: None,
                im: None,
                infinite: true,
            },
        };
        let mut st = ser.serialize_struct("ChebyshevPoint", 3)?;
        st.serialize_field("h", &h)?;
        st.serialize_field("radius", &self.radius)?;
        st.serialize_field("fallback", &self.fallback)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Response {
        Response::Finite(Complex64::new(re, im))
    }

    #[test]
    fn lift_preserves_chordal_distance() {
        let pts = [c(0.3, -1.0), c(2.0, 0.5), Response::Infinite, c(0.0, 0.0)];
        for &a in &pts {
            for &b in &pts {
                assert!(((lift(a) - lift(b)).norm() - kappa(a, b)).abs() < 1e-14);
            }
            let back = unlift(lift(a));
            assert!(kappa(back, a) < 1e-14);
        }
    }

    #[test]
    fn single_and_repeated_values() {
        let p = chebyshev_point(&[c(0.4, 0.2)]).unwrap();
        assert!(kappa(p.h, c(0.4, 0.2)) < 1e-12);
        assert!(p.radius < 1e-12);
        let g = c(-1.5, 3.0);
        let p = chebyshev_point(&[g, g, g]).unwrap();
        assert!(kappa(p.h, g) < 1e-12 && p.radius < 1e-12);
    }

    #[test]
    fn two_real_values() {
        let p = chebyshev_point(&[c(1.0, 0.0), c(3.0, 0.0)]).unwrap();
        let h = p.h.finite().unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((h.re - golden).abs() < 1e-6, "{h}");
        assert!(h.im.abs() < 1e-6);
        assert!((p.radius - 0.2298).abs() < 1e-3);
        assert!(!p.fallback);
    }

    #[test]
    fn antipodal_pair_falls_back() {
        let p = chebyshev_point(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!(p.fallback);
        assert!((p.radius - HEMISPHERE).abs() < 1e-6);
    }

    #[test]
    fn values_at_infinity() {
        let p = chebyshev_point(&[Response::Infinite, c(1e6, 0.0)]).unwrap();
        assert!(p.radius < 1e-6);
        let p = chebyshev_point(&[Response::Infinite]).unwrap();
        assert!(p.h.is_infinite() || p.radius < 1e-12);
    }

    #[test]
    fn enclosing_ball_of_tetrahedron() {
        let pts = [
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(-1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.1, 0.1, 0.1),
        ];
        let (c, r) = enclosing_ball(&pts);
        assert!(pts.iter().all(|p| (p - c).norm() <= r + 1e-12));
        assert!((r - 1.0).abs() < 1e-12);
    }
}
