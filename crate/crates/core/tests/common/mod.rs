#![allow(dead_code)]
//! Seeded random systems and oracles that avoid the library's own numerics.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use nugap::rng::{substream, Stream};
use nugap::RationalTF;

pub fn rng(seed: u64) -> ChaCha20Rng {
    substream(seed, Stream::Testing)
}

/// Descending-power product of two coefficient lists.
pub fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn padd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (k, x) in a.iter().rev().enumerate() {
        out[n - 1 - k] += x;
    }
    for (k, x) in b.iter().rev().enumerate() {
        out[n - 1 - k] += x;
    }
    out
}

pub fn peval(p: &[f64], s: Complex64) -> Complex64 {
    p.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn trim(p: &[f64]) -> Vec<f64> {
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let first = p.iter().position(|c| c.abs() > 1e-14 * scale).unwrap_or(p.len() - 1);
    p[first..].to_vec()
}

/// All roots by Durand-Kerner iteration.
pub fn roots_dk(p: &[f64]) -> Vec<Complex64> {
    let p = trim(p);
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[0];
    let monic: Vec<f64> = p.iter().map(|c| c / lead).collect();
    let radius = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius.min(10.0)).collect();
    for _ in 0..5000 {
        let mut change = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = peval(&monic, z[i]) / den;
            z[i] -= step;
            change = change.max(step.norm() / (1.0 + z[i].norm()));
        }
        if change < 1e-15 {
            break;
        }
    }
    z
}

/// Hurwitz test from Durand-Kerner roots.
pub fn hurwitz_by_roots(p: &[f64]) -> bool {
    roots_dk(p).iter().all(|r| r.re < -1e-9)
}

/// Count of open right half-plane roots from the Routh array; `None` when a
/// row degenerates.
pub fn routh_rhp(p: &[f64]) -> Option<usize> {
    let p = trim(p);
    let n = p.len() - 1;
    if n == 0 {
        return Some(0);
    }
    let w = n / 2 + 1;
    let mut rows: Vec<Vec<f64>> = vec![vec![0.0; w], vec![0.0; w]];
    for (k, &c) in p.iter().enumerate() {
        rows[k % 2][k / 2] = c;
    }
    for r in 2..=n {
        let (a, b) = (&rows[r - 2], &rows[r - 1]);
        if b[0].abs() < 1e-12 * a[0].abs().max(1e-300) {
            return None;
        }
        let mut next = vec![0.0; w];
        for k in 0..w - 1 {
            next[k] = (b[0] * a[k + 1] - a[0] * b[k + 1]) / b[0];
        }
        rows.push(next);
    }
    let firsts: Vec<f64> = rows.iter().take(n + 1).map(|r| r[0]).collect();
    Some(firsts.windows(2).filter(|w| w[0].signum() != w[1].signum()).count())
}

/// Random proper system of the given order. Poles are stable unless
/// `unstable` poles are requested; real and complex-pair poles are mixed.
pub fn random_system(rng: &mut impl Rng, order: usize, unstable: usize) -> RationalTF {
    let mut den = vec![1.0];
    let mut left = order;
    let mut bad = unstable.min(order);
    while left > 0 {
        let flip = if bad > 0 { -1.0 } else { 1.0 };
        if left >= 2 && rng.random_bool(0.4) && (bad == 0 || bad >= 2) {
            let re = rng.random_range(0.2..2.5) * flip;
            let im = rng.random_range(0.3..3.0);
            den = pmul(&den, &[1.0, 2.0 * re, re * re + im * im]);
            left -= 2;
            bad = bad.saturating_sub(2);
        } else {
            let p = rng.random_range(0.2..4.0) * flip;
            den = pmul(&den, &[1.0, p]);
            left -= 1;
            bad = bad.saturating_sub(1);
        }
    }
    let zeros = rng.random_range(0..=order);
    let mut num = vec![rng.random_range(0.5..3.0) * if rng.random_bool(0.2) { -1.0 } else { 1.0 }];
    for _ in 0..zeros {
        let z = rng.random_range(0.1..5.0) * if rng.random_bool(0.25) { -1.0 } else { 1.0 };
        num = pmul(&num, &[1.0 / z, 1.0]);
    }
    RationalTF::new(&num, &den).expect("valid random system")
}

/// Random system of order 1 to 4 with mixed stability.
pub fn random_mixed(rng: &mut impl Rng) -> RationalTF {
    let order = rng.random_range(1..=4);
    let unstable = if rng.random_bool(0.35) { rng.random_range(1..=order) } else { 0 };
    random_system(rng, order, unstable)
}

/// Chordal distance of two finite complex values.
pub fn chordal(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
}

pub fn eval_tf(g: &RationalTF, s: Complex64) -> Complex64 {
    peval(g.num().coeffs(), s) / peval(g.den().coeffs(), s)
}

/// Largest chordal distance on a dense log grid plus the two limits.
pub fn dense_kappa_sup(g1: &RationalTF, g2: &RationalTF, points: usize) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let j = Complex64::new(0.0, 1.0);
    for k in 0..points {
        let w = 10f64.powf(-5.0 + 10.0 * k as f64 / (points - 1) as f64);
        let v = chordal(eval_tf(g1, j * w), eval_tf(g2, j * w));
        if v > best.0 {
            best = (v, w);
        }
    }
    best
}

/// Oracle verdict of the winding side condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleWinding {
    Boundary,
    Winding(i64),
}

/// Phase accumulation of `conj(m₂)m₁ + conj(n₂)n₁` along `s = jω`, normalized
/// by `|J₁||J₂|`, with the Hurwitz and anti-Hurwitz spectral factors
/// accounted for by their degrees. Works on the raw numerators and
/// denominators only.
pub fn winding_oracle(g1: &RationalTF, g2: &RationalTF) -> OracleWinding {
    let (n1, m1) = (g1.num().coeffs(), g1.den().coeffs());
    let (n2, m2) = (g2.num().coeffs(), g2.den().coeffs());
    let k1 = g1.order() as f64;
    let k2 = g2.order() as f64;
    let psi = |w: f64| {
        let s = Complex64::new(0.0, w);
        let (a1, b1) = (peval(m1, s), peval(n1, s));
        let (a2, b2) = (peval(m2, s), peval(n2, s));
        let v = a2.conj() * a1 + b2.conj() * b1;
        let scale = (a1.norm_sqr() + b1.norm_sqr()).sqrt() * (a2.norm_sqr() + b2.norm_sqr()).sqrt();
        (v, v.norm() / scale)
    };
    // ω = tan θ covers the whole axis; refine where the phase moves quickly
    let n = 40_000;
    let theta = |k: f64| -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k / n as f64;
    let lim = std::f64::consts::FRAC_PI_2 - 1e-9;
    let mut total = 0.0;
    let mut min_mag = f64::INFINITY;
    let mut prev_t = -lim;
    let mut prev = psi(prev_t.tan());
    min_mag = min_mag.min(prev.1);
    for k in 1..=n {
        let t = theta(k as f64).clamp(-lim, lim);
        let mut stack = vec![(prev_t, t, prev.0, 0)];
        while let Some((ta, tb, va, depth)) = stack.pop() {
            let vb = psi(tb.tan());
            min_mag = min_mag.min(vb.1);
            let d = (vb.0 / va).arg();
            if d.abs() > 0.3 && depth < 40 {
                let mid = 0.5 * (ta + tb);
                // second half first so the first half pops first
                stack.push((mid, tb, psi(mid.tan()).0, depth + 1));
                stack.push((ta, mid, va, depth + 1));
                continue;
            }
            if d.abs() > 0.3 {
                return OracleWinding::Boundary;
            }
            total += d;
        }
        prev_t = t;
        prev = psi(t.tan());
    }
    if min_mag < 1e-6 {
        return OracleWinding::Boundary;
    }
    // counterclockwise around the left half-plane: Δarg φ / 2π = k₂ − Z_rhp
    let wno = -(total + (k2 - k1) * std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
    if (wno - wno.round()).abs() > 0.05 {
        return OracleWinding::Boundary;
    }
    OracleWinding::Winding(wno.round() as i64)
}

/// Naive agglomerative complete linkage: merge heights in order and the
/// member sets of each merge.
pub fn brute_linkage(d: &[Vec<f64>]) -> Vec<(f64, Vec<usize>)> {
    let n = d.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut h = 0.0f64;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        h = h.max(d[i][j]);
                    }
                }
                if h < best.0 {
                    best = (h, a, b);
                }
            }
        }
        let (h, a, b) = best;
        let mut merged = clusters[a].clone();
        merged.extend(clusters[b].iter().copied());
        merged.sort();
        clusters.remove(b);
        clusters[a] = merged.clone();
        merges.push((h, merged));
    }
    merges
}

/// Partition produced by applying every brute-force merge up to `height`.
pub fn brute_cut(n: usize, merges: &[(f64, Vec<usize>)], height: f64) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..n).collect();
    for (h, members) in merges {
        if *h > height {
            break;
        }
        let l = label[members[0]];
        for &m in members {
            label[m] = l;
        }
    }
    canonical_partition(&label)
}

pub fn canonical_partition(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

#[allow(clippy::needless_range_loop)]
pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.0..1.0);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}
