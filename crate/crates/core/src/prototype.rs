//! Construction of a system with a prescribed frequency-response value at
//! one frequency, and the iterative prototype search built on it.
//!
//! For `G1 = n/m` with spectral factor `d` and a stable `Δ`, the system
//! `G2 = (n + m(−s)Δ) / (m − n(−s)Δ)` has image symbol
//! `J2 = J1 + K1^⊥ΩΔ` with `Ω = d(−s)/d(s)`. Its pointwise chordal distance
//! to `G1` is `|Δ|/√(1+|Δ|²)`, so a `Δ` peaking at `ω_c` with value `T`
//! moves `G1(jω_c)` to the requested point while keeping the ν-gap at `β`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cluster::medoid;
use crate::coprime::GraphSymbols;
use crate::error::{Error, Result};
use crate::freq::{sup_search, FrequencyGrid, SupResult};
use crate::metric::{kappa, kappa_jw, nu_gap_with, winding_condition_symbols, DistanceMatrix};
use crate::poly::Polynomial;
use crate::sphere::{chebyshev_point, ChebyshevPoint};
use crate::tf::{RationalTF, Response};

/// Interpolation residual accepted for `Δ(jω_c)`, relative to `1 + |T|`.
const DELTA_TOL: f64 = 1e-8;
/// Interpolation residual accepted for `G2(jω_c)`, relative to `1 + |h|`.
const VALUE_TOL: f64 = 1e-6;

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Requested change of the prototype response at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationTarget {
    /// `0.0` and `f64::INFINITY` denote the limit frequencies.
    pub omega_c: f64,
    pub h: Response,
    /// `κ(G(jω_c), h)`.
    pub beta: f64,
}

impl InterpolationTarget {
    pub fn new(g: &RationalTF, omega_c: f64, h: Response) -> Self {
        InterpolationTarget {
            omega_c,
            h,
            beta: kappa(g.eval_jw(omega_c), h),
        }
    }
}

/// Intermediate quantities of the `Δ` construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaParts {
    pub t: Complex64,
    /// `conj(Ω(jω_c))·T`, the value `Δ` has to take at `ω_c`.
    pub t_rot: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
    pub sigma: f64,
    pub d1: f64,
    pub d2: f64,
    pub omega: RationalTF,
    pub rho: f64,
    pub delta1: RationalTF,
    pub rolloff: RationalTF,
    pub delta: RationalTF,
    /// Unstable-pole corrections; the sign rule for `d1` keeps this empty.
    pub blaschke_factors: Vec<RationalTF>,
    /// Numerator and denominator of `Δ` before normalization.
    delta_num: Polynomial,
    delta_den: Polynomial,
}

/// `Ω = d(−s)/d(s)`.
pub fn allpass_omega(symbols: &GraphSymbols) -> Result<RationalTF> {
    RationalTF::from_polys(symbols.d.reflect(), symbols.d.clone(), 0.0)
}

/// `T = [K1(jω_c)·v] / [J1^⊥(jω_c)·v]` with `v` the graph direction of `h`
/// (input component 1, output component `h`).
pub fn build_t(symbols: &GraphSymbols, h: Response, omega_c: f64) -> Result<Complex64> {
    let (m, n) = symbols.image_jw(omega_c);
    let (a, b) = h.homogeneous();
    let scale = a.norm().hypot(b.norm());
    let (a, b) = (a / scale, b / scale);
    let num = b * m - a * n;
    let den = a * m.conj() + b * n.conj();
    if den.norm() <= 1e-12 {
        return Err(Error::GraphDirectionSingular);
    }
    Ok(num / den)
}

/// Sign of the first-order all-pass that keeps its pole in the left half-plane.
pub fn d_sign(t1: Complex64) -> f64 {
    if t1.im > 0.0 || (t1.im == 0.0 && t1.re <= 0.0) {
        1.0
    } else {
        -1.0
    }
}

/// Builds `Δ = Δ1·Σ·R` with `Δ(jω_c) = conj(Ω(jω_c))·T`, `|Δ1| ≡ 1` and the
/// roll-off `R` equal to one at `ω_c`.
pub fn build_delta(t: Complex64, omega_c: f64, omega: &RationalTF, rho: f64) -> Result<DeltaParts> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("roll-off parameter must be positive, got {rho}")));
    }
    let om = omega
        .eval_jw(omega_c)
        .finite()
        .ok_or_else(|| Error::InvalidArgument("all-pass factor unbounded".into()))?;
    let t_rot = om.conj() * t;
    let sigma = t_rot.norm();
    let zero = RationalTF::gain(0.0);
    if sigma == 0.0 {
        return Ok(DeltaParts {
            t,
            t_rot,
            t1: c64(1.0),
            t2: c64(1.0),
            sigma: 0.0,
            d1: 1.0,
            d2: 1.0,
            omega: omega.clone(),
            rho,
            delta1: RationalTF::gain(1.0),
            rolloff: RationalTF::gain(1.0),
            delta: zero,
            blaschke_factors: Vec::new(),
            delta_num: Polynomial::zero(),
            delta_den: Polynomial::constant(1.0),
        });
    }
    let t1 = t_rot / sigma;
    let limit = omega_c == 0.0 || omega_c.is_infinite();
    let (d1, n1, q1) = if limit {
        // real-coefficient systems take real values at the limit frequencies
        if t1.im.abs() > 1e-9 {
            return Err(Error::InterpolationFailed(t1.im.abs()));
        }
        let d = -t1.re.signum();
        (d, Polynomial::constant(-d), Polynomial::constant(1.0))
    } else {
        let d = d_sign(t1);
        let w = (t1 - d).inv();
        let a = w.im / omega_c;
        (d, Polynomial::new(vec![d * a, 0.5]), Polynomial::new(vec![a, -d / 2.0]))
    };
    let (rn, rd) = if omega_c == 0.0 {
        (Polynomial::constant(rho), Polynomial::new(vec![1.0, rho]))
    } else if omega_c.is_infinite() {
        (Polynomial::new(vec![1.0, 0.0]), Polynomial::new(vec![1.0, rho]))
    } else {
        (
            Polynomial::new(vec![rho, 0.0]),
            Polynomial::new(vec![1.0, rho, omega_c * omega_c]),
        )
    };
    let delta_num = n1.mul(&rn).scale(sigma);
    let delta_den = q1.mul(&rd);
    let delta1 = RationalTF::from_polys(n1, q1, 0.0)?;
    let rolloff = RationalTF::from_polys(rn, rd, 0.0)?;
    let delta = RationalTF::from_polys(delta_num.clone(), delta_den.clone(), 0.0)?;
    let parts = DeltaParts {
        t,
        t_rot,
        t1,
        t2: c64(1.0),
        sigma,
        d1,
        d2: 1.0,
        omega: omega.clone(),
        rho,
        delta1,
        rolloff,
        delta,
        blaschke_factors: Vec::new(),
        delta_num,
        delta_den,
    };
    let residual = match parts.delta.eval_jw(omega_c) {
        Response::Finite(v) => (v - t_rot).norm(),
        Response::Infinite => f64::INFINITY,
    };
    if !(residual <= DELTA_TOL * (1.0 + t.norm())) {
        return Err(Error::InterpolationFailed(residual));
    }
    if !parts.delta.is_stable() {
        return Err(Error::InterpolationFailed(f64::INFINITY));
    }
    Ok(parts)
}

/// Result of one construction step.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub system: RationalTF,
    pub parts: DeltaParts,
}

/// Builds `G2` with `G2(jω_c) = h` and `ν-gap(G1, G2) = β` (up to the
/// roll-off and grid effects).
pub fn construct_system(
    g1: &RationalTF,
    target: &InterpolationTarget,
    rho: f64,
    cancel_tol: f64,
) -> Result<Construction> {
    let symbols = GraphSymbols::new(g1)?;
    let b_max = symbols.b_max()?;
    if !(target.beta < b_max) {
        return Err(Error::TargetOutOfRange {
            beta: target.beta,
            b_max,
        });
    }
    construct_with(g1, &symbols, target, rho, cancel_tol)
}

fn construct_with(
    g1: &RationalTF,
    symbols: &GraphSymbols,
    target: &InterpolationTarget,
    rho: f64,
    cancel_tol: f64,
) -> Result<Construction> {
    let mut t = build_t(symbols, target.h, target.omega_c)?;
    if t.norm() <= 1e-12 {
        t = c64(0.0);
    }
    let omega = allpass_omega(symbols)?;
    let parts = build_delta(t, target.omega_c, &omega, rho)?;
    if parts.sigma == 0.0 {
        return Ok(Construction {
            system: g1.clone(),
            parts,
        });
    }
    let (n, m) = (&symbols.n, &symbols.m);
    let (dn, dd) = (&parts.delta_num, &parts.delta_den);
    let num = n.mul(dd).add(&m.reflect().mul(dn));
    let den = m.mul(dd).sub(&n.reflect().mul(dn));
    let den = den.trimmed(1e-13);
    if den.is_zero() || den.degree() < num.trimmed(1e-13).degree() {
        return Err(Error::DegenerateImage);
    }
    let system = RationalTF::from_polys(num, den, cancel_tol).map_err(|e| match e {
        Error::ImproperSystem | Error::ZeroDenominator => Error::DegenerateImage,
        other => other,
    })?;
    let residual = kappa(system.eval_jw(target.omega_c), target.h);
    let scale = match target.h {
        Response::Finite(z) => 1.0 + z.norm(),
        Response::Infinite => 1.0,
    };
    let abs_residual = match (system.eval_jw(target.omega_c), target.h) {
        (Response::Finite(a), Response::Finite(b)) => (a - b).norm(),
        _ => residual,
    };
    if abs_residual > VALUE_TOL * scale {
        return Err(Error::InterpolationFailed(abs_residual));
    }
    Ok(Construction { system, parts })
}

/// Member with the largest ν-gap to `gp`; ties go to the smallest index.
pub fn worst_member(gp: &RationalTF, members: &[RationalTF], grid: &FrequencyGrid) -> Result<(usize, f64)> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("empty cluster".into()));
    }
    let dists = distances_to(gp, members, grid)?;
    Ok(argmax(&dists))
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn distances_to(gp: &RationalTF, members: &[RationalTF], grid: &FrequencyGrid) -> Result<Vec<f64>> {
    let sp = GraphSymbols::new(gp)?;
    let symbols: Vec<Result<GraphSymbols>> = members.par_iter().map(GraphSymbols::new).collect();
    Ok(distances_with(gp, &sp, members, &symbols, grid))
}

fn distances_with(
    gp: &RationalTF,
    sp: &GraphSymbols,
    members: &[RationalTF],
    symbols: &[Result<GraphSymbols>],
    grid: &FrequencyGrid,
) -> Vec<f64> {
    members
        .par_iter()
        .zip(symbols.par_iter())
        .map(|(g, s)| match s {
            Ok(s) => nu_gap_with(gp, sp, g, s, grid).value,
            Err(_) => 1.0,
        })
        .collect()
}

/// Frequency of the largest pointwise chordal distance between two systems.
pub fn worst_frequency(gp: &RationalTF, g: &RationalTF, grid: &FrequencyGrid) -> Result<SupResult> {
    let sp = GraphSymbols::new(gp)?;
    let sg = GraphSymbols::new(g)?;
    if !winding_condition_symbols(&sp, &sg).feasible() {
        return Err(Error::NoPointwiseMaximizer);
    }
    sup_search(|w| kappa_jw(gp, g, w), grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrototypeConfig {
    pub k_max: usize,
    pub rho0_factor: f64,
    pub improvement_tol: f64,
    pub max_outer: usize,
    /// Candidates above this order are rejected and the search stops.
    pub order_cap: usize,
    /// Relative pole/zero cancellation tolerance applied to candidates.
    pub cancel_tol: f64,
}

impl Default for PrototypeConfig {
    fn default() -> Self {
        PrototypeConfig {
            k_max: 20,
            rho0_factor: 10.0,
            improvement_tol: 1e-4,
            max_outer: 50,
            order_cap: 30,
            cancel_tol: 1e-7,
        }
    }
}

/// Roll-off parameter for inner step `k`: narrowing around `ω_c`.
pub fn rho_schedule(omega_c: f64, rho0_factor: f64, k: usize) -> f64 {
    let halvings = 0.5f64.powi(k as i32);
    if omega_c == 0.0 {
        rho0_factor * halvings
    } else if omega_c.is_infinite() {
        (1.0 / rho0_factor) / halvings
    } else {
        rho0_factor * omega_c * halvings
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every member coincides with the prototype.
    ZeroDistance,
    Converged,
    NoImprovingStep,
    TargetOutOfRange,
    Infeasible,
    OrderCap,
    MaxOuter,
}

fn ser_omega<S: Serializer>(w: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match w {
        Some(x) if x.is_infinite() => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    #[serde(serialize_with = "ser_omega")]
    pub omega_c: Option<f64>,
    pub max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrototypeResult {
    pub prototype: RationalTF,
    pub initial: RationalTF,
    /// Cluster-local index of the medoid used as the starting point.
    pub initial_index: usize,
    pub trace: Vec<TraceEntry>,
    pub max_distance: f64,
    pub initial_max_distance: f64,
    /// ν-gap from the prototype to each member, in member order.
    pub distances: Vec<f64>,
    pub b_max: f64,
    pub certified: bool,
    pub stop_reason: StopReason,
    pub last_chebyshev: Option<ChebyshevPoint>,
}

/// Iterative prototype search over a cluster. `d` holds the pairwise
/// distances of the members in the same order.
pub fn prototype(
    members: &[RationalTF],
    d: &DistanceMatrix,
    cfg: &PrototypeConfig,
    grid: &FrequencyGrid,
) -> Result<PrototypeResult> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("empty cluster".into()));
    }
    if d.len() != members.len() {
        return Err(Error::InvalidArgument("distance matrix does not match cluster".into()));
    }
    let all: Vec<usize> = (0..members.len()).collect();
    let init = medoid(&all, d)?;
    let symbols: Vec<Result<GraphSymbols>> = members.par_iter().map(GraphSymbols::new).collect();

    let mut gp = members[init].clone();
    let mut sp = GraphSymbols::new(&gp)?;
    let mut dists = distances_with(&gp, &sp, members, &symbols, grid);
    let (_, d0) = argmax(&dists);
    let mut trace = vec![TraceEntry {
        iteration: 0,
        omega_c: None,
        max_distance: d0,
    }];
    let mut stop = StopReason::MaxOuter;
    let mut last_cheb = None;

    for iteration in 1..=cfg.max_outer {
        let (worst, dmax) = argmax(&dists);
        if dmax == 0.0 {
            stop = StopReason::ZeroDistance;
            break;
        }
        let sup = match &symbols[worst] {
            Ok(sw) if winding_condition_symbols(&sp, sw).feasible() => {
                match sup_search(|w| kappa_jw(&gp, &members[worst], w), grid) {
                    Ok(s) => s,
                    Err(_) => {
                        stop = StopReason::Infeasible;
                        break;
                    }
                }
            }
            _ => {
                stop = StopReason::Infeasible;
                break;
            }
        };
        let omega_c = sup.omega;
        let values: Vec<Response> = members.iter().map(|g| g.eval_jw(omega_c)).collect();
        let mut cheb = chebyshev_point(&values)?;
        if omega_c == 0.0 || omega_c.is_infinite() {
            if let Response::Finite(z) = cheb.h {
                cheb.h = Response::Finite(c64(z.re));
            }
        }
        last_cheb = Some(cheb);
        let target = InterpolationTarget::new(&gp, omega_c, cheb.h);
        let b_max = sp.b_max()?;
        if !(target.beta < b_max) {
            stop = StopReason::TargetOutOfRange;
            break;
        }
        let mut accepted = None;
        let mut over_cap = false;
        for k in 0..cfg.k_max {
            let rho = rho_schedule(omega_c, cfg.rho0_factor, k);
            let cand = match construct_with(&gp, &sp, &target, rho, cfg.cancel_tol) {
                Ok(c) => c.system,
                Err(_) => continue,
            };
            if cand.order() > cfg.order_cap {
                over_cap = true;
                break;
            }
            let sc = match GraphSymbols::new(&cand) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let cd = distances_with(&cand, &sc, members, &symbols, grid);
            let (_, cmax) = argmax(&cd);
            if cmax < dmax {
                accepted = Some((cand, sc, cd, cmax));
                break;
            }
        }
        match accepted {
            Some((cand, sc, cd, cmax)) => {
                gp = cand;
                sp = sc;
                dists = cd;
                trace.push(TraceEntry {
                    iteration,
                    omega_c: Some(omega_c),
                    max_distance: cmax,
                });
                if dmax - cmax < cfg.improvement_tol {
                    stop = StopReason::Converged;
                    break;
                }
            }
            None => {
                stop = if over_cap {
                    StopReason::OrderCap
                } else {
                    StopReason::NoImprovingStep
                };
                break;
            }
        }
    }

    let (_, max_distance) = argmax(&dists);
    let b_max = sp.b_max()?;
    Ok(PrototypeResult {
        prototype: gp,
        initial: members[init].clone(),
        initial_index: init,
        trace,
        max_distance,
        initial_max_distance: d0,
        distances: dists,
        b_max,
        certified: b_max > max_distance,
        stop_reason: stop,
        last_chebyshev: last_cheb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(num: &[f64], den: &[f64]) -> RationalTF {
        RationalTF::new(num, den).unwrap()
    }

    #[test]
    fn t_vanishes_without_change() {
        let g = tf(&[1.0], &[1.0, 1.0]);
        let s = GraphSymbols::new(&g).unwrap();
        for w in [0.0, 0.5, 1.0, 10.0] {
            let t = build_t(&s, g.eval_jw(w), w).unwrap();
            assert!(t.norm() < 1e-14);
        }
    }

    #[test]
    fn t_magnitude_matches_beta() {
        let g = tf(&[1.0, 2.0], &[1.0, -0.5, 3.0]);
        let s = GraphSymbols::new(&g).unwrap();
        let h = Response::Finite(Complex64::new(0.7, -1.2));
        for w in [0.3, 2.0] {
            let t = build_t(&s, h, w).unwrap();
            let beta = kappa(g.eval_jw(w), h);
            assert!((t.norm() - beta / (1.0 - beta * beta).sqrt()).abs() < 1e-12);
            let tc = build_t(&s, h.finite().map(|z| z.conj()).unwrap().into(), -w).unwrap();
            assert!((tc - t.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn rolloff_is_one_at_center() {
        let r = tf(&[3.0, 0.0], &[1.0, 3.0, 4.0]);
        let v = r.eval_jw(2.0).finite().unwrap();
        assert!((v - 1.0).norm() < 1e-15);
    }

    #[test]
    fn delta_invariants() {
        let g = tf(&[1.0], &[1.0, 1.0]);
        let s = GraphSymbols::new(&g).unwrap();
        let omega = allpass_omega(&s).unwrap();
        for (t, w) in [(Complex64::new(0.2, 0.1), 1.0), (Complex64::new(-0.3, -0.4), 2.5), (c64(0.25), 0.7)] {
            let p = build_delta(t, w, &omega, 10.0 * w).unwrap();
            assert!(p.delta.is_stable());
            assert_eq!(p.delta.eval_jw(f64::INFINITY), Response::Finite(c64(0.0)));
            let grid = FrequencyGrid::default();
            for &x in grid.omegas() {
                let m = p.delta1.eval_jw(x).finite().unwrap().norm();
                assert!((m - 1.0).abs() < 1e-9);
            }
            let sup = sup_search(|x| p.delta.eval_jw(x).finite().unwrap().norm(), &grid).unwrap();
            assert!((sup.value - t.norm()).abs() < 1e-6);
            assert!((sup.omega - w).abs() < 1e-3 * w);
        }
    }

    #[test]
    fn zero_t_gives_zero_delta() {
        let s = GraphSymbols::new(&tf(&[1.0], &[1.0, 1.0])).unwrap();
        let p = build_delta(c64(0.0), 1.0, &allpass_omega(&s).unwrap(), 1.0).unwrap();
        assert_eq!(p.delta, RationalTF::gain(0.0));
    }

    #[test]
    fn construction_interpolates() {
        let g1 = tf(&[1.0], &[1.0, 1.0]);
        let h = Response::Finite(g1.eval_jw(1.0).finite().unwrap() * Complex64::new(1.0, 0.1));
        let target = InterpolationTarget::new(&g1, 1.0, h);
        let c = construct_system(&g1, &target, 10.0, 1e-7).unwrap();
        let v = c.system.eval_jw(1.0).finite().unwrap();
        assert!((v - h.finite().unwrap()).norm() < 1e-6);
        let d = crate::metric::nu_gap(&g1, &c.system, &FrequencyGrid::default());
        assert!((d - target.beta).abs() < 2e-2, "{d} vs {}", target.beta);
    }

    #[test]
    fn construction_without_change_is_identity() {
        let g1 = tf(&[2.0, 1.0], &[1.0, 3.0, 1.0]);
        let target = InterpolationTarget::new(&g1, 0.8, g1.eval_jw(0.8));
        assert_eq!(construct_system(&g1, &target, 8.0, 1e-7).unwrap().system, g1);
    }

    #[test]
    fn out_of_range_target_is_rejected() {
        let g1 = tf(&[1.0], &[1.0, 0.0]);
        let target = InterpolationTarget::new(&g1, 1.0, Response::Finite(Complex64::new(50.0, 50.0)));
        assert!(matches!(
            construct_system(&g1, &target, 10.0, 1e-7),
            Err(Error::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn worst_member_and_frequency() {
        let grid = FrequencyGrid::default();
        let g1 = tf(&[1.0], &[1.0, 1.0]);
        let g2 = tf(&[2.0], &[1.0, 1.0]);
        assert_eq!(worst_member(&g1, std::slice::from_ref(&g1), &grid).unwrap(), (0, 0.0));
        let (i, d) = worst_member(&g1, &[g1.clone(), g2.clone()], &grid).unwrap();
        assert_eq!(i, 1);
        assert!((d - 1.0 / 3.0).abs() < 1e-9);
        let sup = worst_frequency(&g1, &g2, &grid).unwrap();
        assert!((sup.omega - 1.0).abs() < 1e-3);
        assert!(sup.value >= sup.grid_max);
        let same = worst_frequency(&g1, &g1, &grid).unwrap();
        assert_eq!(same.value, 0.0);
        assert_eq!(same.omega, grid.min());
        let unstable = tf(&[1.0], &[1.0, -2.0]);
        assert_eq!(worst_frequency(&g1, &unstable, &grid), Err(Error::NoPointwiseMaximizer));
    }

    #[test]
    fn singleton_prototype() {
        let g = tf(&[1.0], &[1.0, 1.0]);
        let d = DistanceMatrix::from_fn(vec!["a".into()], |_, _| 0.0);
        let r = prototype(std::slice::from_ref(&g), &d, &PrototypeConfig::default(), &FrequencyGrid::default()).unwrap();
        assert_eq!(r.prototype, g);
        assert_eq!(r.max_distance, 0.0);
        assert!(r.certified);
    }

    #[test]
    fn two_member_prototype_improves() {
        let grid = FrequencyGrid::default();
        let members = vec![tf(&[1.0], &[1.0, 1.0]), tf(&[2.0], &[1.0, 1.0])];
        let labels = vec!["a".to_string(), "b".to_string()];
        let d = crate::metric::distance_matrix(&labels, &members, &grid);
        let r = prototype(&members, &d, &PrototypeConfig::default(), &grid).unwrap();
        assert!((r.initial_max_distance - 1.0 / 3.0).abs() < 1e-9);
        // the κ maximum is flat around ω = 1, so no single-frequency step helps
        assert!(r.max_distance <= r.initial_max_distance);
        assert!(r.trace.windows(2).all(|w| w[1].max_distance <= w[0].max_distance));
        assert!(r.certified);
    }
}
