//! Normalized coprime factor robust controller synthesis, stability margins
//! and closed-loop verification.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coprime::GraphSymbols;
use crate::error::{Error, Result};
use crate::freq::{sup_search, FrequencyGrid};
use crate::linalg;
use crate::metric::nu_gap_with;
use crate::poly::Polynomial;
use crate::ss::{self, StateSpace};
use crate::tf::{RationalTF, CANCEL_TOL, EPS_STAB};

/// Sign of the feedback interconnection `u = ±Gc·y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackConvention {
    /// `u = Gc·y`, closed loop through `(1 − Gc·G)⁻¹`.
    #[default]
    Positive,
    /// `u = −Gc·y`, closed loop through `(1 + Gc·G)⁻¹`.
    Negative,
}

impl FeedbackConvention {
    /// `+1` for positive feedback, `−1` for negative.
    pub fn sign(self) -> f64 {
        match self {
            FeedbackConvention::Positive => 1.0,
            FeedbackConvention::Negative => -1.0,
        }
    }
}

impl fmt::Display for FeedbackConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackConvention::Positive => "positive",
            FeedbackConvention::Negative => "negative",
        })
    }
}

impl FromStr for FeedbackConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(FeedbackConvention::Positive),
            "negative" => Ok(FeedbackConvention::Negative),
            other => Err(Error::InvalidArgument(format!("unknown feedback convention {other}"))),
        }
    }
}

/// Closed-loop characteristic polynomial `den_G·den_Gc ∓ num_G·num_Gc`.
pub fn characteristic_polynomial(g: &RationalTF, gc: &RationalTF, conv: FeedbackConvention) -> Result<Polynomial> {
    let open = g.den().mul(gc.den());
    let loop_term = g.num().mul(gc.num()).scale(conv.sign());
    let chi = open.sub(&loop_term);
    // well-posed iff 1 ∓ Gc(∞)G(∞) ≠ 0, i.e. no degree drop
    let lead = chi.coeff(open.degree());
    if chi.is_zero() || lead.abs() <= 1e-12 * open.leading().abs().max(loop_term.norm_inf()) {
        return Err(Error::IllPosedLoop);
    }
    Ok(chi)
}

/// All closed-loop poles strictly left of `−EPS_STAB`. Both factors are
/// coprime, so the characteristic polynomial carries every closed-loop map.
pub fn internal_stability(g: &RationalTF, gc: &RationalTF, conv: FeedbackConvention) -> Result<bool> {
    let chi = characteristic_polynomial(g, gc, conv)?;
    if chi.degree() == 0 {
        return Ok(true);
    }
    Ok(chi.roots()?.iter().all(|r| r.re < -EPS_STAB))
}

/// Pointwise reciprocal gain `|1 ∓ Gc·G| / (√(1+|G|²)·√(1+|Gc|²))` of the
/// closed-loop matrix `[1; Gc](1 ∓ Gc·G)⁻¹[1, G]`, in homogeneous form.
pub fn margin_at(g: &RationalTF, gc: &RationalTF, conv: FeedbackConvention, omega: f64) -> f64 {
    let (ga, gb) = g.homogeneous_jw(omega);
    let (ca, cb) = gc.homogeneous_jw(omega);
    let num = (ca * ga - cb * gb * conv.sign()).norm();
    let den = ga.norm().hypot(gb.norm()) * ca.norm().hypot(cb.norm());
    if den == 0.0 {
        return 0.0;
    }
    (num / den).min(1.0)
}

/// Stability margin of the loop; `0` when the loop is internally unstable.
pub fn stability_margin(
    g: &RationalTF,
    gc: &RationalTF,
    conv: FeedbackConvention,
    grid: &FrequencyGrid,
) -> Result<f64> {
    if !internal_stability(g, gc, conv)? {
        return Ok(0.0);
    }
    let sup = sup_search(|w| 1.0 - margin_at(g, gc, conv, w), grid)?;
    Ok((1.0 - sup.value).max(0.0))
}

/// The two normalized coprime Riccati solutions of a realization.
#[derive(Debug, Clone)]
pub struct RiccatiPair {
    pub x: DMatrix<f64>,
    pub z: DMatrix<f64>,
    /// `1 + λmax(XZ)`, the square of the optimal γ.
    pub gamma_min_sq: f64,
}

/// Solves the control and filter equations of the normalized coprime factor
/// problem for a realization with feedthrough `D`.
pub fn ncf_riccati(sys: &StateSpace) -> Result<RiccatiPair> {
    let d = sys.d[(0, 0)];
    let r = 1.0 + d * d;
    let (a, b, c) = (&sys.a, &sys.b, &sys.c);
    let ax = a - b * c * (d / r);
    let x = linalg::care(&ax, &(b * b.transpose() / r), &(c.transpose() * c / r))?;
    let z = linalg::care(&ax.transpose(), &(c.transpose() * c / r), &(b * b.transpose() / r))?;
    let lam = linalg::max_eig_psd_product(&x, &z);
    Ok(RiccatiPair {
        x,
        z,
        gamma_min_sq: 1.0 + lam.max(0.0),
    })
}

/// `(1 + λmax(XZ))^(−1/2)`, computed independently of the Hankel route.
pub fn b_max_riccati(g: &RationalTF) -> Result<f64> {
    if g.order() == 0 {
        return Ok(1.0);
    }
    let sys = ss::realize(g)?.balanced();
    Ok(ncf_riccati(&sys)?.gamma_min_sq.sqrt().recip())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Synthesis {
    pub controller: RationalTF,
    pub b_achieved: f64,
    pub b_max: f64,
    pub gamma: f64,
    pub gamma_rel: f64,
    pub convention: FeedbackConvention,
}

/// Central suboptimal controller at `γ = γ_rel·γ_min`, checked against the
/// margin it has to deliver before it is returned.
pub fn ncf_controller(
    g: &RationalTF,
    gamma_rel: f64,
    conv: FeedbackConvention,
    grid: &FrequencyGrid,
) -> Result<Synthesis> {
    if !(gamma_rel > 1.0) || !gamma_rel.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma_rel must exceed 1, got {gamma_rel}")));
    }
    let b_max = GraphSymbols::new(g)?.b_max()?;
    let (positive, gamma) = if g.order() == 0 {
        (RationalTF::gain(-g.feedthrough()), 1.0)
    } else {
        let sys = ss::realize(g)?.balanced();
        let pair = ncf_riccati(&sys)?;
        let gamma = gamma_rel * pair.gamma_min_sq.sqrt();
        (central_controller(&sys, &pair, gamma)?, gamma)
    };
    let controller = match conv {
        FeedbackConvention::Positive => positive,
        FeedbackConvention::Negative => positive.neg(),
    };
    let b_achieved = stability_margin(g, &controller, conv, grid)?;
    let required = b_max / gamma_rel - 1e-3;
    if b_achieved < required {
        return Err(Error::SynthesisDefect {
            achieved: b_achieved,
            required,
        });
    }
    Ok(Synthesis {
        controller,
        b_achieved,
        b_max,
        gamma,
        gamma_rel,
        convention: conv,
    })
}

/// Positive-feedback central controller for a plant with feedthrough `D`.
fn central_controller(sys: &StateSpace, pair: &RiccatiPair, gamma: f64) -> Result<RationalTF> {
    let n = sys.order();
    let d = sys.d[(0, 0)];
    let s = 1.0 + d * d;
    let (a, b, c) = (&sys.a, &sys.b, &sys.c);
    let (x, z) = (&pair.x, &pair.z);
    let g2 = gamma * gamma;
    let f = -(c * d + b.transpose() * x) / s;
    let l = DMatrix::<f64>::identity(n, n) * (1.0 - g2) + x * z;
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Riccati("controller gain matrix is singular".into()))?;
    let bk = &lt_inv * z * c.transpose() * g2;
    let ak = a + b * &f + &bk * (c + &f * d);
    let ck = b.transpose() * x;
    let dk = DMatrix::from_element(1, 1, -d);
    StateSpace {
        a: ak,
        b: bk,
        c: ck,
        d: dk,
    }
    .to_tf()
}

/// `G / (1 ∓ G·Gc)`: plant output response to a disturbance at the plant
/// input.
pub fn closed_loop(g: &RationalTF, gc: &RationalTF, conv: FeedbackConvention) -> Result<RationalTF> {
    let chi = characteristic_polynomial(g, gc, conv)?;
    RationalTF::from_polys(g.num().mul(gc.den()), chi, CANCEL_TOL)
}

/// Verification of one cluster member against the prototype controller.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberReport {
    pub id: String,
    pub nu_gap: f64,
    /// `ν-gap < b_achieved`: stability guaranteed by the margin.
    pub margin_ok: bool,
    pub internally_stable: bool,
    /// Closed-loop margin of the member with the prototype controller.
    pub member_margin: f64,
    /// `margin_ok` without internal stability; must never happen.
    pub defect: bool,
}

/// Distance, margin guarantee and an independent root-based stability check
/// for each member.
pub fn verify_cluster(
    controller: &RationalTF,
    b_achieved: f64,
    prototype: &RationalTF,
    members: &[(String, RationalTF)],
    conv: FeedbackConvention,
    grid: &FrequencyGrid,
) -> Result<Vec<MemberReport>> {
    let sp = GraphSymbols::new(prototype)?;
    Ok(members
        .par_iter()
        .map(|(id, g)| {
            let dist = match GraphSymbols::new(g) {
                Ok(sg) => nu_gap_with(prototype, &sp, g, &sg, grid).value,
                Err(_) => 1.0,
            };
            let stable = internal_stability(g, controller, conv).unwrap_or(false);
            let member_margin = if stable {
                stability_margin(g, controller, conv, grid).unwrap_or(0.0)
            } else {
                0.0
            };
            let margin_ok = dist < b_achieved;
            MemberReport {
                id: id.clone(),
                nu_gap: dist,
                margin_ok,
                internally_stable: stable,
                member_margin,
                defect: margin_ok && !stable,
            }
        })
        .collect())
}

/// Everything produced for one cluster controller.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControllerResult {
    pub controller: RationalTF,
    pub b_achieved: f64,
    pub b_max_plant: f64,
    pub gamma_rel: f64,
    pub convention: FeedbackConvention,
    pub member_reports: Vec<MemberReport>,
}

impl ControllerResult {
    pub fn all_margin_ok(&self) -> bool {
        self.member_reports.iter().all(|m| m.margin_ok)
    }

    pub fn defects(&self) -> usize {
        self.member_reports.iter().filter(|m| m.defect).count()
    }
}

/// Frequency response helper for tests and plots.
pub fn loop_gain_jw(g: &RationalTF, gc: &RationalTF, omega: f64) -> Option<Complex64> {
    Some(g.eval_jw(omega).finite()? * gc.eval_jw(omega).finite()?)
}
