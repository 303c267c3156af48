//! Pointwise chordal distance, the winding condition and the ν-gap metric.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coprime::GraphSymbols;
use crate::error::{Error, Result};
use crate::freq::{sup_search, FrequencyGrid, SupResult};
use crate::io::fmt_sig;
use crate::tf::{RationalTF, Response};

/// Relative distance from the imaginary axis under which a root of the
/// winding function counts as a boundary zero.
pub const AXIS_ROOT_TOL: f64 = 1e-7;

/// Chordal distance between two points of the extended complex plane on the
/// Riemann sphere of diameter one.
pub fn kappa(g1: Response, g2: Response) -> f64 {
    kappa_h(g1.homogeneous(), g2.homogeneous())
}

/// [`kappa`] on homogeneous coordinates `(a, b)` representing `b / a`.
pub fn kappa_h(v1: (Complex64, Complex64), v2: (Complex64, Complex64)) -> f64 {
    let n1 = v1.0.norm().hypot(v1.1.norm());
    let n2 = v2.0.norm().hypot(v2.1.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return 0.0;
    }
    let (a1, b1) = (v1.0 / n1, v1.1 / n1);
    let (a2, b2) = (v2.0 / n2, v2.1 / n2);
    (a1 * b2 - a2 * b1).norm().min(1.0)
}

/// κ(G1(jω), G2(jω)) without forming the quotients.
pub fn kappa_jw(g1: &RationalTF, g2: &RationalTF, omega: f64) -> f64 {
    kappa_h(g1.homogeneous_jw(omega), g2.homogeneous_jw(omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindingStatus {
    Feasible,
    BoundaryZero,
    NonzeroWinding,
}

/// Side conditions of the ν-gap: no zero of `J₂^⊥ J₁` on the closed
/// imaginary axis and zero winding number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindingVerdict {
    pub status: WindingStatus,
    /// Winding number; `None` when a boundary zero makes it undefined.
    pub wno: Option<i64>,
}

impl WindingVerdict {
    pub fn feasible(&self) -> bool {
        self.status == WindingStatus::Feasible
    }

    fn boundary() -> Self {
        WindingVerdict {
            status: WindingStatus::BoundaryZero,
            wno: None,
        }
    }
}

/// Numerator of `φ(s) = m₂(−s)m₁(s) + n₂(−s)n₁(s)`; the denominator is
/// `d₂(−s)d₁(s)`.
pub fn winding_numerator(s1: &GraphSymbols, s2: &GraphSymbols) -> crate::poly::Polynomial {
    s2.m.reflect().mul(&s1.m).add(&s2.n.reflect().mul(&s1.n))
}

pub fn winding_condition_symbols(s1: &GraphSymbols, s2: &GraphSymbols) -> WindingVerdict {
    let num = winding_numerator(s1, s2);
    let full = s1.d.degree() + s2.d.degree();
    if num.is_zero() {
        return WindingVerdict::boundary();
    }
    // value at s = ±j∞ of J₂^⊥J₁, which lies in the closed unit disk
    let at_inf = num.coeff(full).abs() / (s1.d.leading() * s2.d.leading()).abs();
    if at_inf <= 1e-9 || num.degree() > full {
        return WindingVerdict::boundary();
    }
    let num = num.trimmed(1e-14);
    if num.degree() != full {
        return WindingVerdict::boundary();
    }
    let roots = match num.roots() {
        Ok(r) => r,
        Err(_) => return WindingVerdict::boundary(),
    };
    if roots
        .iter()
        .any(|r| r.re.abs() <= AXIS_ROOT_TOL * (1.0 + r.norm()))
    {
        return WindingVerdict::boundary();
    }
    let rhp = roots.iter().filter(|r| r.re > 0.0).count() as i64;
    let wno = rhp - s2.d.degree() as i64;
    WindingVerdict {
        status: if wno == 0 {
            WindingStatus::Feasible
        } else {
            WindingStatus::NonzeroWinding
        },
        wno: Some(wno),
    }
}

pub fn winding_condition(g1: &RationalTF, g2: &RationalTF) -> Result<WindingVerdict> {
    let s1 = GraphSymbols::new(g1)?;
    let s2 = GraphSymbols::new(g2)?;
    Ok(winding_condition_symbols(&s1, &s2))
}

/// Full ν-gap evaluation record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuGap {
    pub value: f64,
    pub verdict: Option<WindingVerdict>,
    /// Frequency of the κ supremum for feasible pairs.
    pub omega: Option<f64>,
    pub warning: Option<String>,
}

/// Supremum of the pointwise chordal distance, regardless of the winding
/// condition.
pub fn kappa_sup(g1: &RationalTF, g2: &RationalTF, grid: &FrequencyGrid) -> Result<SupResult> {
    sup_search(|w| kappa_jw(g1, g2, w), grid)
}

/// ν-gap from precomputed graph symbols.
pub fn nu_gap_with(
    g1: &RationalTF,
    s1: &GraphSymbols,
    g2: &RationalTF,
    s2: &GraphSymbols,
    grid: &FrequencyGrid,
) -> NuGap {
    let verdict = winding_condition_symbols(s1, s2);
    if !verdict.feasible() {
        return NuGap {
            value: 1.0,
            verdict: Some(verdict),
            omega: None,
            warning: None,
        };
    }
    match kappa_sup(g1, g2, grid) {
        Ok(sup) => NuGap {
            value: sup.value.clamp(0.0, 1.0),
            verdict: Some(verdict),
            omega: Some(sup.omega),
            warning: None,
        },
        Err(e) => NuGap {
            value: 1.0,
            verdict: Some(verdict),
            omega: None,
            warning: Some(e.to_string()),
        },
    }
}

/// ν-gap with factorization failures mapped to distance 1 and a warning.
pub fn nu_gap_full(g1: &RationalTF, g2: &RationalTF, grid: &FrequencyGrid) -> NuGap {
    match (GraphSymbols::new(g1), GraphSymbols::new(g2)) {
        (Ok(s1), Ok(s2)) => nu_gap_with(g1, &s1, g2, &s2, grid),
        (Err(e), _) | (_, Err(e)) => NuGap {
            value: 1.0,
            verdict: None,
            omega: None,
            warning: Some(format!("factorization failed: {e}")),
        },
    }
}

pub fn nu_gap(g1: &RationalTF, g2: &RationalTF, grid: &FrequencyGrid) -> f64 {
    nu_gap_full(g1, g2, grid).value
}

/// Symmetric matrix of pairwise ν-gap distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    values: Vec<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl DistanceMatrix {
    /// Builds a matrix from the upper triangle, mirroring it and zeroing the
    /// diagonal.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = labels.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        DistanceMatrix {
            labels,
            values,
            warnings: Vec::new(),
        }
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("distance matrix is not square".into()));
        }
        Ok(Self::from_fn(labels, |i, j| rows[i][j]))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Principal sub-matrix over `idx`.
    pub fn subset(&self, idx: &[usize]) -> DistanceMatrix {
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        Self::from_fn(labels, |a, b| self.get(idx[a], idx[b]))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, &v| m.max(v))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for v in self.row(i) {
                out.push(',');
                out.push_str(&fmt_sig(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let labels: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').skip(1).map(|s| s.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Parse(e.to_string()))?);
        }
        Self::from_rows(labels, &rows)
    }
}

/// Pairwise ν-gap distances; pairs are evaluated in parallel and merged by
/// index, so the result does not depend on scheduling.
pub fn distance_matrix(labels: &[String], systems: &[RationalTF], grid: &FrequencyGrid) -> DistanceMatrix {
    let n = systems.len();
    let symbols: Vec<Result<GraphSymbols>> = systems.par_iter().map(GraphSymbols::new).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let results: Vec<NuGap> = pairs
        .par_iter()
        .map(|&(i, j)| match (&symbols[i], &symbols[j]) {
            (Ok(s1), Ok(s2)) => nu_gap_with(&systems[i], s1, &systems[j], s2, grid),
            (Err(e), _) | (_, Err(e)) => NuGap {
                value: 1.0,
                verdict: None,
                omega: None,
                warning: Some(format!("factorization failed: {e}")),
            },
        })
        .collect();
    let mut values = vec![0.0; n * n];
    let mut warnings = Vec::new();
    for (&(i, j), r) in pairs.iter().zip(&results) {
        values[i * n + j] = r.value;
        values[j * n + i] = r.value;
        if let Some(w) = &r.warning {
            warnings.push(format!("{} vs {}: {}", labels[i], labels[j], w));
        }
    }
    DistanceMatrix {
        labels: labels.to_vec(),
        values,
        warnings,
    }
}

/// `base` extended by extra systems; only the new pairs are evaluated.
pub fn extend_distances(
    base: &DistanceMatrix,
    base_systems: &[RationalTF],
    extra_labels: &[String],
    extra_systems: &[RationalTF],
    grid: &FrequencyGrid,
) -> DistanceMatrix {
    let n0 = base.len();
    let systems: Vec<&RationalTF> = base_systems.iter().chain(extra_systems).collect();
    let n = systems.len();
    let pairs: Vec<(usize, usize)> = (n0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let fresh: Vec<NuGap> = pairs
        .par_iter()
        .map(|&(i, j)| nu_gap_full(systems[i], systems[j], grid))
        .collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n0 {
        for j in 0..n0 {
            values[i * n + j] = base.get(i, j);
        }
    }
    let mut warnings = base.warnings.clone();
    let mut labels = base.labels.clone();
    labels.extend(extra_labels.iter().cloned());
    for (&(i, j), r) in pairs.iter().zip(&fresh) {
        values[i * n + j] = r.value;
        values[j * n + i] = r.value;
        if let Some(w) = &r.warning {
            warnings.push(format!("{} vs {}: {}", labels[i], labels[j], w));
        }
    }
    DistanceMatrix { labels, values, warnings }
}
