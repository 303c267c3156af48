//! Two-dimensional embedding of a distance matrix by minimizing the
//! Kullback–Leibler divergence between Gaussian neighbor probabilities and
//! Student-t similarities.
//!
//! Both `P` and `Q` are row-conditional and therefore asymmetric, so the
//! gradient collects both directed terms:
//! `∂J/∂z_a = 2 Σ_j (z_a − z_j) w_aj (p_aj + p_ja − q_aj − q_ja)` with
//! `w_aj = (1 + ‖z_a − z_j‖²)⁻¹`.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::fmt_sig;
use crate::metric::DistanceMatrix;
use crate::rng::{substream, Stream};

/// Added to every similarity normalizer so coincident points stay finite.
const Q_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TsneConfig {
    pub seed: u64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub momentum_initial: f64,
    pub momentum_final: f64,
    /// Iteration at which the momentum switches to its final value.
    pub momentum_switch: usize,
    pub init_std: f64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            seed: 1,
            iterations: 1000,
            learning_rate: 10.0,
            momentum_initial: 0.5,
            momentum_final: 0.8,
            momentum_switch: 250,
            init_std: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingResult {
    pub coords: Vec<[f64; 2]>,
    /// Cost before the first step followed by the cost after each step.
    pub kl_trace: Vec<f64>,
    pub seed: u64,
    pub iterations: usize,
    pub best_iteration: usize,
    pub best_kl: f64,
}

/// Row-normalized `exp(−d²)` with a zero diagonal.
pub fn affinities(d: &DistanceMatrix) -> Vec<Vec<f64>> {
    let n = d.len();
    (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| if i == j { 0.0 } else { (-d.get(i, j).powi(2)).exp() })
                .collect();
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
            row
        })
        .collect()
}

fn similarities(z: &[[f64; 2]]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = z.len();
    let w: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let dx = z[i][0] - z[j][0];
                        let dy = z[i][1] - z[j][1];
                        1.0 / (1.0 + dx * dx + dy * dy)
                    }
                })
                .collect()
        })
        .collect();
    let q = w
        .iter()
        .map(|row| {
            let s: f64 = row.iter().sum::<f64>() + Q_EPS;
            row.iter().map(|v| v / s).collect()
        })
        .collect();
    (w, q)
}

/// `J = Σ_i Σ_{j≠i} p_ij log(p_ij / q_ij)`.
pub fn kl_cost(p: &[Vec<f64>], z: &[[f64; 2]]) -> f64 {
    let (_, q) = similarities(z);
    let mut j = 0.0;
    for (prow, qrow) in p.iter().zip(&q) {
        for (&pv, &qv) in prow.iter().zip(qrow) {
            if pv > 0.0 {
                j += pv * (pv / qv).ln();
            }
        }
    }
    j
}

pub fn gradient(p: &[Vec<f64>], z: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = z.len();
    let (w, q) = similarities(z);
    (0..n)
        .into_par_iter()
        .map(|a| {
            let mut g = [0.0, 0.0];
            for j in 0..n {
                if j == a {
                    continue;
                }
                let c = 2.0 * w[a][j] * (p[a][j] + p[j][a] - q[a][j] - q[j][a]);
                g[0] += c * (z[a][0] - z[j][0]);
                g[1] += c * (z[a][1] - z[j][1]);
            }
            g
        })
        .collect()
}

/// Momentum gradient descent from a seeded isotropic start; returns the
/// lowest-cost iterate.
pub fn tsne(d: &DistanceMatrix, cfg: &TsneConfig) -> Result<EmbeddingResult> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InvalidArgument("embedding needs at least two points".into()));
    }
    let p = affinities(d);
    let mut rng = substream(cfg.seed, Stream::Embedding);
    let normal = Normal::new(0.0, cfg.init_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut z: Vec<[f64; 2]> = (0..n).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
    let mut vel = vec![[0.0, 0.0]; n];
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    let c0 = kl_cost(&p, &z);
    trace.push(c0);
    let mut best = (c0, 0, z.clone());
    for it in 0..cfg.iterations {
        let mom = if it < cfg.momentum_switch {
            cfg.momentum_initial
        } else {
            cfg.momentum_final
        };
        let g = gradient(&p, &z);
        for i in 0..n {
            for k in 0..2 {
                vel[i][k] = mom * vel[i][k] - cfg.learning_rate * g[i][k];
                z[i][k] += vel[i][k];
            }
        }
        let c = kl_cost(&p, &z);
        trace.push(c);
        if c < best.0 {
            best = (c, it + 1, z.clone());
        }
    }
    Ok(EmbeddingResult {
        coords: best.2,
        kl_trace: trace,
        seed: cfg.seed,
        iterations: cfg.iterations,
        best_iteration: best.1,
        best_kl: best.0,
    })
}

impl EmbeddingResult {
    /// `id,z1,z2,cluster` rows.
    pub fn to_csv(&self, ids: &[String], labels: &[String]) -> String {
        let mut out = String::from("id,z1,z2,cluster\n");
        for (i, c) in self.coords.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                ids[i],
                fmt_sig(c[0]),
                fmt_sig(c[1]),
                labels.get(i).map(String::as_str).unwrap_or("")
            ));
        }
        out
    }

    pub fn kl_csv(&self) -> String {
        let mut out = String::from("iteration,kl\n");
        for (i, v) in self.kl_trace.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", fmt_sig(*v)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn affinity_examples() {
        let d = DistanceMatrix::from_fn(labels(2), |_, _| 0.4);
        assert_eq!(affinities(&d), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let d = DistanceMatrix::from_fn(labels(4), |_, _| 0.7);
        let p = affinities(&d);
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    assert!((v - 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn equilateral_stays_symmetric() {
        let d = DistanceMatrix::from_fn(labels(3), |_, _| 0.5);
        let r = tsne(&d, &TsneConfig::default()).unwrap();
        let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let e = [
            dist(r.coords[0], r.coords[1]),
            dist(r.coords[1], r.coords[2]),
            dist(r.coords[0], r.coords[2]),
        ];
        let mean = e.iter().sum::<f64>() / 3.0;
        assert!(e.iter().all(|x| (x - mean).abs() <= 0.1 * mean), "{e:?}");
        assert!(r.best_kl <= r.kl_trace[0]);
    }

    #[test]
    fn deterministic_for_seed() {
        let d = DistanceMatrix::from_fn(labels(5), |i, j| 0.1 * (i + j) as f64);
        let cfg = TsneConfig {
            iterations: 50,
            ..TsneConfig::default()
        };
        assert_eq!(tsne(&d, &cfg).unwrap(), tsne(&d, &cfg).unwrap());
    }
}
