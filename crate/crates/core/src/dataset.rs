//! Seeded synthetic plant sets mixing stable, integrating and unstable
//! low-order systems.
//!
//! The parameter ranges are choices of this crate, not taken from any
//! reference data set.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::SystemSet;
use crate::poly::Polynomial;
use crate::rng::{substream, Stream};
use crate::tf::RationalTF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `k/(τs + 1)`
    FirstOrderLag,
    /// `k·ωₙ²/(s² + 2ζωₙs + ωₙ²)`
    SecondOrderLag,
    /// `k/(s(τs + 1))`
    Integrator,
    /// `k/(τs − 1)`
    UnstableLag,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::FirstOrderLag,
        Family::SecondOrderLag,
        Family::Integrator,
        Family::UnstableLag,
    ];
}

/// Family weights and parameter ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// Relative weights in the order of [`Family::ALL`].
    pub mix: [f64; 4],
    pub gain: (f64, f64),
    pub tau: (f64, f64),
    pub omega_n: (f64, f64),
    pub zeta: (f64, f64),
    pub unstable_tau: (f64, f64),
    /// Probability of an extra `(T_z s + 1)` numerator factor.
    pub zero_probability: f64,
    pub zero_tau: (f64, f64),
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            mix: [0.35, 0.25, 0.20, 0.20],
            gain: (0.5, 2.0),
            tau: (0.5, 5.0),
            omega_n: (0.5, 3.0),
            zeta: (0.3, 1.2),
            unstable_tau: (1.0, 5.0),
            zero_probability: 0.25,
            zero_tau: (0.1, 1.0),
        }
    }
}

/// Family counts by largest remainder, so the totals match `n` exactly.
pub fn family_counts(n: usize, mix: &[f64; 4]) -> Result<[usize; 4]> {
    let total: f64 = mix.iter().sum();
    if !(total > 0.0) || mix.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidArgument("family mix must be non-negative with a positive sum".into()));
    }
    let exact: Vec<f64> = mix.iter().map(|w| w / total * n as f64).collect();
    let mut counts = [0usize; 4];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = e.floor() as usize;
    }
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        counts[i] += 1;
        missing -= 1;
    }
    Ok(counts)
}

fn sample_system(family: Family, cfg: &DatasetConfig, rng: &mut impl Rng) -> Result<RationalTF> {
    let uni = |rng: &mut dyn rand::RngCore, r: (f64, f64)| rng.random_range(r.0..=r.1);
    let k = uni(rng, cfg.gain);
    let (num, den) = match family {
        Family::FirstOrderLag => {
            let tau = uni(rng, cfg.tau);
            (vec![k], vec![tau, 1.0])
        }
        Family::SecondOrderLag => {
            let w = uni(rng, cfg.omega_n);
            let z = uni(rng, cfg.zeta);
            (vec![k * w * w], vec![1.0, 2.0 * z * w, w * w])
        }
        Family::Integrator => {
            let tau = uni(rng, cfg.tau) * 0.4;
            (vec![k], vec![tau, 1.0, 0.0])
        }
        Family::UnstableLag => {
            let tau = uni(rng, cfg.unstable_tau);
            (vec![k], vec![tau, -1.0])
        }
    };
    let mut num = Polynomial::new(num);
    if rng.random_bool(cfg.zero_probability) {
        let tz = uni(rng, cfg.zero_tau);
        num = num.mul(&Polynomial::new(vec![tz, 1.0]));
    }
    RationalTF::from_polys(num, Polynomial::new(den), crate::tf::CANCEL_TOL)
}

/// `n` systems drawn from the seeded dataset stream; ids are `G01`, `G02`, …
/// and the families are interleaved by a seeded shuffle.
pub fn generate_dataset(seed: u64, n: usize, cfg: &DatasetConfig) -> Result<(SystemSet, Vec<Family>)> {
    if n < 2 {
        return Err(Error::InvalidArgument("dataset needs at least two systems".into()));
    }
    let counts = family_counts(n, &cfg.mix)?;
    let mut families: Vec<Family> = Family::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&f, c)| std::iter::repeat_n(f, c))
        .collect();
    let mut rng = substream(seed, Stream::Dataset);
    families.shuffle(&mut rng);
    let width = n.to_string().len().max(2);
    let mut ids = Vec::with_capacity(n);
    let mut systems = Vec::with_capacity(n);
    for (i, &f) in families.iter().enumerate() {
        ids.push(format!("G{:0width$}", i + 1));
        systems.push(sample_system(f, cfg, &mut rng)?);
    }
    Ok((SystemSet { ids, systems }, families))
}
