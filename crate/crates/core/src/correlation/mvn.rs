//! Box probabilities of a standard multivariate normal by sequential
//! conditioning (Genz's separation of variables).
//!
//! With `Σ = L Lᵀ` the box integral becomes an integral over the unit cube of
//! a product of one-dimensional interval masses. Each sample draws `n - 1`
//! uniforms; an antithetic partner reuses `1 - w`. Samples are split into a
//! fixed number of batches, each with its own ChaCha stream, so the estimate
//! does not depend on how batches are scheduled across threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::CorrelationMatrix;
use crate::error::{domain, Error, Result};
use crate::normal;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const BATCHES: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvnEstimate {
    pub p: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MvnEstimate {
    pub fn exact(p: f64, seed: u64) -> Self {
        Self {
            p,
            stderr: 0.0,
            samples: 0,
            seed,
        }
    }

    /// Complementary probability with the same error.
    pub fn complement(&self) -> Self {
        Self {
            p: (1.0 - self.p).clamp(0.0, 1.0),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MvnOptions {
    pub samples: u64,
    pub seed: u64,
}

impl Default for MvnOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

impl MvnOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed }
    }
}

/// `P(lower <= X <= upper)` for `X ~ N(0, Σ)` with `Σ` a correlation matrix.
pub fn mvn_box_probability(
    sigma: &CorrelationMatrix,
    lower: &[f64],
    upper: &[f64],
    samples: u64,
    seed: u64,
) -> Result<MvnEstimate> {
    let n = sigma.dim();
    for v in [lower.len(), upper.len()] {
        if v != n {
            return Err(Error::Dimension { expected: n, got: v });
        }
    }
    if let Some(i) = (0..n).find(|&i| !(lower[i] < upper[i])) {
        return domain(format!(
            "box is empty in dimension {i}: [{}, {}]",
            lower[i], upper[i]
        ));
    }
    if samples == 0 {
        return domain("sample count must be >= 1");
    }
    let chol = sigma.factor()?;
    let integrand = Integrand::new(chol, lower, upper);

    if n == 1 {
        let p = integrand.eval(&[]);
        return Ok(MvnEstimate {
            p,
            stderr: rounding_floor(n),
            samples,
            seed,
        });
    }

    let per_batch = samples.div_ceil(BATCHES).max(1);
    let pairs = per_batch.div_ceil(2);
    let batch_means: Vec<f64> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut w = vec![0.0; n - 1];
            let mut anti = vec![0.0; n - 1];
            let mut scratch = vec![0.0; n];
            let mut sum = CompensatedSum::default();
            for _ in 0..pairs {
                for (x, y) in w.iter_mut().zip(anti.iter_mut()) {
                    *x = rng.random::<f64>();
                    *y = 1.0 - *x;
                }
                sum.add(0.5 * (integrand.eval_with(&w, &mut scratch) + integrand.eval_with(&anti, &mut scratch)));
            }
            sum.value() / pairs as f64
        })
        .collect();

    let k = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / k;
    let var = batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(MvnEstimate {
        p: mean.clamp(0.0, 1.0),
        stderr: (var / k).sqrt() + rounding_floor(n),
        samples: pairs * 2 * BATCHES,
        seed,
    })
}

/// Neumaier summation; a naive running sum over ~10^4 equal terms would
/// drift well past the per-evaluation rounding error.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Accumulated floating-point error of one integrand evaluation; keeps the
/// reported error honest when the sampling variance vanishes (e.g. Σ = I).
fn rounding_floor(n: usize) -> f64 {
    8.0 * n as f64 * f64::EPSILON
}

struct Integrand {
    chol: DMatrix<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Integrand {
    fn new(chol: DMatrix<f64>, lower: &[f64], upper: &[f64]) -> Self {
        Self {
            chol,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        }
    }

    fn eval(&self, w: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.lower.len()];
        self.eval_with(w, &mut scratch)
    }

    /// Product of conditional interval masses for one point `w` of the
    /// `(n-1)`-cube. `y` receives the conditional normal draws.
    fn eval_with(&self, w: &[f64], y: &mut [f64]) -> f64 {
        let n = self.lower.len();
        let mut f = 1.0;
        for i in 0..n {
            let mut shift = 0.0;
            for j in 0..i {
                shift += self.chol[(i, j)] * y[j];
            }
            let diag = self.chol[(i, i)];
            if diag == 0.0 {
                // fully determined by previous coordinates
                if shift < self.lower[i] || shift > self.upper[i] {
                    return 0.0;
                }
                y[i] = 0.0;
                continue;
            }
            let d = normal::cdf((self.lower[i] - shift) / diag);
            let e = normal::cdf((self.upper[i] - shift) / diag);
            let mass = e - d;
            if mass <= 0.0 {
                return 0.0;
            }
            f *= mass;
            if i + 1 < n {
                let u = (d + w[i] * mass).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                y[i] = normal::quantile(u);
            }
        }
        f
    }
}
