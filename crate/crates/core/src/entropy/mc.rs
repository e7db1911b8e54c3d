use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{ConvexFunctionSpec, EntropyEstimate, EntropyMethod, PhiFunction};
use crate::distributions::DistributionSpec;
use crate::error::{invalid, Error, Result};
use crate::report::{BoundReport, BoundRow, Verdict, RATIO_FLOOR};
use crate::rng::RandomStream;
use crate::stats::{bootstrap_tally, bootstrap_weights, Estimate, Tally, BOOTSTRAP_RESAMPLES};

pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

const MIN_SAMPLES: usize = 1000;

/// `n` independent draws from the product of `dists`, flattened row by row.
/// Draw `j` comes from `stream.split(0).split(j)`.
pub fn draw_product(dists: &[DistributionSpec], n: usize, stream: &RandomStream) -> Vec<f64> {
    let base = stream.split(0);
    let d = dists.len();
    let mut out = vec![0.0; n * d];
    for (j, row) in out.chunks_exact_mut(d.max(1)).enumerate().take(n) {
        let mut rng = base.split(j as u64);
        for (slot, dist) in row.iter_mut().zip(dists) {
            *slot = dist.sample(&mut rng);
        }
    }
    out
}

fn validate_dists(dists: &[DistributionSpec]) -> Result<()> {
    if dists.is_empty() {
        return Err(invalid("product needs at least one marginal"));
    }
    dists.iter().try_for_each(DistributionSpec::validate)
}

/// Plug-in Φ-entropy of `ξ(X)` with a bootstrap standard error.
pub fn phi_entropy_mc<F: Fn(&[f64]) -> f64>(
    dists: &[DistributionSpec],
    xi: F,
    phi: PhiFunction,
    n_samples: usize,
    stream: &RandomStream,
) -> Result<EntropyEstimate> {
    validate_dists(dists)?;
    if n_samples < MIN_SAMPLES {
        return Err(invalid("phi_entropy_mc needs at least 1000 samples"));
    }
    let points = draw_product(dists, n_samples, stream);
    let mut values = Vec::with_capacity(n_samples);
    for (index, x) in points.chunks_exact(dists.len()).enumerate() {
        let v = xi(x);
        if v.is_nan() || v < 0.0 {
            return Err(Error::NegativeValue { index, value: v });
        }
        if !phi.eval(v).is_finite() {
            return Err(Error::Overflow {
                what: "phi(xi)",
                index,
            });
        }
        values.push(v);
    }
    let tally = Tally::from_samples(&values);
    let est = bootstrap_tally(
        &tally,
        |t| phi.entropy(t.iter()),
        BOOTSTRAP_RESAMPLES,
        &stream.split(1),
    );
    Ok(EntropyEstimate {
        value: est.value,
        std_error: est.std_error,
        n_samples: n_samples as u64,
        method: EntropyMethod::MonteCarlo,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiPoint {
    pub lambda: f64,
    pub ratio: Estimate,
    /// The denominator could not be told apart from zero; `ratio` is 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiReport {
    pub points: Vec<LsiPoint>,
    /// Largest ratio over the grid: an empirical lower witness for the
    /// log-Sobolev constant.
    pub max_ratio: Estimate,
    pub argmax_lambda: f64,
    pub n_samples: u64,
}

/// Weighted sums needed for one λ: `Σ c w`, `Σ c w log w`, `Σ c s w`.
struct LambdaColumns {
    w: Vec<f64>,
    wlw: Vec<f64>,
    sw: Vec<f64>,
}

impl LambdaColumns {
    fn ratio(&self, lambda: f64, weights: Option<&[u32]>) -> (f64, bool) {
        let (mut m, mut e_wlw, mut e_sw, mut total) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..self.w.len() {
            let c = weights.map_or(1.0, |c| c[j] as f64);
            if c == 0.0 {
                continue;
            }
            m += c * self.w[j];
            e_wlw += c * self.wlw[j];
            e_sw += c * self.sw[j];
            total += c;
        }
        let (m, e_wlw, e_sw) = (m / total, e_wlw / total, e_sw / total);
        let ent = (e_wlw - m * m.ln()).max(0.0);
        let den = lambda * lambda * e_sw;
        if den <= RATIO_FLOOR * m {
            (0.0, true)
        } else {
            (ent / den, false)
        }
    }
}

/// `R(λ) = Ent(e^{λf(X)}) / E[λ² |∇f(X)|² e^{λf(X)}]` over `lambda_grid`,
/// with one shared sample and a paired bootstrap.
pub fn lsi_ratio(
    dists: &[DistributionSpec],
    f: &ConvexFunctionSpec,
    lambda_grid: &[f64],
    n_samples: usize,
    stream: &RandomStream,
) -> Result<LsiReport> {
    validate_dists(dists)?;
    if f.dim() != dists.len() {
        return Err(Error::DimensionMismatch {
            expected: dists.len(),
            got: f.dim(),
        });
    }
    if lambda_grid.is_empty() || lambda_grid.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(invalid("lambda grid must be nonempty and positive"));
    }
    if n_samples < 2 {
        return Err(invalid("lsi_ratio needs at least two samples"));
    }
    let points = draw_product(dists, n_samples, stream);
    let (g, s): (Vec<f64>, Vec<f64>) = points
        .chunks_exact(dists.len())
        .map(|x| {
            let (v, j) = f.eval_active(x);
            (v, f.slope_norm_sq(j))
        })
        .unzip();
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // shift by the largest value so e^{λ(g − gmax)} ≤ 1; Ent and the
    // denominator both scale by e^{λ gmax}, which cancels in the ratio
    let columns: Vec<LambdaColumns> = lambda_grid
        .iter()
        .map(|&lambda| {
            let lw: Vec<f64> = g.iter().map(|&v| lambda * (v - gmax)).collect();
            let w: Vec<f64> = lw.iter().map(|l| l.exp()).collect();
            LambdaColumns {
                wlw: w.iter().zip(&lw).map(|(a, b)| a * b).collect(),
                sw: w.iter().zip(&s).map(|(a, b)| a * b).collect(),
                w,
            }
        })
        .collect();
    let se = bootstrap_weights(
        n_samples,
        BOOTSTRAP_RESAMPLES,
        lambda_grid.len(),
        &stream.split(1),
        |c, out| {
            for (k, col) in columns.iter().enumerate() {
                out[k] = col.ratio(lambda_grid[k], Some(c)).0;
            }
        },
    );
    let points: Vec<LsiPoint> = columns
        .iter()
        .zip(lambda_grid)
        .zip(se)
        .map(|((col, &lambda), std_error)| {
            let (value, degenerate) = col.ratio(lambda, None);
            LsiPoint {
                lambda,
                ratio: Estimate {
                    value,
                    std_error: if degenerate { 0.0 } else { std_error },
                },
                degenerate,
            }
        })
        .collect();
    let best = points.iter().fold(&points[0], |b, p| {
        if p.ratio.value > b.ratio.value {
            p
        } else {
            b
        }
    });
    Ok(LsiReport {
        max_ratio: best.ratio,
        argmax_lambda: best.lambda,
        points,
        n_samples: n_samples as u64,
    })
}

/// Empirical `P(f(X) ≥ E f(X) + t)` against `exp(−t²/4C)`; a row passes
/// when the estimate is within three binomial standard errors of the bound.
pub fn herbst_tail_check(
    dists: &[DistributionSpec],
    f: &ConvexFunctionSpec,
    c: f64,
    t_grid: &[f64],
    n_samples: usize,
    stream: &RandomStream,
) -> Result<BoundReport> {
    validate_dists(dists)?;
    if f.dim() != dists.len() {
        return Err(Error::DimensionMismatch {
            expected: dists.len(),
            got: f.dim(),
        });
    }
    if f.lipschitz() > 1.0 + 1e-12 {
        return Err(invalid("herbst check needs a 1-Lipschitz function"));
    }
    if !(c > 0.0) {
        return Err(invalid("herbst constant C must be positive"));
    }
    if n_samples == 0 {
        return Err(invalid("herbst check needs samples"));
    }
    let points = draw_product(dists, n_samples, stream);
    let tally = Tally::from_samples(
        &points
            .chunks_exact(dists.len())
            .map(|x| f.eval(x))
            .collect::<Vec<_>>(),
    );
    let mean = tally.mean();
    let n = n_samples as f64;
    let mut report = BoundReport::new("herbst_tail", "t", vec![stream.seed()], n_samples as u64);
    for &t in t_grid {
        let p = tally.fraction_at_least(mean + t);
        let se = (p * (1.0 - p) / n).sqrt();
        let bound = (-t * t / (4.0 * c)).exp();
        report.push(
            BoundRow::new("P(f >= Ef + t)", t, p, se)
                .with_upper(bound)
                .with_verdict(Verdict::from_bool(p <= bound + 3.0 * se)),
        );
    }
    Ok(report.finish())
}
