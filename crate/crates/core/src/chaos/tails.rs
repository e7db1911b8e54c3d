use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::norms::Outer;
use super::spec::{sample_chaos, ChaosSpec};
use super::tensor::CoefficientTensor;
use crate::distributions::DistributionSpec;
use crate::error::{invalid, Result};
use crate::oracles::brute_force_enumerate;
use crate::report::{ratio, BoundReport, BoundRow, Verdict};
use crate::rng::RandomStream;
use crate::stats::{
    empirical_moments, exact_moment, Estimate, ExactDistribution, Tally, BOOTSTRAP_RESAMPLES,
};

/// Tail probabilities below `TAIL_RESOLUTION / N` are not resolved by `N`
/// samples.
pub const TAIL_RESOLUTION: f64 = 10.0;

/// The law of `Z`, exact or as a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum ChaosLaw {
    Exact(ExactDistribution),
    Empirical(Tally),
}

impl ChaosLaw {
    pub fn from_spec(spec: &ChaosSpec, outer: &Outer, stream: &RandomStream) -> Result<Self> {
        match *outer {
            Outer::Exact => Ok(Self::Exact(brute_force_enumerate(spec)?)),
            Outer::MonteCarlo(n) => {
                if n == 0 {
                    return Err(invalid("Monte Carlo law needs samples"));
                }
                Ok(Self::Empirical(Tally::from_samples(&sample_chaos(
                    spec, n, stream,
                ))))
            }
        }
    }

    pub fn n_samples(&self) -> Option<u64> {
        match self {
            Self::Exact(_) => None,
            Self::Empirical(t) => Some(t.total()),
        }
    }

    /// `(value, probability)` in ascending order of value.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Exact(d) => d.iter().collect(),
            Self::Empirical(t) => t.iter().collect(),
        }
    }

    /// Smallest support value with at least half the mass at or below it.
    pub fn median(&self) -> f64 {
        let mut acc = 0.0;
        let pairs = self.pairs();
        for &(v, p) in &pairs {
            acc += p;
            if acc >= 0.5 - 1e-12 {
                return v;
            }
        }
        pairs.last().map_or(0.0, |&(v, _)| v)
    }

    pub fn prob_above(&self, z: f64) -> f64 {
        self.pairs()
            .iter()
            .filter(|(v, _)| *v > z)
            .map(|(_, p)| p)
            .sum()
    }

    /// Binomial standard error of a probability `q` under this law's sample
    /// size (zero for exact laws).
    pub fn binomial_se(&self, q: f64) -> f64 {
        match self.n_samples() {
            None => 0.0,
            Some(n) => (q * (1.0 - q) / n as f64).sqrt(),
        }
    }

    /// `‖Z‖_p` (or `‖Z − EZ‖_p`) over `p_grid`.
    pub fn moments(
        &self,
        p_grid: &[f64],
        centered: bool,
        stream: &RandomStream,
    ) -> Result<Vec<Estimate>> {
        match self {
            Self::Exact(d) => p_grid
                .iter()
                .map(|&p| exact_moment(d, p, centered).map(Estimate::exact))
                .collect(),
            Self::Empirical(t) => {
                if p_grid.iter().any(|p| !(*p >= 1.0)) {
                    return Err(invalid("moment order must be >= 1"));
                }
                Ok(empirical_moments(
                    t,
                    p_grid,
                    centered,
                    BOOTSTRAP_RESAMPLES,
                    stream,
                ))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub threshold: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub prob_above_threshold: Estimate,
    /// `P(Z > M) < ε`; the certificate says nothing otherwise.
    pub meaningful: bool,
    /// Least `L` with `P(Z > L M t^{d/2}) ≤ e^{−αt} + 3 SE` at every kept `t`.
    pub least_l: Option<f64>,
    /// `(t, least L for that t alone)`.
    pub per_t: Vec<(f64, f64)>,
    pub report: BoundReport,
}

/// Least `u ≥ 0` with `P(Z > u) ≤ tau`.
fn least_level(pairs: &[(f64, f64)], tau: f64) -> f64 {
    let mut above = 0.0;
    let mut level = 0.0f64;
    for &(v, p) in pairs.iter().rev() {
        if above > tau {
            break;
        }
        level = v;
        above += p;
    }
    if above <= tau {
        0.0
    } else {
        level.max(0.0)
    }
}

/// Tail certificate for `P(Z > L M t^{d/2}) < e^{−αt}` on `t_grid`,
/// returning the least passing `L`. Grid points whose target probability
/// the sample cannot resolve are dropped with a warning.
pub fn tail_certificate(
    law: &ChaosLaw,
    order: usize,
    threshold: f64,
    alpha: f64,
    epsilon: f64,
    t_grid: &[f64],
    seed: u64,
) -> Result<TailCertificate> {
    if !(threshold > 0.0) || !(alpha > 0.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("need M > 0, alpha > 0 and 0 < epsilon < 1"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 1.0) || !t.is_finite()) {
        return Err(invalid("t grid must be nonempty with finite t >= 1"));
    }
    let pairs = law.pairs();
    let n = law.n_samples();
    let mut report = BoundReport::new("tail-certificate", "t", vec![seed], n.unwrap_or(0));
    let p_m = law.prob_above(threshold);
    let prob_above_threshold = Estimate {
        value: p_m,
        std_error: law.binomial_se(p_m),
    };
    let meaningful = p_m < epsilon;
    if !meaningful {
        report
            .warnings
            .push(format!("P(Z > M) = {p_m} is not below epsilon = {epsilon}"));
    }
    let mut per_t = Vec::new();
    for &t in t_grid {
        let target = (-alpha * t).exp();
        if let Some(n) = n {
            if target < TAIL_RESOLUTION / n as f64 {
                report.warnings.push(format!(
                    "t = {t} dropped: target {target:e} is below {TAIL_RESOLUTION}/N"
                ));
                continue;
            }
        }
        let tau = target + 3.0 * law.binomial_se(target);
        let scale = threshold * t.powf(order as f64 / 2.0);
        per_t.push((t, least_level(&pairs, tau) / scale));
    }
    let least_l = per_t.iter().map(|&(_, l)| l).reduce(f64::max);
    if let Some(l) = least_l {
        for &(t, lt) in &per_t {
            let target = (-alpha * t).exp();
            let se = law.binomial_se(target);
            let q = law.prob_above(l * threshold * t.powf(order as f64 / 2.0));
            report.push(
                BoundRow::new("tail_prob", t, q, law.binomial_se(q))
                    .with_upper(target)
                    .with_verdict(Verdict::from_bool(q <= target + 3.0 * se)),
            );
            report.push(BoundRow::new("least_l", t, lt, 0.0));
        }
    } else {
        report
            .warnings
            .push("no t survived the resolution rule".into());
    }
    let mut report = report.finish();
    if !meaningful || least_l.is_none() {
        report.verdict = Verdict::Inconclusive;
    }
    Ok(TailCertificate {
        threshold,
        alpha,
        epsilon,
        prob_above_threshold,
        meaningful,
        least_l,
        per_t,
        report,
    })
}

/// Moments of the decoupled and undecoupled chaos built from one symmetric,
/// zero-diagonal tensor and one generator, side by side with their ratio.
/// Monte Carlo runs share the stream. Report only.
pub fn decoupled_undecoupled_compare(
    tensor: &CoefficientTensor,
    generator: &DistributionSpec,
    p_grid: &[f64],
    outer: &Outer,
    stream: &RandomStream,
) -> Result<BoundReport> {
    if !tensor.symmetric() || !tensor.zero_diagonal() {
        return Err(invalid("comparison needs a symmetric zero-diagonal tensor"));
    }
    let make = |decoupled| {
        ChaosSpec::with_generator(
            tensor.order(),
            tensor.side(),
            vec![tensor.clone()],
            generator.clone(),
            decoupled,
        )
    };
    let dec = ChaosLaw::from_spec(&make(true)?, outer, stream)?;
    let und = ChaosLaw::from_spec(&make(false)?, outer, stream)?;
    let boot = stream.split(1);
    let md = dec.moments(p_grid, false, &boot)?;
    let mu = und.moments(p_grid, false, &boot)?;
    let mut report = BoundReport::new(
        "decouple-compare",
        "p",
        vec![stream.seed()],
        dec.n_samples().unwrap_or(0),
    );
    for ((&p, a), b) in p_grid.iter().zip(&md).zip(&mu) {
        report.push(BoundRow::new("decoupled", p, a.value, a.std_error));
        report.push(BoundRow::new("undecoupled", p, b.value, b.std_error));
        match ratio(a.value, b.value) {
            Some(r) => {
                let rel = |e: &Estimate| {
                    if e.value != 0.0 {
                        e.std_error / e.value
                    } else {
                        0.0
                    }
                };
                let se = r * (rel(a).powi(2) + rel(b).powi(2)).sqrt();
                report.push(BoundRow::new("ratio", p, r, se));
            }
            None => report.warnings.push(format!("ratio undefined at p = {p}")),
        }
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMoment {
    pub alpha: f64,
    /// `E exp(α Z^{2/d})`; `None` when it overflows.
    pub value: Option<f64>,
    pub log_value: f64,
    pub std_error: f64,
}

/// `E exp(α Z^{2/d})` for each `α`, evaluated with a log-sum-exp shift.
pub fn exp_integrability(law: &ChaosLaw, order: usize, alpha_grid: &[f64]) -> Vec<ExpMoment> {
    let pairs = law.pairs();
    let power = 2.0 / order as f64;
    alpha_grid
        .iter()
        .map(|&alpha| {
            let expo: Vec<f64> = pairs
                .iter()
                .map(|(z, _)| alpha * z.abs().powf(power))
                .collect();
            let shift = expo
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0);
            let w: Vec<f64> = expo.iter().map(|e| (e - shift).exp()).collect();
            let mean: f64 = w.iter().zip(&pairs).map(|(w, (_, p))| w * p).sum();
            let second: f64 = w.iter().zip(&pairs).map(|(w, (_, p))| w * w * p).sum();
            let log_value = shift + mean.ln();
            let scale = shift.exp();
            let value = (scale * mean).is_finite().then_some(scale * mean);
            let std_error = match (law.n_samples(), value) {
                (Some(n), Some(_)) if n > 1 => {
                    scale * ((second - mean * mean).max(0.0) / (n - 1) as f64).sqrt()
                }
                _ => 0.0,
            };
            ExpMoment {
                alpha,
                value,
                log_value,
                std_error,
            }
        })
        .collect()
}

/// [`exp_integrability`] along a family of specs (typically nested, growing
/// in `n`). Overflowing values are flagged and skipped. Report only.
pub fn exp_integrability_trend(
    specs: &[ChaosSpec],
    alpha_grid: &[f64],
    outer: &Outer,
    stream: &RandomStream,
) -> Result<BoundReport> {
    if alpha_grid.iter().any(|a| !(*a >= 0.0)) {
        return Err(invalid("alpha must be >= 0"));
    }
    let n_samples = match *outer {
        Outer::MonteCarlo(n) => n as u64,
        Outer::Exact => 0,
    };
    let mut report = BoundReport::new(
        "exp-integrability-trend",
        "n",
        vec![stream.seed()],
        n_samples,
    );
    for spec in specs {
        let law = ChaosLaw::from_spec(spec, outer, stream)?;
        for m in exp_integrability(&law, spec.order(), alpha_grid) {
            match m.value {
                Some(v) => report.push(BoundRow::new(
                    &format!("alpha={}", m.alpha),
                    spec.side() as f64,
                    v,
                    m.std_error,
                )),
                None => report.warnings.push(format!(
                    "alpha = {} overflowed at n = {} (log value {})",
                    m.alpha,
                    spec.side(),
                    m.log_value
                )),
            }
        }
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::rademacher_sum_law;

    fn linear(c: Vec<f64>) -> ChaosSpec {
        let n = c.len();
        ChaosSpec::rademacher(1, n, vec![CoefficientTensor::vector(c).unwrap()], true).unwrap()
    }

    #[test]
    fn certificate_above_max_is_trivial() {
        let law = ChaosLaw::from_spec(&linear(vec![1.0; 4]), &Outer::Exact, &RandomStream::new(0))
            .unwrap();
        let c = tail_certificate(&law, 1, 1.0, 1.0, 0.9, &[1.0], 0).unwrap();
        let l = c.least_l.unwrap();
        // P(Z > L·M) with L·M ≥ max Z is zero
        assert_eq!(law.prob_above(4.0), 0.0);
        assert!(l <= 4.0);
        assert_eq!(c.report.verdict, Verdict::Pass);
    }

    #[test]
    fn certificate_linear_median() {
        let n = 10;
        let law = ChaosLaw::from_spec(&linear(vec![1.0; n]), &Outer::Exact, &RandomStream::new(0))
            .unwrap();
        // median of |Σε| for n = 10 is 2
        let folded: Vec<(f64, f64)> = rademacher_sum_law(n as u32)
            .unwrap()
            .iter()
            .map(|(v, p)| (v.abs(), p))
            .collect();
        let below2: f64 = folded
            .iter()
            .filter(|(v, _)| *v < 2.0)
            .map(|(_, p)| p)
            .sum();
        assert!(
            below2 < 0.5
                && below2
                    + folded
                        .iter()
                        .filter(|(v, _)| *v == 2.0)
                        .map(|(_, p)| p)
                        .sum::<f64>()
                    >= 0.5
        );
        let c = tail_certificate(&law, 1, 2.0, 1.0, 0.5, &[1.0, 2.0, 3.0, 4.0], 0).unwrap();
        let l = c.least_l.unwrap();
        for &(t, _) in &c.per_t {
            let p: f64 = folded
                .iter()
                .filter(|(v, _)| *v > l * 2.0 * t.sqrt())
                .map(|(_, p)| p)
                .sum();
            assert!(p <= (-t).exp());
        }
        assert_eq!(c.report.verdict, Verdict::Pass);
    }

    #[test]
    fn certificate_identity_enumeration() {
        let spec = ChaosSpec::rademacher(2, 3, vec![CoefficientTensor::identity(3).unwrap()], true)
            .unwrap();
        let law = ChaosLaw::from_spec(&spec, &Outer::Exact, &RandomStream::new(0)).unwrap();
        let c = tail_certificate(&law, 2, 1.0, 1.0, 0.9, &[1.0, 2.0, 4.0], 0).unwrap();
        assert!(c.least_l.unwrap().is_finite());
        assert!(c.meaningful);
    }

    #[test]
    fn certificate_drops_unresolved_t() {
        let law = ChaosLaw::from_spec(
            &linear(vec![1.0; 4]),
            &Outer::MonteCarlo(1000),
            &RandomStream::new(0),
        )
        .unwrap();
        let c = tail_certificate(&law, 1, 1.0, 1.0, 0.9, &[1.0, 2.0, 10.0], 0).unwrap();
        assert_eq!(c.per_t.len(), 2);
        assert_eq!(c.report.warnings.len(), 1);
    }

    #[test]
    fn compare_examples() {
        let zero = CoefficientTensor::zeros(2, 3).unwrap();
        let r = decoupled_undecoupled_compare(
            &zero,
            &DistributionSpec::Rademacher,
            &[1.0, 2.0],
            &Outer::Exact,
            &RandomStream::new(0),
        )
        .unwrap();
        assert!(r.rows.iter().all(|row| row.estimate == 0.0));
        let mut e = vec![1.0; 9];
        for i in 0..3 {
            e[i * 3 + i] = 0.0;
        }
        let off = CoefficientTensor::matrix(3, e).unwrap();
        let r = decoupled_undecoupled_compare(
            &off,
            &DistributionSpec::Rademacher,
            &[1.0, 2.0, 4.0, 8.0],
            &Outer::Exact,
            &RandomStream::new(0),
        )
        .unwrap();
        let ratios: Vec<f64> = r
            .rows
            .iter()
            .filter(|x| x.quantity == "ratio")
            .map(|x| x.estimate)
            .collect();
        assert_eq!(ratios.len(), 4);
        assert!(ratios.iter().all(|x| x.is_finite() && *x > 0.0));
        assert_eq!(r.verdict, Verdict::ReportOnly);
    }

    #[test]
    fn exp_integrability_examples() {
        let zero = ChaosSpec::rademacher(2, 3, vec![CoefficientTensor::zeros(2, 3).unwrap()], true)
            .unwrap();
        let law = ChaosLaw::from_spec(&zero, &Outer::Exact, &RandomStream::new(0)).unwrap();
        for m in exp_integrability(&law, 2, &[0.1, 1.0, 10.0]) {
            assert_eq!(m.value, Some(1.0));
        }
        // d = 1, c = 1/√n: against the binomial law directly
        for n in [4u32, 8, 16] {
            let c = vec![1.0 / (n as f64).sqrt(); n as usize];
            let law =
                ChaosLaw::from_spec(&linear(c), &Outer::Exact, &RandomStream::new(0)).unwrap();
            let got = exp_integrability(&law, 1, &[0.1])[0].value.unwrap();
            let want: f64 = rademacher_sum_law(n)
                .unwrap()
                .iter()
                .map(|(s, p)| p * (0.1 * s * s / n as f64).exp())
                .sum();
            assert!((got - want).abs() < 1e-12 * want);
            assert!(got > 1.0 && got < 1.2);
        }
        let huge = ChaosLaw::Exact(ExactDistribution::from_pairs([(1e3, 1.0)]).unwrap());
        let m = &exp_integrability(&huge, 1, &[1.0])[0];
        assert!(m.value.is_none() && (m.log_value - 1e6).abs() < 1e-6);
    }

    #[test]
    fn trend_is_monotone_in_alpha() {
        let specs: Vec<ChaosSpec> = [2usize, 3]
            .iter()
            .map(|&n| {
                let t = CoefficientTensor::identity(n)
                    .unwrap()
                    .scaled(1.0 / (n as f64).sqrt());
                ChaosSpec::rademacher(2, n, vec![t], true).unwrap()
            })
            .collect();
        let r = exp_integrability_trend(
            &specs,
            &[0.05, 0.1, 0.2],
            &Outer::Exact,
            &RandomStream::new(0),
        )
        .unwrap();
        assert_eq!(r.rows.len(), 6);
        for w in r.rows.chunks(3) {
            assert!(w[0].estimate <= w[1].estimate && w[1].estimate <= w[2].estimate);
        }
    }
}
