//! One runner per experiment kind.

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, ensure, Result};
use concentra_core::chaos::{
    all_subsets, decoupled_undecoupled_compare, exp_integrability_trend, moment_bound_euclidean,
    norm_t_i, phi_of_t, tail_certificate, ChaosLaw, ChaosSpec, Outer, SubsetNorms,
    DEFAULT_RESTARTS,
};
use concentra_core::distributions::{
    check_class_m, check_equivalence_ii, default_grid, derive_ii_constants, ClassMParams,
    MembershipReport,
};
use concentra_core::entropy::{
    check_tensorization, herbst_tail_check, lsi_ratio, DEFAULT_LAMBDA_GRID,
};
use concentra_core::oracles::brute_force_enumerate;
use concentra_core::report::{ratio, BoundReport, BoundRow, Verdict};
use concentra_core::stats::{exact_moment, Estimate, ExactDistribution};
use concentra_core::RandomStream;
use serde_json::json;

use crate::config::{ChaosInput, ExperimentConfig, ExperimentKind};
use crate::fixtures::TensorizationInstance;
use crate::output::{Report, ResultEntry, Timing};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_HERBST_SAMPLES: usize = 1_000_000;
/// Largest sign count enumerated when exact mode is not forced.
pub const AUTO_ENUMERATION_SIGNS: usize = 20;
/// Slack allowed between two exact evaluations of the same quantity.
const EXACT_TOL: f64 = 1e-12;

/// Runs the experiment. Failures inside a step become failure records; the
/// report is always produced.
pub fn run(config: &ExperimentConfig, base: &Path, timed: bool) -> Report {
    let start = Instant::now();
    let results = match config.kind {
        ExperimentKind::ClassMCheck => class_m(config),
        ExperimentKind::EntropyTensorization => tensorization(config),
        ExperimentKind::LsiRatio => lsi(config),
        ExperimentKind::Herbst => herbst(config),
        ExperimentKind::ChaosMoments => chaos_moments(config, base),
        ExperimentKind::LogconcaveBounds => logconcave(config, base),
        ExperimentKind::TailCertificate => certificate(config, base),
        ExperimentKind::DecoupleCompare => compare(config, base),
        ExperimentKind::ExpIntegrabilityTrend => integrability(config, base),
    };
    let timing = timed.then(|| Timing {
        seconds: start.elapsed().as_secs_f64(),
    });
    Report::new(config.clone(), results, timing)
}

fn guarded(name: &str, f: impl FnOnce() -> Result<Vec<ResultEntry>>) -> Vec<ResultEntry> {
    f().unwrap_or_else(|e| vec![ResultEntry::failure(name, &e)])
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref()
        .ok_or_else(|| anyhow!("missing section [{name}]"))
}

fn membership_entry(r: &MembershipReport, name: &str) -> ResultEntry {
    let mut rep = BoundReport::new(name, "x", Vec::new(), 0);
    for (i, &x) in r.grid.iter().enumerate() {
        for (q, m) in [
            ("margin_upper", r.margin_upper.get(i)),
            ("margin_lower", r.margin_lower.get(i)),
        ] {
            if let Some(&m) = m {
                rep.push(
                    BoundRow::new(q, x, m, 0.0)
                        .with_lower(-r.tolerance)
                        .with_verdict(Verdict::from_bool(m >= -r.tolerance)),
                );
            }
        }
    }
    rep.warnings = r.diagnostics.clone();
    let mut rep = rep.finish();
    rep.verdict = Verdict::from_bool(r.passed);
    ResultEntry::from_report(rep).with_details(&json!({
        "check": r.check,
        "passed": r.passed,
        "min_margin": r.min_margin(),
        "worst_point": r.worst_point,
        "diagnostics": r.diagnostics,
    }))
}

fn class_m(cfg: &ExperimentConfig) -> Vec<ResultEntry> {
    guarded("class-m", || {
        let s = section(&cfg.class_m, "class_m")?;
        let params = ClassMParams::new(s.m, s.sigma_sq)?;
        let grid = s
            .grid
            .as_ref()
            .map_or_else(|| default_grid(&params), |g| g.points());
        let r1 = check_class_m(&s.distribution, &params, &grid, s.quad_step)?;
        let (c, alpha) = s
            .equivalence
            .as_ref()
            .map_or_else(|| derive_ii_constants(&params), |e| (e.c, e.alpha));
        let r2 = check_equivalence_ii(&s.distribution, s.m, c, alpha, &grid)?;
        Ok(vec![
            membership_entry(&r1, "class-m"),
            membership_entry(&r2, "equivalent-tail").with_details(&json!({
                "check": r2.check,
                "passed": r2.passed,
                "c": c,
                "alpha": alpha,
                "min_margin": r2.min_margin(),
                "worst_point": r2.worst_point,
                "diagnostics": r2.diagnostics,
            })),
        ])
    })
}

fn tensorization(cfg: &ExperimentConfig) -> Vec<ResultEntry> {
    guarded("tensorization", || {
        let s = section(&cfg.tensorization, "tensorization")?;
        let mut rng = RandomStream::new(cfg.seed).split(0);
        let mut reports: Vec<BoundReport> = s
            .phi
            .iter()
            .map(|phi| {
                let name = serde_json::to_value(phi).unwrap();
                BoundReport::new(
                    &format!("tensorization-{}", name.as_str().unwrap_or("phi")),
                    "instance",
                    vec![cfg.seed],
                    s.instances as u64,
                )
            })
            .collect();
        for i in 0..s.instances {
            let inst = TensorizationInstance::random(&mut rng, s.max_factors, s.max_atoms)?;
            for (phi, rep) in s.phi.iter().zip(&mut reports) {
                let c = check_tensorization(&inst.measure, |x| inst.xi(x), *phi)?;
                rep.push(
                    BoundRow::new("slack", i as f64, c.rhs - c.lhs, 0.0)
                        .with_lower(-1e-12)
                        .with_verdict(Verdict::from_bool(c.holds)),
                );
            }
        }
        Ok(reports
            .into_iter()
            .map(|r| {
                let failures = r.rows.iter().filter(|x| x.verdict == Verdict::Fail).count();
                let min = r
                    .rows
                    .iter()
                    .map(|x| x.estimate)
                    .fold(f64::INFINITY, f64::min);
                ResultEntry::from_report(r.finish())
                    .with_details(&json!({ "failures": failures, "min_slack": min }))
            })
            .collect())
    })
}

fn lsi(cfg: &ExperimentConfig) -> Vec<ResultEntry> {
    guarded("lsi-ratio", || {
        let s = section(&cfg.lsi, "lsi")?;
        let f = s.function.build(s.distributions.len())?;
        let lambdas = s
            .lambdas
            .clone()
            .unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec());
        let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
        let r = lsi_ratio(
            &s.distributions,
            &f,
            &lambdas,
            n,
            &RandomStream::new(cfg.seed),
        )?;
        let mut rep = BoundReport::new("lsi-ratio", "lambda", vec![cfg.seed], r.n_samples);
        for p in &r.points {
            rep.push(BoundRow::new(
                "ratio",
                p.lambda,
                p.ratio.value,
                p.ratio.std_error,
            ));
            if p.degenerate {
                rep.warnings.push(format!(
                    "denominator indistinguishable from 0 at lambda = {}",
                    p.lambda
                ));
            }
        }
        rep.push(BoundRow::new(
            "max_ratio",
            r.argmax_lambda,
            r.max_ratio.value,
            r.max_ratio.std_error,
        ));
        Ok(vec![ResultEntry::from_report(rep.finish())])
    })
}

fn herbst(cfg: &ExperimentConfig) -> Vec<ResultEntry> {
    guarded("herbst", || {
        let s = section(&cfg.herbst, "herbst")?;
        let f = s.function.build(s.distributions.len())?;
        let n = cfg.samples.unwrap_or(DEFAULT_HERBST_SAMPLES);
        let r = herbst_tail_check(
            &s.distributions,
            &f,
            s.c,
            &s.t_grid,
            n,
            &RandomStream::new(cfg.seed),
        )?;
        Ok(vec![ResultEntry::from_report(r)])
    })
}

fn enumerable(spec: &ChaosSpec) -> bool {
    spec.family().is_empty()
        || (spec.all_rademacher() && spec.rows() * spec.side() <= AUTO_ENUMERATION_SIGNS)
}

/// Exact law when the spec can be enumerated (an empty family is a point
/// mass at 0 for any generator).
fn exact_law(spec: &ChaosSpec) -> Result<Option<ExactDistribution>> {
    if spec.family().is_empty() {
        return Ok(Some(ExactDistribution::point_mass(0.0)));
    }
    if !enumerable(spec) {
        return Ok(None);
    }
    Ok(Some(brute_force_enumerate(spec)?))
}

fn chaos_law(
    cfg: &ExperimentConfig,
    spec: &ChaosSpec,
    exact: &Option<ExactDistribution>,
) -> Result<ChaosLaw> {
    if cfg.exact {
        let law = exact.clone().ok_or_else(|| {
            anyhow!(
                "exact mode needs a Rademacher spec with at most {AUTO_ENUMERATION_SIGNS} signs"
            )
        })?;
        return Ok(ChaosLaw::Exact(law));
    }
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    Ok(ChaosLaw::from_spec(
        spec,
        &Outer::MonteCarlo(n),
        &RandomStream::new(cfg.seed).split(0),
    )?)
}

fn norm_outer(cfg: &ExperimentConfig, n: usize) -> Outer {
    if cfg.exact {
        Outer::Exact
    } else {
        Outer::MonteCarlo(n)
    }
}

fn chaos_setup<'a>(cfg: &'a ExperimentConfig, base: &Path) -> Result<(ChaosSpec, &'a ChaosInput)> {
    let c = section(&cfg.chaos, "chaos")?;
    Ok((c.build(base)?, c))
}

/// Moment rows compared against the exact law when there is one.
fn moment_rows(
    rep: &mut BoundReport,
    quantity: &str,
    p_grid: &[f64],
    est: &[Estimate],
    exact: Option<&ExactDistribution>,
    centered: bool,
) -> Result<()> {
    for (&p, e) in p_grid.iter().zip(est) {
        let mut row = BoundRow::new(quantity, p, e.value, e.std_error);
        if let Some(law) = exact {
            let truth = exact_moment(law, p, centered)?;
            let ok = if e.std_error == 0.0 {
                (e.value - truth).abs() <= EXACT_TOL * truth.abs().max(1.0)
            } else {
                e.agrees_with(truth, 3.0)
            };
            row = row
                .with_lower(truth)
                .with_upper(truth)
                .with_verdict(Verdict::from_bool(ok));
        }
        rep.push(row);
    }
    Ok(())
}

fn chaos_moments(cfg: &ExperimentConfig, base: &Path) -> Vec<ResultEntry> {
    guarded("chaos-moments", || {
        let (spec, _) = chaos_setup(cfg, base)?;
        let s = section(&cfg.moments, "moments")?;
        let exact = exact_law(&spec)?;
        let law = chaos_law(cfg, &spec, &exact)?;
        let boot = RandomStream::new(cfg.seed).split(1);
        let raw = law.moments(&s.p_grid, false, &boot)?;
        let central = law.moments(&s.p_grid, true, &boot)?;
        let mut rep = BoundReport::new(
            "chaos-moments",
            "p",
            vec![cfg.seed],
            law.n_samples().unwrap_or(0),
        );
        moment_rows(&mut rep, "moment", &s.p_grid, &raw, exact.as_ref(), false)?;
        moment_rows(
            &mut rep,
            "central_moment",
            &s.p_grid,
            &central,
            exact.as_ref(),
            true,
        )?;
        if exact.is_none() {
            rep.warnings
                .push("no exact law for this spec; moments are report-only".into());
        }
        let mut out = vec![ResultEntry::from_report(rep.finish())];
        if s.growth && !spec.family().is_empty() {
            out.extend(guarded("moment-growth", || {
                growth(cfg, &spec, &s.p_grid, &central, s)
            }));
        }
        Ok(out)
    })
}

fn growth(
    cfg: &ExperimentConfig,
    spec: &ChaosSpec,
    p_grid: &[f64],
    central: &[Estimate],
    s: &crate::config::MomentsSection,
) -> Result<Vec<ResultEntry>> {
    let restarts = cfg.restarts.unwrap_or(DEFAULT_RESTARTS);
    let outer = norm_outer(cfg, s.norm_samples);
    let stream = RandomStream::new(cfg.seed).split(2);
    let mut norms = SubsetNorms::new(spec.order());
    let mut rep = BoundReport::new("moment-growth", "p", vec![cfg.seed], s.norm_samples as u64);
    for subset in all_subsets(spec.order()).skip(1) {
        let e = norm_t_i(spec, subset, &outer, restarts, &stream)?;
        if e.restarts_disagree {
            rep.warnings
                .push(format!("restarts disagree for subset {subset:#b}"));
        }
        norms.set(subset, e.value);
        rep.push(BoundRow::new(
            "norm_subset",
            subset as f64,
            e.value,
            e.std_error,
        ));
    }
    let mut ratios = Vec::new();
    for (&p, c) in p_grid.iter().zip(central) {
        let shape = moment_bound_euclidean(&norms, p)?;
        rep.push(BoundRow::new("shape", p, shape, 0.0));
        match ratio(c.value, shape) {
            Some(r) => {
                ratios.push(r);
                rep.push(BoundRow::new("growth_ratio", p, r, c.std_error / shape));
            }
            None => rep.warnings.push(format!("shape vanishes at p = {p}")),
        }
    }
    if let (Some(first), Some(last)) = (ratios.first(), ratios.last()) {
        if let Some(trend) = ratio(*last, *first) {
            rep.push(
                BoundRow::new("growth_trend", *p_grid.last().unwrap(), trend, 0.0)
                    .with_upper(s.trend_limit)
                    .with_verdict(Verdict::from_bool(trend < s.trend_limit)),
            );
        }
    }
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        ResultEntry::from_report(rep.finish()).with_details(&json!({ "max_growth_ratio": max }))
    ])
}

fn logconcave(cfg: &ExperimentConfig, base: &Path) -> Vec<ResultEntry> {
    guarded("logconcave-bounds", || {
        let (spec, input) = chaos_setup(cfg, base)?;
        let s = section(&cfg.logconcave, "logconcave")?;
        let funcs = input.tail_functions(&spec)?;
        let restarts = cfg.restarts.unwrap_or(DEFAULT_RESTARTS);
        let exact = if cfg.exact { exact_law(&spec)? } else { None };
        let law = chaos_law(cfg, &spec, &exact)?;
        let moments = law.moments(&s.p_grid, false, &RandomStream::new(cfg.seed).split(1))?;
        let outer = norm_outer(cfg, s.norm_samples);
        let norm_stream = RandomStream::new(cfg.seed).split(2);
        let shapes = phi_of_t(&spec, &funcs, &s.p_grid, &outer, restarts, &norm_stream)?;
        let mut rep = BoundReport::new(
            "logconcave-bounds",
            "p",
            vec![cfg.seed],
            law.n_samples().unwrap_or(0),
        );
        let mut ratios = Vec::new();
        for ((&p, m), sh) in s.p_grid.iter().zip(&moments).zip(&shapes) {
            rep.push(BoundRow::new("moment", p, m.value, m.std_error));
            rep.push(BoundRow::new("shape", p, sh.value, sh.std_error));
            if let Some(r) = ratio(m.value, sh.value) {
                let rel = |e: &Estimate| {
                    if e.value != 0.0 {
                        e.std_error / e.value
                    } else {
                        0.0
                    }
                };
                let se = r * (rel(m).powi(2) + rel(sh).powi(2)).sqrt();
                ratios.push(r);
                let mut row = BoundRow::new("ratio", p, r, se);
                if let Some(b) = &s.baseline {
                    row = row
                        .with_lower(b.lo)
                        .with_upper(b.hi)
                        .with_verdict(Verdict::from_bool(b.lo <= r && r <= b.hi));
                }
                rep.push(row);
            } else {
                rep.warnings.push(format!("shape vanishes at p = {p}"));
            }
        }
        let mut details = json!({});
        if !ratios.is_empty() {
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            details = json!({ "r_lo": lo, "r_hi": hi });
            if let Some(spread) = ratio(hi, lo) {
                rep.push(
                    BoundRow::new("band_spread", *s.p_grid.last().unwrap(), spread, 0.0)
                        .with_upper(s.band_limit)
                        .with_verdict(Verdict::from_bool(spread <= s.band_limit)),
                );
            }
        }
        let mut out = vec![ResultEntry::from_report(rep.finish()).with_details(&details)];
        if s.scaling {
            out.extend(guarded("scaling", || {
                scaling(cfg, &spec, &funcs, &outer, restarts, &norm_stream).map(|e| vec![e])
            }));
        }
        Ok(out)
    })
}

pub const SCALING_LEVELS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// `φ(xt) ≤ t^{d/2} φ(x) + 3 SE` for `x, t ∈ {1, 2, 4}` on shared draws.
pub fn scaling_report(phi: &[Estimate], order: usize, seed: u64, n: u64) -> BoundReport {
    let at = |v: f64| phi[SCALING_LEVELS.iter().position(|&l| l == v).unwrap()];
    let mut rep = BoundReport::new("scaling", "t", vec![seed], n);
    for x in [1.0, 2.0, 4.0] {
        for t in [1.0f64, 2.0, 4.0] {
            let (lhs, base) = (at(x * t), at(x));
            let factor = t.powf(order as f64 / 2.0);
            let se = (lhs.std_error.powi(2) + (factor * base.std_error).powi(2)).sqrt();
            let rhs = factor * base.value;
            rep.push(
                BoundRow::new(&format!("phi(x*t) x={x}"), t, lhs.value, lhs.std_error)
                    .with_upper(rhs)
                    .with_verdict(Verdict::from_bool(lhs.value <= rhs + 3.0 * se)),
            );
        }
    }
    rep.finish()
}

fn scaling(
    cfg: &ExperimentConfig,
    spec: &ChaosSpec,
    funcs: &[Vec<concentra_core::chaos::TailFunctionN>],
    outer: &Outer,
    restarts: usize,
    stream: &RandomStream,
) -> Result<ResultEntry> {
    let phi = phi_of_t(spec, funcs, &SCALING_LEVELS, outer, restarts, stream)?;
    let n = match outer {
        Outer::MonteCarlo(n) => *n as u64,
        Outer::Exact => 0,
    };
    Ok(ResultEntry::from_report(scaling_report(
        &phi,
        spec.order(),
        cfg.seed,
        n,
    )))
}

fn certificate(cfg: &ExperimentConfig, base: &Path) -> Vec<ResultEntry> {
    guarded("tail-certificate", || {
        let (spec, _) = chaos_setup(cfg, base)?;
        let s = section(&cfg.certificate, "certificate")?;
        let exact = if cfg.exact { exact_law(&spec)? } else { None };
        let law = chaos_law(cfg, &spec, &exact)?;
        let m = match s.threshold {
            Some(m) => m,
            None => {
                let med = law.median();
                ensure!(med > 0.0, "median of Z is 0; set certificate.threshold");
                med
            }
        };
        let c = tail_certificate(
            &law,
            spec.order(),
            m,
            s.alpha,
            s.epsilon,
            &s.t_grid,
            cfg.seed,
        )?;
        Ok(vec![ResultEntry::from_report(c.report.clone())
            .with_details(&json!({
                "threshold": c.threshold,
                "prob_above_threshold": c.prob_above_threshold,
                "meaningful": c.meaningful,
                "least_l": c.least_l,
                "per_t": c.per_t,
            }))])
    })
}

fn compare(cfg: &ExperimentConfig, base: &Path) -> Vec<ResultEntry> {
    guarded("decouple-compare", || {
        let (spec, input) = chaos_setup(cfg, base)?;
        let s = section(&cfg.compare, "compare")?;
        let tensor = spec
            .family()
            .first()
            .ok_or_else(|| anyhow!("decouple-compare needs one tensor"))?;
        let outer = norm_outer(cfg, cfg.samples.unwrap_or(DEFAULT_SAMPLES));
        let r = decoupled_undecoupled_compare(
            tensor,
            &input.generator,
            &s.p_grid,
            &outer,
            &RandomStream::new(cfg.seed),
        )?;
        Ok(vec![ResultEntry::from_report(r)])
    })
}

fn integrability(cfg: &ExperimentConfig, base: &Path) -> Vec<ResultEntry> {
    guarded("exp-integrability-trend", || {
        let s = section(&cfg.integrability, "integrability")?;
        let specs = s
            .specs
            .iter()
            .map(|c| c.build(base))
            .collect::<Result<Vec<_>>>()?;
        let outer = if cfg.exact || specs.iter().all(enumerable) {
            Outer::Exact
        } else {
            Outer::MonteCarlo(cfg.samples.unwrap_or(DEFAULT_SAMPLES))
        };
        let r = exp_integrability_trend(&specs, &s.alphas, &outer, &RandomStream::new(cfg.seed))?;
        Ok(vec![ResultEntry::from_report(r)])
    })
}
