//! Cross-checks of the main routines against the independent oracles.

use anyhow::Result;
use concentra_core::chaos::{
    norm_t_i, solve_ball_argmax, sup_over_balls, BallConstraint, ChaosLaw, ChaosSpec,
    CoefficientTensor, MultilinearForm, Outer, DEFAULT_RESTARTS,
};
use concentra_core::oracles::{
    brute_force_enumerate, form_sup_oracle, rademacher_sum_law, water_fill, OracleBall,
};
use concentra_core::stats::{exact_moment, ExactDistribution};
use concentra_core::RandomStream;
use serde::Serialize;

use crate::fixtures;

/// Relative shortfall of block ascent below the grid oracle that is tolerated.
pub const ASCENT_SHORTFALL: f64 = 1e-4;
/// Grid points spent per form by the oracles.
pub const GRID_BUDGET: f64 = 2e5;
/// Pattern-search iterations after the grid pass.
pub const POLISH_STEPS: usize = 400;

/// Grid spacing on `[-1, 1]^dim` that keeps the grid near [`GRID_BUDGET`].
pub fn oracle_resolution(dim: usize) -> f64 {
    let per_axis = if dim == 0 {
        2.0
    } else {
        GRID_BUDGET.powf(1.0 / dim as f64).floor().max(2.0)
    };
    2.0 / (per_axis - 1.0)
}

/// Dimension of the grid [`form_sup_oracle`] searches for these balls.
pub fn oracle_grid_dim(side: usize, balls: &[OracleBall]) -> usize {
    let m = balls.len();
    let pair = m >= 2 && balls[m - 2..].iter().all(|b| *b == OracleBall::Euclidean);
    let tail = if pair { 2 } else { 1 };
    m.saturating_sub(tail) * side
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> OracleCheck {
    OracleCheck {
        name: name.into(),
        passed,
        detail,
    }
}

fn to_constraint(ball: OracleBall, side: usize) -> Result<BallConstraint> {
    Ok(match ball {
        OracleBall::Euclidean => BallConstraint::EuclideanUnit,
        OracleBall::Rademacher { p } => BallConstraint::rademacher(side, p)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormCheck {
    pub ascent: f64,
    pub oracle: f64,
    pub resolution_bound: f64,
    /// Ascent is not below the oracle by more than the tolerated shortfall.
    pub not_short: bool,
    /// Ascent does not exceed the oracle by more than its resolution bound.
    pub within_resolution: bool,
}

/// Block ascent against the grid oracle on one form.
pub fn cross_validate_form(
    coeffs: &[f64],
    side: usize,
    balls: &[OracleBall],
    restarts: usize,
    stream: &RandomStream,
) -> Result<FormCheck> {
    let form = MultilinearForm::new(balls.len(), side, coeffs.to_vec())?;
    let cons = balls
        .iter()
        .map(|&b| to_constraint(b, side))
        .collect::<Result<Vec<_>>>()?;
    let ascent = sup_over_balls(&form, &cons, restarts, stream)?.value;
    let res = oracle_resolution(oracle_grid_dim(side, balls));
    let oracle = form_sup_oracle(coeffs, side, balls, res, POLISH_STEPS)?;
    let scale = oracle.value.abs().max(f64::MIN_POSITIVE);
    Ok(FormCheck {
        ascent,
        oracle: oracle.value,
        resolution_bound: oracle.resolution_bound,
        not_short: ascent >= oracle.value - ASCENT_SHORTFALL * scale,
        within_resolution: ascent <= oracle.value + oracle.resolution_bound + 1e-12 * scale,
    })
}

/// A random form with `blocks ≤ 3` and `side ≤ 4`, keeping the oracle's
/// grid dimension at most 6.
pub fn random_form(rng: &mut RandomStream) -> (Vec<f64>, usize, Vec<OracleBall>) {
    let blocks = 1 + rng.below(3) as usize;
    let max_side = if blocks == 3 { 3 } else { 4 };
    let side = 1 + rng.below(max_side) as usize;
    let g = concentra_core::distributions::DistributionSpec::standard_gaussian();
    let coeffs = (0..side.pow(blocks as u32))
        .map(|_| g.sample(rng))
        .collect();
    let balls = (0..blocks)
        .map(|_| {
            if rng.uniform() < 0.5 {
                OracleBall::Euclidean
            } else {
                OracleBall::Rademacher {
                    p: 1.0 + rng.uniform() * side as f64,
                }
            }
        })
        .collect();
    (coeffs, side, balls)
}

fn law_matches(a: &ExactDistribution, support: &[f64], probs: &[f64]) -> bool {
    a.support() == support
        && a.probs()
            .iter()
            .zip(probs)
            .all(|(x, y)| (x - y).abs() < 1e-15)
}

pub fn run_oracle_suite(seed: u64) -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    let stream = RandomStream::new(seed);

    let id2 = ChaosSpec::rademacher(2, 2, vec![CoefficientTensor::identity(2)?], true)?;
    let law = brute_force_enumerate(&id2)?;
    out.push(check(
        "enumerate identity 2x2",
        law_matches(&law, &[0.0, 2.0], &[0.5, 0.5]),
        format!("{:?} {:?}", law.support(), law.probs()),
    ));
    let zero = ChaosSpec::rademacher(3, 3, vec![CoefficientTensor::zeros(3, 3)?], true)?;
    let law = brute_force_enumerate(&zero)?;
    out.push(check(
        "enumerate zero tensor",
        law == ExactDistribution::point_mass(0.0),
        format!("{law:?}"),
    ));

    let mut ok = true;
    for n in [4u32, 8, 12] {
        let spec = ChaosSpec::rademacher(
            1,
            n as usize,
            vec![CoefficientTensor::vector(vec![1.0; n as usize])?],
            true,
        )?;
        let enumerated = brute_force_enumerate(&spec)?;
        let folded = ExactDistribution::from_pairs(
            rademacher_sum_law(n)?.iter().map(|(v, p)| (v.abs(), p)),
        )?;
        ok &= enumerated.support() == folded.support()
            && enumerated
                .probs()
                .iter()
                .zip(folded.probs())
                .all(|(a, b)| (a - b).abs() < 1e-14);
    }
    out.push(check(
        "linear chaos vs binomial law",
        ok,
        "n = 4, 8, 12".into(),
    ));

    let m = ExactDistribution::from_pairs([(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)])?;
    let v = exact_moment(&m, 4.0, false)?;
    out.push(check(
        "exact fourth moment",
        (v - 8f64.powf(0.25)).abs() < 1e-15,
        format!("{v}"),
    ));

    let mut rng = stream.split(0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = 1 + rng.below(8) as usize;
        let c: Vec<f64> = (0..n).map(|_| 4.0 * rng.uniform() - 2.0).collect();
        let p = 1.0 + rng.uniform() * n as f64;
        let solver = solve_ball_argmax(&c, &BallConstraint::rademacher(n, p)?)?.value;
        let closed = water_fill(&c, p);
        worst = worst.max((solver - closed).abs() / closed.abs().max(1.0));
    }
    out.push(check(
        "water-fill vs ball solver",
        worst < 1e-9,
        format!("worst rel diff {worst:e}"),
    ));

    let mut rng = stream.split(1);
    let (mut short, mut over) = (0, 0);
    for i in 0..10 {
        let (coeffs, side, balls) = random_form(&mut rng);
        let c = cross_validate_form(
            &coeffs,
            side,
            &balls,
            DEFAULT_RESTARTS,
            &stream.split(100 + i),
        )?;
        short += usize::from(!c.not_short);
        over += usize::from(!c.within_resolution);
    }
    out.push(check(
        "block ascent vs grid oracle",
        short == 0 && over == 0,
        format!("{short} short, {over} above resolution bound, of 10"),
    ));

    let exact =
        |s: u32| norm_t_i(&id2, s, &Outer::Exact, DEFAULT_RESTARTS, &stream).map(|e| e.value);
    let (n0, n1, n12) = (exact(0)?, exact(1)?, exact(3)?);
    out.push(check(
        "identity norms",
        (n0 - 1.0).abs() < 1e-12 && (n1 - 2f64.sqrt()).abs() < 1e-12 && (n12 - 1.0).abs() < 1e-12,
        format!("{n0} {n1} {n12}"),
    ));

    let mut ok = true;
    let mut detail = String::new();
    for (name, spec) in fixtures::enumeration_fixtures()?
        .into_iter()
        .filter(|(_, s)| s.order() >= 2)
        .take(4)
    {
        let law = ChaosLaw::from_spec(&spec, &Outer::MonteCarlo(100_000), &stream.split(2))?;
        let exact = brute_force_enumerate(&spec)?;
        for (e, p) in law
            .moments(&[1.0, 2.0, 4.0], false, &stream.split(3))?
            .iter()
            .zip([1.0, 2.0, 4.0])
        {
            let truth = exact_moment(&exact, p, false)?;
            if !e.agrees_with(truth, 3.0) {
                ok = false;
                detail.push_str(&format!("{name} p={p}: {} vs {truth}; ", e.value));
            }
        }
    }
    out.push(check("Monte Carlo moments vs enumeration", ok, detail));
    Ok(out)
}
