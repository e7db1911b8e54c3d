//! A fixed battery of small experiments, one per kind.

use concentra_core::chaos::CoefficientTensor;
use concentra_core::distributions::DistributionSpec;

use crate::config::*;

fn base(kind: ExperimentKind, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        seed,
        samples: None,
        exact: false,
        restarts: None,
        output: OutputConfig {
            dir: None,
            stem: Some(format!("selftest-{}", kind.name())),
        },
        class_m: None,
        tensorization: None,
        lsi: None,
        herbst: None,
        chaos: None,
        moments: None,
        logconcave: None,
        certificate: None,
        compare: None,
        integrability: None,
    }
}

fn chaos(family: Vec<TensorInput>) -> ChaosInput {
    ChaosInput {
        family,
        order: None,
        side: None,
        generator: DistributionSpec::Rademacher,
        decoupled: true,
        tail_functions: None,
    }
}

fn normalized_ones(n: usize) -> ChaosInput {
    let t = CoefficientTensor::vector(vec![1.0 / (n as f64).sqrt(); n]).unwrap();
    chaos(vec![TensorInput::Inline {
        order: 1,
        side: n,
        entries: t.entries().to_vec(),
        symmetric: false,
        zero_diagonal: false,
    }])
}

pub fn configs(seed: u64) -> Vec<ExperimentConfig> {
    let gauss = DistributionSpec::standard_gaussian();
    let mut out = Vec::new();

    let mut c = base(ExperimentKind::ClassMCheck, seed);
    c.class_m = Some(ClassMSection {
        distribution: gauss.clone(),
        m: 1.0,
        sigma_sq: 1.0,
        grid: Some(GridSpec {
            lo: 1.0,
            hi: 6.0,
            points: 40,
            spacing: Spacing::Linear,
        }),
        equivalence: None,
        quad_step: 0.01,
    });
    out.push(c);

    let mut c = base(ExperimentKind::EntropyTensorization, seed);
    c.tensorization = Some(TensorizationSection {
        instances: 50,
        max_factors: 3,
        max_atoms: 4,
        phi: concentra_core::entropy::PhiFunction::ALL.to_vec(),
    });
    out.push(c);

    let mut c = base(ExperimentKind::LsiRatio, seed);
    c.samples = Some(20_000);
    c.lsi = Some(LsiSection {
        distributions: vec![gauss.clone()],
        function: FunctionInput::Coordinate { index: 0 },
        lambdas: Some(vec![0.5, 1.0]),
    });
    out.push(c);

    let mut c = base(ExperimentKind::Herbst, seed);
    c.samples = Some(50_000);
    c.herbst = Some(HerbstSection {
        distributions: vec![gauss],
        function: FunctionInput::Coordinate { index: 0 },
        c: 0.5,
        t_grid: vec![1.0, 2.0],
    });
    out.push(c);

    let mut c = base(ExperimentKind::ChaosMoments, seed);
    c.exact = true;
    c.chaos = Some(chaos(vec![TensorInput::Identity {
        side: 2,
        scale: 1.0,
    }]));
    c.moments = Some(MomentsSection {
        p_grid: vec![1.0, 2.0, 4.0],
        growth: true,
        norm_samples: 50,
        trend_limit: 2.0,
    });
    out.push(c);

    let mut c = base(ExperimentKind::LogconcaveBounds, seed);
    c.exact = true;
    c.restarts = Some(5);
    c.chaos = Some(chaos(vec![TensorInput::Identity {
        side: 3,
        scale: 1.0,
    }]));
    c.logconcave = Some(LogconcaveSection {
        p_grid: vec![1.0, 2.0, 4.0],
        norm_samples: 50,
        band_limit: 20.0,
        baseline: None,
        scaling: true,
    });
    out.push(c);

    let mut c = base(ExperimentKind::TailCertificate, seed);
    c.exact = true;
    c.chaos = Some(chaos(vec![TensorInput::Identity {
        side: 3,
        scale: 1.0,
    }]));
    c.certificate = Some(CertificateSection {
        threshold: Some(1.0),
        alpha: 1.0,
        epsilon: 0.9,
        t_grid: vec![1.0, 2.0, 4.0],
    });
    out.push(c);

    let mut c = base(ExperimentKind::DecoupleCompare, seed);
    c.exact = true;
    c.chaos = Some(chaos(vec![TensorInput::OffDiagonalOnes {
        side: 3,
        scale: 1.0,
    }]));
    c.compare = Some(CompareSection {
        p_grid: vec![1.0, 2.0, 4.0, 8.0],
    });
    out.push(c);

    let mut c = base(ExperimentKind::ExpIntegrabilityTrend, seed);
    c.integrability = Some(IntegrabilitySection {
        alphas: vec![0.1, 0.2],
        specs: [4, 8, 16].map(normalized_ones).to_vec(),
    });
    out.push(c);
    out
}
