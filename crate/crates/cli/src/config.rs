//! Declarative experiment configs (TOML).

use std::path::{Path, PathBuf};

use concentra_core::chaos::{ChaosSpec, CoefficientTensor, TailFunctionN};
use concentra_core::distributions::{ClassMParams, DistributionSpec};
use concentra_core::entropy::{ConvexFunctionSpec, PhiFunction};
use serde::{Deserialize, Serialize};

use crate::fixtures;
use crate::tensor_io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ClassMCheck,
    EntropyTensorization,
    LsiRatio,
    Herbst,
    ChaosMoments,
    LogconcaveBounds,
    TailCertificate,
    DecoupleCompare,
    ExpIntegrabilityTrend,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::ClassMCheck,
        Self::EntropyTensorization,
        Self::LsiRatio,
        Self::Herbst,
        Self::ChaosMoments,
        Self::LogconcaveBounds,
        Self::TailCertificate,
        Self::DecoupleCompare,
        Self::ExpIntegrabilityTrend,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ClassMCheck => "class-m-check",
            Self::EntropyTensorization => "entropy-tensorization",
            Self::LsiRatio => "lsi-ratio",
            Self::Herbst => "herbst",
            Self::ChaosMoments => "chaos-moments",
            Self::LogconcaveBounds => "logconcave-bounds",
            Self::TailCertificate => "tail-certificate",
            Self::DecoupleCompare => "decouple-compare",
            Self::ExpIntegrabilityTrend => "exp-integrability-trend",
        }
    }

    /// Sections this kind reads.
    fn sections(self) -> &'static [&'static str] {
        match self {
            Self::ClassMCheck => &["class_m"],
            Self::EntropyTensorization => &["tensorization"],
            Self::LsiRatio => &["lsi"],
            Self::Herbst => &["herbst"],
            Self::ChaosMoments => &["chaos", "moments"],
            Self::LogconcaveBounds => &["chaos", "logconcave"],
            Self::TailCertificate => &["chaos", "certificate"],
            Self::DecoupleCompare => &["chaos", "compare"],
            Self::ExpIntegrabilityTrend => &["integrability"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File stem for the report and table; defaults to the experiment kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match (self.spacing, self.points) {
            (_, 0) => Vec::new(),
            (_, 1) => vec![self.lo],
            (Spacing::Linear, n) => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
            (Spacing::Geometric, n) => {
                concentra_core::distributions::geometric_grid(self.lo, self.hi, n)
            }
        }
    }

    fn check(&self, what: &str, errs: &mut Vec<String>) {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) || self.points == 0 {
            errs.push(format!("{what}: need finite lo <= hi and points >= 1"));
        }
        if self.spacing == Spacing::Geometric && !(self.lo > 0.0) {
            errs.push(format!("{what}: geometric spacing needs lo > 0"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConstants {
    pub c: f64,
    pub alpha: f64,
}

fn default_quad_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassMSection {
    pub distribution: DistributionSpec,
    pub m: f64,
    pub sigma_sq: f64,
    /// Defaults to 200 geometric points on `[m, m + 5σ + 5]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Constants for the equivalent tail form; defaults to `C = 2σ²`, `α = 1/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceConstants>,
    #[serde(default = "default_quad_step")]
    pub quad_step: f64,
}

fn default_phis() -> Vec<PhiFunction> {
    PhiFunction::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorizationSection {
    pub instances: usize,
    pub max_factors: usize,
    pub max_atoms: usize,
    #[serde(default = "default_phis")]
    pub phi: Vec<PhiFunction>,
}

/// A convex function of the product vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionInput {
    Pieces {
        pieces: ConvexFunctionSpec,
    },
    /// `f(x) = x_index`.
    Coordinate {
        index: usize,
    },
    /// `f(x) = Σ x_i / √n`.
    NormalizedSum,
    /// Maximum of `count` affine pieces with random unit slopes and
    /// intercepts in `[0, 1)`, drawn from `seed`.
    RandomUnitPieces {
        count: usize,
        seed: u64,
    },
}

impl FunctionInput {
    pub fn build(&self, dim: usize) -> anyhow::Result<ConvexFunctionSpec> {
        Ok(match self {
            Self::Pieces { pieces } => {
                anyhow::ensure!(
                    pieces.dim() == dim,
                    "function dimension {} != {dim}",
                    pieces.dim()
                );
                pieces.clone()
            }
            Self::Coordinate { index } => {
                anyhow::ensure!(*index < dim, "coordinate {index} out of range");
                let mut slope = vec![0.0; dim];
                slope[*index] = 1.0;
                ConvexFunctionSpec::linear(slope)?
            }
            Self::NormalizedSum => {
                ConvexFunctionSpec::linear(vec![1.0 / (dim as f64).sqrt(); dim])?
            }
            Self::RandomUnitPieces { count, seed } => {
                fixtures::random_unit_pieces(dim, *count, *seed)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsiSection {
    pub distributions: Vec<DistributionSpec>,
    pub function: FunctionInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HerbstSection {
    pub distributions: Vec<DistributionSpec>,
    pub function: FunctionInput,
    pub c: f64,
    pub t_grid: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

/// Where a coefficient tensor comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TensorInput {
    Inline {
        order: usize,
        side: usize,
        entries: Vec<f64>,
        #[serde(default)]
        symmetric: bool,
        #[serde(default)]
        zero_diagonal: bool,
    },
    /// Text or binary tensor file; relative paths resolve against the
    /// config file's directory.
    File { path: PathBuf },
    Identity {
        side: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Order-2, ones off the diagonal.
    OffDiagonalOnes {
        side: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Independent ±1 entries (symmetric with zero diagonal on request).
    RandomSign {
        order: usize,
        side: usize,
        seed: u64,
        #[serde(default)]
        symmetric: bool,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Independent standard Gaussian entries.
    RandomGaussian {
        order: usize,
        side: usize,
        seed: u64,
        #[serde(default)]
        symmetric: bool,
    },
}

impl TensorInput {
    pub fn build(&self, base: &Path) -> anyhow::Result<CoefficientTensor> {
        Ok(match self {
            Self::Inline {
                order,
                side,
                entries,
                symmetric,
                zero_diagonal,
            } => {
                CoefficientTensor::new(*order, *side, entries.clone(), *symmetric, *zero_diagonal)?
            }
            Self::File { path } => tensor_io::read_tensor(&base.join(path))?,
            Self::Identity { side, scale } => CoefficientTensor::identity(*side)?.scaled(*scale),
            Self::OffDiagonalOnes { side, scale } => {
                let n = *side;
                let e = (0..n * n)
                    .map(|f| if f / n == f % n { 0.0 } else { *scale })
                    .collect();
                CoefficientTensor::new(2, n, e, true, true)?
            }
            Self::RandomSign {
                order,
                side,
                seed,
                symmetric,
                scale,
            } => fixtures::random_sign_tensor(*order, *side, *seed, *symmetric)?.scaled(*scale),
            Self::RandomGaussian {
                order,
                side,
                seed,
                symmetric,
            } => fixtures::random_gaussian_tensor(*order, *side, *seed, *symmetric)?,
        })
    }
}

fn rademacher() -> DistributionSpec {
    DistributionSpec::Rademacher
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosInput {
    #[serde(default)]
    pub family: Vec<TensorInput>,
    /// Required when the family is empty, otherwise read from the tensors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[serde(default = "rademacher")]
    pub generator: DistributionSpec,
    #[serde(default = "yes")]
    pub decoupled: bool,
    /// Tail functions per generator row; defaults to those of the generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_functions: Option<Vec<Vec<TailFunctionN>>>,
}

impl ChaosInput {
    pub fn build(&self, base: &Path) -> anyhow::Result<ChaosSpec> {
        let family = self
            .family
            .iter()
            .map(|t| t.build(base))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let order = self
            .order
            .or(family.first().map(|t| t.order()))
            .ok_or_else(|| anyhow::anyhow!("empty family needs `order`"))?;
        let side = self
            .side
            .or(family.first().map(|t| t.side()))
            .ok_or_else(|| anyhow::anyhow!("empty family needs `side`"))?;
        Ok(ChaosSpec::with_generator(
            order,
            side,
            family,
            self.generator.clone(),
            self.decoupled,
        )?)
    }

    pub fn tail_functions(&self, spec: &ChaosSpec) -> anyhow::Result<Vec<Vec<TailFunctionN>>> {
        match &self.tail_functions {
            Some(f) => Ok(f.clone()),
            None => Ok(concentra_core::chaos::tail_functions_for(spec)?),
        }
    }
}

fn default_norm_samples() -> usize {
    200
}

fn default_trend_limit() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsSection {
    pub p_grid: Vec<f64>,
    /// Also estimate `‖T‖_I` and the moment-growth shape.
    #[serde(default = "yes")]
    pub growth: bool,
    #[serde(default = "default_norm_samples")]
    pub norm_samples: usize,
    /// Largest allowed last/first ratio of the growth-shape ratios.
    #[serde(default = "default_trend_limit")]
    pub trend_limit: f64,
}

fn default_band_limit() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogconcaveSection {
    pub p_grid: Vec<f64>,
    #[serde(default = "default_norm_samples")]
    pub norm_samples: usize,
    /// Largest allowed `r_hi / r_lo` over the p-grid.
    #[serde(default = "default_band_limit")]
    pub band_limit: f64,
    /// Recorded band the ratios must stay within.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Band>,
    /// Check `φ(xt) ≤ t^{d/2} φ(x)` for `x, t ∈ {1, 2, 4}`.
    #[serde(default = "yes")]
    pub scaling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    /// `M`; defaults to the median of `Z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub alpha: f64,
    pub epsilon: f64,
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub p_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrabilitySection {
    pub alphas: Vec<f64>,
    pub specs: Vec<ChaosInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo sample count for the main estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Force exact enumeration wherever the experiment offers it.
    #[serde(default)]
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_m: Option<ClassMSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensorization: Option<TensorizationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lsi: Option<LsiSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herbst: Option<HerbstSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chaos: Option<ChaosInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logconcave: Option<LogconcaveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrability: Option<IntegrabilitySection>,
}

/// A config that failed to parse or validate; lists every problem found.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "invalid config ({} problem(s)):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn check_p_grid(what: &str, grid: &[f64], errs: &mut Vec<String>) {
    if grid.is_empty() {
        errs.push(format!("{what}: grid is empty"));
    }
    if grid.iter().any(|p| !(*p >= 1.0) || !p.is_finite()) {
        errs.push(format!("{what}: entries must be finite and >= 1"));
    }
}

fn check_ascending(what: &str, grid: &[f64], errs: &mut Vec<String>) {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        errs.push(format!("{what}: must be strictly ascending"));
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError {
            violations: vec![e.message().to_string()],
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn present(&self) -> [(&'static str, bool); 10] {
        [
            ("class_m", self.class_m.is_some()),
            ("tensorization", self.tensorization.is_some()),
            ("lsi", self.lsi.is_some()),
            ("herbst", self.herbst.is_some()),
            ("chaos", self.chaos.is_some()),
            ("moments", self.moments.is_some()),
            ("logconcave", self.logconcave.is_some()),
            ("certificate", self.certificate.is_some()),
            ("compare", self.compare.is_some()),
            ("integrability", self.integrability.is_some()),
        ]
    }

    /// Every violation found, checking sections and building the inputs
    /// (tensor files are read relative to `base`).
    pub fn validate(&self, base: &Path) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let wanted = self.kind.sections();
        for (name, is_set) in self.present() {
            if wanted.contains(&name) && !is_set {
                errs.push(format!("kind {} needs section [{name}]", self.kind.name()));
            }
            if !wanted.contains(&name) && is_set {
                errs.push(format!(
                    "section [{name}] is not used by kind {}",
                    self.kind.name()
                ));
            }
        }
        if self.samples == Some(0) {
            errs.push("samples must be positive".into());
        }
        if self.restarts == Some(0) {
            errs.push("restarts must be positive".into());
        }
        if let Some(s) = &self.class_m {
            if let Err(e) = s.distribution.validate() {
                errs.push(format!("class_m.distribution: {e}"));
            }
            if let Err(e) = ClassMParams::new(s.m, s.sigma_sq) {
                errs.push(format!("class_m: {e}"));
            }
            if let Some(g) = &s.grid {
                g.check("class_m.grid", &mut errs);
                if g.lo < s.m {
                    errs.push("class_m.grid: lo must be >= m".into());
                }
            }
            if let Some(eq) = &s.equivalence {
                if !(eq.c > 0.0 && eq.alpha > 0.0) {
                    errs.push("class_m.equivalence: need c > 0 and alpha > 0".into());
                }
            }
            if !(s.quad_step > 0.0) {
                errs.push("class_m.quad_step must be positive".into());
            }
        }
        if let Some(s) = &self.tensorization {
            if s.instances == 0 || s.max_factors == 0 || s.max_atoms == 0 {
                errs.push(
                    "tensorization: instances, max_factors and max_atoms must be positive".into(),
                );
            }
            if s.phi.is_empty() {
                errs.push("tensorization.phi is empty".into());
            }
        }
        let check_dists =
            |what: &str, dists: &[DistributionSpec], f: &FunctionInput, errs: &mut Vec<String>| {
                if dists.is_empty() {
                    errs.push(format!("{what}.distributions is empty"));
                }
                for (i, d) in dists.iter().enumerate() {
                    if let Err(e) = d.validate() {
                        errs.push(format!("{what}.distributions[{i}]: {e}"));
                    }
                }
                if let Err(e) = f.build(dists.len()) {
                    errs.push(format!("{what}.function: {e}"));
                }
            };
        if let Some(s) = &self.lsi {
            check_dists("lsi", &s.distributions, &s.function, &mut errs);
            if let Some(l) = &s.lambdas {
                if l.is_empty() || l.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    errs.push("lsi.lambdas must be nonempty, positive and finite".into());
                }
            }
        }
        if let Some(s) = &self.herbst {
            check_dists("herbst", &s.distributions, &s.function, &mut errs);
            if !(s.c > 0.0) {
                errs.push("herbst.c must be positive".into());
            }
            if s.t_grid.is_empty() || s.t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
                errs.push("herbst.t_grid must be nonempty, finite and >= 0".into());
            }
        }
        let mut built = None;
        if let Some(c) = &self.chaos {
            match c.build(base) {
                Ok(spec) => {
                    if let Err(e) = c.tail_functions(&spec) {
                        if self.kind == ExperimentKind::LogconcaveBounds {
                            errs.push(format!("chaos.tail_functions: {e}"));
                        }
                    }
                    built = Some(spec);
                }
                Err(e) => errs.push(format!("chaos: {e}")),
            }
        }
        if let Some(s) = &self.moments {
            check_p_grid("moments.p_grid", &s.p_grid, &mut errs);
            if s.norm_samples == 0 || !(s.trend_limit > 0.0) {
                errs.push("moments: norm_samples and trend_limit must be positive".into());
            }
        }
        if let Some(s) = &self.logconcave {
            check_p_grid("logconcave.p_grid", &s.p_grid, &mut errs);
            check_ascending("logconcave.p_grid", &s.p_grid, &mut errs);
            if s.norm_samples == 0 || !(s.band_limit >= 1.0) {
                errs.push("logconcave: norm_samples must be positive and band_limit >= 1".into());
            }
            if let Some(b) = &s.baseline {
                if !(b.lo > 0.0 && b.hi >= b.lo) {
                    errs.push("logconcave.baseline: need 0 < lo <= hi".into());
                }
            }
        }
        if let Some(s) = &self.certificate {
            if let Some(m) = s.threshold {
                if !(m > 0.0) {
                    errs.push("certificate.threshold must be positive".into());
                }
            }
            if !(s.alpha > 0.0) || !(s.epsilon > 0.0 && s.epsilon < 1.0) {
                errs.push("certificate: need alpha > 0 and 0 < epsilon < 1".into());
            }
            if s.t_grid.is_empty() || s.t_grid.iter().any(|t| !(*t >= 1.0) || !t.is_finite()) {
                errs.push("certificate.t_grid must be nonempty with finite t >= 1".into());
            }
        }
        if let Some(s) = &self.compare {
            check_p_grid("compare.p_grid", &s.p_grid, &mut errs);
            if let Some(spec) = &built {
                match spec.family() {
                    [t] if t.symmetric() && t.zero_diagonal() => {}
                    _ => errs.push(
                        "decouple-compare needs exactly one symmetric zero-diagonal tensor".into(),
                    ),
                }
            }
        }
        if let Some(s) = &self.integrability {
            if s.alphas.is_empty() || s.alphas.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
                errs.push("integrability.alphas must be nonempty, finite and >= 0".into());
            }
            if s.specs.is_empty() {
                errs.push("integrability.specs is empty".into());
            }
            for (i, c) in s.specs.iter().enumerate() {
                if let Err(e) = c.build(base) {
                    errs.push(format!("integrability.specs[{i}]: {e}"));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations: errs })
        }
    }

    /// Reads, parses and validates. Relative tensor paths are taken from the
    /// config file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        let cfg = Self::from_toml(&text)?;
        cfg.validate(path.parent().unwrap_or(Path::new(".")))?;
        Ok(cfg)
    }

    pub fn stem(&self) -> String {
        self.output
            .stem
            .clone()
            .unwrap_or_else(|| self.kind.name().to_string())
    }
}
