//! Homogeneous chaoses over finite coefficient families: evaluation,
//! sampling, constrained multilinear maximization, the norm quantities and
//! the moment/tail bound shapes assembled from them.

mod ascent;
mod ball;
mod norms;
mod spec;
mod tail_fn;
mod tails;
mod tensor;

pub use ascent::{
    sup_over_balls, sup_over_balls_warm, AscentResult, MultilinearForm, DEFAULT_RESTARTS,
    RESTART_SPREAD_TOL,
};
pub use ball::{solve_ball_argmax, BallArgmax, BallConstraint, MAX_NONCONVEX_TABULATED};
pub use norms::{
    all_subsets, moment_bound_euclidean, moment_bound_logconcave, norm_t_i, norm_t_n_i_p, phi_of_t,
    subset_size, tail_functions_for, NormEstimate, Outer, Subset, SubsetNorms, MAX_PATTERNS,
};
pub use spec::{contract, evaluate_chaos, full_contract, sample_chaos, ChaosSpec};
pub use tail_fn::TailFunctionN;
pub use tails::{
    decoupled_undecoupled_compare, exp_integrability, exp_integrability_trend, tail_certificate,
    ChaosLaw, ExpMoment, TailCertificate, TAIL_RESOLUTION,
};
pub use tensor::{CoefficientTensor, MAX_ORDER};
