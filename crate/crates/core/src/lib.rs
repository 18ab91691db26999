//! Collision-probability estimation and average-search-time bounds for hash
//! tables with chaining.
//!
//! Keys drawn i.i.d. from a distribution `q` over a finite universe are hashed
//! into `n` slots. The slot counts `k_i` of an inserted sequence give the
//! empirical collision probability `sum_i k_i (k_i - 1) / (m (m - 1))`, an
//! unbiased estimate of `||p||^2`, where `p` is the induced slot distribution.
//! [`bounds`] evaluates the closed-form deviation bounds on its relative
//! error, [`ast`] the bounds on a user's average search time, and
//! [`experiments`] measures their empirical coverage by seeded Monte Carlo.

pub mod ast;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod format;
pub mod hashing;
pub mod probability;
pub mod rng;

pub use ast::{
    ast_bound_eps, ast_bound_s, ast_exact, ast_upper_empirical, example1_bound, example2_bound,
    AstBound, Example1Bound, Example2Bound,
};
pub use bounds::{
    cor_fixed_s, cor_gr_form, cor_load_factor, gr_bound, main_bound, params_from_load,
    BoundParams, DeviationBound,
};
pub use error::{Error, Result};
pub use estimator::{
    brute_force_collision_pairs, collision_pairs, empirical_collision_probability,
    relative_error, true_collision_probability, CollisionEstimate,
};
pub use experiments::{
    check_perturbation_lemma, run_ast_trials, run_collision_trials, run_experiment,
    unbiasedness_check, ExperimentConfig, ExperimentReport,
};
pub use hashing::{count_slots, distinct_counts, slot_probabilities, HashModel, SlotCounts};
pub use probability::{KeySequence, ProbabilityVector};
