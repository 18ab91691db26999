//! Seeded Monte Carlo harness measuring how often each bound is exceeded.
//!
//! Trial `t` of a run draws its keys from `trial_seed(base_seed, t)` only, so
//! trials run in parallel and any single trial can be replayed on its own.
//! Reports are assembled in trial order and are byte-identical across runs
//! apart from `wall_clock_seconds`.

mod config;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{BoundSpec, DistSpec, ExperimentConfig, ExperimentKind, HashSpec};
pub use report::{Aggregates, ExperimentReport, TheoreticalBound, TrialRecord};

use crate::ast::{ast_bound_eps, ast_bound_s, ast_exact, ast_upper_empirical};
use crate::bounds::{cor_fixed_s, cor_gr_form, cor_load_factor, gr_bound, main_bound};
use crate::error::{Error, Result};
use crate::estimator::empirical_collision_probability;
use crate::hashing::{count_slots, slot_probabilities, HashModel};
use crate::probability::{KeySampler, KeySequence, ProbabilityVector};
use crate::rng::{trial_seed, KeyRng};

/// Runs with more trials keep a reservoir sample instead of every record.
pub const MAX_RECORDS: u64 = 1_000_000;
pub const RESERVOIR_SIZE: usize = 10_000;

const CHUNK: u64 = 1 << 16;
const RESERVOIR_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// Highest violation frequency consistent with a tail probability `tail`:
/// the tail itself plus three binomial standard errors.
pub fn coverage_ceiling(tail: f64, trials: u64) -> f64 {
    let t = tail.clamp(0.0, 1.0);
    t + 3.0 * (t * (1.0 - t) / trials as f64).sqrt()
}

struct Prepared {
    kind: ExperimentKind,
    m: u64,
    base_seed: u64,
    hash: HashModel,
    sampler: KeySampler,
    p_norm_sq: f64,
    access: Option<ProbabilityVector>,
    bound: TheoreticalBound,
}

impl Prepared {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let m = cfg.validate()?;
        let hash = cfg.hash.build(cfg.n)?;
        let q = cfg.distribution.build(hash.universe())?;
        let p = slot_probabilities(&q, &hash)?;
        let access = cfg.access.as_ref().map(|a| a.build(cfg.n)).transpose()?;
        let n = cfg.n as u64;
        let load = m as f64 / cfg.n as f64;
        let bound = match (&cfg.bound, &access) {
            (BoundSpec::Main { epsilon, delta, s }, _) => main_bound(n, *epsilon, *delta, *s)?.into(),
            (BoundSpec::FixedS { epsilon, delta }, _) => cor_fixed_s(n, *epsilon, *delta)?.into(),
            (BoundSpec::LoadFactor { epsilon }, _) => cor_load_factor(*epsilon, load)?.into(),
            (BoundSpec::Gr { beta, lambda }, _) => gr_bound(n, *beta, *lambda)?.into(),
            (BoundSpec::GrForm { beta, lambda }, _) => cor_gr_form(n, *beta, *lambda)?.into(),
            (BoundSpec::AstS { s }, Some(v)) => ast_bound_s(load, n, v.norm(), p.norm(), *s)?.into(),
            (BoundSpec::AstEps { epsilon }, Some(v)) => {
                ast_bound_eps(load, n, v.norm(), p.norm(), *epsilon)?.into()
            }
            (_, None) => return Err(Error::Config("missing [access] pattern".into())),
        };
        Ok(Prepared {
            kind: cfg.kind,
            m,
            base_seed: cfg.base_seed,
            sampler: KeySampler::new(&q),
            hash,
            p_norm_sq: p.norm_sq(),
            access,
            bound,
        })
    }

    fn keys(&self, trial: u64) -> KeySequence {
        let mut rng = KeyRng::new(trial_seed(self.base_seed, trial));
        self.sampler.sample(&mut rng, self.m as usize)
    }

    fn trial(&self, trial: u64) -> Result<TrialRecord> {
        let x = self.keys(trial);
        let k = count_slots(&x, &self.hash)?;
        match (self.kind, &self.access) {
            (ExperimentKind::Collision, _) => {
                let est = empirical_collision_probability(&k)?;
                let signed = est.signed_deviation(self.p_norm_sq)?;
                Ok(TrialRecord {
                    trial,
                    value: est.empirical_cp,
                    rel_error: Some(signed.abs()),
                    signed_deviation: Some(signed),
                    ast_exact: None,
                    violation: signed.abs() > self.bound.threshold,
                })
            }
            (ExperimentKind::Ast, Some(v)) => {
                let upper = ast_upper_empirical(v, &k)?;
                Ok(TrialRecord {
                    trial,
                    value: upper,
                    rel_error: None,
                    signed_deviation: None,
                    ast_exact: Some(ast_exact(v, &x, &self.hash)?),
                    violation: upper > self.bound.threshold,
                })
            }
            (ExperimentKind::Ast, None) => Err(Error::Config("missing [access] pattern".into())),
        }
    }
}

impl From<crate::bounds::DeviationBound> for TheoreticalBound {
    fn from(b: crate::bounds::DeviationBound) -> Self {
        TheoreticalBound {
            threshold: b.error_bound,
            confidence: b.confidence,
            tail: b.tail,
            vacuous: b.vacuous,
            underflow: b.underflow,
        }
    }
}

impl From<crate::ast::AstBound> for TheoreticalBound {
    fn from(b: crate::ast::AstBound) -> Self {
        TheoreticalBound {
            threshold: b.value,
            confidence: b.confidence,
            tail: b.tail,
            vacuous: b.vacuous,
            underflow: b.underflow,
        }
    }
}

#[derive(Default)]
struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
    violations: u64,
    rel_sum: f64,
    rel_max: f64,
    ast_sum: f64,
    ast_equal: u64,
    ast_order_violations: u64,
}

impl Accumulator {
    fn push(&mut self, r: &TrialRecord) {
        self.count += 1;
        let delta = r.value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (r.value - self.mean);
        self.violations += r.violation as u64;
        if let Some(e) = r.rel_error {
            self.rel_sum += e;
            self.rel_max = self.rel_max.max(e);
        }
        if let Some(a) = r.ast_exact {
            self.ast_sum += a;
            self.ast_equal += (a == r.value) as u64;
            self.ast_order_violations += (a > r.value) as u64;
        }
    }

    fn finish(self, kind: ExperimentKind, prep: &Prepared) -> Aggregates {
        let n = self.count as f64;
        let sample_std = if self.count > 1 {
            (self.m2 / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let collision = kind == ExperimentKind::Collision;
        Aggregates {
            trials: self.count,
            m: prep.m,
            p_norm_sq: prep.p_norm_sq,
            v_norm: prep.access.as_ref().map(|v| v.norm()),
            mean: self.mean,
            sample_std,
            mean_rel_error: collision.then(|| self.rel_sum / n),
            max_rel_error: collision.then_some(self.rel_max),
            mean_ast_exact: (!collision).then(|| self.ast_sum / n),
            ast_equal_trials: (!collision).then_some(self.ast_equal),
            ast_order_violations: (!collision).then_some(self.ast_order_violations),
            violations: self.violations,
            violation_frequency: self.violations as f64 / n,
        }
    }
}

/// Runs every trial of `cfg`, dispatching on its kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let prep = Prepared::new(cfg)?;
    let keep_all = cfg.trials <= MAX_RECORDS;
    let mut acc = Accumulator::default();
    let mut records = Vec::with_capacity(if keep_all {
        cfg.trials as usize
    } else {
        RESERVOIR_SIZE
    });
    let mut reservoir_rng = KeyRng::new(cfg.base_seed ^ RESERVOIR_SALT);

    let mut chunk_start = 0;
    while chunk_start < cfg.trials {
        let chunk_end = (chunk_start + CHUNK).min(cfg.trials);
        let chunk = (chunk_start..chunk_end)
            .into_par_iter()
            .map(|t| prep.trial(t))
            .collect::<Result<Vec<_>>>()?;
        for r in chunk {
            acc.push(&r);
            if keep_all || records.len() < RESERVOIR_SIZE {
                records.push(r);
            } else {
                let j = reservoir_rng.below(r.trial as usize + 1);
                if j < RESERVOIR_SIZE {
                    records[j] = r;
                }
            }
        }
        chunk_start = chunk_end;
    }
    if !keep_all {
        records.sort_by_key(|r| r.trial);
    }

    let aggregates = acc.finish(prep.kind, &prep);
    Ok(ExperimentReport {
        config: cfg.clone(),
        bound: prep.bound,
        aggregates,
        records,
        records_sampled: !keep_all,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Relative-error coverage of a collision-probability bound.
pub fn run_collision_trials(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Collision)?;
    run_experiment(cfg)
}

/// Coverage of a search-time bound by `sum_i v_i k_i`.
pub fn run_ast_trials(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(cfg, ExperimentKind::Ast)?;
    run_experiment(cfg)
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind == kind {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "expected a {kind:?} experiment, got {:?}",
            cfg.kind
        )))
    }
}

/// Replays trial `trial` of `cfg` in isolation.
pub fn run_single_trial(cfg: &ExperimentConfig, trial: u64) -> Result<TrialRecord> {
    Prepared::new(cfg)?.trial(trial)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessCheck {
    pub sample_mean: f64,
    pub sample_std: f64,
    pub p_norm_sq: f64,
    /// `(sample_mean - ||p||^2) / (sample_std / sqrt(trials))`; absent when
    /// every trial returned the same estimate.
    pub z_score: Option<f64>,
    /// Zero variance and the estimate equals `||p||^2`.
    pub exact_match: bool,
    pub trials: u64,
}

/// Mean of the empirical collision probability over `trials` seeded runs,
/// compared with `||p||^2`.
pub fn unbiasedness_check(
    q: &ProbabilityVector,
    h: &HashModel,
    m: u64,
    trials: u64,
    base_seed: u64,
) -> Result<UnbiasednessCheck> {
    if m < 2 {
        return Err(Error::UndefinedEstimate { m });
    }
    if trials < 100 {
        return Err(Error::invalid(format!("need trials >= 100 (got {trials})")));
    }
    let p_norm_sq = slot_probabilities(q, h)?.norm_sq();
    let sampler = KeySampler::new(q);
    let estimates = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = KeyRng::new(trial_seed(base_seed, t));
            let x = sampler.sample(&mut rng, m as usize);
            Ok(empirical_collision_probability(&count_slots(&x, h)?)?.empirical_cp)
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = trials as f64;
    let sample_mean = estimates.iter().sum::<f64>() / n;
    let var = estimates
        .iter()
        .map(|e| (e - sample_mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let sample_std = var.sqrt();
    let z_score = (sample_std > 0.0).then(|| (sample_mean - p_norm_sq) / (sample_std / n.sqrt()));
    Ok(UnbiasednessCheck {
        sample_mean,
        sample_std,
        p_norm_sq,
        z_score,
        exact_match: sample_std == 0.0 && (sample_mean - p_norm_sq).abs() <= 1e-12,
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCheck {
    /// `sum_i |k_i(x) - k_i(y)|`.
    pub lhs: u64,
    /// Twice the Hamming distance between `x` and `y`.
    pub rhs: u64,
    pub holds: bool,
}

/// Slot-count displacement against Hamming distance for two equal-length sequences.
pub fn check_perturbation_lemma(
    x: &KeySequence,
    y: &KeySequence,
    h: &HashModel,
) -> Result<LemmaCheck> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "sequences differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let kx = count_slots(x, h)?;
    let ky = count_slots(y, h)?;
    let lhs = kx
        .counts()
        .iter()
        .zip(ky.counts())
        .map(|(a, b)| a.abs_diff(*b))
        .sum();
    let hamming = x
        .keys()
        .iter()
        .zip(y.keys())
        .filter(|(a, b)| a != b)
        .count() as u64;
    let rhs = 2 * hamming;
    Ok(LemmaCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub pairs: u64,
    pub failures: u64,
    /// Largest `lhs / rhs` over pairs with `rhs > 0`.
    pub max_ratio: f64,
    pub tight_pairs: u64,
}

/// Random pair for [`check_perturbation_lemma`]: `x` uniform over the universe,
/// `y` resamples each coordinate of `x` with a per-pair random rate.
pub fn random_lemma_pair(h: &HashModel, m: usize, seed: u64) -> (KeySequence, KeySequence) {
    let mut rng = KeyRng::new(seed);
    let universe = h.universe();
    let x: Vec<usize> = (0..m).map(|_| rng.below(universe)).collect();
    let rate = rng.next_f64();
    let y = x
        .iter()
        .map(|&k| {
            if rng.next_f64() < rate {
                rng.below(universe)
            } else {
                k
            }
        })
        .collect::<Vec<_>>();
    (KeySequence::from(x), KeySequence::from(y))
}

pub fn perturbation_lemma_trials(
    h: &HashModel,
    m: usize,
    pairs: u64,
    seed: u64,
) -> Result<LemmaSummary> {
    let checks = (0..pairs)
        .into_par_iter()
        .map(|t| {
            let (x, y) = random_lemma_pair(h, m, trial_seed(seed, t));
            check_perturbation_lemma(&x, &y, h)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = LemmaSummary {
        pairs,
        failures: 0,
        max_ratio: 0.0,
        tight_pairs: 0,
    };
    for c in checks {
        summary.failures += (!c.holds) as u64;
        summary.tight_pairs += (c.lhs == c.rhs && c.rhs > 0) as u64;
        if c.rhs > 0 {
            summary.max_ratio = summary.max_ratio.max(c.lhs as f64 / c.rhs as f64);
        }
    }
    Ok(summary)
}
