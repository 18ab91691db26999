//! Average search time for a user's access pattern `v`.
//!
//! Search cost in a slot is its chain length. Chains store each distinct key
//! once, so the exact cost uses distinct counts while `sum_i v_i k_i` (counts
//! with multiplicity) is an upper bound.

use serde::{Deserialize, Serialize};

use crate::bounds::{check_n, check_nonnegative, check_positive, exponential_tail, TAIL_COEFFICIENT};
use crate::error::{Error, Result};
use crate::hashing::{distinct_counts, HashModel, SlotCounts};
use crate::probability::{KeySequence, ProbabilityVector};

/// Minimum load factor for the search-time bounds.
pub const MIN_LOAD: f64 = 9.0;

/// Slack allowed when checking a norm against `[1/sqrt(n), 1]`.
const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AstBound {
    pub value: f64,
    pub confidence: f64,
    pub tail: f64,
    pub vacuous: bool,
    pub underflow: bool,
}

impl AstBound {
    fn new(value: f64, tail: f64) -> Self {
        let confidence = 1.0 - tail;
        AstBound {
            value,
            confidence,
            tail,
            vacuous: confidence <= 0.0,
            underflow: tail == 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example1Bound {
    /// `c L / sqrt(alpha) + 1`.
    pub center: f64,
    /// `8 eps c L / sqrt(alpha)`.
    pub halfwidth: f64,
    pub confidence: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example2Bound {
    pub value: f64,
    pub confidence: f64,
    pub tail: f64,
}

/// `sum_i v_i * (distinct keys in slot i)`.
pub fn ast_exact(v: &ProbabilityVector, x: &KeySequence, h: &HashModel) -> Result<f64> {
    if v.len() != h.slots() {
        return Err(dimension_mismatch(v.len(), h.slots()));
    }
    let d = distinct_counts(x, h)?;
    weighted_sum(v, &d)
}

/// `sum_i v_i k_i`, the multiplicity upper bound on the search time.
pub fn ast_upper_empirical(v: &ProbabilityVector, k: &SlotCounts) -> Result<f64> {
    weighted_sum(v, k)
}

fn weighted_sum(v: &ProbabilityVector, k: &SlotCounts) -> Result<f64> {
    if v.len() != k.slots() {
        return Err(dimension_mismatch(v.len(), k.slots()));
    }
    Ok(v.weights()
        .iter()
        .zip(k.counts())
        .map(|(w, &c)| w * c as f64)
        .sum())
}

fn dimension_mismatch(v: usize, n: usize) -> Error {
    Error::invalid(format!(
        "access pattern has {v} entries but the table has {n} slots"
    ))
}

/// `sqrt(1 + (3 + 6s)/sqrt(L) + 5 s^2 / L)`.
pub fn radicand_factor(load: f64, s: f64) -> f64 {
    (1.0 + (3.0 + 6.0 * s) / load.sqrt() + 5.0 * s * s / load).sqrt()
}

/// `1 + 4s / sqrt(L)`, the linearization used to pass from `s` to `eps = s / (2 sqrt(L))`.
pub fn linearized_factor(load: f64, s: f64) -> f64 {
    1.0 + 4.0 * s / load.sqrt()
}

fn check_ast_inputs(load: f64, n: u64, v_norm: f64, p_norm: f64) -> Result<()> {
    check_n(n)?;
    check_load(load)?;
    if !(v_norm > 0.0 && v_norm <= 1.0 + NORM_TOLERANCE) {
        return Err(Error::invalid(format!("need 0 < ||v|| <= 1 (got {v_norm})")));
    }
    let p_min = 1.0 / (n as f64).sqrt();
    if !(p_norm >= p_min * (1.0 - NORM_TOLERANCE) && p_norm <= 1.0 + NORM_TOLERANCE) {
        return Err(Error::invalid(format!(
            "need 1/sqrt(n) = {p_min} <= ||p|| <= 1 (got {p_norm})"
        )));
    }
    Ok(())
}

fn check_load(load: f64) -> Result<()> {
    if load > MIN_LOAD && load.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("need L > 9 (got {load})")))
    }
}

/// `L n ||v|| ||p|| sqrt(1 + (3+6s)/sqrt(L) + 5s^2/L) + 1` with tail `(10/9) e^(-s^2/4)`.
pub fn ast_bound_s(load: f64, n: u64, v_norm: f64, p_norm: f64, s: f64) -> Result<AstBound> {
    check_ast_inputs(load, n, v_norm, p_norm)?;
    check_nonnegative("s", s)?;
    let scale = load * n as f64 * v_norm * p_norm;
    Ok(AstBound::new(
        scale * radicand_factor(load, s) + 1.0,
        exponential_tail(s * s / 4.0),
    ))
}

/// `L n ||v|| ||p|| (1 + 8 eps) + 1` with tail `(10/9) e^(-L eps^2)`.
pub fn ast_bound_eps(load: f64, n: u64, v_norm: f64, p_norm: f64, epsilon: f64) -> Result<AstBound> {
    check_ast_inputs(load, n, v_norm, p_norm)?;
    check_positive("eps", epsilon)?;
    let scale = load * n as f64 * v_norm * p_norm;
    Ok(AstBound::new(
        scale * (1.0 + 8.0 * epsilon) + 1.0,
        exponential_tail(load * epsilon * epsilon),
    ))
}

fn check_example(c: f64, alpha: f64, epsilon: f64, load: f64) -> Result<()> {
    check_positive("c", c)?;
    check_alpha("alpha", alpha)?;
    check_positive("eps", epsilon)?;
    check_load(load)
}

fn check_alpha(name: &str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("need 0 < {name} <= 1 (got {alpha})")))
    }
}

/// A user touching a fraction `alpha` of the slots uniformly, on a table with
/// `||p|| = c / sqrt(n)`.
pub fn example1_bound(c: f64, alpha: f64, epsilon: f64, load: f64) -> Result<Example1Bound> {
    check_example(c, alpha, epsilon, load)?;
    let base = c * load / alpha.sqrt();
    let tail = exponential_tail(load * epsilon * epsilon);
    Ok(Example1Bound {
        center: base + 1.0,
        halfwidth: base * 8.0 * epsilon,
        confidence: 1.0 - tail,
        tail,
    })
}

/// Two subqueries shaped like the single user above, combined by a union bound.
pub fn example2_bound(
    c: f64,
    alpha1: f64,
    alpha2: f64,
    epsilon: f64,
    load: f64,
) -> Result<Example2Bound> {
    check_example(c, alpha1, epsilon, load)?;
    check_alpha("alpha2", alpha2)?;
    let alpha = alpha1.min(alpha2);
    let tail = 2.0 * TAIL_COEFFICIENT * (-load * epsilon * epsilon).exp();
    Ok(Example2Bound {
        value: c * load / alpha.sqrt() * (1.0 + 8.0 * epsilon) + 1.0,
        confidence: 1.0 - tail,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::count_slots;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn exact_and_upper_examples() {
        let h = HashModel::identity(4).unwrap();
        let v = ProbabilityVector::uniform(4).unwrap();
        assert_eq!(ast_exact(&v, &KeySequence::default(), &h).unwrap(), 0.0);

        let x = KeySequence::from(vec![3, 3, 3]);
        assert_eq!(ast_exact(&v, &x, &h).unwrap(), 0.25);
        let k = count_slots(&x, &h).unwrap();
        assert_eq!(ast_upper_empirical(&v, &k).unwrap(), 0.75);

        let point = ProbabilityVector::point_mass(4, 3).unwrap();
        assert_eq!(ast_exact(&point, &x, &h).unwrap(), 1.0);
        assert_eq!(ast_upper_empirical(&point, &k).unwrap(), 3.0);

        let k = SlotCounts::from_counts(vec![5, 0, 2, 9]);
        assert_eq!(ast_upper_empirical(&v, &k).unwrap(), 4.0);

        let v3 = ProbabilityVector::uniform(3).unwrap();
        assert!(ast_exact(&v3, &x, &h).is_err());
        assert!(ast_upper_empirical(&v3, &k).is_err());
    }

    #[test]
    fn bound_s_examples() {
        let b = ast_bound_s(16.0, 100, 0.1, 0.1, 0.0).unwrap();
        assert!(close(b.value, 22.166_010_488_516_726, 1e-12));
        assert!(b.vacuous);

        let n = 400u64;
        let u = 1.0 / (n as f64).sqrt();
        let (load, s) = (50.0, 1.5);
        let b = ast_bound_s(load, n, u, u, s).unwrap();
        assert!(close(b.value, load * radicand_factor(load, s) + 1.0, 1e-9));

        assert!(close(radicand_factor(100.0, 2.0), 2.7f64.sqrt(), 1e-15));
        assert!(radicand_factor(100.0, 2.0) < linearized_factor(100.0, 2.0));
        assert!(close(linearized_factor(100.0, 2.0), 1.8, 1e-15));
    }

    #[test]
    fn bound_eps_examples() {
        let n = 10_000u64;
        let nf = n as f64;
        let b = ast_bound_eps(1000.0, n, 1.0 / (0.1 * nf).sqrt(), 5.0 / nf.sqrt(), 0.05).unwrap();
        let center = 1000.0 * 5.0 / 0.1f64.sqrt();
        assert!(close(b.value, center * 1.4 + 1.0, 1e-6));
        assert!(close(center, 15811.0, 1.0));
        assert!(close(center * 0.4, 6324.0, 1.0));

        let b = ast_bound_eps(1000.0, 100, 0.1, 0.1, 1e-12).unwrap();
        assert!(close(b.value, 1001.0, 1e-6));
        assert!(close(b.confidence, -1.0 / 9.0, 1e-6));

        let b = ast_bound_eps(50.0, 100, 0.1, 0.1, 0.2).unwrap();
        assert!(close(b.value, 50.0 * 2.6 + 1.0, 1e-9));
    }

    #[test]
    fn bound_preconditions() {
        assert!(ast_bound_s(9.0, 100, 0.1, 0.1, 1.0).is_err());
        assert!(ast_bound_s(10.0, 24, 0.1, 0.3, 1.0).is_err());
        assert!(ast_bound_s(10.0, 100, 0.0, 0.1, 1.0).is_err());
        assert!(ast_bound_s(10.0, 100, 0.1, 0.05, 1.0).is_err());
        assert!(ast_bound_s(10.0, 100, 0.1, 1.5, 1.0).is_err());
        assert!(ast_bound_s(10.0, 100, 0.1, 0.1, -1.0).is_err());
        assert!(ast_bound_eps(10.0, 100, 0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn example1_values() {
        let e = example1_bound(5.0, 0.1, 0.05, 1000.0).unwrap();
        assert!(close(e.center, 15_812.388_300_841_896, 1e-8));
        assert!(close(e.halfwidth, 6_324.555_320_336_759, 1e-8));
        assert!(close(e.confidence, 0.908_794_445_973_445_8, 1e-12));
        let e = example1_bound(5.0, 0.1, 0.05, 10_000.0).unwrap();
        assert!(close(e.tail, 1.543_104_873_884_891_2e-11, 1e-22));

        let full = example1_bound(5.0, 1.0, 0.05, 1000.0).unwrap();
        assert!(full.center < e.center);
        assert!(example1_bound(5.0, 0.0, 0.05, 1000.0).is_err());
        assert!(example1_bound(5.0, 0.5, 0.05, 9.0).is_err());
    }

    #[test]
    fn example2_values() {
        let one = example1_bound(5.0, 0.3, 0.05, 1000.0).unwrap();
        let two = example2_bound(5.0, 0.3, 0.3, 0.05, 1000.0).unwrap();
        assert!(close(two.value, one.center + one.halfwidth, 1e-8));
        assert!(close(two.tail, 2.0 * one.tail, 1e-15));
        assert!(two.confidence <= one.confidence);

        let two = example2_bound(5.0, 0.1, 0.5, 0.05, 1000.0).unwrap();
        let one = example1_bound(5.0, 0.1, 0.05, 1000.0).unwrap();
        assert!(close(two.value, one.center + one.halfwidth, 1e-8));
        assert!(close(two.confidence, 0.817_588_891_946_891_5, 1e-12));
        assert!(example2_bound(5.0, 0.1, 1.2, 0.05, 1000.0).is_err());
    }
}
