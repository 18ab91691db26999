//! Closed-form deviation bounds for the relative error of the empirical
//! collision probability.
//!
//! Every bound has the shape `P{ |estimate / ||p||^2 - 1| <= error_bound } >=
//! confidence` with `confidence = 1 - tail`. Hypotheses are checked strictly:
//! outside them the statements say nothing, so evaluation is refused.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient of the exponential tail, the reciprocal of the 9/10 mass of
/// the set of well-behaved sequences.
pub const TAIL_COEFFICIENT: f64 = 10.0 / 9.0;

/// Relative-error constant of the fixed-`s` corollaries.
pub const FIXED_S_ERROR_FACTOR: f64 = 22.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationBound {
    pub error_bound: f64,
    pub confidence: f64,
    /// The subtracted probability, `1 - confidence`, kept at full precision.
    pub tail: f64,
    /// `confidence <= 0`: the statement carries no information.
    pub vacuous: bool,
    /// The tail underflowed to zero and `confidence` is exactly 1.
    pub underflow: bool,
}

impl DeviationBound {
    pub(crate) fn new(error_bound: f64, tail: f64) -> Self {
        let confidence = 1.0 - tail;
        DeviationBound {
            error_bound,
            confidence,
            tail,
            vacuous: confidence <= 0.0,
            underflow: tail == 0.0,
        }
    }
}

/// `(10/9) * exp(-exponent)`.
pub(crate) fn exponential_tail(exponent: f64) -> f64 {
    TAIL_COEFFICIENT * (-exponent).exp()
}

/// Parameters tied together by `m = eps^-2 * n^(1 + delta)` and `L = m / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub m: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub s: f64,
    /// Load factor of the real-valued relation, before `m` is rounded.
    pub load: f64,
    /// `-2 ln(eps) / ln(n)`.
    pub beta: f64,
    /// `1/2 + delta`.
    pub lambda: f64,
    /// Real-valued key count before rounding; `m - m_exact` is the rounding error.
    pub m_exact: f64,
}

impl BoundParams {
    /// Realizes `m = round(eps^-2 * n^(1 + delta))`.
    pub fn from_eps_delta(n: u64, epsilon: f64, delta: f64, s: f64) -> Result<Self> {
        check_n(n)?;
        check_epsilon(epsilon)?;
        check_positive("delta", delta)?;
        check_nonnegative("s", s)?;
        let m_exact = epsilon.powi(-2) * (n as f64).powf(1.0 + delta);
        Ok(Self::assemble(n, epsilon, delta, s, m_exact))
    }

    fn assemble(n: u64, epsilon: f64, delta: f64, s: f64, m_exact: f64) -> Self {
        let ln_n = (n as f64).ln();
        BoundParams {
            n,
            m: m_exact.round() as u64,
            epsilon,
            delta,
            s,
            load: m_exact / n as f64,
            beta: -2.0 * epsilon.ln() / ln_n,
            lambda: 0.5 + delta,
            m_exact,
        }
    }

    /// Load factor re-derived from the rounded `m`.
    pub fn realized_load(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn rounding_error(&self) -> f64 {
        self.m as f64 - self.m_exact
    }

    pub fn main_bound(&self) -> Result<DeviationBound> {
        main_bound(self.n, self.epsilon, self.delta, self.s)
    }
}

/// Inverts the load-factor substitution: `delta = ln(L eps^2) / ln(n)`,
/// `m = round(L n)`, and `s = 2 n^(delta/2)`.
pub fn params_from_load(n: u64, load: f64, epsilon: f64) -> Result<BoundParams> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    check_positive("L", load)?;
    let c = load * epsilon * epsilon;
    if c <= 1.0 {
        return Err(Error::invalid(format!(
            "L * eps^2 must exceed 1 so that delta > 0 (got {c})"
        )));
    }
    let delta = c.ln() / (n as f64).ln();
    let s = 2.0 * (n as f64).powf(delta / 2.0);
    Ok(BoundParams::assemble(n, epsilon, delta, s, load * n as f64))
}

/// Polynomial-tail baseline for `m = n^(1/2 + beta + lambda)`.
pub fn gr_bound(n: u64, beta: f64, lambda: f64) -> Result<DeviationBound> {
    if n < 2 {
        return Err(Error::invalid(format!("n must be >= 2 (got {n})")));
    }
    check_positive("beta", beta)?;
    check_nonnegative("lambda", lambda)?;
    let n = n as f64;
    Ok(DeviationBound::new(
        3.0 / n.powf(beta / 2.0),
        4.0 / (9.0 * n.powf(lambda)),
    ))
}

/// `eps (3 + 6s / n^(delta/2) + 5 s^2 eps / n^delta)` with tail `(10/9) e^(-s^2/4)`.
pub fn main_bound(n: u64, epsilon: f64, delta: f64, s: f64) -> Result<DeviationBound> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    check_positive("delta", delta)?;
    check_nonnegative("s", s)?;
    let n_half = (n as f64).powf(delta / 2.0);
    let error = epsilon * (3.0 + 6.0 * s / n_half + 5.0 * s * s * epsilon / (n_half * n_half));
    Ok(DeviationBound::new(error, exponential_tail(s * s / 4.0)))
}

/// The main bound at `s = 2 n^(delta/2)`, relaxed to `22 eps`.
pub fn cor_fixed_s(n: u64, epsilon: f64, delta: f64) -> Result<DeviationBound> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    check_positive("delta", delta)?;
    Ok(DeviationBound::new(
        FIXED_S_ERROR_FACTOR * epsilon,
        exponential_tail((n as f64).powf(delta)),
    ))
}

/// Load-factor form: `22 eps` with tail `(10/9) e^(-L eps^2)`, for `L > eps^-2`.
pub fn cor_load_factor(epsilon: f64, load: f64) -> Result<DeviationBound> {
    check_epsilon(epsilon)?;
    check_positive("L", load)?;
    if load * epsilon * epsilon <= 1.0 {
        return Err(Error::invalid(format!(
            "need 1/3 > eps > 1/sqrt(L), i.e. L > eps^-2 = {} (got L = {load})",
            epsilon.powi(-2)
        )));
    }
    Ok(DeviationBound::new(
        FIXED_S_ERROR_FACTOR * epsilon,
        exponential_tail(load * epsilon * epsilon),
    ))
}

/// Fixed-`s` bound rewritten in the baseline's `(beta, lambda)` parameters.
pub fn cor_gr_form(n: u64, beta: f64, lambda: f64) -> Result<DeviationBound> {
    check_n(n)?;
    let nf = n as f64;
    let beta_min = 3f64.ln() / nf.ln();
    if beta.is_nan() || beta <= beta_min {
        return Err(Error::invalid(format!(
            "need beta > ln 3 / ln n = {beta_min} (got {beta})"
        )));
    }
    if lambda.is_nan() || lambda <= 0.5 {
        return Err(Error::invalid(format!("need lambda > 1/2 (got {lambda})")));
    }
    Ok(DeviationBound::new(
        FIXED_S_ERROR_FACTOR / 5.0 * nf.powf(-beta / 2.0),
        exponential_tail(nf.powf(lambda - 0.5)),
    ))
}

pub(crate) fn check_n(n: u64) -> Result<()> {
    if n > 24 {
        Ok(())
    } else {
        Err(Error::invalid(format!("need n > 24 (got {n})")))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("need 0 < eps < 1/3 (got {epsilon})")))
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("need {name} > 0 (got {value})")))
    }
}

pub(crate) fn check_nonnegative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("need {name} >= 0 (got {value})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gr_examples() {
        let b = gr_bound(10_000, 1.0, 1.0).unwrap();
        assert!(close(b.error_bound, 0.03, 1e-15));
        assert!(close(b.confidence, 1.0 - 4.0 / 90_000.0, 1e-15));
        assert!(close(b.confidence, 0.9999556, 1e-7));
        let b = gr_bound(1234, 0.7, 0.0).unwrap();
        assert!(close(b.confidence, 5.0 / 9.0, 1e-15));
        let b = gr_bound(100, 2.0, 2.0).unwrap();
        assert!(close(b.error_bound, 0.03, 1e-15));
        assert!(close(b.confidence, 1.0 - 4.0 / 90_000.0, 1e-15));

        assert!(gr_bound(1, 1.0, 1.0).is_err());
        assert!(gr_bound(10, 0.0, 1.0).is_err());
        assert!(gr_bound(10, 1.0, -0.1).is_err());
    }

    #[test]
    fn main_bound_examples() {
        let b = main_bound(100, 0.1, 1.0, 0.0).unwrap();
        assert!(close(b.error_bound, 0.3, 1e-15));
        assert!(close(b.confidence, -1.0 / 9.0, 1e-15));
        assert!(b.vacuous);

        let b = main_bound(100, 0.1, 1.0, 20.0).unwrap();
        assert!(close(b.error_bound, 1.7, 1e-12));
        assert!(close(b.tail, 10.0 / 9.0 * (-100f64).exp(), 1e-58));
        assert!(!b.vacuous);

        let b = main_bound(25, 0.3, 0.5, 2.0).unwrap();
        // 0.3 * (3 + 12 / 5^(1/2) + 0.3 * 20 / 5)
        assert!(close(b.error_bound, 2.869_968_943_799_849, 1e-12));
        assert!(close(b.tail, 10.0 / 9.0 * (-1f64).exp(), 1e-15));
    }

    #[test]
    fn main_bound_rejects_each_hypothesis() {
        for (n, e, d, s, what) in [
            (24, 0.1, 1.0, 1.0, "n > 24"),
            (100, 0.0, 1.0, 1.0, "eps"),
            (100, 1.0 / 3.0, 1.0, 1.0, "eps"),
            (100, 0.1, 0.0, 1.0, "delta"),
            (100, 0.1, 1.0, -1.0, "s"),
        ] {
            match main_bound(n, e, d, s) {
                Err(Error::InvalidArgument(msg)) => assert!(msg.contains(what), "{msg}"),
                other => panic!("expected rejection, got {other:?}"),
            }
        }
    }

    #[test]
    fn fixed_s_examples() {
        let b = cor_fixed_s(100, 0.1, 1.0).unwrap();
        assert!(close(b.error_bound, 2.2, 1e-15));
        assert!(close(b.tail, 10.0 / 9.0 * (-100f64).exp(), 1e-58));
        let b = cor_fixed_s(25, 0.01, 0.5).unwrap();
        assert!(close(b.error_bound, 0.22, 1e-15));
        assert!(close(b.confidence, 1.0 - 10.0 / 9.0 * (-5f64).exp(), 1e-15));
        assert!(cor_fixed_s(24, 0.01, 0.5).is_err());
    }

    #[test]
    fn load_factor_examples() {
        let b = cor_load_factor(0.05, 1000.0).unwrap();
        assert!(close(b.confidence, 0.909, 0.001));
        let b = cor_load_factor(0.05, 10_000.0).unwrap();
        assert!(close(b.tail, 1.54e-11, 0.01e-11));
        let b = cor_load_factor(0.3, 12.0).unwrap();
        assert!(close(b.error_bound, 6.6, 1e-12));
        assert!(close(b.confidence, 1.0 - 10.0 / 9.0 * (-1.08f64).exp(), 1e-12));
        match cor_load_factor(0.1, 100.0) {
            Err(Error::InvalidArgument(msg)) => assert!(msg.contains("1/sqrt(L)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gr_form_examples() {
        let b = cor_gr_form(100, 2.0, 1.5).unwrap();
        assert!(close(b.error_bound, 0.044, 1e-15));
        // n^(lambda - 1/2) = 100
        assert!(close(b.tail, 10.0 / 9.0 * (-100f64).exp(), 1e-58));
        let b = cor_gr_form(10_000, 1.0, 1.0).unwrap();
        assert!(close(b.error_bound, 0.044, 1e-15));
        let gr = gr_bound(10_000, 1.0, 1.0).unwrap();
        assert!(gr.error_bound < b.error_bound);
        assert!(gr.tail > b.tail);

        let beta_min = 3f64.ln() / 100f64.ln();
        assert!(cor_gr_form(100, beta_min, 1.0).is_err());
        assert!(cor_gr_form(100, beta_min * (1.0 + 1e-9), 1.0).is_ok());
        assert!(cor_gr_form(100, 1.0, 0.5).is_err());
    }

    #[test]
    fn params_from_load_examples() {
        assert!(params_from_load(100, 100.0, 0.1).is_err());
        let p = params_from_load(100, 1000.0, 0.1).unwrap();
        assert!(close(p.delta, 0.5, 1e-15));
        assert_eq!(p.m, 100_000);
        assert!(close(p.lambda, 1.0, 1e-15));
        assert!(close(p.beta, 1.0, 1e-15));
        let p = params_from_load(64, 100.0, 0.15).unwrap();
        assert_eq!(p.m, 6400);
        assert!(close(p.delta, 2.25f64.ln() / 64f64.ln(), 1e-15));
        // s = 2 n^(delta/2) = 2 sqrt(L) eps
        assert!(close(p.s, 3.0, 1e-12));
    }

    #[test]
    fn eps_delta_params_round_m() {
        let p = BoundParams::from_eps_delta(100, 0.1, 0.5, 1.0).unwrap();
        assert_eq!(p.m, 100_000);
        assert!(p.rounding_error().abs() < 1e-6);
        let p = BoundParams::from_eps_delta(30, 0.3, 0.3, 1.0).unwrap();
        assert!(p.rounding_error().abs() <= 0.5);
        assert_eq!(p.main_bound().unwrap(), main_bound(30, 0.3, 0.3, 1.0).unwrap());
    }

    #[test]
    fn huge_exponent_underflows() {
        let b = cor_fixed_s(1_000_000, 0.1, 1.0).unwrap();
        assert!(b.underflow);
        assert_eq!(b.confidence, 1.0);
        assert!(!cor_load_factor(0.05, 1000.0).unwrap().underflow);
    }
}
