//! Collision counting and the empirical collision probability
//! `sum_i k_i (k_i - 1) / (m (m - 1))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{count_slots, slot_probabilities, HashModel, SlotCounts};
use crate::probability::{KeySequence, ProbabilityVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEstimate {
    pub empirical_cp: f64,
    pub m: u64,
    pub collision_pairs: u64,
}

impl CollisionEstimate {
    /// `|empirical_cp / p_norm_sq - 1|`.
    pub fn relative_error(&self, p_norm_sq: f64) -> Result<f64> {
        relative_error(self, p_norm_sq)
    }

    /// `empirical_cp / p_norm_sq - 1`.
    pub fn signed_deviation(&self, p_norm_sq: f64) -> Result<f64> {
        check_norm_sq(p_norm_sq)?;
        Ok(self.empirical_cp / p_norm_sq - 1.0)
    }
}

/// Unordered pairs of inserted keys sharing a slot, equal keys included.
pub fn collision_pairs(k: &SlotCounts) -> u64 {
    k.counts()
        .iter()
        .map(|&c| c * c.saturating_sub(1) / 2)
        .sum()
}

pub fn empirical_collision_probability(k: &SlotCounts) -> Result<CollisionEstimate> {
    let m = k.total();
    if m < 2 {
        return Err(Error::UndefinedEstimate { m });
    }
    let pairs = collision_pairs(k);
    let empirical_cp = (2 * pairs) as f64 / (m * (m - 1)) as f64;
    Ok(CollisionEstimate {
        empirical_cp,
        m,
        collision_pairs: pairs,
    })
}

/// Counts colliding pairs with an explicit double loop over positions.
pub fn brute_force_collision_pairs(x: &KeySequence, h: &HashModel) -> Result<u64> {
    // Validates the keys.
    count_slots(x, h)?;
    let slots: Vec<usize> = x.keys().iter().map(|&k| h.slot_of(k)).collect();
    let mut pairs = 0;
    for j in 0..slots.len() {
        for jj in j + 1..slots.len() {
            if slots[j] == slots[jj] {
                pairs += 1;
            }
        }
    }
    Ok(pairs)
}

/// Probability that two independent keys are distinct yet share a slot:
/// `||p||^2 - sum_u q(u)^2`.
pub fn true_collision_probability(q: &ProbabilityVector, h: &HashModel) -> Result<f64> {
    let p = slot_probabilities(q, h)?;
    Ok((p.norm_sq() - q.norm_sq()).max(0.0))
}

pub fn relative_error(est: &CollisionEstimate, p_norm_sq: f64) -> Result<f64> {
    check_norm_sq(p_norm_sq)?;
    Ok((est.empirical_cp / p_norm_sq - 1.0).abs())
}

fn check_norm_sq(p_norm_sq: f64) -> Result<()> {
    if p_norm_sq > 0.0 && p_norm_sq.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "collision probability must be positive (got {p_norm_sq})"
        )))
    }
}
