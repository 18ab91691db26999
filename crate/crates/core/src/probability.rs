//! Finite probability vectors and seeded i.i.d. key sampling.

use crate::error::{Error, Result};
use crate::rng::KeyRng;

/// Absolute tolerance on the total mass of a [`ProbabilityVector`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Nonnegative weights summing to one. Used for the key distribution over the
/// universe, the induced slot distribution, and a user's access pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    /// Normalizes arbitrary nonnegative finite weights by their sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("probability vector must be non-empty"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::invalid(format!(
                "weights must be finite and nonnegative (found {w})"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights must have positive total mass"));
        }
        Ok(Self::normalized(weights, total))
    }

    /// Wraps weights that already sum to one, such as a pushforward of another vector.
    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        ProbabilityVector { weights }
    }

    fn normalized(mut weights: Vec<f64>, total: f64) -> Self {
        for w in &mut weights {
            *w /= total;
        }
        ProbabilityVector { weights }
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("uniform distribution needs size >= 1"));
        }
        Ok(ProbabilityVector {
            weights: vec![1.0 / size as f64; size],
        })
    }

    /// Weight of index `i` proportional to `(i + 1)^-exponent`.
    pub fn zipf(size: usize, exponent: f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("zipf distribution needs size >= 1"));
        }
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::invalid(format!(
                "zipf exponent must be finite and >= 0 (got {exponent})"
            )));
        }
        let weights: Vec<f64> = (1..=size).map(|r| (r as f64).powf(-exponent)).collect();
        let total = weights.iter().sum();
        Ok(Self::normalized(weights, total))
    }

    /// Uniform over the first `floor(alpha * size)` entries, zero elsewhere.
    pub fn restricted_uniform(size: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1] (got {alpha})")));
        }
        let active = (alpha * size as f64).floor() as usize;
        if active == 0 {
            return Err(Error::invalid(format!(
                "floor(alpha * size) must be >= 1 (alpha = {alpha}, size = {size})"
            )));
        }
        let mut weights = vec![0.0; size];
        weights[..active].fill(1.0 / active as f64);
        Ok(ProbabilityVector { weights })
    }

    pub fn point_mass(size: usize, index: usize) -> Result<Self> {
        if index >= size {
            return Err(Error::invalid(format!(
                "point mass index {index} out of range for size {size}"
            )));
        }
        let mut weights = vec![0.0; size];
        weights[index] = 1.0;
        Ok(ProbabilityVector { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Squared euclidean norm. For a slot distribution this is the collision
    /// probability of the hash function.
    pub fn norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Draws `count` i.i.d. keys using a generator seeded with `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> KeySequence {
        let sampler = KeySampler::new(self);
        let mut rng = KeyRng::new(seed);
        sampler.sample(&mut rng, count)
    }
}

/// Inverse-CDF sampler over a precomputed cumulative array.
#[derive(Debug, Clone)]
pub struct KeySampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl KeySampler {
    pub fn new(pv: &ProbabilityVector) -> Self {
        let mut acc = 0.0;
        let cumulative = pv
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = pv.weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
        KeySampler {
            cumulative,
            last_positive,
        }
    }

    pub fn draw(&self, rng: &mut KeyRng) -> usize {
        let u = rng.next_f64();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // Rounding can leave the final cumulative sum just below 1.
        idx.min(self.last_positive)
    }

    pub fn sample(&self, rng: &mut KeyRng, count: usize) -> KeySequence {
        KeySequence::from((0..count).map(|_| self.draw(rng)).collect::<Vec<_>>())
    }
}

/// A sequence of inserted keys, repetitions allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeySequence {
    keys: Vec<usize>,
}

impl KeySequence {
    pub fn keys(&self) -> &[usize] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn concat(&self, other: &KeySequence) -> KeySequence {
        let mut keys = self.keys.clone();
        keys.extend_from_slice(&other.keys);
        KeySequence { keys }
    }

    pub fn into_keys(self) -> Vec<usize> {
        self.keys
    }
}

impl From<Vec<usize>> for KeySequence {
    fn from(keys: Vec<usize>) -> Self {
        KeySequence { keys }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(ProbabilityVector::uniform(4).unwrap().weights(), &[0.25; 4]);
        assert_eq!(ProbabilityVector::uniform(1).unwrap().weights(), &[1.0]);
        assert_close(ProbabilityVector::uniform(10).unwrap().norm_sq(), 0.1, 1e-15);
        assert!(matches!(
            ProbabilityVector::uniform(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zipf_examples() {
        let z = ProbabilityVector::zipf(3, 0.0).unwrap();
        for w in z.weights() {
            assert_close(*w, 1.0 / 3.0, 1e-15);
        }
        let z = ProbabilityVector::zipf(2, 1.0).unwrap();
        assert_close(z.weights()[0], 2.0 / 3.0, 1e-15);
        assert_close(z.weights()[1], 1.0 / 3.0, 1e-15);

        let z = ProbabilityVector::zipf(100, 1.2).unwrap();
        // Independent normalization: harmonic-type sum of order 1.2.
        let h: f64 = (1..=100).map(|r| 1.0 / (r as f64).powf(1.2)).sum();
        assert_close(z.weights()[0], 1.0 / h, 1e-14);
        assert_close(z.weights().iter().sum::<f64>(), 1.0, MASS_TOLERANCE);
        assert!(z.weights().windows(2).all(|w| w[0] > w[1]));
        assert!(ProbabilityVector::zipf(0, 1.0).is_err());
        assert!(ProbabilityVector::zipf(5, -1.0).is_err());
    }

    #[test]
    fn restricted_uniform_examples() {
        let r = ProbabilityVector::restricted_uniform(10, 1.0).unwrap();
        assert_eq!(r, ProbabilityVector::uniform(10).unwrap());
        let r = ProbabilityVector::restricted_uniform(10, 0.1).unwrap();
        assert_eq!(r.weights()[0], 1.0);
        assert!(r.weights()[1..].iter().all(|w| *w == 0.0));
        let r = ProbabilityVector::restricted_uniform(100, 0.1).unwrap();
        assert_close(r.norm(), 1.0 / 10f64.sqrt(), 1e-15);
        assert_close(r.norm(), 0.3162, 1e-4);
        assert!(ProbabilityVector::restricted_uniform(5, 0.1).is_err());
        assert!(ProbabilityVector::restricted_uniform(5, 0.0).is_err());
        assert!(ProbabilityVector::restricted_uniform(5, 1.5).is_err());
    }

    #[test]
    fn norm_sq_examples() {
        assert_eq!(ProbabilityVector::uniform(4).unwrap().norm_sq(), 0.25);
        assert_eq!(ProbabilityVector::point_mass(3, 1).unwrap().norm_sq(), 1.0);
        let p = ProbabilityVector::from_weights(vec![0.6, 0.2, 0.2]).unwrap();
        assert_close(p.norm_sq(), 0.44, 1e-15);
    }

    #[test]
    fn from_weights_rejects_bad_input() {
        assert!(ProbabilityVector::from_weights(vec![]).is_err());
        assert!(ProbabilityVector::from_weights(vec![0.0, 0.0]).is_err());
        assert!(ProbabilityVector::from_weights(vec![1.0, -0.5]).is_err());
        assert!(ProbabilityVector::from_weights(vec![1.0, f64::NAN]).is_err());
        let p = ProbabilityVector::from_weights(vec![2.0, 6.0]).unwrap();
        assert_eq!(p.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn sample_examples() {
        let pm = ProbabilityVector::point_mass(4, 0).unwrap();
        assert_eq!(pm.sample(123, 5).keys(), &[0, 0, 0, 0, 0]);
        let u2 = ProbabilityVector::uniform(2).unwrap();
        assert!(u2.sample(42, 0).is_empty());

        let u4 = ProbabilityVector::uniform(4).unwrap();
        let x = u4.sample(7, 1_000_000);
        let mut freq = [0usize; 4];
        for &k in x.keys() {
            freq[k] += 1;
        }
        for f in freq {
            assert_close(f as f64 / 1e6, 0.25, 0.002);
        }
    }

    #[test]
    fn sampling_skips_zero_weight_entries() {
        let p = ProbabilityVector::from_weights(vec![0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let x = p.sample(3, 10_000);
        assert!(x.keys().iter().all(|&k| k == 1 || k == 3));
    }
}
