use rand::distributions::{Distribution as _, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::RandomStream;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probability vector over example indices `0..m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ExampleDistribution<F = f64> {
    weights: Vec<F>,
}

impl<F: Scalar> ExampleDistribution<F> {
    /// Scales non-negative weights to sum to one.
    ///
    /// Input that already sums to one within [`Scalar::sum_tolerance`] is
    /// returned unchanged, which makes normalization exactly idempotent.
    pub fn normalize(weights: &[F]) -> Result<Self> {
        for (index, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w < F::zero() {
                return Err(Error::InvalidWeight {
                    index,
                    value: w.as_f64(),
                });
            }
        }
        let total: F = weights.iter().copied().sum();
        if total <= F::zero() {
            return Err(Error::AllZeroWeights);
        }
        if (total - F::one()).abs() <= F::sum_tolerance(weights.len()) {
            return Ok(ExampleDistribution {
                weights: weights.to_vec(),
            });
        }
        Ok(ExampleDistribution {
            weights: weights.iter().map(|w| *w / total).collect(),
        })
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform distribution over an empty set");
        let p = F::one() / F::from_count(m);
        ExampleDistribution { weights: vec![p; m] }
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_on(m: usize, support: &[usize]) -> Result<Self> {
        let mut w = vec![F::zero(); m];
        for &i in support {
            w[i] = F::one();
        }
        Self::normalize(&w)
    }

    pub fn point_mass(m: usize, index: usize) -> Self {
        let mut weights = vec![F::zero(); m];
        weights[index] = F::one();
        ExampleDistribution { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn prob(&self, i: usize) -> F {
        self.weights[i]
    }

    /// Total mass of the indices where `pred` holds.
    pub fn mass_where(&self, mut pred: impl FnMut(usize) -> bool) -> F {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, w)| *w)
            .sum()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> F {
        self.weights
            .iter()
            .filter(|w| **w > F::zero())
            .map(|w| -*w * w.ln())
            .sum()
    }
}

/// Draws `count` indices i.i.d. with replacement from `dist`.
pub fn sample_iid<F: Scalar>(
    dist: &ExampleDistribution<F>,
    count: usize,
    rng: &mut RandomStream,
) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidParams("sample count must be at least 1".into()));
    }
    let weights: Vec<f64> = dist.weights().iter().map(|w| w.as_f64()).collect();
    let index = WeightedIndex::new(&weights).map_err(|_| Error::AllZeroWeights)?;
    Ok((0..count).map(|_| index.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let d = ExampleDistribution::<f64>::normalize(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.weights(), &[0.25; 4]);
        let d = ExampleDistribution::<f64>::normalize(&[2.0, 0.0, 2.0]).unwrap();
        assert_eq!(d.weights(), &[0.5, 0.0, 0.5]);
        let d = ExampleDistribution::<f64>::normalize(&[1.0, 3.0]).unwrap();
        assert_eq!(d.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn normalize_errors() {
        assert_eq!(
            ExampleDistribution::<f64>::normalize(&[0.0, 0.0]),
            Err(Error::AllZeroWeights)
        );
        assert!(matches!(
            ExampleDistribution::<f64>::normalize(&[1.0, -1.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        assert!(matches!(
            ExampleDistribution::<f32>::normalize(&[f32::NAN]),
            Err(Error::InvalidWeight { index: 0, .. })
        ));
    }

    #[test]
    fn point_mass_sampling() {
        let d = ExampleDistribution::<f64>::point_mass(4, 2);
        let mut rng = RandomStream::new(1);
        assert_eq!(sample_iid(&d, 3, &mut rng).unwrap(), vec![2, 2, 2]);
        assert!(sample_iid(&d, 0, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = ExampleDistribution::<f64>::normalize(&[1.0, 2.0, 3.0]).unwrap();
        let a = sample_iid(&d, 50, &mut RandomStream::new(9).child("x")).unwrap();
        let b = sample_iid(&d, 50, &mut RandomStream::new(9).child("x")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_frequencies_within_three_sigma() {
        let d = ExampleDistribution::<f64>::uniform(4);
        let n = 100_000;
        let draws = sample_iid(&d, n, &mut RandomStream::new(2024)).unwrap();
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for i in 0..4 {
            let freq = draws.iter().filter(|&&j| j == i).count() as f64 / n as f64;
            assert!((freq - 0.25).abs() <= 3.0 * sigma, "index {i}: {freq}");
        }
    }

    #[test]
    fn entropy_of_uniform_is_log_m() {
        let d = ExampleDistribution::<f64>::uniform(8);
        assert!((d.entropy() - 8f64.ln()).abs() < 1e-12);
    }
}
