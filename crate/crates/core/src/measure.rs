//! Nonnegative measures on a finite space, stored densely.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite nonnegative measure: one weight per site.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure<T> {
    weights: Vec<T>,
}

impl<T: Scalar> Measure<T> {
    /// Validating constructor: weights must be nonnegative and finite.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        for (i, w) in weights.iter().enumerate() {
            if *w < T::zero() {
                return Err(Error::Parameter(format!(
                    "measure weight at site index {i} is negative ({w})"
                )));
            }
            if !w.to_f64().is_finite() {
                return Err(Error::Parameter(format!(
                    "measure weight at site index {i} is not finite"
                )));
            }
        }
        Ok(Measure { weights })
    }

    /// Internal constructor for weights that are nonnegative by
    /// construction (kernel evaluations clamp before calling this).
    pub(crate) fn from_weights(weights: Vec<T>) -> Self {
        debug_assert!(weights.iter().all(|w| *w >= T::zero()));
        Measure { weights }
    }

    pub fn zeros(n_sites: usize) -> Self {
        Measure {
            weights: vec![T::zero(); n_sites],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, site: usize) -> &T {
        &self.weights[site]
    }

    pub fn weight(&self, site: usize) -> T {
        self.weights[site].clone()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.weights.iter()
    }

    /// Total mass over the whole space.
    pub fn total(&self) -> T {
        self.weights
            .iter()
            .fold(T::zero(), |acc, w| acc + w.clone())
    }

    /// Mass on a set of sites.
    pub fn mass_on(&self, sites: &[usize]) -> T {
        sites
            .iter()
            .fold(T::zero(), |acc, &x| acc + self.weights[x].clone())
    }

    /// Convert every weight to `f64` (exact mode feeds samplers this way).
    pub fn to_f64_measure(&self) -> Measure<f64> {
        Measure {
            weights: self.weights.iter().map(|w| w.to_f64()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn rejects_negative_weights() {
        assert!(Measure::new(vec![0.5, -0.1]).is_err());
        assert!(Measure::new(vec![f64::NAN]).is_err());
        let m = Measure::new(vec![Rational::from_ratio(1, 2), Rational::from_u64(0)]).unwrap();
        assert_eq!(m.total(), Rational::from_ratio(1, 2));
    }

    #[test]
    fn mass_on_subset() {
        let m = Measure::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.mass_on(&[0, 2]), 5.0);
        assert_eq!(m.total(), 7.0);
    }
}
