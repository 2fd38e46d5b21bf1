//! Iterated kernels, partition sums and the local conditional law.
//!
//! The unnormalized weight of placing the configuration `κ` inside a
//! region `B`, given a boundary configuration outside `B`, is the
//! iterated-kernel product along `κ`'s points divided by `Π_x κ(x)!`.
//! Summing the weights of all configurations on `B` gives the partition
//! sum; normalizing by it yields the conditional law of the restriction
//! to `B` given the environment.
//!
//! Partition sums are truncated at a maximum mass. Convergence is
//! certified by a geometric ratio test on the per-mass layer sums
//! (`r = S_M / S_{M-1}`, tail bound `S_M · r / (1-r)`), or exactly when
//! the kernel's support bound caps the achievable mass inside the
//! truncation. Layers can only shrink to zero, never resurrect: every
//! ordered product of length `m+1` extends an ordered product of
//! length `m`.

use rayon::prelude::*;

use crate::config::{enumerate_layer_bounded, Config};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::scalar::{close, default_tol, factorial, Scalar};

/// Truncation protocol for partition sums: enumerate configurations of
/// mass at most `max_mass` and require the certified tail to stay
/// below `tol`.
#[derive(Debug, Clone)]
pub struct Truncation<T> {
    pub max_mass: u32,
    pub tol: T,
}

impl<T: Scalar> Truncation<T> {
    pub fn new(max_mass: u32, tol: T) -> Self {
        Truncation { max_mass, tol }
    }
}

impl<T: Scalar> Default for Truncation<T> {
    /// Mass 12, tolerance 1e-10: enough for desk-scale spaces.
    fn default() -> Self {
        Truncation {
            max_mass: 12,
            tol: T::from_ratio(1, 10_000_000_000),
        }
    }
}

/// How a truncated partition sum was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    /// The kernel's support bound caps the achievable mass within the
    /// truncation; the sum is exact and the tail is zero.
    Complete,
    /// Geometric ratio certificate with tail below tolerance.
    CertifiedTail,
    /// Ratio below one but the certified tail exceeds the tolerance;
    /// raise `max_mass`.
    TailAboveTolerance,
    /// Layer sums are not decreasing at the truncation point; the
    /// local integrability condition is presumed violated.
    Diverging,
}

/// Result of a truncated partition sum.
#[derive(Debug, Clone)]
pub struct PartitionSum<T> {
    pub value: T,
    /// Certified upper bound on the omitted weight; `None` when no
    /// certificate holds.
    pub tail_bound: Option<T>,
    pub status: Convergence,
    /// Per-mass layer sums `S_0 ..= S_max`.
    pub layers: Vec<T>,
}

impl<T: Scalar> PartitionSum<T> {
    pub fn converged(&self) -> bool {
        matches!(self.status, Convergence::Complete | Convergence::CertifiedTail)
    }
}

/// Normalized weight table over the configurations of a region.
#[derive(Debug, Clone)]
pub struct WeightTable<T> {
    /// `(configuration, probability)` in canonical configuration order.
    pub entries: Vec<(Config, T)>,
    pub truncation_mass: u32,
    pub tail_bound: Option<T>,
}

impl<T: Scalar> WeightTable<T> {
    pub fn probability(&self, config: &Config) -> Option<&T> {
        self.entries
            .binary_search_by(|(c, _)| c.cmp(config))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn total(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }
}

/// Iterated kernel value `π^(k)(μ; x_1, …, x_k)`: the product of
/// intensities along the point list, each evaluated on the
/// configuration grown so far. The empty list gives 1.
pub fn iterated_kernel<T: Scalar>(pi: &dyn Kernel<T>, mu: &Config, points: &[usize]) -> T {
    let mut factors = Vec::with_capacity(points.len());
    let mut current = mu.clone();
    for &x in points {
        factors.push(pi.eval(&current).weight(x));
        current = current.added(x);
    }
    T::product_of(&factors)
}

/// Unnormalized weight of the unordered configuration `kappa` on the
/// region, started from the boundary restricted to the complement:
/// the ascending-order iterated product divided by `Π_x κ(x)!`.
///
/// The product is recomputed along the reversed order as a cocycle
/// guard; a mismatch means the kernel fails the cocycle condition and
/// the weight is not well defined.
pub fn config_weight<T: Scalar>(
    pi: &dyn Kernel<T>,
    boundary: &Config,
    region: &[usize],
    kappa: &Config,
) -> Result<T> {
    if !kappa.support().iter().all(|x| region.contains(x)) {
        return Err(Error::Parameter(
            "configuration weight: κ must be supported on the region".into(),
        ));
    }
    let base = boundary.restricted_complement(region);
    let points = kappa.points();
    let forward = iterated_kernel(pi, &base, &points);
    if points.len() > 1 {
        let reversed: Vec<usize> = points.iter().rev().copied().collect();
        let backward = iterated_kernel(pi, &base, &reversed);
        if !close(&forward, &backward, &default_tol::<T>()) {
            return Err(Error::CocycleViolation {
                kappa: kappa.clone(),
                first: forward.to_string(),
                second: backward.to_string(),
            });
        }
    }
    let mut denom = T::one();
    for x in kappa.support() {
        denom = denom * factorial::<T>(kappa.count(x));
    }
    Ok(forward / denom)
}

/// Per-layer weighted configurations on the region, masses `0..=max`.
fn weighted_layers<T: Scalar>(
    pi: &dyn Kernel<T>,
    boundary: &Config,
    region: &[usize],
    max_mass: u32,
) -> Result<Vec<Vec<(Config, T)>>> {
    let n = pi.space().len();
    let bound = pi.support_bound();
    let mut caps = vec![0u32; n];
    for &x in region {
        caps[x] = bound.map_or(u32::MAX, |b| b.count(x));
    }
    let caps = Config::from_counts(caps);
    let mut layers = Vec::with_capacity(max_mass as usize + 1);
    for m in 0..=max_mass {
        let configs = enumerate_layer_bounded(n, m, Some(&caps));
        let weighted: Result<Vec<(Config, T)>> = configs
            .into_par_iter()
            .map(|kappa| {
                let w = config_weight(pi, boundary, region, &kappa)?;
                Ok((kappa, w))
            })
            .collect();
        layers.push(weighted?);
    }
    Ok(layers)
}

/// Region capacity under the kernel's support bound, if any.
fn region_capacity<T: Scalar>(pi: &dyn Kernel<T>, region: &[usize]) -> Option<u64> {
    pi.support_bound().map(|b| {
        region
            .iter()
            .map(|&x| b.count(x) as u64)
            .fold(0u64, u64::saturating_add)
    })
}

fn assess<T: Scalar>(
    layers: &[T],
    complete: bool,
    tol: &T,
) -> (Option<T>, Convergence) {
    if complete {
        return (Some(T::zero()), Convergence::Complete);
    }
    let m = layers.len();
    let last = &layers[m - 1];
    if last.is_zero() {
        // nonnegative layers cannot resurrect after a zero layer
        return (Some(T::zero()), Convergence::CertifiedTail);
    }
    if m < 2 {
        return (None, Convergence::Diverging);
    }
    let prev = &layers[m - 2];
    if last >= prev {
        return (None, Convergence::Diverging);
    }
    let ratio = last.clone() / prev.clone();
    let tail = last.clone() * ratio.clone() / (T::one() - ratio);
    if tail <= *tol {
        (Some(tail), Convergence::CertifiedTail)
    } else {
        (Some(tail), Convergence::TailAboveTolerance)
    }
}

/// Truncated partition sum of the region given the boundary.
pub fn partition_sum<T: Scalar>(
    pi: &dyn Kernel<T>,
    boundary: &Config,
    region: &[usize],
    truncation: &Truncation<T>,
) -> Result<PartitionSum<T>> {
    let layers = weighted_layers(pi, boundary, region, truncation.max_mass)?;
    let layer_sums: Vec<T> = layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .fold(T::zero(), |acc, (_, w)| acc + w.clone())
        })
        .collect();
    let value = layer_sums
        .iter()
        .fold(T::zero(), |acc, s| acc + s.clone());
    let complete =
        region_capacity(pi, region).is_some_and(|cap| cap <= truncation.max_mass as u64);
    let (tail_bound, status) = assess(&layer_sums, complete, &truncation.tol);
    Ok(PartitionSum {
        value,
        tail_bound,
        status,
        layers: layer_sums,
    })
}

/// Conditional law of the restriction to the region given the boundary:
/// the weight table normalized by the truncated partition sum.
pub fn conditional_law<T: Scalar>(
    pi: &dyn Kernel<T>,
    boundary: &Config,
    region: &[usize],
    truncation: &Truncation<T>,
) -> Result<WeightTable<T>> {
    let layers = weighted_layers(pi, boundary, region, truncation.max_mass)?;
    let layer_sums: Vec<T> = layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .fold(T::zero(), |acc, (_, w)| acc + w.clone())
        })
        .collect();
    let total = layer_sums
        .iter()
        .fold(T::zero(), |acc, s| acc + s.clone());
    let complete =
        region_capacity(pi, region).is_some_and(|cap| cap <= truncation.max_mass as u64);
    let (tail_bound, status) = assess(&layer_sums, complete, &truncation.tol);
    if !matches!(status, Convergence::Complete | Convergence::CertifiedTail) {
        let last = layer_sums.last().expect("at least one layer");
        return Err(Error::Divergence {
            value: total.to_string(),
            last_layer: last.to_string(),
        });
    }
    if total.is_zero() {
        return Err(Error::ZeroPartition);
    }
    let entries = layers
        .into_iter()
        .flatten()
        .map(|(cfg, w)| (cfg, w / total.clone()))
        .collect();
    Ok(WeightTable {
        entries,
        truncation_mass: truncation.max_mass,
        tail_bound,
    })
}
