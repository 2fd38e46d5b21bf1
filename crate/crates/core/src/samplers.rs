//! Drawing configurations from the process of a kernel.
//!
//! Three routes, cross-validated against each other in the test suite:
//!
//! * [`sample_exact`] — inverse-CDF over the enumerated, normalized
//!   weight table (the conditional law of the full space given an empty
//!   environment);
//! * [`sample_product_form`] — per-site independent draws from the
//!   closed-form marginals of the catalog kernels, bypassing `eval`;
//! * [`sample_birth_death`] — a reversible birth/death
//!   Metropolis-Hastings chain whose stationary weights obey
//!   `P(μ+δ_x)/P(μ) = π(μ,{x})/(μ(x)+1)`.
//!
//! Reproducibility: one ChaCha stream per replica, streams indexed by
//! replica number, draws concatenated in replica order. Identical
//! `(kernel, method, n, seed, replicas)` give identical batches
//! regardless of thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, SiteLaw};
use crate::partition::{conditional_law, Truncation};

/// Sampling method tag carried by batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    ProductForm,
    BirthDeath,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::ProductForm => "product_form",
            Method::BirthDeath => "birth_death",
        }
    }
}

/// Birth-death chain parameters.
#[derive(Debug, Clone)]
pub struct BirthDeathParams {
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for BirthDeathParams {
    fn default() -> Self {
        BirthDeathParams {
            burn_in: 10_000,
            thin: 10,
        }
    }
}

/// Sampler selection with its parameters.
#[derive(Debug, Clone)]
pub enum SamplerSpec {
    Exact { truncation: Truncation<f64> },
    ProductForm,
    BirthDeath(BirthDeathParams),
}

/// Batch diagnostics: what the sampler can report about its own run.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Birth-death acceptance rate over all proposals.
    pub acceptance_rate: Option<f64>,
    /// Tail bound of the truncated weight table (exact sampler).
    pub tail_bound: Option<f64>,
    pub truncation_mass: Option<u32>,
    pub replicas: usize,
}

/// A reproducible batch of sampled configurations.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub configs: Vec<Config>,
    pub seed: u64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Per-site empirical mean counts.
    pub fn mean_counts(&self, n_sites: usize) -> Vec<f64> {
        let mut sums = vec![0.0; n_sites];
        for cfg in &self.configs {
            for x in 0..n_sites {
                sums[x] += cfg.count(x) as f64;
            }
        }
        let n = self.configs.len().max(1) as f64;
        sums.iter_mut().for_each(|s| *s /= n);
        sums
    }
}

/// Dispatch a sampler spec; `n` is the number of draws for every method
/// (the birth-death chain runs `burn_in + n·thin` steps).
pub fn draw(
    pi: &dyn Kernel<f64>,
    spec: &SamplerSpec,
    n: usize,
    seed: u64,
    replicas: usize,
) -> Result<SampleBatch> {
    match spec {
        SamplerSpec::Exact { truncation } => sample_exact(pi, n, truncation, seed, replicas),
        SamplerSpec::ProductForm => sample_product_form(pi, n, seed, replicas),
        SamplerSpec::BirthDeath(params) => {
            let steps = params.burn_in + n.saturating_mul(params.thin);
            sample_birth_death(pi, steps, params.burn_in, params.thin, seed, replicas)
        }
    }
}

fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// Split `n` draws across replicas: earlier replicas take the remainder.
fn replica_shares(n: usize, replicas: usize) -> Vec<usize> {
    let replicas = replicas.max(1);
    let base = n / replicas;
    let extra = n % replicas;
    (0..replicas)
        .map(|r| base + usize::from(r < extra))
        .collect()
}

// ---------------------------------------------------------------------------
// Exact sampling
// ---------------------------------------------------------------------------

/// Draw i.i.d. configurations from the normalized weight table of the
/// whole space. Errors when the partition sum fails to certify within
/// the truncation.
pub fn sample_exact(
    pi: &dyn Kernel<f64>,
    n: usize,
    truncation: &Truncation<f64>,
    seed: u64,
    replicas: usize,
) -> Result<SampleBatch> {
    let region = pi.space().all_sites();
    let empty = Config::empty(pi.space().len());
    let table = conditional_law(pi, &empty, &region, truncation)?;
    let mut cdf = Vec::with_capacity(table.entries.len());
    let mut acc = 0.0;
    for (_, p) in &table.entries {
        acc += p;
        cdf.push(acc);
    }
    let shares = replica_shares(n, replicas);
    let batches: Vec<Vec<Config>> = shares
        .par_iter()
        .enumerate()
        .map(|(r, &share)| {
            let mut rng = replica_rng(seed, r);
            (0..share)
                .map(|_| {
                    let u: f64 = rng.random();
                    let idx = cdf.partition_point(|c| *c <= u);
                    let idx = idx.min(table.entries.len() - 1);
                    table.entries[idx].0.clone()
                })
                .collect()
        })
        .collect();
    Ok(SampleBatch {
        configs: batches.into_iter().flatten().collect(),
        seed,
        method: Method::Exact,
        diagnostics: Diagnostics {
            acceptance_rate: None,
            tail_bound: table.tail_bound,
            truncation_mass: Some(table.truncation_mass),
            replicas: replicas.max(1),
        },
    })
}

// ---------------------------------------------------------------------------
// Product-form sampling
// ---------------------------------------------------------------------------

/// Per-site CDF of a closed-form site law, truncated where the tail
/// drops below 1e-12.
fn site_cdf(law: &SiteLaw) -> Vec<f64> {
    const TAIL: f64 = 1e-12;
    const HARD_CAP: usize = 100_000;
    let mut cdf = Vec::new();
    match law {
        SiteLaw::Poisson { rate } => {
            let mut p = (-rate).exp();
            let mut cum = p;
            cdf.push(cum);
            let mut k = 0usize;
            while 1.0 - cum > TAIL && k < HARD_CAP {
                p *= rate / (k as f64 + 1.0);
                cum += p;
                cdf.push(cum);
                k += 1;
            }
        }
        SiteLaw::NegativeBinomial { r, z } => {
            let mut p = (1.0 - z).powf(*r);
            let mut cum = p;
            cdf.push(cum);
            let mut k = 0usize;
            while 1.0 - cum > TAIL && k < HARD_CAP {
                p *= z * (r + k as f64) / (k as f64 + 1.0);
                cum += p;
                cdf.push(cum);
                k += 1;
            }
        }
        SiteLaw::Binomial { n, p } => {
            let mut q = (1.0 - p).powi(*n as i32);
            let mut cum = q;
            cdf.push(cum);
            for k in 0..*n {
                q *= (*n - k) as f64 / (k as f64 + 1.0) * (p / (1.0 - p));
                cum += q;
                cdf.push(cum);
            }
        }
    }
    cdf
}

/// Independent per-site draws from the kernel's closed-form marginals.
/// Only the catalog kernels expose these; anything else errors.
pub fn sample_product_form(
    pi: &dyn Kernel<f64>,
    n: usize,
    seed: u64,
    replicas: usize,
) -> Result<SampleBatch> {
    let laws = pi.product_form().ok_or_else(|| Error::UnsupportedSampler {
        sampler: "product_form".into(),
        kernel: pi.name().into(),
    })?;
    let cdfs: Vec<Vec<f64>> = laws.iter().map(site_cdf).collect();
    let shares = replica_shares(n, replicas);
    let batches: Vec<Vec<Config>> = shares
        .par_iter()
        .enumerate()
        .map(|(r, &share)| {
            let mut rng = replica_rng(seed, r);
            (0..share)
                .map(|_| {
                    let counts = cdfs
                        .iter()
                        .map(|cdf| {
                            let u: f64 = rng.random();
                            let k = cdf.partition_point(|c| *c <= u);
                            k.min(cdf.len() - 1) as u32
                        })
                        .collect();
                    Config::from_counts(counts)
                })
                .collect()
        })
        .collect();
    Ok(SampleBatch {
        configs: batches.into_iter().flatten().collect(),
        seed,
        method: Method::ProductForm,
        diagnostics: Diagnostics {
            replicas: replicas.max(1),
            ..Diagnostics::default()
        },
    })
}

// ---------------------------------------------------------------------------
// Birth-death chain
// ---------------------------------------------------------------------------

struct ChainOutcome {
    samples: Vec<Config>,
    accepted: u64,
    proposed: u64,
}

/// One Metropolis-Hastings birth/death chain. Proposals: with equal
/// probability a birth at a uniform site or the death of a uniform
/// existing point (always a birth from the empty configuration).
/// Acceptance ratios follow from the stationary weight identity plus
/// the proposal asymmetry.
fn run_chain(
    pi: &dyn Kernel<f64>,
    steps: usize,
    burn_in: usize,
    thin: usize,
    mut rng: ChaCha8Rng,
) -> ChainOutcome {
    let n_sites = pi.space().len();
    let s = n_sites as f64;
    let mut mu = Config::empty(n_sites);
    let mut samples = Vec::new();
    let mut accepted = 0u64;
    let thin = thin.max(1);

    for step in 1..=steps {
        let mass = mu.mass();
        let do_birth = if mass == 0 {
            true
        } else {
            rng.random::<f64>() < 0.5
        };
        if do_birth {
            let x = rng.random_range(0..n_sites);
            let intensity = pi.eval(&mu).weight(x);
            let b_fwd = if mass == 0 { 1.0 } else { 0.5 };
            let ratio = intensity * s / (2.0 * b_fwd * (mass as f64 + 1.0));
            if rng.random::<f64>() < ratio.min(1.0) {
                mu = mu.added(x);
                accepted += 1;
            }
        } else {
            // pick a uniform existing point
            let mut pick = rng.random_range(0..mass);
            let mut x = 0;
            for site in 0..n_sites {
                let c = mu.count(site) as u64;
                if pick < c {
                    x = site;
                    break;
                }
                pick -= c;
            }
            let nu = mu.removed(x);
            let intensity = pi.eval(&nu).weight(x);
            let b_rev = if nu.mass() == 0 { 1.0 } else { 0.5 };
            let ratio = if intensity > 0.0 {
                2.0 * b_rev * mass as f64 / (s * intensity)
            } else {
                f64::INFINITY
            };
            if rng.random::<f64>() < ratio.min(1.0) {
                mu = nu;
                accepted += 1;
            }
        }
        if step > burn_in && (step - burn_in) % thin == 0 {
            samples.push(mu.clone());
        }
    }
    ChainOutcome {
        samples,
        accepted,
        proposed: steps as u64,
    }
}

/// Birth-death sampling: `steps` Metropolis-Hastings steps, recording
/// every `thin`-th state after `burn_in`. With `replicas > 1` the
/// post-burn-in work is split across independent chains.
pub fn sample_birth_death(
    pi: &dyn Kernel<f64>,
    steps: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    replicas: usize,
) -> Result<SampleBatch> {
    if steps <= burn_in {
        return Err(Error::Parameter(format!(
            "birth-death chain needs steps > burn_in (got {steps} <= {burn_in})"
        )));
    }
    let thin = thin.max(1);
    let total_samples = (steps - burn_in) / thin;
    let shares = replica_shares(total_samples, replicas);
    let outcomes: Vec<ChainOutcome> = shares
        .par_iter()
        .enumerate()
        .map(|(r, &share)| {
            run_chain(
                pi,
                burn_in + share * thin,
                burn_in,
                thin,
                replica_rng(seed, r),
            )
        })
        .collect();
    let mut configs = Vec::with_capacity(total_samples);
    let mut accepted = 0u64;
    let mut proposed = 0u64;
    for o in outcomes {
        configs.extend(o.samples);
        accepted += o.accepted;
        proposed += o.proposed;
    }
    Ok(SampleBatch {
        configs,
        seed,
        method: Method::BirthDeath,
        diagnostics: Diagnostics {
            acceptance_rate: Some(accepted as f64 / proposed.max(1) as f64),
            replicas: replicas.max(1),
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::FnKernel;
    use crate::kernels::{PoissonKernel, PolyaDifferenceKernel, PolyaSumKernel};
    use crate::measure::Measure;
    use crate::space::Space;

    fn poisson2() -> PoissonKernel<f64> {
        PoissonKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![1.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn batches_are_reproducible() {
        let pi = poisson2();
        let trunc = Truncation::new(20, 1e-9);
        let b1 = sample_exact(&pi, 500, &trunc, 7, 2).unwrap();
        let b2 = sample_exact(&pi, 500, &trunc, 7, 2).unwrap();
        assert_eq!(b1.configs, b2.configs);
        let b3 = sample_exact(&pi, 500, &trunc, 8, 2).unwrap();
        assert_ne!(b1.configs, b3.configs);

        let p1 = sample_product_form(&pi, 500, 7, 3).unwrap();
        let p2 = sample_product_form(&pi, 500, 7, 3).unwrap();
        assert_eq!(p1.configs, p2.configs);

        let c1 = sample_birth_death(&pi, 5_000, 500, 5, 7, 2).unwrap();
        let c2 = sample_birth_death(&pi, 5_000, 500, 5, 7, 2).unwrap();
        assert_eq!(c1.configs, c2.configs);
    }

    #[test]
    fn exact_sampler_matches_poisson_mean() {
        let pi = poisson2();
        let batch = sample_exact(&pi, 100_000, &Truncation::new(25, 1e-9), 42, 1).unwrap();
        let means = batch.mean_counts(2);
        // Poisson(1) mean 1, sd 1 => MC error about 0.003 at 1e5 draws
        assert!((means[0] - 1.0).abs() < 0.02, "mean {}", means[0]);
        assert!((means[1] - 1.0).abs() < 0.02, "mean {}", means[1]);
    }

    #[test]
    fn product_form_matches_closed_forms() {
        // Poisson: P(count = 0) = exp(-1/2)
        let pi = PoissonKernel::new(
            Space::new(vec!["a"]).unwrap(),
            Measure::new(vec![0.5]).unwrap(),
        )
        .unwrap();
        let batch = sample_product_form(&pi, 100_000, 11, 1).unwrap();
        let zeros = batch.configs.iter().filter(|c| c.count(0) == 0).count();
        let frac = zeros as f64 / batch.len() as f64;
        assert!((frac - (-0.5f64).exp()).abs() < 0.01);

        // Pólya sum: geometric marginal
        let pi = PolyaSumKernel::new(
            Space::new(vec!["a"]).unwrap(),
            0.5,
            Measure::new(vec![1.0]).unwrap(),
        )
        .unwrap();
        let batch = sample_product_form(&pi, 100_000, 11, 1).unwrap();
        let mean = batch.mean_counts(1)[0];
        assert!((mean - 1.0).abs() < 0.03, "geometric mean {mean}");

        // Pólya difference never exceeds ρ
        let pi = PolyaDifferenceKernel::new(
            Space::new(vec!["a"]).unwrap(),
            1.0,
            Measure::new(vec![3.0]).unwrap(),
        )
        .unwrap();
        let batch = sample_product_form(&pi, 50_000, 11, 1).unwrap();
        assert!(batch.configs.iter().all(|c| c.count(0) <= 3));
        let mean = batch.mean_counts(1)[0];
        assert!((mean - 1.5).abs() < 0.03, "binomial mean {mean}");
    }

    #[test]
    fn product_form_rejects_general_kernels() {
        let sp = Space::new(vec!["a"]).unwrap();
        let k = FnKernel::new(sp, "custom", |_: &Config| Measure::new(vec![1.0]).unwrap());
        assert!(matches!(
            sample_product_form(&k, 10, 0, 1),
            Err(Error::UnsupportedSampler { .. })
        ));
    }

    #[test]
    fn birth_death_matches_poisson_mean() {
        let pi = poisson2();
        let batch = sample_birth_death(&pi, 210_000, 10_000, 2, 3, 1).unwrap();
        let means = batch.mean_counts(2);
        assert!((means[0] - 1.0).abs() < 0.05, "mean {}", means[0]);
        assert!((means[1] - 1.0).abs() < 0.05, "mean {}", means[1]);
        assert!(batch.diagnostics.acceptance_rate.unwrap() > 0.1);
    }

    #[test]
    fn hard_core_chain_respects_exclusion() {
        // intensity zero once a site is occupied: multiplicity stays <= 1
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let k = FnKernel::new(sp, "hard-core", |mu: &Config| {
            let w = |x: usize| if mu.count(x) >= 1 { 0.0 } else { 1.0 };
            Measure::new(vec![w(0), w(1)]).unwrap()
        });
        let batch = sample_birth_death(&k, 20_000, 1_000, 2, 5, 1).unwrap();
        assert!(batch
            .configs
            .iter()
            .all(|c| c.count(0) <= 1 && c.count(1) <= 1));
    }

    #[test]
    fn empty_draw_count_allowed() {
        let pi = poisson2();
        let batch = sample_product_form(&pi, 0, 1, 4).unwrap();
        assert!(batch.is_empty());
    }
}
