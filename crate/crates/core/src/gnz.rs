//! Monte Carlo verification of the integration-by-parts identity.
//!
//! For a process `P` with kernel `π` and a test function `h`, the two
//! sides
//!
//! ```text
//! lhs = E_P [ Σ_x μ(x) · h(x, μ) ]
//! rhs = E_P [ Σ_x π(μ,{x}) · h(x, μ+δ_x) ]
//! ```
//!
//! agree exactly when `P` is the Papangelou process of `π`. Both sides
//! are estimated on the same draws; the z-score uses the standard error
//! of the per-draw differences, which cancels the shared sampling
//! noise. A suite passes when every `|z| ≤ 3`.
//!
//! [`transform_test`] pushes sampled configurations through a site map,
//! builds the image kernel, and runs the same identity on the target
//! space: the state-space transformation theorem says it must continue
//! to hold whenever Dynkin's condition does.

use std::sync::Arc;

use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::kernels::pushforward_kernel;
use crate::samplers::{draw, SampleBatch, SamplerSpec};
use crate::space::{SiteMap, Space};

/// Family tag of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Indicator,
    CountWeighted,
    ExponentialTilt,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Indicator => "indicator",
            Family::CountWeighted => "count-weighted",
            Family::ExponentialTilt => "exponential-tilt",
        }
    }
}

/// Bounded test function `h(x, μ)` on site-configuration pairs.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub family: Family,
    eval: Arc<dyn Fn(usize, &Config) -> f64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        family: Family,
        eval: impl Fn(usize, &Config) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            name: name.into(),
            family,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, site: usize, mu: &Config) -> f64 {
        (self.eval)(site, mu)
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFunction({})", self.name)
    }
}

/// The fixed default suite: one indicator per site, the constant one,
/// the occupation count `h(x,μ) = μ({x})`, and the exponential tilt
/// `h(x,μ) = exp(-μ(X))`. Six functions on a three-site space.
pub fn default_suite(space: &Space) -> Vec<TestFunction> {
    let mut suite = Vec::with_capacity(space.len() + 3);
    for x0 in 0..space.len() {
        suite.push(TestFunction::new(
            format!("indicator[{}]", space.site_name(x0)),
            Family::Indicator,
            move |x, _mu: &Config| if x == x0 { 1.0 } else { 0.0 },
        ));
    }
    suite.push(TestFunction::new("one", Family::Indicator, |_, _: &Config| {
        1.0
    }));
    suite.push(TestFunction::new(
        "count",
        Family::CountWeighted,
        |x, mu: &Config| mu.count(x) as f64,
    ));
    suite.push(TestFunction::new(
        "exp_tilt",
        Family::ExponentialTilt,
        |_, mu: &Config| (-(mu.mass() as f64)).exp(),
    ));
    suite
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

fn estimate_from(values: impl Iterator<Item = f64>, n: usize) -> Estimate {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for v in values {
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n as f64;
    let se = if n > 1 {
        let var = (sumsq - sum * sum / n as f64) / (n as f64 - 1.0);
        (var.max(0.0) / n as f64).sqrt()
    } else {
        0.0
    };
    Estimate { mean, se, n }
}

/// Campbell side of the identity: mean of `Σ_x μ(x) h(x, μ)` over the
/// batch.
pub fn campbell_lhs(batch: &SampleBatch, h: &TestFunction) -> Result<Estimate> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(estimate_from(
        batch.configs.iter().map(|mu| lhs_summand(mu, h)),
        batch.len(),
    ))
}

/// Kernel side of the identity: mean of `Σ_x π(μ,{x}) h(x, μ+δ_x)`.
pub fn campbell_rhs(
    batch: &SampleBatch,
    pi: &dyn Kernel<f64>,
    h: &TestFunction,
) -> Result<Estimate> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(estimate_from(
        batch.configs.iter().map(|mu| rhs_summand(mu, pi, h)),
        batch.len(),
    ))
}

fn lhs_summand(mu: &Config, h: &TestFunction) -> f64 {
    mu.support()
        .into_iter()
        .map(|x| mu.count(x) as f64 * h.eval(x, mu))
        .sum()
}

fn rhs_summand(mu: &Config, pi: &dyn Kernel<f64>, h: &TestFunction) -> f64 {
    let w = pi.eval(mu);
    (0..mu.len())
        .map(|x| {
            let intensity = w.weight(x);
            if intensity == 0.0 {
                0.0
            } else {
                intensity * h.eval(x, &mu.added(x))
            }
        })
        .sum()
}

/// Paired two-sided report for one test function.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub function: String,
    pub family: Family,
    pub lhs: f64,
    pub rhs: f64,
    pub se_lhs: f64,
    pub se_rhs: f64,
    pub n: usize,
    /// `|lhs - rhs|` over the standard error of the per-draw differences.
    pub z_score: f64,
    pub pass: bool,
}

/// Fixed chunk size for parallel accumulation; summation order is a
/// function of the data only, never of the thread count.
const CHUNK: usize = 4096;

#[derive(Clone, Copy, Default)]
struct PairSums {
    l: f64,
    l2: f64,
    r: f64,
    r2: f64,
    lr: f64,
}

impl PairSums {
    fn add(&mut self, l: f64, r: f64) {
        self.l += l;
        self.l2 += l * l;
        self.r += r;
        self.r2 += r * r;
        self.lr += l * r;
    }

    fn merge(&mut self, other: &PairSums) {
        self.l += other.l;
        self.l2 += other.l2;
        self.r += other.r;
        self.r2 += other.r2;
        self.lr += other.lr;
    }
}

fn report_from_sums(h: &TestFunction, sums: &PairSums, n: usize) -> EstimateReport {
    let nf = n as f64;
    let mean_l = sums.l / nf;
    let mean_r = sums.r / nf;
    let var = |sum: f64, sumsq: f64| {
        if n > 1 {
            ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        }
    };
    let se_lhs = (var(sums.l, sums.l2) / nf).sqrt();
    let se_rhs = (var(sums.r, sums.r2) / nf).sqrt();
    // per-draw differences: Σd = Σl - Σr, Σd² = Σl² - 2Σlr + Σr²
    let d_sum = sums.l - sums.r;
    let d_sumsq = sums.l2 - 2.0 * sums.lr + sums.r2;
    let se_d = (var(d_sum, d_sumsq) / nf).sqrt();
    let diff = (mean_l - mean_r).abs();
    let z_score = if se_d > 0.0 {
        diff / se_d
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    EstimateReport {
        function: h.name.clone(),
        family: h.family,
        lhs: mean_l,
        rhs: mean_r,
        se_lhs,
        se_rhs,
        n,
        z_score,
        pass: z_score <= 3.0,
    }
}

/// Evaluate the identity for every function of the suite on one batch.
pub fn gnz_reports(
    batch: &SampleBatch,
    pi: &dyn Kernel<f64>,
    suite: &[TestFunction],
) -> Result<Vec<EstimateReport>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let chunk_sums: Vec<Vec<PairSums>> = batch
        .configs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sums = vec![PairSums::default(); suite.len()];
            for mu in chunk {
                let w = pi.eval(mu);
                for (hi, h) in suite.iter().enumerate() {
                    let l = lhs_summand(mu, h);
                    let mut r = 0.0;
                    for x in 0..mu.len() {
                        let intensity = w.weight(x);
                        if intensity != 0.0 {
                            r += intensity * h.eval(x, &mu.added(x));
                        }
                    }
                    sums[hi].add(l, r);
                }
            }
            sums
        })
        .collect();
    let mut totals = vec![PairSums::default(); suite.len()];
    for chunk in &chunk_sums {
        for (t, s) in totals.iter_mut().zip(chunk.iter()) {
            t.merge(s);
        }
    }
    Ok(totals
        .iter()
        .zip(suite.iter())
        .map(|(sums, h)| report_from_sums(h, sums, batch.len()))
        .collect())
}

/// Sample from the kernel's process and test the identity.
pub fn gnz_test(
    pi: &dyn Kernel<f64>,
    sampler: &SamplerSpec,
    suite: &[TestFunction],
    n: usize,
    seed: u64,
    replicas: usize,
) -> Result<Vec<EstimateReport>> {
    let batch = draw(pi, sampler, n, seed, replicas)?;
    gnz_reports(&batch, pi, suite)
}

/// Outcome of a state-space transformation experiment.
#[derive(Debug, Clone)]
pub struct TransformOutcome {
    pub target_space: Space,
    pub pushed_kernel_name: String,
    pub reports: Vec<EstimateReport>,
    /// Pushed sample batch on the target space.
    pub batch: SampleBatch,
}

/// Sample on the source, push the batch through the map, and verify
/// the identity on the target space against the image kernel. Errors
/// when Dynkin's condition fails (the theorem's hypothesis).
pub fn transform_test(
    pi: &dyn Kernel<f64>,
    map: &SiteMap,
    sampler: &SamplerSpec,
    n: usize,
    seed: u64,
    replicas: usize,
    probe_mass: u32,
    tol: f64,
) -> Result<TransformOutcome> {
    let pushed = pushforward_kernel(pi, map.clone(), probe_mass, &tol)?;
    let source_batch = draw(pi, sampler, n, seed, replicas)?;
    let batch = SampleBatch {
        configs: source_batch
            .configs
            .iter()
            .map(|mu| map.push_config(mu))
            .collect(),
        seed: source_batch.seed,
        method: source_batch.method,
        diagnostics: source_batch.diagnostics.clone(),
    };
    let suite = default_suite(map.target());
    let reports = gnz_reports(&batch, &pushed, &suite)?;
    Ok(TransformOutcome {
        target_space: map.target().clone(),
        pushed_kernel_name: pushed.name().to_string(),
        reports,
        batch,
    })
}
