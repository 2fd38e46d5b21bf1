//! Cross-validation of the samplers and the exact law machinery:
//! independent routes must agree.

use std::collections::BTreeMap;

use itertools::Itertools;
use papangelou::checks::{check_cocycle, check_simple};
use papangelou::config::{enumerate_configs, Config};
use papangelou::kernel::{FnKernel, Kernel};
use papangelou::kernels::{
    InteractionKernel, PairDensity, PoissonKernel, PolyaDifferenceKernel, PolyaSumKernel,
    Reinforcement, DEFAULT_MASS_BOUND,
};
use papangelou::measure::Measure;
use papangelou::partition::{conditional_law, iterated_kernel, Truncation};
use papangelou::samplers::{
    sample_birth_death, sample_exact, sample_product_form, SampleBatch,
};
use papangelou::space::Space;

fn space3() -> Space {
    Space::new(vec!["a", "b", "c"]).unwrap()
}

fn empirical_law(batch: &SampleBatch) -> BTreeMap<Config, f64> {
    let mut counts: BTreeMap<Config, f64> = BTreeMap::new();
    for cfg in &batch.configs {
        *counts.entry(cfg.clone()).or_insert(0.0) += 1.0;
    }
    let n = batch.len() as f64;
    counts.values_mut().for_each(|v| *v /= n);
    counts
}

fn tv(a: &BTreeMap<Config, f64>, b: &BTreeMap<Config, f64>) -> f64 {
    let mut keys: Vec<&Config> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

fn law_as_map(pi: &dyn Kernel<f64>, max_mass: u32) -> BTreeMap<Config, f64> {
    let region = pi.space().all_sites();
    let table = conditional_law(
        pi,
        &Config::empty(pi.space().len()),
        &region,
        &Truncation::new(max_mass, 1e-9),
    )
    .unwrap();
    table.entries.into_iter().collect()
}

/// The three samplers draw from the same law: pairwise total-variation
/// distances below 0.02 at 1e5 draws.
#[test]
fn samplers_agree_pairwise() {
    let kernels: Vec<Box<dyn Kernel<f64>>> = vec![
        Box::new(
            PoissonKernel::new(space3(), Measure::new(vec![1.0, 0.5, 0.7]).unwrap()).unwrap(),
        ),
        Box::new(
            PolyaSumKernel::new(space3(), 0.3, Measure::new(vec![1.0, 1.0, 1.0]).unwrap())
                .unwrap(),
        ),
        Box::new(
            PolyaDifferenceKernel::new(
                space3(),
                0.5,
                Measure::new(vec![3.0, 3.0, 3.0]).unwrap(),
            )
            .unwrap(),
        ),
    ];
    let n = 100_000;
    for kernel in &kernels {
        let pi = kernel.as_ref();
        let exact = sample_exact(pi, n, &Truncation::new(30, 1e-9), 101, 1).unwrap();
        let product = sample_product_form(pi, n, 202, 1).unwrap();
        let chain = sample_birth_death(pi, 10_000 + n * 10, 10_000, 10, 303, 1).unwrap();
        let laws = [
            empirical_law(&exact),
            empirical_law(&product),
            empirical_law(&chain),
        ];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let d = tv(&laws[i], &laws[j]);
            assert!(
                d < 0.02,
                "{}: TV between sampler {i} and {j} is {d}",
                pi.name()
            );
        }
    }
}

/// Exact sampler law equals the product of the closed-form per-site
/// pmfs for the product kernels (two independent routes).
#[test]
fn exact_law_factorizes_for_product_kernels() {
    let sp = Space::new(vec!["a", "b"]).unwrap();
    let pi = PolyaSumKernel::new(sp, 0.5, Measure::new(vec![1.0, 2.0]).unwrap()).unwrap();
    let law = law_as_map(&pi, 40);

    // independent oracle: negative binomial pmfs via the ratio recursion
    let site_pmf = |r: f64, z: f64, n: u32| -> f64 {
        let mut p = (1.0 - z).powf(r);
        for k in 0..n {
            p *= z * (r + k as f64) / (k as f64 + 1.0);
        }
        p
    };
    for (cfg, p) in &law {
        if cfg.mass() > 12 {
            continue;
        }
        let expected = site_pmf(1.0, 0.5, cfg.count(0)) * site_pmf(2.0, 0.5, cfg.count(1));
        assert!(
            (p - expected).abs() < 1e-6,
            "law mismatch at {cfg:?}: {p} vs {expected}"
        );
    }
}

/// Order-independence of the iterated kernel under the cocycle
/// condition, and a found violation without it.
#[test]
fn iterated_kernel_order_independence() {
    let polya = PolyaSumKernel::new(space3(), 0.4, Measure::new(vec![1.0, 0.5, 2.0]).unwrap())
        .unwrap();
    assert!(check_cocycle(&polya, 4, &1e-9).passed());
    let empty = Config::empty(3);
    for kappa in enumerate_configs(3, 4) {
        let points = kappa.points();
        if points.len() < 2 {
            continue;
        }
        let reference = iterated_kernel(&polya, &empty, &points);
        for perm in points.iter().copied().permutations(points.len()) {
            let value = iterated_kernel(&polya, &empty, &perm);
            let scale = reference.abs().max(1.0);
            assert!(
                (value - reference).abs() <= 1e-12 * scale,
                "order dependence at {kappa:?}"
            );
        }
    }

    // asymmetric pair weight: some permutation pair must disagree
    let sp = Space::new(vec!["a", "b"]).unwrap();
    let asym = FnKernel::new(sp, "asymmetric", |mu: &Config| {
        let f: [[f64; 2]; 2] = [[1.0, 1.0], [2.0, 1.0]];
        let w = |x: usize| {
            (0..2)
                .map(|z| f[x][z].powi(mu.count(z) as i32))
                .product::<f64>()
        };
        Measure::new(vec![w(0), w(1)]).unwrap()
    });
    assert!(!check_cocycle(&asym, 4, &1e-9).passed());
    let kappa = Config::from_counts(vec![1, 1]);
    let forward = iterated_kernel(&asym, &Config::empty(2), &kappa.points());
    let reversed: Vec<usize> = kappa.points().into_iter().rev().collect();
    let backward = iterated_kernel(&asym, &Config::empty(2), &reversed);
    assert!((forward - backward).abs() > 0.5);
}

/// A kernel passing the simplicity check only ever realizes simple
/// configurations, through every sampler.
#[test]
fn simplicity_propagates_to_samples() {
    let f = PairDensity::from_fn(3, |x, y| if x == y { 0.0 } else { 1.0 }).unwrap();
    let pi = InteractionKernel::new(
        space3(),
        Measure::new(vec![0.8, 0.8, 0.8]).unwrap(),
        f,
        Reinforcement::None,
        DEFAULT_MASS_BOUND,
    )
    .unwrap();
    assert!(check_simple(&pi, 4).passed());

    let exact = sample_exact(&pi, 20_000, &Truncation::new(6, 1e-9), 5, 1).unwrap();
    let chain = sample_birth_death(&pi, 60_000, 5_000, 5, 5, 1).unwrap();
    for batch in [exact, chain] {
        assert!(batch
            .configs
            .iter()
            .all(|cfg| cfg.counts().iter().all(|&c| c <= 1)));
    }
}

/// Empirical means of the exact sampler against the analytic marginal
/// means of the catalog.
#[test]
fn exact_sampler_means() {
    // Pólya sum: mean zρ/(1-z) = 1.0
    let pi = PolyaSumKernel::new(
        Space::new(vec!["a"]).unwrap(),
        0.5,
        Measure::new(vec![1.0]).unwrap(),
    )
    .unwrap();
    let batch = sample_exact(&pi, 100_000, &Truncation::new(50, 1e-9), 17, 1).unwrap();
    let mean = batch.mean_counts(1)[0];
    assert!((mean - 1.0).abs() < 0.03, "Pólya sum mean {mean}");

    // Pólya difference: Binomial(3, 1/2) mean 1.5
    let pi = PolyaDifferenceKernel::new(
        Space::new(vec!["a"]).unwrap(),
        1.0,
        Measure::new(vec![3.0]).unwrap(),
    )
    .unwrap();
    let batch = sample_exact(&pi, 100_000, &Truncation::new(3, 1e-9), 17, 1).unwrap();
    let mean = batch.mean_counts(1)[0];
    assert!((mean - 1.5).abs() < 0.02, "Pólya difference mean {mean}");
}
