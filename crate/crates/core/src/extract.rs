//! Recovering the structural decomposition of a black-box kernel.
//!
//! A kernel passing the cocycle and prediction-invariance checks is a
//! fixed measure plus local reinforcement: `ρ = π(0,·)` and the
//! increments `c_x(n) = π(nδ_x,{x}) - π((n-1)δ_x,{x})`. With a pair
//! interaction the same recovery applies after stripping the Boltzmann
//! factor. Every extraction re-verifies its preconditions and replays
//! the reconstructed kernel against the source on the probe set, so a
//! returned [`Decomposition`] is certified to reproduce the kernel
//! there.
//!
//! [`classify`] runs the battery and matches the recovered parameters
//! against the catalog: constant zero increment is Poisson, constant
//! increment in `(0,1)` a Pólya sum, constant negative increment with
//! integer `ρ/|c|` a Pólya difference.

use crate::checks::{
    check_a2, check_a2prime_extract_f, check_cocycle, check_j, check_jprime, ExtractedDensity,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::kernels::{InteractionKernel, LocalReinforcementKernel, PairDensity, Reinforcement};
use crate::measure::Measure;
use crate::scalar::{close, Scalar};

/// Which structure theorem the decomposition instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Fixed measure plus local reinforcement (no interaction).
    Local,
    /// Pair interaction with strictly positive diagonal; `c` holds
    /// increments.
    InteractionPositiveDiagonal,
    /// Pair interaction vanishing on the diagonal; `c` holds the
    /// occupied-site intensities directly.
    InteractionVanishingDiagonal,
}

/// Recovered kernel structure.
#[derive(Debug, Clone)]
pub struct Decomposition<T> {
    pub rho: Measure<T>,
    /// Per-site reinforcement values for multiplicities `1..=len`;
    /// rows may be shorter where the kernel caps the site.
    pub c: Vec<Vec<T>>,
    pub regime: Regime,
    pub f: Option<PairDensity<T>>,
    pub max_recovered_n: u32,
}

impl<T: Scalar> Decomposition<T> {
    /// Reinforcement increments as a kernel-ready table.
    fn reinforcement(&self) -> Reinforcement<T> {
        Reinforcement::Table(self.c.clone())
    }

    /// Rebuild a kernel from the decomposition.
    pub fn reconstruct(&self, pi_space: &crate::space::Space) -> Result<Box<dyn Kernel<T>>> {
        let bound = self.max_recovered_n;
        match self.regime {
            Regime::Local => Ok(Box::new(LocalReinforcementKernel::new(
                pi_space.clone(),
                self.rho.clone(),
                self.reinforcement(),
                bound,
            )?)),
            Regime::InteractionPositiveDiagonal | Regime::InteractionVanishingDiagonal => {
                let f = self
                    .f
                    .clone()
                    .ok_or_else(|| Error::Parameter("interaction regime without density".into()))?;
                Ok(Box::new(InteractionKernel::new(
                    pi_space.clone(),
                    self.rho.clone(),
                    f,
                    self.reinforcement(),
                    bound,
                )?))
            }
        }
    }

    /// Whether the increments are equal across all sites and
    /// multiplicities (the linear-structure criterion).
    pub fn constant_increment(&self, tol: &T) -> Option<T> {
        let first = self
            .c
            .iter()
            .flat_map(|row| row.first())
            .next()
            .cloned()
            .unwrap_or_else(T::zero);
        for row in &self.c {
            for v in row {
                if !close(v, &first, tol) {
                    return None;
                }
            }
        }
        Some(first)
    }
}

/// Per-site recovery depth: the requested maximum, shortened where the
/// kernel's support bound caps the site.
fn site_depth<T: Scalar>(pi: &dyn Kernel<T>, site: usize, max_n: u32) -> u32 {
    pi.support_bound()
        .map_or(max_n, |b| b.count(site).min(max_n))
}

fn require_pass<T: Scalar>(report: crate::checks::CheckReport<T>) -> Result<()> {
    if report.passed() {
        Ok(())
    } else {
        Err(Error::Precondition(report.to_string()))
    }
}

/// Verify the reconstruction against the source kernel over the probe
/// set.
fn verify_reconstruction<T: Scalar>(
    pi: &dyn Kernel<T>,
    rebuilt: &dyn Kernel<T>,
    probe_mass: u32,
    tol: &T,
) -> Result<()> {
    for mu in crate::checks::probe_configs(pi, probe_mass) {
        let actual = pi.eval(&mu);
        let recon = rebuilt.eval(&mu);
        for x in 0..pi.space().len() {
            if !close(actual.get(x), recon.get(x), tol) {
                return Err(Error::ReconstructionMismatch {
                    config: mu,
                    site: x,
                    actual: actual.get(x).to_string(),
                    reconstructed: recon.get(x).to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Recover `(ρ, c)` from a kernel satisfying the cocycle and
/// prediction-invariance conditions (both re-verified here).
pub fn extract_local<T: Scalar>(
    pi: &dyn Kernel<T>,
    max_n: u32,
    probe_mass: u32,
    tol: &T,
) -> Result<Decomposition<T>> {
    require_pass(check_cocycle(pi, probe_mass, tol))?;
    require_pass(check_a2(pi, probe_mass, tol))?;
    let n = pi.space().len();
    let depth = max_n.max(probe_mass);
    let empty = Config::empty(n);
    let rho = pi.eval(&empty);
    let mut c = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = Vec::new();
        let mut prev = rho.weight(x);
        for k in 1..=site_depth(pi, x, depth) {
            let mut cfg = Config::empty(n);
            for _ in 0..k {
                cfg = cfg.added(x);
            }
            let v = pi.eval(&cfg).weight(x);
            row.push(v.clone() - prev);
            prev = v;
        }
        c.push(row);
    }
    let decomposition = Decomposition {
        rho,
        c,
        regime: Regime::Local,
        f: None,
        max_recovered_n: depth,
    };
    let rebuilt = decomposition.reconstruct(pi.space())?;
    verify_reconstruction(pi, rebuilt.as_ref(), probe_mass, tol)?;
    Ok(decomposition)
}

/// Assemble a full pair density from the extracted off-diagonal entries
/// and a supplied diagonal.
fn assemble_density<T: Scalar>(
    extracted: &ExtractedDensity<T>,
    diagonal: &[T],
) -> Result<PairDensity<T>> {
    let n = diagonal.len();
    let mut matrix = vec![vec![T::zero(); n]; n];
    for x in 0..n {
        for y in 0..n {
            if x == y {
                matrix[x][y] = diagonal[x].clone();
            } else {
                matrix[x][y] = extracted.entries[x][y].clone().ok_or_else(|| {
                    Error::Parameter(format!(
                        "pair density entry ({x},{y}) is unidentifiable from the kernel"
                    ))
                })?;
            }
        }
    }
    PairDensity::new(matrix)
}

/// Recover `(ρ, f, c)` in the strictly-positive-diagonal regime.
///
/// The diagonal of `f` is not identifiable from the kernel (it only
/// ever appears multiplied into the reinforcement), so the caller
/// supplies it; a known potential `φ` gives `e^{-φ(x,x)}`. Increments
/// are recovered with the accumulated diagonal factor divided out,
/// `c_x(n) = f(x,x)^{-n} π(nδ_x,{x}) - f(x,x)^{-(n-1)} π((n-1)δ_x,{x})`,
/// which is what makes the product-form reconstruction exact.
pub fn extract_interaction<T: Scalar>(
    pi: &dyn Kernel<T>,
    f_diagonal: &[T],
    max_n: u32,
    probe_mass: u32,
    tol: &T,
) -> Result<Decomposition<T>> {
    let n = pi.space().len();
    if f_diagonal.len() != n {
        return Err(Error::Parameter(format!(
            "diagonal has {} entries for a {n}-site space",
            f_diagonal.len()
        )));
    }
    if f_diagonal.iter().any(|d| *d <= T::zero()) {
        return Err(Error::Parameter(
            "positive-diagonal extraction needs a strictly positive diagonal".into(),
        ));
    }
    require_pass(check_cocycle(pi, probe_mass, tol))?;
    let (report, density) = check_a2prime_extract_f(pi, probe_mass, tol);
    require_pass(report)?;
    let density = density.expect("passing check returns the density");
    let f = assemble_density(&density, f_diagonal)?;

    let depth = max_n.max(probe_mass);
    let empty = Config::empty(n);
    let rho = pi.eval(&empty);
    let mut c = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = Vec::new();
        // prev = f(x,x)^{-(k-1)} π((k-1)δ_x, {x})
        let mut prev = rho.weight(x);
        let mut scale = T::one();
        for k in 1..=site_depth(pi, x, depth) {
            scale = scale / f_diagonal[x].clone();
            let mut cfg = Config::empty(n);
            for _ in 0..k {
                cfg = cfg.added(x);
            }
            let v = scale.clone() * pi.eval(&cfg).weight(x);
            row.push(v.clone() - prev);
            prev = v;
        }
        c.push(row);
    }
    let decomposition = Decomposition {
        rho,
        c,
        regime: Regime::InteractionPositiveDiagonal,
        f: Some(f),
        max_recovered_n: depth,
    };
    let rebuilt = decomposition.reconstruct(pi.space())?;
    verify_reconstruction(pi, rebuilt.as_ref(), probe_mass, tol)?;
    Ok(decomposition)
}

/// Recover `(ρ, f, c)` when the pair density vanishes on the diagonal.
/// Here the occupied-site intensity is read off directly,
/// `c_y(n) = π(nδ_y,{y})`, because the diagonal zero erases the `ρ`
/// term at occupied sites.
pub fn extract_vanishing_diagonal<T: Scalar>(
    pi: &dyn Kernel<T>,
    max_n: u32,
    probe_mass: u32,
    tol: &T,
) -> Result<Decomposition<T>> {
    require_pass(check_cocycle(pi, probe_mass, tol))?;
    let (report, density) = check_a2prime_extract_f(pi, probe_mass, tol);
    require_pass(report)?;
    let density = density.expect("passing check returns the density");
    let n = pi.space().len();
    let diagonal = vec![T::zero(); n];
    let f = assemble_density(&density, &diagonal)?;

    let depth = max_n.max(probe_mass);
    let empty = Config::empty(n);
    let rho = pi.eval(&empty);
    let mut c = Vec::with_capacity(n);
    for y in 0..n {
        let mut row = Vec::new();
        for k in 1..=site_depth(pi, y, depth) {
            let mut cfg = Config::empty(n);
            for _ in 0..k {
                cfg = cfg.added(y);
            }
            row.push(pi.eval(&cfg).weight(y));
        }
        c.push(row);
    }
    let decomposition = Decomposition {
        rho,
        c,
        regime: Regime::InteractionVanishingDiagonal,
        f: Some(f),
        max_recovered_n: depth,
    };
    let rebuilt = decomposition.reconstruct(pi.space())?;
    verify_reconstruction(pi, rebuilt.as_ref(), probe_mass, tol)?;
    Ok(decomposition)
}

/// Kernel class recognized by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Poisson,
    PolyaSum,
    PolyaDifference,
    LocalReinforcement,
    Interaction,
    Unknown,
}

impl Class {
    pub fn as_str(&self) -> &'static str {
        match self {
            Class::Poisson => "poisson",
            Class::PolyaSum => "polya_sum",
            Class::PolyaDifference => "polya_difference",
            Class::LocalReinforcement => "local_reinforcement",
            Class::Interaction => "interaction",
            Class::Unknown => "unknown",
        }
    }
}

/// Classification outcome with recovered parameters where they exist.
#[derive(Debug, Clone)]
pub struct Classification<T> {
    pub class: Class,
    /// Catalog parameter `z` (Pólya sum / difference).
    pub z: Option<T>,
    /// Catalog base measure `ρ₀` (so the kernel is `z(ρ₀ ± μ)`), or the
    /// plain `ρ = π(0,·)` for the other classes.
    pub rho0: Option<Measure<T>>,
    pub decomposition: Option<Decomposition<T>>,
}

/// Run the check battery and match the kernel against the catalog.
pub fn classify<T: Scalar>(
    pi: &dyn Kernel<T>,
    probe_mass: u32,
    max_n: u32,
    tol: &T,
) -> Classification<T> {
    let unknown = || Classification {
        class: Class::Unknown,
        z: None,
        rho0: None,
        decomposition: None,
    };
    if !check_cocycle(pi, probe_mass, tol).passed() {
        return unknown();
    }
    let a2 = check_a2(pi, probe_mass, tol).passed();
    if !a2 {
        // nontrivial interaction density?
        let (report, _) = check_a2prime_extract_f(pi, probe_mass, tol);
        let j = check_j(pi, probe_mass, tol).passed();
        if report.passed() && !j {
            return Classification {
                class: Class::Interaction,
                z: None,
                rho0: None,
                decomposition: None,
            };
        }
        return unknown();
    }
    let Ok(decomposition) = extract_local(pi, max_n, probe_mass, tol) else {
        return unknown();
    };
    let jprime = match check_jprime(pi, probe_mass, tol) {
        Ok(report) => report.passed(),
        Err(_) => false,
    };
    let fallback = |decomposition: Decomposition<T>| Classification {
        class: Class::LocalReinforcement,
        z: None,
        rho0: Some(decomposition.rho.clone()),
        decomposition: Some(decomposition),
    };
    if !jprime {
        return fallback(decomposition);
    }
    let Some(c) = decomposition.constant_increment(tol) else {
        return fallback(decomposition);
    };
    if close(&c, &T::zero(), tol) {
        return Classification {
            class: Class::Poisson,
            z: None,
            rho0: Some(decomposition.rho.clone()),
            decomposition: Some(decomposition),
        };
    }
    if c > T::zero() && c < T::one() {
        let rho0: Vec<T> = decomposition
            .rho
            .iter()
            .map(|w| w.clone() / c.clone())
            .collect();
        return Classification {
            class: Class::PolyaSum,
            z: Some(c),
            rho0: Measure::new(rho0).ok(),
            decomposition: Some(decomposition),
        };
    }
    if c < T::zero() {
        let z = c.abs();
        let rho0: Vec<T> = decomposition
            .rho
            .iter()
            .map(|w| w.clone() / z.clone())
            .collect();
        let integral = rho0
            .iter()
            .all(|w| w.to_nonneg_integer(tol).is_some());
        if integral {
            return Classification {
                class: Class::PolyaDifference,
                z: Some(z),
                rho0: Measure::new(rho0).ok(),
                decomposition: Some(decomposition),
            };
        }
    }
    fallback(decomposition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{
        PoissonKernel, PolyaDifferenceKernel, PolyaSumKernel, DEFAULT_MASS_BOUND,
    };
    use crate::scalar::Rational;
    use crate::space::Space;
    use num::Zero;

    fn rat(n: i64, d: u64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn space3() -> Space {
        Space::new(vec!["a", "b", "c"]).unwrap()
    }

    fn zero() -> Rational {
        Rational::from_u64(0)
    }

    #[test]
    fn local_extraction_on_catalog() {
        let rho0 = Measure::new(vec![rat(1, 1), rat(2, 1), rat(1, 2)]).unwrap();
        let poisson = PoissonKernel::new(space3(), rho0.clone()).unwrap();
        let d = extract_local(&poisson, 6, 4, &zero()).unwrap();
        assert_eq!(d.rho, rho0);
        assert!(d.c.iter().flatten().all(|v| v.is_zero()));

        let sum = PolyaSumKernel::new(
            space3(),
            rat(3, 10),
            Measure::new(vec![rat(1, 1), rat(1, 1), rat(1, 1)]).unwrap(),
        )
        .unwrap();
        let d = extract_local(&sum, 6, 4, &zero()).unwrap();
        assert_eq!(d.rho.weights(), &[rat(3, 10), rat(3, 10), rat(3, 10)]);
        assert!(d.c.iter().flatten().all(|v| *v == rat(3, 10)));

        let diff = PolyaDifferenceKernel::new(
            space3(),
            rat(1, 2),
            Measure::new(vec![rat(3, 1), rat(3, 1), rat(3, 1)]).unwrap(),
        )
        .unwrap();
        let d = extract_local(&diff, 6, 4, &zero()).unwrap();
        assert_eq!(d.rho.weights(), &[rat(3, 2), rat(3, 2), rat(3, 2)]);
        // capped at multiplicity 3 per site
        for row in &d.c {
            assert_eq!(row.len(), 3);
            assert!(row.iter().all(|v| *v == rat(-1, 2)));
        }
    }

    #[test]
    fn extraction_rejects_interaction_kernels() {
        let f = PairDensity::from_fn(2, |x, y| {
            if x == y {
                rat(1, 1)
            } else {
                rat(1, 2)
            }
        })
        .unwrap();
        let k = InteractionKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![rat(1, 1), rat(1, 1)]).unwrap(),
            f,
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        assert!(matches!(
            extract_local(&k, 4, 4, &zero()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn interaction_extraction_round_trip() {
        // Gibbs kernel from a rational pair density, zero reinforcement
        let f = PairDensity::from_fn(3, |x, y| {
            if x == y {
                rat(1, 1)
            } else {
                rat(1, 2)
            }
        })
        .unwrap();
        let k = InteractionKernel::new(
            space3(),
            Measure::new(vec![rat(1, 1), rat(2, 1), rat(1, 1)]).unwrap(),
            f.clone(),
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let diagonal = vec![rat(1, 1), rat(1, 1), rat(1, 1)];
        let d = extract_interaction(&k, &diagonal, 6, 4, &zero()).unwrap();
        assert_eq!(d.f.as_ref().unwrap(), &f);
        assert!(d.c.iter().flatten().all(|v| v.is_zero()));
        assert_eq!(d.rho.weights(), &[rat(1, 1), rat(2, 1), rat(1, 1)]);
    }

    #[test]
    fn interaction_extraction_with_reinforcement_and_offunit_diagonal() {
        // nontrivial diagonal and increments: the normalized recovery
        // must still round-trip exactly
        let f = PairDensity::from_fn(2, |x, y| {
            if x == y {
                rat(1, 2)
            } else {
                rat(2, 1)
            }
        })
        .unwrap();
        let c = Reinforcement::PerSiteConstant(vec![rat(3, 10), rat(3, 10)]);
        let k = InteractionKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![rat(1, 1), rat(1, 1)]).unwrap(),
            f.clone(),
            c,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let diagonal = vec![rat(1, 2), rat(1, 2)];
        let d = extract_interaction(&k, &diagonal, 6, 4, &zero()).unwrap();
        assert_eq!(d.f.as_ref().unwrap(), &f);
        assert!(d.c.iter().flatten().all(|v| *v == rat(3, 10)));
    }

    #[test]
    fn vanishing_diagonal_round_trip() {
        let f = PairDensity::from_fn(2, |x, y| {
            if x == y {
                rat(0, 1)
            } else {
                rat(1, 1)
            }
        })
        .unwrap();
        let c = Reinforcement::Table(vec![vec![rat(7, 10)], vec![rat(7, 10)]]);
        let k = InteractionKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![rat(1, 1), rat(1, 1)]).unwrap(),
            f.clone(),
            c,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let d = extract_vanishing_diagonal(&k, 6, 4, &zero()).unwrap();
        assert_eq!(d.regime, Regime::InteractionVanishingDiagonal);
        // π(δ_x,{x}) = c_x(1) since the diagonal kills the ρ term
        assert_eq!(d.c[0][0], rat(7, 10));
        assert_eq!(d.c[1][0], rat(7, 10));
    }

    #[test]
    fn classify_catalog_kernels() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        // (0.3, 0.3) + 0.3 μ is the Pólya sum with z = 0.3, ρ₀ = (1,1)
        let k = PolyaSumKernel::new(
            sp.clone(),
            rat(3, 10),
            Measure::new(vec![rat(1, 1), rat(1, 1)]).unwrap(),
        )
        .unwrap();
        let c = classify(&k, 4, 6, &zero());
        assert_eq!(c.class, Class::PolyaSum);
        assert_eq!(c.z.unwrap(), rat(3, 10));
        assert_eq!(c.rho0.unwrap().weights(), &[rat(1, 1), rat(1, 1)]);

        let k = PoissonKernel::new(
            sp.clone(),
            Measure::new(vec![rat(2, 1), rat(5, 1)]).unwrap(),
        )
        .unwrap();
        let c = classify(&k, 4, 6, &zero());
        assert_eq!(c.class, Class::Poisson);
        assert_eq!(c.rho0.unwrap().weights(), &[rat(2, 1), rat(5, 1)]);

        // (1.5, 1.5) - 0.5 μ is the Pólya difference with z = 0.5, ρ₀ = (3,3)
        let k = LocalReinforcementKernel::new(
            sp,
            Measure::new(vec![rat(3, 2), rat(3, 2)]).unwrap(),
            Reinforcement::PerSiteConstant(vec![rat(-1, 2), rat(-1, 2)]),
            3,
        )
        .unwrap();
        let c = classify(&k, 4, 6, &zero());
        assert_eq!(c.class, Class::PolyaDifference);
        assert_eq!(c.z.unwrap(), rat(1, 2));
        assert_eq!(c.rho0.unwrap().weights(), &[rat(3, 1), rat(3, 1)]);
    }

    #[test]
    fn classify_fallbacks() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        // site-dependent reinforcement: local, not in the catalog
        let k = LocalReinforcementKernel::new(
            sp.clone(),
            Measure::new(vec![rat(1, 1), rat(1, 1)]).unwrap(),
            Reinforcement::PerSiteConstant(vec![rat(1, 4), rat(1, 8)]),
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        assert_eq!(classify(&k, 4, 6, &zero()).class, Class::LocalReinforcement);

        // interaction kernel
        let f = PairDensity::from_fn(2, |x, y| {
            if x == y {
                rat(1, 1)
            } else {
                rat(1, 3)
            }
        })
        .unwrap();
        let k = InteractionKernel::new(
            sp,
            Measure::new(vec![rat(1, 1), rat(1, 1)]).unwrap(),
            f,
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        assert_eq!(classify(&k, 4, 6, &zero()).class, Class::Interaction);
    }
}
