//! Kernel catalog.
//!
//! The built-in kernels:
//!
//! * [`PoissonKernel`] — `π(μ,·) = ρ`, constant in the configuration;
//! * [`PolyaSumKernel`] — `π(μ,·) = z(ρ + μ)` with `z ∈ (0,1)`;
//! * [`PolyaDifferenceKernel`] — `π(μ,·) = z(ρ - μ)` while `μ ≤ ρ`
//!   componentwise, and the zero measure otherwise;
//! * [`LocalReinforcementKernel`] — `π(μ,{x}) = ρ({x}) + Σ_{k≤μ(x)} c_x(k)`,
//!   a fixed measure plus per-site reinforcement increments;
//! * [`InteractionKernel`] — the local form multiplied by a pair
//!   interaction factor `V(z,μ) = Π_w f(z,w)^{μ(w)}`, in either the
//!   strictly-positive-diagonal or the vanishing-diagonal regime;
//! * [`pushforward_kernel`] — the image kernel `π'(ν,B) = π(μ, G⁻¹B)`
//!   under a site map `G`, guarded by the Dynkin consistency check.
//!
//! Reinforcement tables store *increments*: `c_x(n)` is the change of
//! intensity at `x` caused by the `n`-th point there, with `c_x(0) = 0`.
//! The vanishing-diagonal interaction regime is the one exception — see
//! [`InteractionKernel::new`].
//!
//! Kernels that can pin sites shut (zero intensity at some multiplicity)
//! report the resulting per-site caps through `support_bound`; all
//! configurations beyond a cap are unreachable for the process and the
//! check battery skips them.

use crate::checks::{self, Verdict};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, SiteLaw};
use crate::measure::Measure;
use crate::scalar::Scalar;
use crate::space::{SiteMap, Space};

/// Default mass bound up to which reinforcement nonnegativity is
/// validated at construction.
pub const DEFAULT_MASS_BOUND: u32 = 12;

/// Per-site reinforcement increments `c_x(n)`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Reinforcement<T> {
    /// Identically zero.
    None,
    /// `c_x(n) = v_x` for every `n`.
    PerSiteConstant(Vec<T>),
    /// Explicit table `t[x][n-1]`; entries beyond the table are zero.
    Table(Vec<Vec<T>>),
}

impl<T: Scalar> Reinforcement<T> {
    pub fn value_at(&self, site: usize, n: u32) -> T {
        if n == 0 {
            return T::zero();
        }
        match self {
            Reinforcement::None => T::zero(),
            Reinforcement::PerSiteConstant(v) => v[site].clone(),
            Reinforcement::Table(t) => t[site]
                .get((n - 1) as usize)
                .cloned()
                .unwrap_or_else(T::zero),
        }
    }

    /// `Σ_{k=1..n} c_x(k)`.
    pub fn cumulative(&self, site: usize, n: u32) -> T {
        match self {
            Reinforcement::None => T::zero(),
            Reinforcement::PerSiteConstant(v) => {
                if n == 0 {
                    T::zero()
                } else {
                    v[site].clone() * T::from_u64(n as u64)
                }
            }
            Reinforcement::Table(t) => {
                let row = &t[site];
                let upto = (n as usize).min(row.len());
                row[..upto]
                    .iter()
                    .fold(T::zero(), |acc, c| acc + c.clone())
            }
        }
    }

    fn check_sites(&self, n_sites: usize) -> Result<()> {
        let len = match self {
            Reinforcement::None => return Ok(()),
            Reinforcement::PerSiteConstant(v) => v.len(),
            Reinforcement::Table(t) => t.len(),
        };
        if len != n_sites {
            return Err(Error::Parameter(format!(
                "reinforcement covers {len} sites but the space has {n_sites}"
            )));
        }
        Ok(())
    }
}

/// Symmetric nonnegative pair density `f(x,y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDensity<T> {
    entries: Vec<Vec<T>>,
}

/// Diagonal regime of a pair density: the interaction theorems split on
/// whether `f(x,x)` is strictly positive everywhere or zero everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalRegime {
    Positive,
    Vanishing,
}

impl<T: Scalar> PairDensity<T> {
    pub fn new(entries: Vec<Vec<T>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Parameter("pair density must be a square matrix".into()));
        }
        for (x, row) in entries.iter().enumerate() {
            for (y, v) in row.iter().enumerate() {
                if *v < T::zero() {
                    return Err(Error::Parameter(format!(
                        "pair density entry ({x},{y}) is negative"
                    )));
                }
                if entries[x][y] != entries[y][x] {
                    return Err(Error::Parameter(format!(
                        "pair density is asymmetric at ({x},{y}): {} vs {}",
                        entries[x][y], entries[y][x]
                    )));
                }
            }
        }
        Ok(PairDensity { entries })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let entries = (0..n)
            .map(|x| (0..n).map(|y| f(x, y)).collect())
            .collect();
        PairDensity::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.entries[x][y]
    }

    pub fn entries(&self) -> &[Vec<T>] {
        &self.entries
    }

    /// Positive or vanishing diagonal; mixed diagonals are rejected
    /// because the structure theorems treat the two cases separately.
    pub fn diagonal_regime(&self) -> Result<DiagonalRegime> {
        let n = self.entries.len();
        let zeros = (0..n).filter(|&x| self.entries[x][x].is_zero()).count();
        if zeros == 0 {
            Ok(DiagonalRegime::Positive)
        } else if zeros == n {
            Ok(DiagonalRegime::Vanishing)
        } else {
            Err(Error::Parameter(
                "pair density mixes zero and positive diagonal entries; \
                 the two regimes cannot be combined"
                    .into(),
            ))
        }
    }

    /// Boltzmann factor `V(z, μ) = Π_{w ∈ supp μ} f(z,w)^{μ(w)}`.
    pub fn boltzmann(&self, z: usize, mu: &Config) -> T {
        let mut acc = T::one();
        for w in mu.support() {
            acc = acc * self.entries[z][w].powu(mu.count(w));
        }
        acc
    }
}

fn check_rho_len<T: Scalar>(space: &Space, rho: &Measure<T>) -> Result<()> {
    if rho.len() != space.len() {
        return Err(Error::Parameter(format!(
            "measure has {} weights but the space has {} sites",
            rho.len(),
            space.len()
        )));
    }
    Ok(())
}

/// Turn per-site caps into a support bound; `None` when nothing is capped.
fn caps_to_bound(caps: Vec<u32>) -> Option<Config> {
    if caps.iter().all(|&c| c == u32::MAX) {
        None
    } else {
        Some(Config::from_counts(caps))
    }
}

// ---------------------------------------------------------------------------
// Poisson
// ---------------------------------------------------------------------------

/// Constant kernel `π(μ,·) = ρ`; its process is the Poisson process
/// with intensity `ρ`.
pub struct PoissonKernel<T> {
    space: Space,
    rho: Measure<T>,
    bound: Option<Config>,
}

impl<T: Scalar> PoissonKernel<T> {
    pub fn new(space: Space, rho: Measure<T>) -> Result<Self> {
        check_rho_len(&space, &rho)?;
        let caps = rho
            .iter()
            .map(|w| if w.is_zero() { 0 } else { u32::MAX })
            .collect();
        Ok(PoissonKernel {
            space,
            rho,
            bound: caps_to_bound(caps),
        })
    }

    pub fn rho(&self) -> &Measure<T> {
        &self.rho
    }
}

impl<T: Scalar> Kernel<T> for PoissonKernel<T> {
    fn name(&self) -> &str {
        "poisson"
    }

    fn space(&self) -> &Space {
        &self.space
    }

    fn eval(&self, _mu: &Config) -> Measure<T> {
        self.rho.clone()
    }

    fn support_bound(&self) -> Option<&Config> {
        self.bound.as_ref()
    }

    fn product_form(&self) -> Option<Vec<SiteLaw>> {
        Some(
            self.rho
                .iter()
                .map(|w| SiteLaw::Poisson { rate: w.to_f64() })
                .collect(),
        )
    }
}

// ---------------------------------------------------------------------------
// Pólya sum
// ---------------------------------------------------------------------------

/// `π(μ,·) = z(ρ + μ)` with `z ∈ (0,1)`: every observed point makes the
/// same point more likely. Single-site marginals are negative binomial.
pub struct PolyaSumKernel<T> {
    space: Space,
    z: T,
    rho: Measure<T>,
    bound: Option<Config>,
}

impl<T: Scalar> PolyaSumKernel<T> {
    pub fn new(space: Space, z: T, rho: Measure<T>) -> Result<Self> {
        check_rho_len(&space, &rho)?;
        if z <= T::zero() || z >= T::one() {
            return Err(Error::Parameter(format!(
                "Pólya sum requires z in (0,1), got {z}"
            )));
        }
        let caps = rho
            .iter()
            .map(|w| if w.is_zero() { 0 } else { u32::MAX })
            .collect();
        Ok(PolyaSumKernel {
            space,
            z,
            rho,
            bound: caps_to_bound(caps),
        })
    }

    pub fn z(&self) -> &T {
        &self.z
    }

    pub fn rho(&self) -> &Measure<T> {
        &self.rho
    }
}

impl<T: Scalar> Kernel<T> for PolyaSumKernel<T> {
    fn name(&self) -> &str {
        "polya_sum"
    }

    fn space(&self) -> &Space {
        &self.space
    }

    fn eval(&self, mu: &Config) -> Measure<T> {
        let weights = (0..self.space.len())
            .map(|x| {
                self.z.clone() * (self.rho.weight(x) + T::from_u64(mu.count(x) as u64))
            })
            .collect();
        Measure::from_weights(weights)
    }

    fn support_bound(&self) -> Option<&Config> {
        self.bound.as_ref()
    }

    fn product_form(&self) -> Option<Vec<SiteLaw>> {
        let z = self.z.to_f64();
        Some(
            self.rho
                .iter()
                .map(|w| SiteLaw::NegativeBinomial { r: w.to_f64(), z })
                .collect(),
        )
    }
}

// ---------------------------------------------------------------------------
// Pólya difference
// ---------------------------------------------------------------------------

/// `π(μ,·) = z(ρ - μ)` for `μ ≤ ρ` and the zero measure otherwise;
/// `ρ` must be integer-valued. Single-site marginals are binomial.
pub struct PolyaDifferenceKernel<T> {
    space: Space,
    z: T,
    rho: Measure<T>,
    rho_counts: Config,
}

impl<T: Scalar> PolyaDifferenceKernel<T> {
    pub fn new(space: Space, z: T, rho: Measure<T>) -> Result<Self> {
        check_rho_len(&space, &rho)?;
        if z <= T::zero() {
            return Err(Error::Parameter(format!(
                "Pólya difference requires z > 0, got {z}"
            )));
        }
        let tol = crate::scalar::default_tol::<T>();
        let mut counts = Vec::with_capacity(rho.len());
        for (x, w) in rho.iter().enumerate() {
            let n = w.to_nonneg_integer(&tol).ok_or_else(|| {
                Error::Parameter(format!(
                    "Pólya difference requires integer-valued ρ; site index {x} has {w}"
                ))
            })?;
            counts.push(u32::try_from(n).map_err(|_| {
                Error::Parameter(format!("ρ weight {w} too large at site index {x}"))
            })?);
        }
        Ok(PolyaDifferenceKernel {
            space,
            z,
            rho,
            rho_counts: Config::from_counts(counts),
        })
    }

    pub fn z(&self) -> &T {
        &self.z
    }

    pub fn rho(&self) -> &Measure<T> {
        &self.rho
    }
}

impl<T: Scalar> Kernel<T> for PolyaDifferenceKernel<T> {
    fn name(&self) -> &str {
        "polya_difference"
    }

    fn space(&self) -> &Space {
        &self.space
    }

    fn eval(&self, mu: &Config) -> Measure<T> {
        if !mu.le(&self.rho_counts) {
            return Measure::zeros(self.space.len());
        }
        let weights = (0..self.space.len())
            .map(|x| {
                self.z.clone()
                    * (self.rho.weight(x) - T::from_u64(mu.count(x) as u64))
            })
            .collect();
        Measure::from_weights(weights)
    }

    fn support_bound(&self) -> Option<&Config> {
        Some(&self.rho_counts)
    }

    fn product_form(&self) -> Option<Vec<SiteLaw>> {
        let z = self.z.to_f64();
        let p = z / (1.0 + z);
        Some(
            self.rho_counts
                .counts()
                .iter()
                .map(|&n| SiteLaw::Binomial { n, p })
                .collect(),
        )
    }
}

// ---------------------------------------------------------------------------
// Local reinforcement
// ---------------------------------------------------------------------------

/// `π(μ,{x}) = ρ({x}) + Σ_{k=1..μ(x)} c_x(k)`, clamped at zero.
///
/// Nonnegativity of the per-site values is validated for multiplicities
/// up to `mass_bound` at construction; beyond the first zero the site
/// is capped (no further point can realize there), which the kernel
/// reports through `support_bound`.
pub struct LocalReinforcementKernel<T> {
    space: Space,
    rho: Measure<T>,
    c: Reinforcement<T>,
    bound: Option<Config>,
}

impl<T: Scalar> LocalReinforcementKernel<T> {
    pub fn new(
        space: Space,
        rho: Measure<T>,
        c: Reinforcement<T>,
        mass_bound: u32,
    ) -> Result<Self> {
        check_rho_len(&space, &rho)?;
        c.check_sites(space.len())?;
        let mut caps = Vec::with_capacity(space.len());
        for x in 0..space.len() {
            let mut cap = u32::MAX;
            for n in 0..=mass_bound {
                let v = rho.weight(x) + c.cumulative(x, n);
                if v < T::zero() {
                    return Err(Error::Parameter(format!(
                        "reinforcement drives site `{}` negative at multiplicity {n} ({v})",
                        space.site_name(x)
                    )));
                }
                if v.is_zero() {
                    cap = n;
                    break;
                }
            }
            caps.push(cap);
        }
        Ok(LocalReinforcementKernel {
            space,
            rho,
            c,
            bound: caps_to_bound(caps),
        })
    }

    pub fn rho(&self) -> &Measure<T> {
        &self.rho
    }

    pub fn reinforcement(&self) -> &Reinforcement<T> {
        &self.c
    }
}

impl<T: Scalar> Kernel<T> for LocalReinforcementKernel<T> {
    fn name(&self) -> &str {
        "local_reinforcement"
    }

    fn space(&self) -> &Space {
        &self.space
    }

    fn eval(&self, mu: &Config) -> Measure<T> {
        let weights = (0..self.space.len())
            .map(|x| {
                let v = self.rho.weight(x) + self.c.cumulative(x, mu.count(x));
                if v < T::zero() {
                    T::zero()
                } else {
                    v
                }
            })
            .collect();
        Measure::from_weights(weights)
    }

    fn support_bound(&self) -> Option<&Config> {
        self.bound.as_ref()
    }
}

// ---------------------------------------------------------------------------
// Pair interaction
// ---------------------------------------------------------------------------

/// Local reinforcement dressed with a pair interaction.
///
/// With strictly positive diagonal the intensity is
/// `π(μ,{w}) = V(w,μ)·(ρ({w}) + Σ_{k≤μ(w)} c_w(k))`.
///
/// With vanishing diagonal it is
/// `π(μ,{w}) = V(w,μ)·ρ({w}) + V(w, μ|_{w^c})·c_w(μ(w))`,
/// and `c` stores the occupied-site intensity `c_w(n) = π(nδ_w,{w})`
/// directly rather than increments (the diagonal zeros erase history,
/// so there is nothing to accumulate).
pub struct InteractionKernel<T> {
    space: Space,
    rho: Measure<T>,
    f: PairDensity<T>,
    c: Reinforcement<T>,
    regime: DiagonalRegime,
    bound: Option<Config>,
}

impl<T: Scalar> InteractionKernel<T> {
    pub fn new(
        space: Space,
        rho: Measure<T>,
        f: PairDensity<T>,
        c: Reinforcement<T>,
        mass_bound: u32,
    ) -> Result<Self> {
        check_rho_len(&space, &rho)?;
        c.check_sites(space.len())?;
        if f.len() != space.len() {
            return Err(Error::Parameter(format!(
                "pair density is {}x{} but the space has {} sites",
                f.len(),
                f.len(),
                space.len()
            )));
        }
        let regime = f.diagonal_regime()?;
        let mut caps = Vec::with_capacity(space.len());
        for x in 0..space.len() {
            let mut cap = u32::MAX;
            for n in 0..=mass_bound {
                let v = match regime {
                    DiagonalRegime::Positive => rho.weight(x) + c.cumulative(x, n),
                    DiagonalRegime::Vanishing => {
                        if n == 0 {
                            rho.weight(x)
                        } else {
                            c.value_at(x, n)
                        }
                    }
                };
                if v < T::zero() {
                    return Err(Error::Parameter(format!(
                        "interaction reinforcement drives site `{}` negative at \
                         multiplicity {n} ({v})",
                        space.site_name(x)
                    )));
                }
                if v.is_zero() {
                    cap = n;
                    break;
                }
            }
            caps.push(cap);
        }
        Ok(InteractionKernel {
            space,
            rho,
            f,
            c,
            regime,
            bound: caps_to_bound(caps),
        })
    }

    pub fn pair_density(&self) -> &PairDensity<T> {
        &self.f
    }

    pub fn regime(&self) -> DiagonalRegime {
        self.regime
    }
}

impl<T: Scalar> Kernel<T> for InteractionKernel<T> {
    fn name(&self) -> &str {
        "interaction"
    }

    fn space(&self) -> &Space {
        &self.space
    }

    fn eval(&self, mu: &Config) -> Measure<T> {
        let n = self.space.len();
        let weights = (0..n)
            .map(|w| match self.regime {
                DiagonalRegime::Positive => {
                    let local = self.rho.weight(w) + self.c.cumulative(w, mu.count(w));
                    let local = if local < T::zero() { T::zero() } else { local };
                    self.f.boltzmann(w, mu) * local
                }
                DiagonalRegime::Vanishing => {
                    let mut v = self.f.boltzmann(w, mu) * self.rho.weight(w);
                    let k = mu.count(w);
                    if k > 0 {
                        let off = mu.restricted_complement(&[w]);
                        v = v + self.f.boltzmann(w, &off) * self.c.value_at(w, k);
                    }
                    v
                }
            })
            .collect();
        Measure::from_weights(weights)
    }

    fn support_bound(&self) -> Option<&Config> {
        self.bound.as_ref()
    }
}

// ---------------------------------------------------------------------------
// Pushforward
// ---------------------------------------------------------------------------

/// Image kernel under a site map, `π'(ν,{y}) = π(μ, G⁻¹{y})` for any
/// preimage `μ` of `ν`.
pub struct PushforwardKernel<T, K> {
    source: K,
    map: SiteMap,
    fibers: Vec<Vec<usize>>,
    bound: Option<Config>,
    name: String,
    _scalar: std::marker::PhantomData<fn() -> T>,
}

/// Build the image kernel of `pi` under `map`.
///
/// Dynkin's consistency condition is verified over all admissible
/// source configurations of mass at most `probe_mass` first; a
/// violation is returned as an error carrying the witness pair. The map
/// must be onto its target.
pub fn pushforward_kernel<T: Scalar, K: Kernel<T>>(
    pi: K,
    map: SiteMap,
    probe_mass: u32,
    tol: &T,
) -> Result<PushforwardKernel<T, K>> {
    if map.source_len() != pi.space().len() {
        return Err(Error::Parameter(format!(
            "site map covers {} sites but the kernel space has {}",
            map.source_len(),
            pi.space().len()
        )));
    }
    if !map.is_onto() {
        return Err(Error::Parameter(
            "site map is not onto its target; the image kernel would be undefined \
             on part of the target space"
                .into(),
        ));
    }
    let report = checks::check_dynkin(&pi, &map, probe_mass, tol);
    if report.verdict == Verdict::Fail {
        let w = report.witness.expect("failing check carries a witness");
        return Err(Error::DynkinViolation {
            mu1: w.configs[0].clone(),
            mu2: w.configs[1].clone(),
            target_site: w.sites[0],
            lhs: w.lhs.to_string(),
            rhs: w.rhs.to_string(),
        });
    }
    let fibers = map.fibers();
    let bound = pi.support_bound().map(|b| {
        Config::from_counts(
            fibers
                .iter()
                .map(|fiber| {
                    fiber
                        .iter()
                        .fold(0u32, |acc, &x| acc.saturating_add(b.count(x)))
                })
                .collect(),
        )
    });
    let name = format!("pushforward({})", pi.name());
    Ok(PushforwardKernel {
        source: pi,
        map,
        fibers,
        bound,
        name,
        _scalar: std::marker::PhantomData,
    })
}

impl<T: Scalar, K: Kernel<T>> PushforwardKernel<T, K> {
    /// Canonical admissible preimage of a target configuration, filling
    /// each fiber front to back within the source support bound.
    /// `None` when the target configuration has no admissible preimage.
    fn preimage(&self, nu: &Config) -> Option<Config> {
        let src_bound = self.source.support_bound();
        let mut counts = vec![0u32; self.map.source_len()];
        for (y, fiber) in self.fibers.iter().enumerate() {
            let mut remaining = nu.count(y);
            for &x in fiber {
                if remaining == 0 {
                    break;
                }
                let cap = src_bound.map_or(u32::MAX, |b| b.count(x));
                let take = remaining.min(cap);
                counts[x] = take;
                remaining -= take;
            }
            if remaining > 0 {
                return None;
            }
        }
        Some(Config::from_counts(counts))
    }
}

impl<T: Scalar, K: Kernel<T>> Kernel<T> for PushforwardKernel<T, K> {
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &Space {
        self.map.target()
    }

    fn eval(&self, nu: &Config) -> Measure<T> {
        let Some(mu) = self.preimage(nu) else {
            return Measure::zeros(self.map.target().len());
        };
        let w = self.source.eval(&mu);
        let weights = self
            .fibers
            .iter()
            .map(|fiber| {
                fiber
                    .iter()
                    .fold(T::zero(), |acc, &x| acc + w.weight(x))
            })
            .collect();
        Measure::from_weights(weights)
    }

    fn support_bound(&self) -> Option<&Config> {
        self.bound.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn space3() -> Space {
        Space::new(vec!["a", "b", "c"]).unwrap()
    }

    fn half() -> Rational {
        Rational::from_ratio(1, 2)
    }

    /// The three-site kernel that separates the pointwise and the
    /// setwise sufficiency postulates: ½(1-μ({-1}))δ₋₁ + ½δ₀ + ½(1+μ({1}))δ₁.
    pub(crate) fn remark_kernel() -> LocalReinforcementKernel<Rational> {
        let space = Space::new(vec!["-1", "0", "1"]).unwrap();
        let rho = Measure::new(vec![half(), half(), half()]).unwrap();
        let c = Reinforcement::PerSiteConstant(vec![
            -half(),
            Rational::from_u64(0),
            half(),
        ]);
        LocalReinforcementKernel::new(space, rho, c, 1).unwrap()
    }

    #[test]
    fn poisson_is_constant() {
        let rho = Measure::new(vec![0.5, 0.5, 0.5]).unwrap();
        let k = PoissonKernel::new(space3(), rho.clone()).unwrap();
        assert_eq!(k.eval(&Config::empty(3)), rho);
        assert_eq!(k.eval(&Config::from_counts(vec![3, 0, 0])), rho);
        let k2 = PoissonKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![1.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(k2.eval(&Config::from_counts(vec![0, 1])).weights(), &[1.0, 2.0]);
    }

    #[test]
    fn polya_sum_formula() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let k = PolyaSumKernel::new(sp.clone(), 0.5, Measure::new(vec![1.0, 1.0]).unwrap())
            .unwrap();
        assert_eq!(k.eval(&Config::empty(2)).weights(), &[0.5, 0.5]);
        assert_eq!(k.eval(&Config::from_counts(vec![2, 0])).weights(), &[1.5, 0.5]);

        let k = PolyaSumKernel::new(sp, 0.3, Measure::new(vec![2.0, 0.0]).unwrap()).unwrap();
        let w = k.eval(&Config::from_counts(vec![1, 1]));
        assert!((w.weight(0) - 0.9).abs() < 1e-12);
        assert!((w.weight(1) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn polya_sum_rejects_bad_z() {
        let sp = Space::new(vec!["a"]).unwrap();
        let rho = Measure::new(vec![1.0]).unwrap();
        assert!(PolyaSumKernel::new(sp.clone(), 1.5, rho.clone()).is_err());
        assert!(PolyaSumKernel::new(sp, 0.0, rho).is_err());
    }

    #[test]
    fn polya_difference_formula() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let k = PolyaDifferenceKernel::new(sp.clone(), 1.0, Measure::new(vec![3.0, 3.0]).unwrap())
            .unwrap();
        assert_eq!(k.eval(&Config::from_counts(vec![1, 0])).weights(), &[2.0, 3.0]);
        // beyond the bound the whole measure vanishes
        assert_eq!(k.eval(&Config::from_counts(vec![4, 0])).weights(), &[0.0, 0.0]);

        let k = PolyaDifferenceKernel::new(sp.clone(), 2.0, Measure::new(vec![1.0, 1.0]).unwrap())
            .unwrap();
        assert_eq!(k.eval(&Config::from_counts(vec![1, 1])).weights(), &[0.0, 0.0]);

        assert!(
            PolyaDifferenceKernel::new(sp, 1.0, Measure::new(vec![1.5, 1.0]).unwrap()).is_err()
        );
    }

    #[test]
    fn remark_kernel_values() {
        let k = remark_kernel();
        let w = k.eval(&Config::from_counts(vec![1, 0, 0]));
        assert_eq!(
            w.weights(),
            &[Rational::from_u64(0), half(), half()]
        );
        let w = k.eval(&Config::from_counts(vec![0, 0, 1]));
        assert_eq!(w.weights(), &[half(), half(), Rational::from_u64(1)]);
        // total-mass evaluations that the setwise postulate compares
        assert_eq!(
            k.eval(&Config::from_counts(vec![1, 0, 0])).total(),
            Rational::from_u64(1)
        );
        assert_eq!(
            k.eval(&Config::from_counts(vec![0, 0, 1])).total(),
            Rational::from_u64(2)
        );
        // site -1 is capped at one point
        assert_eq!(k.support_bound().unwrap().counts(), &[1, u32::MAX, u32::MAX]);
    }

    #[test]
    fn zero_reinforcement_is_poisson() {
        let rho = Measure::new(vec![0.7, 0.2, 0.1]).unwrap();
        let local = LocalReinforcementKernel::new(
            space3(),
            rho.clone(),
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let poisson = PoissonKernel::new(space3(), rho).unwrap();
        for mu in crate::config::enumerate_configs(3, 3) {
            assert_eq!(local.eval(&mu), poisson.eval(&mu));
        }
    }

    #[test]
    fn reinforcement_negativity_rejected() {
        let rho = Measure::new(vec![1.0]).unwrap();
        let c = Reinforcement::PerSiteConstant(vec![-0.6]);
        let r = LocalReinforcementKernel::new(Space::new(vec!["a"]).unwrap(), rho, c, 4);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn interaction_positive_diagonal() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let e1 = (-1.0f64).exp();
        let f = PairDensity::from_fn(2, |x, y| if x == y { 1.0 } else { e1 }).unwrap();
        let k = InteractionKernel::new(
            sp,
            Measure::new(vec![1.0, 1.0]).unwrap(),
            f,
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let w = k.eval(&Config::from_counts(vec![0, 2]));
        assert!((w.weight(0) - (-2.0f64).exp()).abs() < 1e-12);
        assert!((w.weight(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interaction_hard_core() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let f = PairDensity::from_fn(2, |x, y| if x == y { 0.0 } else { 1.0 }).unwrap();
        let k = InteractionKernel::new(
            sp,
            Measure::new(vec![1.0, 1.0]).unwrap(),
            f,
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        assert_eq!(k.regime(), DiagonalRegime::Vanishing);
        let w = k.eval(&Config::from_counts(vec![1, 0]));
        assert_eq!(w.weights(), &[0.0, 1.0]);
        // every site capped at a single point
        assert_eq!(k.support_bound().unwrap().counts(), &[1, 1]);
    }

    #[test]
    fn interaction_with_unit_f_matches_local() {
        let rho = Measure::new(vec![0.4, 0.9, 0.3]).unwrap();
        let c = Reinforcement::PerSiteConstant(vec![0.1, 0.0, 0.2]);
        let f = PairDensity::from_fn(3, |_, _| 1.0).unwrap();
        let inter = InteractionKernel::new(
            space3(),
            rho.clone(),
            f,
            c.clone(),
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let local =
            LocalReinforcementKernel::new(space3(), rho, c, DEFAULT_MASS_BOUND).unwrap();
        for mu in crate::config::enumerate_configs(3, 4) {
            assert_eq!(inter.eval(&mu), local.eval(&mu));
        }
    }

    #[test]
    fn mixed_diagonal_rejected() {
        let f = PairDensity::from_fn(2, |x, y| {
            if x == y && x == 0 {
                0.0
            } else {
                1.0
            }
        })
        .unwrap();
        assert!(f.diagonal_regime().is_err());
    }

    #[test]
    fn asymmetric_pair_density_rejected() {
        let r = PairDensity::new(vec![vec![1.0, 1.0], vec![2.0, 1.0]]);
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn pushforward_poisson_merges_weights() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let k = PoissonKernel::new(sp.clone(), Measure::new(vec![1.0, 2.0]).unwrap()).unwrap();
        let map = SiteMap::merge_blocks(&sp, &[vec![0, 1]]).unwrap();
        let pushed = pushforward_kernel(k, map, 4, &1e-9).unwrap();
        assert_eq!(pushed.eval(&Config::from_counts(vec![5])).weights(), &[3.0]);
    }

    #[test]
    fn pushforward_polya_sum_is_polya_sum() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let k = PolyaSumKernel::new(sp.clone(), 0.5, Measure::new(vec![1.0, 1.0]).unwrap())
            .unwrap();
        let map = SiteMap::merge_blocks(&sp, &[vec![0, 1]]).unwrap();
        let pushed = pushforward_kernel(&k, map.clone(), 4, &1e-9).unwrap();
        let target = PolyaSumKernel::new(
            map.target().clone(),
            0.5,
            Measure::new(vec![2.0]).unwrap(),
        )
        .unwrap();
        for nu in crate::config::enumerate_configs(1, 6) {
            assert_eq!(pushed.eval(&nu), target.eval(&nu));
        }
    }

    #[test]
    fn pushforward_rejects_remark_kernel_merge() {
        let k = remark_kernel();
        let sp = k.space().clone();
        // merge the reinforced and the de-reinforced site
        let map = SiteMap::merge_blocks(&sp, &[vec![0, 2], vec![1]]).unwrap();
        let err = match pushforward_kernel(&k, map, 4, &Rational::from_u64(0)) {
            Err(e) => e,
            Ok(_) => panic!("expected a Dynkin violation"),
        };
        match err {
            Error::DynkinViolation { mu1, mu2, .. } => {
                assert_eq!(mu1.counts(), &[1, 0, 0]);
                assert_eq!(mu2.counts(), &[0, 0, 1]);
            }
            other => panic!("expected a Dynkin violation, got {other}"),
        }
    }

    #[test]
    fn pushforward_identity_is_identity() {
        let k = remark_kernel();
        let map = SiteMap::identity(k.space());
        let pushed = pushforward_kernel(&k, map, 4, &Rational::from_u64(0)).unwrap();
        for mu in crate::config::enumerate_configs_bounded(3, 4, k.support_bound()) {
            assert_eq!(pushed.eval(&mu), k.eval(&mu));
        }
    }

    #[test]
    fn pushforward_difference_respects_capacity() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let k = PolyaDifferenceKernel::new(sp.clone(), 1.0, Measure::new(vec![3.0, 3.0]).unwrap())
            .unwrap();
        let map = SiteMap::merge_blocks(&sp, &[vec![0, 1]]).unwrap();
        let pushed = pushforward_kernel(&k, map.clone(), 4, &1e-9).unwrap();
        assert_eq!(pushed.support_bound().unwrap().counts(), &[6]);
        // admissible image config picks an admissible preimage
        assert_eq!(pushed.eval(&Config::from_counts(vec![4])).weights(), &[2.0]);
        // over capacity: zero measure, matching z(Gρ - ν) clamping
        assert_eq!(pushed.eval(&Config::from_counts(vec![7])).weights(), &[0.0]);
    }
}
