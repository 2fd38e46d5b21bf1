//! Point configurations: finite multisets of sites.
//!
//! A [`Config`] stores one nonnegative multiplicity per site of its
//! space (dense). Configurations are ordered by total mass first, then
//! lexicographically by their sorted point lists, so `{a}` precedes
//! `{b}` and `{a,a}` precedes `{a,b}`. Enumeration, weight summation
//! and witness scanning all use this one order, which keeps every
//! result deterministic.

use std::cmp::Ordering;
use std::fmt;

/// A finite point configuration over a fixed-size site set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Config {
    counts: Vec<u32>,
}

impl Config {
    /// The empty configuration on `n_sites` sites.
    pub fn empty(n_sites: usize) -> Self {
        Config {
            counts: vec![0; n_sites],
        }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        Config { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty_config(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn count(&self, site: usize) -> u32 {
        self.counts[site]
    }

    /// Total mass `μ(X)`. Returned as `u64` so that sentinel-valued
    /// bounds cannot overflow.
    pub fn mass(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Mass on a set of sites, `ζ_B(μ) = μ(B)`.
    pub fn mass_on(&self, sites: &[usize]) -> u64 {
        sites.iter().map(|&x| self.counts[x] as u64).sum()
    }

    /// `μ + δ_x`.
    pub fn added(&self, site: usize) -> Self {
        assert!(site < self.counts.len(), "site index out of range");
        let mut counts = self.counts.clone();
        counts[site] += 1;
        Config { counts }
    }

    /// `μ - δ_x`; panics if there is no point at `site`.
    pub fn removed(&self, site: usize) -> Self {
        assert!(self.counts[site] > 0, "no point to remove at site");
        let mut counts = self.counts.clone();
        counts[site] -= 1;
        Config { counts }
    }

    /// Restriction `χ_B(μ)`: counts kept on `sites`, zero elsewhere.
    pub fn restricted(&self, sites: &[usize]) -> Self {
        let mut counts = vec![0; self.counts.len()];
        for &x in sites {
            counts[x] = self.counts[x];
        }
        Config { counts }
    }

    /// Restriction to the complement of `sites`.
    pub fn restricted_complement(&self, sites: &[usize]) -> Self {
        let mut counts = self.counts.clone();
        for &x in sites {
            counts[x] = 0;
        }
        Config { counts }
    }

    /// Sites with at least one point, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.counts.len())
            .filter(|&x| self.counts[x] > 0)
            .collect()
    }

    /// The configuration as a sorted point list with multiplicity,
    /// e.g. `{a:2, c:1}` gives `[a, a, c]`.
    pub fn points(&self) -> Vec<usize> {
        let mut pts = Vec::with_capacity(self.mass() as usize);
        for (x, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                pts.push(x);
            }
        }
        pts
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Config) -> bool {
        self.counts
            .iter()
            .zip(other.counts.iter())
            .all(|(a, b)| a <= b)
    }
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Ord for Config {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mass()
            .cmp(&other.mass())
            .then_with(|| self.counts.len().cmp(&other.counts.len()))
            .then_with(|| {
                // equal mass: more points at earlier sites sorts first
                for (a, b) in self.counts.iter().zip(other.counts.iter()) {
                    if a != b {
                        return b.cmp(a);
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for Config {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All configurations of mass exactly `mass` on `n_sites` sites, in
/// point-list lexicographic order.
pub fn enumerate_layer(n_sites: usize, mass: u32) -> Vec<Config> {
    enumerate_layer_bounded(n_sites, mass, None)
}

/// Like [`enumerate_layer`] but with an optional componentwise cap.
pub fn enumerate_layer_bounded(n_sites: usize, mass: u32, bound: Option<&Config>) -> Vec<Config> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n_sites];
    fn rec(
        site: usize,
        remaining: u32,
        current: &mut Vec<u32>,
        bound: Option<&Config>,
        out: &mut Vec<Config>,
    ) {
        let n = current.len();
        let cap = |s: usize| bound.map_or(u32::MAX, |b| b.count(s));
        if site == n - 1 {
            if remaining <= cap(site) {
                current[site] = remaining;
                out.push(Config::from_counts(current.clone()));
                current[site] = 0;
            }
            return;
        }
        let top = remaining.min(cap(site));
        for k in (0..=top).rev() {
            current[site] = k;
            rec(site + 1, remaining - k, current, bound, out);
        }
        current[site] = 0;
    }
    rec(0, mass, &mut current, bound, &mut out);
    out
}

/// All configurations of total mass at most `max_mass`, layer by layer.
///
/// The count is `Σ_{m=0}^{max_mass} C(m + n - 1, m)` (stars and bars).
pub fn enumerate_configs(n_sites: usize, max_mass: u32) -> Vec<Config> {
    enumerate_configs_bounded(n_sites, max_mass, None)
}

/// Like [`enumerate_configs`] but restricted to configurations within
/// a componentwise bound.
pub fn enumerate_configs_bounded(
    n_sites: usize,
    max_mass: u32,
    bound: Option<&Config>,
) -> Vec<Config> {
    let mut out = Vec::new();
    for m in 0..=max_mass {
        out.extend(enumerate_layer_bounded(n_sites, m, bound));
    }
    out
}

/// `C(m + n - 1, m)`: the number of configurations of mass `m` on `n`
/// sites.
pub fn layer_cardinality(n_sites: usize, mass: u32) -> u128 {
    let n = n_sites as u128;
    let m = mass as u128;
    let mut num = 1u128;
    let mut den = 1u128;
    for k in 1..=m {
        num *= n - 1 + k;
        den *= k;
    }
    num / den
}
