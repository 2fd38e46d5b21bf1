//! Decision procedures for the exchangeability postulates.
//!
//! Every check quantifies over all admissible configurations of mass at
//! most `probe_mass` (admissible means within the kernel's declared
//! support bound; configurations beyond it carry zero weight and the
//! kernel is only determined up to such null sets). Verdicts therefore
//! read "no violation found up to the probe bound".
//!
//! The conditions:
//!
//! * `A1` (cocycle): `π(μ+δ_y,{x})·π(μ,{y}) = π(μ+δ_x,{y})·π(μ,{x})`;
//! * `A2`: adding a point at `y` does not change the intensity off `y`;
//! * `A2'`: adding a point at `y` rescales the intensity off `y` by a
//!   fixed factor `f(x,y)` — the pair-interaction density;
//! * `A6`: the pair density is strictly positive on the diagonal;
//! * `J` (pointwise sufficiency): `π(μ,{x})` depends only on `x` and `μ({x})`;
//! * `J'` (setwise sufficiency): `π(μ,B)` depends only on `B` and `μ(B)`;
//! * `D` (Dynkin, per site map `G`): `Gμ₁ = Gμ₂` forces equal preimage
//!   intensities, so the image kernel is well defined;
//! * `BC` (learn-merge invariance): `D` holds for every map off the
//!   space — on a finite space, equivalently for every merge of sites;
//! * `simple`: `π(μ, supp μ) = 0`, so realized configurations carry no
//!   multiple points.
//!
//! A failing check carries a witness; re-evaluating the witness against
//! the kernel reproduces the violation. Witness selection is
//! deterministic: classes are scanned in a fixed order (largest sets
//! first for `J'`) and within a class the extreme pair (smallest and
//! largest value, earliest configuration on ties) is reported.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use itertools::Itertools;

use crate::config::{enumerate_configs_bounded, Config};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::measure::Measure;
use crate::scalar::{close, default_tol, Scalar};
use crate::space::SiteMap;

/// The checkable properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    A1,
    A2,
    A2Prime,
    A6,
    J,
    JPrime,
    Dynkin,
    BC,
    Simple,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::A1 => "A1",
            Property::A2 => "A2",
            Property::A2Prime => "A2'",
            Property::A6 => "A6",
            Property::J => "J",
            Property::JPrime => "J'",
            Property::Dynkin => "D",
            Property::BC => "BC",
            Property::Simple => "simple",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Materialized counterexample. Field meaning per property:
///
/// * `A1`: `configs = [μ]`, `sites = [x, y]`;
/// * `A2`/`A2'`: `configs = [μ]`, `sites = [x, y]` (`x` observed, `y`
///   added), `factor` holds `f(x,y)` for `A2'`;
/// * `J`: `configs = [μ, ν]`, `sites = [x]`;
/// * `J'`: `configs = [μ, ν]`, `region = B`;
/// * `D`/`BC`: `configs = [μ₁, μ₂]`, `sites = [y]` (target site),
///   `region` is the fiber `G⁻¹{y}`, `map` describes `G`;
/// * `simple`: `configs = [μ]`, `region = supp μ`.
#[derive(Debug, Clone)]
pub struct Witness<T> {
    pub configs: Vec<Config>,
    pub sites: Vec<usize>,
    pub region: Option<Vec<usize>>,
    pub map: Option<String>,
    pub factor: Option<T>,
    pub lhs: T,
    pub rhs: T,
}

#[derive(Debug, Clone)]
pub struct CheckReport<T> {
    pub property: Property,
    pub verdict: Verdict,
    pub witness: Option<Witness<T>>,
    pub probe_mass: u32,
    pub tolerance: T,
    pub notes: Vec<String>,
}

impl<T: Scalar> CheckReport<T> {
    fn pass(property: Property, probe_mass: u32, tolerance: T) -> Self {
        CheckReport {
            property,
            verdict: Verdict::Pass,
            witness: None,
            probe_mass,
            tolerance,
            notes: Vec::new(),
        }
    }

    fn fail(property: Property, probe_mass: u32, tolerance: T, witness: Witness<T>) -> Self {
        CheckReport {
            property,
            verdict: Verdict::Fail,
            witness: Some(witness),
            probe_mass,
            tolerance,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

impl<T: Scalar> fmt::Display for CheckReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}",
            self.property,
            if self.passed() { "pass" } else { "fail" }
        )?;
        if let Some(w) = &self.witness {
            write!(f, " (witness configs {:?}, {} vs {})", w.configs, w.lhs, w.rhs)?;
        }
        Ok(())
    }
}

/// Admissible probe set: all configurations of mass at most
/// `probe_mass` within the kernel's support bound, in canonical order.
pub fn probe_configs<T: Scalar>(pi: &dyn Kernel<T>, probe_mass: u32) -> Vec<Config> {
    enumerate_configs_bounded(pi.space().len(), probe_mass, pi.support_bound())
}

fn fits(bound: Option<&Config>, cfg: &Config) -> bool {
    bound.is_none_or(|b| cfg.le(b))
}

/// Running extreme tracker: earliest minimum and earliest maximum.
struct Extremes<T> {
    min_cfg: Config,
    min_val: T,
    max_cfg: Config,
    max_val: T,
}

impl<T: Scalar> Extremes<T> {
    fn new(cfg: &Config, val: T) -> Self {
        Extremes {
            min_cfg: cfg.clone(),
            min_val: val.clone(),
            max_cfg: cfg.clone(),
            max_val: val,
        }
    }

    fn update(&mut self, cfg: &Config, val: T) {
        if val < self.min_val {
            self.min_cfg = cfg.clone();
            self.min_val = val.clone();
        }
        if val > self.max_val {
            self.max_cfg = cfg.clone();
            self.max_val = val;
        }
    }
}

// ---------------------------------------------------------------------------
// A1 — cocycle
// ---------------------------------------------------------------------------

pub fn check_cocycle<T: Scalar>(pi: &dyn Kernel<T>, probe_mass: u32, tol: &T) -> CheckReport<T> {
    let n = pi.space().len();
    let bound = pi.support_bound();
    for mu in probe_configs(pi, probe_mass) {
        let base = pi.eval(&mu);
        let added: Vec<Option<Measure<T>>> = (0..n)
            .map(|s| {
                let up = mu.added(s);
                fits(bound, &up).then(|| pi.eval(&up))
            })
            .collect();
        for x in 0..n {
            for y in (x + 1)..n {
                let (Some(ax), Some(ay)) = (&added[x], &added[y]) else {
                    continue;
                };
                let lhs = ay.weight(x) * base.weight(y);
                let rhs = ax.weight(y) * base.weight(x);
                if !close(&lhs, &rhs, tol) {
                    return CheckReport::fail(
                        Property::A1,
                        probe_mass,
                        tol.clone(),
                        Witness {
                            configs: vec![mu],
                            sites: vec![x, y],
                            region: None,
                            map: None,
                            factor: None,
                            lhs,
                            rhs,
                        },
                    );
                }
            }
        }
    }
    CheckReport::pass(Property::A1, probe_mass, tol.clone())
}

// ---------------------------------------------------------------------------
// A2 — prediction invariance
// ---------------------------------------------------------------------------

pub fn check_a2<T: Scalar>(pi: &dyn Kernel<T>, probe_mass: u32, tol: &T) -> CheckReport<T> {
    let n = pi.space().len();
    let bound = pi.support_bound();
    for mu in probe_configs(pi, probe_mass) {
        let base = pi.eval(&mu);
        let added: Vec<Option<Measure<T>>> = (0..n)
            .map(|s| {
                let up = mu.added(s);
                fits(bound, &up).then(|| pi.eval(&up))
            })
            .collect();
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let Some(ay) = &added[y] else { continue };
                let lhs = ay.weight(x);
                let rhs = base.weight(x);
                if !close(&lhs, &rhs, tol) {
                    return CheckReport::fail(
                        Property::A2,
                        probe_mass,
                        tol.clone(),
                        Witness {
                            configs: vec![mu],
                            sites: vec![x, y],
                            region: None,
                            map: None,
                            factor: None,
                            lhs,
                            rhs,
                        },
                    );
                }
            }
        }
    }
    CheckReport::pass(Property::A2, probe_mass, tol.clone())
}

// ---------------------------------------------------------------------------
// A2' — pair-interaction invariance, with density extraction
// ---------------------------------------------------------------------------

/// Off-diagonal pair density recovered by [`check_a2prime_extract_f`].
/// `entries[x][y]` is `None` on the diagonal and wherever the density
/// is unidentifiable (`π(0,{x}) = 0` or `δ_y` inadmissible).
#[derive(Debug, Clone)]
pub struct ExtractedDensity<T> {
    pub entries: Vec<Vec<Option<T>>>,
}

/// Checks `A2'` by extracting the candidate density
/// `f(x,y) = π(δ_y,{x}) / π(0,{x})` and verifying
/// `π(μ+δ_y,{x}) = f(x,y)·π(μ,{x})` over the probe set.
///
/// Sites with `π(0,{x}) = 0` make `f(x,·)` unidentifiable; they are
/// reported in the notes, not as failures. The density is returned on
/// pass.
pub fn check_a2prime_extract_f<T: Scalar>(
    pi: &dyn Kernel<T>,
    probe_mass: u32,
    tol: &T,
) -> (CheckReport<T>, Option<ExtractedDensity<T>>) {
    let n = pi.space().len();
    let bound = pi.support_bound();
    let empty = Config::empty(n);
    let pi0 = pi.eval(&empty);

    let mut notes = Vec::new();
    let mut entries: Vec<Vec<Option<T>>> = vec![vec![None; n]; n];
    for x in 0..n {
        if pi0.get(x).is_zero() {
            notes.push(format!(
                "f({}, .) unidentifiable: the empty-configuration intensity vanishes there",
                pi.space().site_name(x)
            ));
            continue;
        }
        for y in 0..n {
            if x == y {
                continue;
            }
            let dy = empty.added(y);
            if !fits(bound, &dy) {
                continue;
            }
            entries[x][y] = Some(pi.eval(&dy).weight(x) / pi0.weight(x));
        }
    }

    for mu in probe_configs(pi, probe_mass) {
        let base = pi.eval(&mu);
        let added: Vec<Option<Measure<T>>> = (0..n)
            .map(|s| {
                let up = mu.added(s);
                fits(bound, &up).then(|| pi.eval(&up))
            })
            .collect();
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let (Some(ay), Some(f)) = (&added[y], &entries[x][y]) else {
                    continue;
                };
                let lhs = ay.weight(x);
                let rhs = f.clone() * base.weight(x);
                if !close(&lhs, &rhs, tol) {
                    let mut report = CheckReport::fail(
                        Property::A2Prime,
                        probe_mass,
                        tol.clone(),
                        Witness {
                            configs: vec![mu],
                            sites: vec![x, y],
                            region: None,
                            map: None,
                            factor: Some(f.clone()),
                            lhs,
                            rhs,
                        },
                    );
                    report.notes = notes;
                    return (report, None);
                }
            }
        }
    }

    let mut report = CheckReport::pass(Property::A2Prime, probe_mass, tol.clone());
    report.notes = notes;
    (report, Some(ExtractedDensity { entries }))
}

/// `A6`: strict positivity of the pair density on the diagonal.
pub fn check_diagonal_positivity<T: Scalar>(
    f: &crate::kernels::PairDensity<T>,
) -> CheckReport<T> {
    let tol = default_tol::<T>();
    for x in 0..f.len() {
        if f.get(x, x).is_zero() {
            return CheckReport::fail(
                Property::A6,
                0,
                tol,
                Witness {
                    configs: Vec::new(),
                    sites: vec![x],
                    region: None,
                    map: None,
                    factor: None,
                    lhs: f.get(x, x).clone(),
                    rhs: T::zero(),
                },
            );
        }
    }
    CheckReport::pass(Property::A6, 0, tol)
}

// ---------------------------------------------------------------------------
// J — pointwise sufficiency
// ---------------------------------------------------------------------------

pub fn check_j<T: Scalar>(pi: &dyn Kernel<T>, probe_mass: u32, tol: &T) -> CheckReport<T> {
    let n = pi.space().len();
    let probes = probe_configs(pi, probe_mass);
    let evals: Vec<Measure<T>> = probes.iter().map(|mu| pi.eval(mu)).collect();
    for x in 0..n {
        let mut classes: BTreeMap<u32, Extremes<T>> = BTreeMap::new();
        for (mu, w) in probes.iter().zip(evals.iter()) {
            let val = w.weight(x);
            classes
                .entry(mu.count(x))
                .and_modify(|e| e.update(mu, val.clone()))
                .or_insert_with(|| Extremes::new(mu, val));
        }
        for ext in classes.values() {
            if !close(&ext.min_val, &ext.max_val, tol) {
                return CheckReport::fail(
                    Property::J,
                    probe_mass,
                    tol.clone(),
                    Witness {
                        configs: vec![ext.min_cfg.clone(), ext.max_cfg.clone()],
                        sites: vec![x],
                        region: None,
                        map: None,
                        factor: None,
                        lhs: ext.min_val.clone(),
                        rhs: ext.max_val.clone(),
                    },
                );
            }
        }
    }
    CheckReport::pass(Property::J, probe_mass, tol.clone())
}

// ---------------------------------------------------------------------------
// J' — setwise sufficiency
// ---------------------------------------------------------------------------

/// Nonempty subsets, largest first, lexicographic within a size. The
/// full space comes first: it is the strongest single test (total-mass
/// measurability) and the canonical counterexamples separate there.
pub fn subsets_largest_first(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in (1..=n).rev() {
        out.extend((0..n).combinations(size));
    }
    out
}

pub fn check_jprime<T: Scalar>(
    pi: &dyn Kernel<T>,
    probe_mass: u32,
    tol: &T,
) -> Result<CheckReport<T>> {
    let n = pi.space().len();
    if n > 20 {
        return Err(Error::Parameter(format!(
            "setwise sufficiency enumerates all 2^{n} subsets; spaces over 20 sites \
             need sampled subsets"
        )));
    }
    let probes = probe_configs(pi, probe_mass);
    let evals: Vec<Measure<T>> = probes.iter().map(|mu| pi.eval(mu)).collect();
    for region in subsets_largest_first(n) {
        let mut classes: BTreeMap<u64, Extremes<T>> = BTreeMap::new();
        for (mu, w) in probes.iter().zip(evals.iter()) {
            let val = w.mass_on(&region);
            classes
                .entry(mu.mass_on(&region))
                .and_modify(|e| e.update(mu, val.clone()))
                .or_insert_with(|| Extremes::new(mu, val));
        }
        for ext in classes.values() {
            if !close(&ext.min_val, &ext.max_val, tol) {
                return Ok(CheckReport::fail(
                    Property::JPrime,
                    probe_mass,
                    tol.clone(),
                    Witness {
                        configs: vec![ext.min_cfg.clone(), ext.max_cfg.clone()],
                        sites: Vec::new(),
                        region: Some(region),
                        map: None,
                        factor: None,
                        lhs: ext.min_val.clone(),
                        rhs: ext.max_val.clone(),
                    },
                ));
            }
        }
    }
    Ok(CheckReport::pass(Property::JPrime, probe_mass, tol.clone()))
}

// ---------------------------------------------------------------------------
// D — Dynkin's condition for a site map
// ---------------------------------------------------------------------------

pub fn check_dynkin<T: Scalar>(
    pi: &dyn Kernel<T>,
    map: &SiteMap,
    probe_mass: u32,
    tol: &T,
) -> CheckReport<T> {
    let fibers = map.fibers();
    let probes = probe_configs(pi, probe_mass);
    let mut classes: BTreeMap<Config, Vec<usize>> = BTreeMap::new();
    for (i, mu) in probes.iter().enumerate() {
        classes.entry(map.push_config(mu)).or_default().push(i);
    }
    let evals: Vec<Measure<T>> = probes.iter().map(|mu| pi.eval(mu)).collect();
    for members in classes.values() {
        if members.len() < 2 {
            continue;
        }
        for (y, fiber) in fibers.iter().enumerate() {
            let mut ext: Option<Extremes<T>> = None;
            for &i in members {
                let val = evals[i].mass_on(fiber);
                match &mut ext {
                    Some(e) => e.update(&probes[i], val),
                    None => ext = Some(Extremes::new(&probes[i], val)),
                }
            }
            let ext = ext.expect("class has members");
            if !close(&ext.min_val, &ext.max_val, tol) {
                return CheckReport::fail(
                    Property::Dynkin,
                    probe_mass,
                    tol.clone(),
                    Witness {
                        configs: vec![ext.min_cfg, ext.max_cfg],
                        sites: vec![y],
                        region: Some(fiber.clone()),
                        map: Some(map.describe(pi.space())),
                        factor: None,
                        lhs: ext.min_val,
                        rhs: ext.max_val,
                    },
                );
            }
        }
    }
    CheckReport::pass(Property::Dynkin, probe_mass, tol.clone())
}

// ---------------------------------------------------------------------------
// BC — learn-merge invariance over all merges
// ---------------------------------------------------------------------------

/// Set partitions of `{0..n}` as block lists, in restricted-growth
/// lexicographic order, at most `cap` of them. Returns the partitions
/// and whether the enumeration was truncated.
pub fn set_partitions_capped(n: usize, cap: usize) -> (Vec<Vec<Vec<usize>>>, bool) {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    let mut truncated = false;
    fn rec(
        i: usize,
        max_used: usize,
        rgs: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<usize>>>,
        cap: usize,
        truncated: &mut bool,
    ) {
        if out.len() == cap {
            *truncated = true;
            return;
        }
        let n = rgs.len();
        if i == n {
            let blocks_n = max_used + 1;
            let mut blocks = vec![Vec::new(); blocks_n];
            for (x, &b) in rgs.iter().enumerate() {
                blocks[b].push(x);
            }
            out.push(blocks);
            return;
        }
        for b in 0..=max_used + 1 {
            rgs[i] = b;
            rec(i + 1, max_used.max(b), rgs, out, cap, truncated);
            if *truncated && out.len() == cap {
                return;
            }
        }
    }
    if n == 0 {
        return (vec![Vec::new()], false);
    }
    // first site always opens block 0
    rec(1, 0, &mut rgs, &mut out, cap, &mut truncated);
    (out, truncated)
}

/// Two-block partitions `{B, B^c}`, canonicalized so site 0 lies in the
/// first block; these realize every indicator-collapse map.
fn two_block_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for rest in subsets_largest_first(n - 1) {
        // `rest` indexes sites 1..n that join site 0's block
        let with0: Vec<usize> = std::iter::once(0).chain(rest.iter().map(|&i| i + 1)).collect();
        if with0.len() == n {
            continue; // that is the one-block partition
        }
        let other: Vec<usize> = (1..n).filter(|i| !rest.contains(&(i - 1))).collect();
        out.push(vec![with0, other]);
    }
    out
}

/// Checks Dynkin's condition for every merge of the space's sites, up
/// to `map_budget` maps. On a finite space every map factors through
/// the partition of the space into its fibers, so merges exhaust the
/// continuous proper maps. When the partition count exceeds the budget
/// the inventory keeps the full collapse and all two-block merges
/// first, then fills with finer partitions, and flags the sampling.
pub fn check_bc<T: Scalar>(
    pi: &dyn Kernel<T>,
    probe_mass: u32,
    map_budget: usize,
    tol: &T,
) -> CheckReport<T> {
    let space = pi.space();
    let n = space.len();
    if n == 1 {
        let mut report = CheckReport::pass(Property::BC, probe_mass, tol.clone());
        report
            .notes
            .push("single-site space: every map is a bijection, nothing to check".into());
        return report;
    }

    let (all, truncated) = set_partitions_capped(n, map_budget.max(1));
    let inventory: Vec<Vec<Vec<usize>>>;
    let mut notes = Vec::new();
    if truncated {
        let mut selected: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut push = |p: Vec<Vec<usize>>, selected: &mut Vec<Vec<Vec<usize>>>| {
            let mut key = vec![0usize; n];
            for (b, block) in p.iter().enumerate() {
                for &x in block {
                    key[x] = b;
                }
            }
            if seen.insert(key) {
                selected.push(p);
            }
        };
        push(vec![(0..n).collect()], &mut selected);
        for p in two_block_partitions(n) {
            if selected.len() >= map_budget {
                break;
            }
            push(p, &mut selected);
        }
        for p in all {
            if selected.len() >= map_budget {
                break;
            }
            push(p, &mut selected);
        }
        notes.push(format!(
            "map inventory truncated to {} of the available merges (budget {map_budget})",
            selected.len()
        ));
        inventory = selected;
    } else {
        inventory = all;
    }

    for blocks in &inventory {
        let map = SiteMap::merge_blocks(space, blocks).expect("partition blocks are valid");
        let sub = check_dynkin(pi, &map, probe_mass, tol);
        if sub.verdict == Verdict::Fail {
            let mut report = CheckReport::fail(
                Property::BC,
                probe_mass,
                tol.clone(),
                sub.witness.expect("failing check carries a witness"),
            );
            report.notes = notes;
            return report;
        }
    }
    let mut report = CheckReport::pass(Property::BC, probe_mass, tol.clone());
    report.notes = notes;
    report
}

// ---------------------------------------------------------------------------
// Simplicity
// ---------------------------------------------------------------------------

pub fn check_simple<T: Scalar>(pi: &dyn Kernel<T>, probe_mass: u32) -> CheckReport<T> {
    let tol = default_tol::<T>();
    for mu in probe_configs(pi, probe_mass) {
        let supp = mu.support();
        if supp.is_empty() {
            continue;
        }
        let val = pi.eval(&mu).mass_on(&supp);
        if !close(&val, &T::zero(), &tol) {
            return CheckReport::fail(
                Property::Simple,
                probe_mass,
                tol,
                Witness {
                    configs: vec![mu],
                    sites: Vec::new(),
                    region: Some(supp),
                    map: None,
                    factor: None,
                    lhs: val,
                    rhs: T::zero(),
                },
            );
        }
    }
    CheckReport::pass(Property::Simple, probe_mass, tol)
}

// ---------------------------------------------------------------------------
// Witness re-evaluation
// ---------------------------------------------------------------------------

/// Recompute both sides of a report's witness from the kernel. Returns
/// `None` for properties whose witnesses do not reference a kernel
/// (`A6`) or when no witness is present.
pub fn reevaluate_witness<T: Scalar>(
    pi: &dyn Kernel<T>,
    report: &CheckReport<T>,
) -> Option<(T, T)> {
    let w = report.witness.as_ref()?;
    match report.property {
        Property::A1 => {
            let mu = &w.configs[0];
            let (x, y) = (w.sites[0], w.sites[1]);
            let base = pi.eval(mu);
            let lhs = pi.eval(&mu.added(y)).weight(x) * base.weight(y);
            let rhs = pi.eval(&mu.added(x)).weight(y) * base.weight(x);
            Some((lhs, rhs))
        }
        Property::A2 => {
            let mu = &w.configs[0];
            let (x, y) = (w.sites[0], w.sites[1]);
            Some((pi.eval(&mu.added(y)).weight(x), pi.eval(mu).weight(x)))
        }
        Property::A2Prime => {
            let mu = &w.configs[0];
            let (x, y) = (w.sites[0], w.sites[1]);
            let f = w.factor.clone()?;
            Some((
                pi.eval(&mu.added(y)).weight(x),
                f * pi.eval(mu).weight(x),
            ))
        }
        Property::J => {
            let x = w.sites[0];
            Some((
                pi.eval(&w.configs[0]).weight(x),
                pi.eval(&w.configs[1]).weight(x),
            ))
        }
        Property::JPrime => {
            let region = w.region.as_ref()?;
            Some((
                pi.eval(&w.configs[0]).mass_on(region),
                pi.eval(&w.configs[1]).mass_on(region),
            ))
        }
        Property::Dynkin | Property::BC => {
            let fiber = w.region.as_ref()?;
            Some((
                pi.eval(&w.configs[0]).mass_on(fiber),
                pi.eval(&w.configs[1]).mass_on(fiber),
            ))
        }
        Property::Simple => {
            let supp = w.region.as_ref()?;
            Some((pi.eval(&w.configs[0]).mass_on(supp), T::zero()))
        }
        Property::A6 => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::FnKernel;
    use crate::kernels::{
        InteractionKernel, PairDensity, PoissonKernel, PolyaDifferenceKernel, PolyaSumKernel,
        Reinforcement, DEFAULT_MASS_BOUND,
    };
    use crate::scalar::Rational;
    use crate::space::Space;

    fn space3() -> Space {
        Space::new(vec!["a", "b", "c"]).unwrap()
    }

    fn rat(n: i64, d: u64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn poisson3() -> PoissonKernel<Rational> {
        PoissonKernel::new(
            space3(),
            Measure::new(vec![rat(1, 1), rat(2, 1), rat(1, 2)]).unwrap(),
        )
        .unwrap()
    }

    fn polya_sum3() -> PolyaSumKernel<Rational> {
        PolyaSumKernel::new(
            space3(),
            rat(3, 10),
            Measure::new(vec![rat(1, 1), rat(1, 1), rat(1, 1)]).unwrap(),
        )
        .unwrap()
    }

    fn remark() -> crate::kernels::LocalReinforcementKernel<Rational> {
        let space = Space::new(vec!["-1", "0", "1"]).unwrap();
        let rho = Measure::new(vec![rat(1, 2), rat(1, 2), rat(1, 2)]).unwrap();
        let c = Reinforcement::PerSiteConstant(vec![rat(-1, 2), rat(0, 1), rat(1, 2)]);
        crate::kernels::LocalReinforcementKernel::new(space, rho, c, 1).unwrap()
    }

    /// Kernel violating A2' : intensity scales with the square of the
    /// total occupation, so the add-a-point ratio depends on μ.
    fn global_mass_square_kernel() -> FnKernel<f64, impl Fn(&Config) -> Measure<f64>> {
        FnKernel::new(space3(), "global-mass-square", |mu: &Config| {
            let m = mu.mass() as f64;
            Measure::new(vec![(1.0 + m) * (1.0 + m); 3]).unwrap()
        })
    }

    #[test]
    fn cocycle_passes_for_catalog() {
        let zero = Rational::from_u64(0);
        assert!(check_cocycle(&poisson3(), 4, &zero).passed());
        assert!(check_cocycle(&polya_sum3(), 4, &zero).passed());
        assert!(check_cocycle(&remark(), 4, &zero).passed());
    }

    #[test]
    fn cocycle_fails_for_asymmetric_density() {
        // hand-built product-form kernel with f(a,b)=1 but f(b,a)=2
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let k = FnKernel::new(sp, "asymmetric-pair", |mu: &Config| {
            let f: [[f64; 2]; 2] = [[1.0, 1.0], [2.0, 1.0]];
            let w = |x: usize| {
                let mut v = 1.0;
                for z in 0..2 {
                    v *= f[x][z].powi(mu.count(z) as i32);
                }
                v
            };
            Measure::new(vec![w(0), w(1)]).unwrap()
        });
        let report = check_cocycle(&k, 4, &1e-9);
        assert!(!report.passed());
        let w = report.witness.as_ref().unwrap();
        assert_eq!(w.configs[0].counts(), &[0, 0]);
        assert_eq!(w.sites, vec![0, 1]);
        let (l, r) = reevaluate_witness(&k, &report).unwrap();
        assert!(!close(&l, &r, &1e-9));
    }

    #[test]
    fn a2_verdicts() {
        let zero = Rational::from_u64(0);
        assert!(check_a2(&poisson3(), 4, &zero).passed());
        assert!(check_a2(&polya_sum3(), 4, &zero).passed());

        let e1 = (-1.0f64).exp();
        let f = PairDensity::from_fn(2, |x, y| if x == y { 1.0 } else { e1 }).unwrap();
        let k = InteractionKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![1.0, 1.0]).unwrap(),
            f,
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let report = check_a2(&k, 4, &1e-9);
        assert!(!report.passed());
        let w = report.witness.unwrap();
        assert_eq!(w.configs[0].counts(), &[0, 0]);
        assert_eq!(w.sites, vec![0, 1]); // x = a observed, y = b added
    }

    #[test]
    fn a2prime_extracts_density() {
        let e1 = (-1.0f64).exp();
        let f = PairDensity::from_fn(2, |x, y| if x == y { 1.0 } else { e1 }).unwrap();
        let k = InteractionKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![1.0, 1.0]).unwrap(),
            f,
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        let (report, density) = check_a2prime_extract_f(&k, 4, &1e-9);
        assert!(report.passed());
        let d = density.unwrap();
        assert!((d.entries[0][1].clone().unwrap() - e1).abs() < 1e-12);
        assert!((d.entries[1][0].clone().unwrap() - e1).abs() < 1e-12);

        // A2 holders extract f = 1 off the diagonal
        let (report, density) = check_a2prime_extract_f(&polya_sum3(), 4, &Rational::from_u64(0));
        assert!(report.passed());
        let d = density.unwrap();
        assert_eq!(d.entries[0][1], Some(Rational::from_u64(1)));
    }

    #[test]
    fn a2prime_rejects_global_dependence() {
        let k = global_mass_square_kernel();
        let (report, density) = check_a2prime_extract_f(&k, 4, &1e-9);
        assert!(!report.passed());
        assert!(density.is_none());
        let (l, r) = reevaluate_witness(&k, &report).unwrap();
        assert!(!close(&l, &r, &1e-9));
    }

    #[test]
    fn j_and_jprime_on_remark_kernel() {
        let k = remark();
        let zero = Rational::from_u64(0);
        assert!(check_j(&k, 4, &zero).passed());

        let report = check_jprime(&k, 4, &zero).unwrap();
        assert!(!report.passed());
        let w = report.witness.as_ref().unwrap();
        assert_eq!(w.region.as_ref().unwrap(), &vec![0, 1, 2]);
        assert_eq!(w.configs[0].counts(), &[1, 0, 0]);
        assert_eq!(w.configs[1].counts(), &[0, 0, 1]);
        assert_eq!(w.lhs, Rational::from_u64(1));
        assert_eq!(w.rhs, Rational::from_u64(2));
        let (l, r) = reevaluate_witness(&k, &report).unwrap();
        assert_eq!((l, r), (Rational::from_u64(1), Rational::from_u64(2)));
    }

    #[test]
    fn jprime_passes_for_linear_kernels() {
        let zero = Rational::from_u64(0);
        // ρ + 0.3μ
        let sum = polya_sum3();
        assert!(check_jprime(&sum, 4, &zero).unwrap().passed());
        assert!(check_jprime(&poisson3(), 4, &zero).unwrap().passed());
        let diff = PolyaDifferenceKernel::new(
            space3(),
            rat(1, 2),
            Measure::new(vec![rat(3, 1), rat(3, 1), rat(3, 1)]).unwrap(),
        )
        .unwrap();
        assert!(check_jprime(&diff, 4, &zero).unwrap().passed());
    }

    #[test]
    fn dynkin_verdicts() {
        let zero = Rational::from_u64(0);
        let sp = space3();
        let merge = SiteMap::merge_blocks(&sp, &[vec![0, 1], vec![2]]).unwrap();
        assert!(check_dynkin(&poisson3(), &merge, 4, &zero).passed());
        assert!(check_dynkin(&polya_sum3(), &merge, 4, &zero).passed());

        let k = remark();
        let map = SiteMap::merge_blocks(k.space(), &[vec![0, 2], vec![1]]).unwrap();
        let report = check_dynkin(&k, &map, 4, &zero);
        assert!(!report.passed());
        let w = report.witness.as_ref().unwrap();
        assert_eq!(w.configs[0].counts(), &[1, 0, 0]);
        assert_eq!(w.configs[1].counts(), &[0, 0, 1]);
        let (l, r) = reevaluate_witness(&k, &report).unwrap();
        assert!(l != r);
    }

    #[test]
    fn bc_matches_setwise_sufficiency() {
        let zero = Rational::from_u64(0);
        assert!(check_bc(&poisson3(), 4, 64, &zero).passed());
        assert!(check_bc(&polya_sum3(), 4, 64, &zero).passed());
        assert!(!check_bc(&remark(), 4, 64, &zero).passed());
    }

    #[test]
    fn bc_single_site_trivial() {
        let sp = Space::new(vec!["a"]).unwrap();
        let k = PoissonKernel::new(sp, Measure::new(vec![1.0]).unwrap()).unwrap();
        let report = check_bc(&k, 4, 64, &1e-9);
        assert!(report.passed());
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn simplicity_verdicts() {
        // hard-core interaction is simple
        let f = PairDensity::from_fn(2, |x, y| if x == y { 0.0 } else { 1.0 }).unwrap();
        let k = InteractionKernel::new(
            Space::new(vec!["a", "b"]).unwrap(),
            Measure::new(vec![1.0, 1.0]).unwrap(),
            f,
            Reinforcement::None,
            DEFAULT_MASS_BOUND,
        )
        .unwrap();
        assert!(check_simple(&k, 4).passed());

        // the Pólya sum is not; the witness is the first single point
        let report = check_simple(&polya_sum3(), 4);
        assert!(!report.passed());
        assert_eq!(report.witness.as_ref().unwrap().configs[0].counts(), &[1, 0, 0]);

        // on a finite space a positive-intensity Poisson has atoms
        let report = check_simple(&poisson3(), 4);
        assert!(!report.passed());
        assert_eq!(report.witness.unwrap().configs[0].counts(), &[1, 0, 0]);
    }

    #[test]
    fn partitions_enumeration() {
        let (parts, truncated) = set_partitions_capped(3, 100);
        assert_eq!(parts.len(), 5); // Bell(3)
        assert!(!truncated);
        assert_eq!(parts[0], vec![vec![0, 1, 2]]); // full collapse first

        let (parts, truncated) = set_partitions_capped(4, 5);
        assert_eq!(parts.len(), 5);
        assert!(truncated);
    }

    #[test]
    fn diagonal_positivity_check() {
        let f = PairDensity::from_fn(2, |_, _| 1.0).unwrap();
        assert!(check_diagonal_positivity(&f).passed());
        let f = PairDensity::from_fn(2, |x, y| if x == y { 0.0 } else { 1.0 }).unwrap();
        let report = check_diagonal_positivity(&f);
        assert!(!report.passed());
        assert_eq!(report.witness.unwrap().sites, vec![0]);
    }
}
