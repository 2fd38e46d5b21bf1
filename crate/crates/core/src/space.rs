//! Finite discrete state spaces and site maps between them.
//!
//! A [`Space`] is an ordered list of uniquely labelled sites. On a
//! finite space every subset is bounded and closed and every map
//! between spaces is continuous and proper, so the measurability and
//! properness side conditions of the continuum theory hold
//! automatically; nothing beyond the label list needs to be stored.

use std::collections::HashSet;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::scalar::Scalar;

/// Ordered finite site set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    sites: Vec<String>,
}

impl Space {
    /// Build a space from unique site labels. At least one site is
    /// required.
    pub fn new<S: Into<String>>(sites: Vec<S>) -> Result<Self> {
        let sites: Vec<String> = sites.into_iter().map(Into::into).collect();
        if sites.is_empty() {
            return Err(Error::Parameter("a space needs at least one site".into()));
        }
        let mut seen = HashSet::new();
        for s in &sites {
            if !seen.insert(s.clone()) {
                return Err(Error::Parameter(format!("duplicate site label `{s}`")));
            }
        }
        Ok(Space { sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one site
    }

    pub fn site_name(&self, index: usize) -> &str {
        &self.sites[index]
    }

    pub fn site_names(&self) -> &[String] {
        &self.sites
    }

    /// Resolve a label to its index.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.sites
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownSite(name.to_string()))
    }

    /// All site indices, usable as the full region `X`.
    pub fn all_sites(&self) -> Vec<usize> {
        (0..self.sites.len()).collect()
    }
}

/// Total map from the sites of a source space onto the sites of a
/// target space. `assignment[x]` is the target index of source site `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteMap {
    assignment: Vec<usize>,
    target: Space,
}

impl SiteMap {
    pub fn new(source: &Space, target: Space, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != source.len() {
            return Err(Error::Parameter(format!(
                "site map assigns {} sites but the source has {}",
                assignment.len(),
                source.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&y| y >= target.len()) {
            return Err(Error::Parameter(format!(
                "site map target index {bad} out of range for a {}-site target",
                target.len()
            )));
        }
        Ok(SiteMap { assignment, target })
    }

    /// Identity map on `source` (fresh copy of the space as target).
    pub fn identity(source: &Space) -> Self {
        SiteMap {
            assignment: (0..source.len()).collect(),
            target: source.clone(),
        }
    }

    /// Merge map induced by a partition of the source sites into
    /// blocks. Each block becomes one target site whose label joins the
    /// member labels with `+`. Blocks must cover every source site
    /// exactly once.
    pub fn merge_blocks(source: &Space, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; source.len()];
        let mut labels = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Parameter("empty block in merge map".into()));
            }
            let mut parts = Vec::with_capacity(block.len());
            for &x in block {
                if x >= source.len() {
                    return Err(Error::Parameter(format!("block site index {x} out of range")));
                }
                if assignment[x] != usize::MAX {
                    return Err(Error::Parameter(format!(
                        "site `{}` appears in two blocks",
                        source.site_name(x)
                    )));
                }
                assignment[x] = b;
                parts.push(source.site_name(x).to_string());
            }
            labels.push(parts.join("+"));
        }
        if assignment.iter().any(|&y| y == usize::MAX) {
            return Err(Error::Parameter("merge blocks do not cover the space".into()));
        }
        Ok(SiteMap {
            assignment,
            target: Space::new(labels)?,
        })
    }

    pub fn source_len(&self) -> usize {
        self.assignment.len()
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn apply_site(&self, x: usize) -> usize {
        self.assignment[x]
    }

    /// Preimage of a target site.
    pub fn fiber(&self, y: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&x| self.assignment[x] == y)
            .collect()
    }

    /// All fibers, indexed by target site.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut fibers = vec![Vec::new(); self.target.len()];
        for (x, &y) in self.assignment.iter().enumerate() {
            fibers[y].push(x);
        }
        fibers
    }

    /// Whether every target site has a nonempty fiber.
    pub fn is_onto(&self) -> bool {
        self.fibers().iter().all(|f| !f.is_empty())
    }

    /// Pushforward of a configuration: `(Gμ)(y) = Σ_{x: Gx=y} μ(x)`.
    pub fn push_config(&self, mu: &Config) -> Config {
        let mut counts = vec![0u32; self.target.len()];
        for (x, &y) in self.assignment.iter().enumerate() {
            counts[y] += mu.count(x);
        }
        Config::from_counts(counts)
    }

    /// Pushforward of a measure: image weights add over fibers.
    pub fn push_measure<T: Scalar>(&self, m: &Measure<T>) -> Measure<T> {
        let mut weights = vec![T::zero(); self.target.len()];
        for (x, &y) in self.assignment.iter().enumerate() {
            weights[y] = weights[y].clone() + m.weight(x);
        }
        Measure::from_weights(weights)
    }

    /// Short human-readable description, e.g. `a,b->a+b; c->c`.
    pub fn describe(&self, source: &Space) -> String {
        let mut parts = Vec::new();
        for (y, fiber) in self.fibers().iter().enumerate() {
            let srcs: Vec<&str> = fiber.iter().map(|&x| source.site_name(x)).collect();
            parts.push(format!("{}->{}", srcs.join(","), self.target.site_name(y)));
        }
        parts.join("; ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_rejects_duplicates_and_empty() {
        assert!(Space::new(Vec::<String>::new()).is_err());
        assert!(Space::new(vec!["a", "a"]).is_err());
        let sp = Space::new(vec!["a", "b"]).unwrap();
        assert_eq!(sp.len(), 2);
        assert_eq!(sp.index_of("b").unwrap(), 1);
        assert!(matches!(sp.index_of("z"), Err(Error::UnknownSite(_))));
    }

    #[test]
    fn merge_map_pushforward() {
        let sp = Space::new(vec!["a", "b", "c"]).unwrap();
        let map = SiteMap::merge_blocks(&sp, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(map.target().site_names(), &["a+b".to_string(), "c".to_string()]);
        let mu = Config::from_counts(vec![1, 2, 0]);
        assert_eq!(map.push_config(&mu).counts(), &[3, 0]);
        assert!(map.is_onto());
    }

    #[test]
    fn merge_blocks_validation() {
        let sp = Space::new(vec!["a", "b"]).unwrap();
        assert!(SiteMap::merge_blocks(&sp, &[vec![0]]).is_err());
        assert!(SiteMap::merge_blocks(&sp, &[vec![0, 0], vec![1]]).is_err());
    }

    #[test]
    fn pushforward_examples() {
        // {a:1,b:2} merged to one site gives {u:3}
        let sp = Space::new(vec!["a", "b"]).unwrap();
        let merge = SiteMap::merge_blocks(&sp, &[vec![0, 1]]).unwrap();
        assert_eq!(merge.push_config(&Config::from_counts(vec![1, 2])).counts(), &[3]);

        // identity keeps {a:1}
        let id = SiteMap::identity(&sp);
        assert_eq!(id.push_config(&Config::from_counts(vec![1, 0])).counts(), &[1, 0]);

        // a->u, b->v, c->v on {a:1,b:1,c:2} gives {u:1,v:3}
        let sp3 = Space::new(vec!["a", "b", "c"]).unwrap();
        let map = SiteMap::merge_blocks(&sp3, &[vec![0], vec![1, 2]]).unwrap();
        assert_eq!(
            map.push_config(&Config::from_counts(vec![1, 1, 2])).counts(),
            &[1, 3]
        );
    }
}
