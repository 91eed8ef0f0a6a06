//! Exact algebra of set-valued maps on finite spaces: iteration, union
//! families, the orbital operator S and the closure operator D.
//!
//! On a finite space both operators are idempotent and every identity here
//! is checked by exact sorted-list equality; there is no tolerance anywhere
//! in this module.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::space::FiniteSpace;

/// A set-valued map on a finite space: each cell maps to a duplicate-free
/// sorted target list.
#[derive(Clone, Debug)]
pub struct FiniteSetMap {
    space: Arc<FiniteSpace>,
    edges: Vec<Vec<usize>>,
}

impl PartialEq for FiniteSetMap {
    fn eq(&self, other: &Self) -> bool {
        *self.space == *other.space && self.edges == other.edges
    }
}
impl Eq for FiniteSetMap {}

impl FiniteSetMap {
    pub fn new(space: Arc<FiniteSpace>, edges: Vec<Vec<usize>>) -> Result<Self> {
        if edges.len() != space.len() {
            return Err(Error::InvalidArgument(format!(
                "edge table has {} rows for a space of {} cells",
                edges.len(),
                space.len()
            )));
        }
        let n = space.len();
        let mut normalized = Vec::with_capacity(n);
        for mut targets in edges {
            targets.sort_unstable();
            targets.dedup();
            if targets.iter().any(|&t| t >= n) {
                return Err(Error::InvalidArgument("target cell out of range".into()));
            }
            normalized.push(targets);
        }
        Ok(FiniteSetMap {
            space,
            edges: normalized,
        })
    }

    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let edges = (0..space.len()).map(|c| vec![c]).collect();
        FiniteSetMap { space, edges }
    }

    pub fn empty(space: Arc<FiniteSpace>) -> Self {
        let edges = vec![Vec::new(); space.len()];
        FiniteSetMap { space, edges }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn targets(&self, cell: usize) -> &[usize] {
        &self.edges[cell]
    }

    /// Image of a cell set: union of per-cell targets.
    pub fn image(&self, cells: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &c in cells {
            out.extend_from_slice(&self.edges[c]);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Cellwise subset comparison.
    pub fn is_submap(&self, other: &FiniteSetMap) -> bool {
        *self.space == *other.space
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.iter().all(|t| b.binary_search(t).is_ok()))
    }

    /// Composition: `(self . after)(x) = self(after(x))` is NOT what this
    /// computes; it computes `other` applied after `self`:
    /// `result(x) = other(self(x))`.
    pub fn then(&self, other: &FiniteSetMap) -> Result<FiniteSetMap> {
        if *self.space != *other.space {
            return Err(Error::SpaceMismatch);
        }
        let edges = self
            .edges
            .iter()
            .map(|targets| other.image(targets))
            .collect();
        Ok(FiniteSetMap {
            space: self.space.clone(),
            edges,
        })
    }

    /// `n`-fold iteration of the map, `n >= 1`.
    pub fn iterate(&self, n: usize) -> Result<FiniteSetMap> {
        if n == 0 {
            return Err(Error::InvalidArgument("iteration count must be >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.then(self)?;
        }
        Ok(out)
    }

    /// Cellwise union of a family of maps on the same space.
    pub fn union_family(family: &[FiniteSetMap]) -> Result<FiniteSetMap> {
        let first = family
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
        let mut edges: Vec<Vec<usize>> = first.edges.clone();
        for map in &family[1..] {
            if *map.space != *first.space {
                return Err(Error::SpaceMismatch);
            }
            for (row, extra) in edges.iter_mut().zip(&map.edges) {
                row.extend_from_slice(extra);
                row.sort_unstable();
                row.dedup();
            }
        }
        Ok(FiniteSetMap {
            space: first.space.clone(),
            edges,
        })
    }

    /// Orbital operator S: all cells reachable in one or more steps.
    ///
    /// Computed by graph reachability starting from the one-step targets;
    /// finite convergence is automatic on a finite space.
    pub fn orbital(&self) -> FiniteSetMap {
        let n = self.space.len();
        let mut edges = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for c in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            let mut stack: Vec<usize> = Vec::new();
            for &t in &self.edges[c] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
            let mut reach = Vec::new();
            while let Some(v) = stack.pop() {
                reach.push(v);
                for &t in &self.edges[v] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            reach.sort_unstable();
            edges.push(reach);
        }
        FiniteSetMap {
            space: self.space.clone(),
            edges,
        }
    }

    /// Closure operator D: `D(x)` is the closure of the image of the minimal
    /// open neighborhood of `x`. On a finite space the infimum over all
    /// neighborhoods is attained there, so this is exact.
    pub fn closure_map(&self) -> FiniteSetMap {
        let n = self.space.len();
        let mut edges = Vec::with_capacity(n);
        for c in 0..n {
            let image_of_star = self.image(self.space.above(c));
            edges.push(self.space.closure(&image_of_star));
        }
        FiniteSetMap {
            space: self.space.clone(),
            edges,
        }
    }

    /// Text adjacency serialization: one `cell: target,target,...` line per
    /// cell.
    pub fn to_text(&self) -> String {
        let mut out = String::from("flowcover-setmap v1\n");
        for c in 0..self.space.len() {
            let targets: Vec<&str> = self.edges[c]
                .iter()
                .map(|&t| self.space.name(t))
                .collect();
            out.push_str(&format!("{}: {}\n", self.space.name(c), targets.join(",")));
        }
        out
    }

    pub fn from_text(space: Arc<FiniteSpace>, text: &str) -> Result<FiniteSetMap> {
        let mut lines = text.lines();
        match lines.next() {
            Some("flowcover-setmap v1") => {}
            _ => return Err(Error::Parse("missing setmap header".into())),
        }
        let index: BTreeMap<&str, usize> = (0..space.len())
            .map(|c| (space.name(c), c))
            .collect();
        let mut edges = vec![Vec::new(); space.len()];
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (cell, targets) = line
                .split_once(": ")
                .ok_or_else(|| Error::Parse(format!("malformed line `{line}`")))?;
            let c = *index
                .get(cell)
                .ok_or_else(|| Error::Parse(format!("unknown cell `{cell}`")))?;
            for t in targets.split(',').filter(|t| !t.is_empty()) {
                let t = *index
                    .get(t)
                    .ok_or_else(|| Error::Parse(format!("unknown cell `{t}`")))?;
                edges[c].push(t);
            }
        }
        FiniteSetMap::new(space, edges)
    }
}

/// Seeded random map: every (cell, target) edge present independently with
/// probability `density`.
pub fn random_map<R: Rng>(space: &Arc<FiniteSpace>, density: f64, rng: &mut R) -> FiniteSetMap {
    let n = space.len();
    let mut edges = Vec::with_capacity(n);
    for _ in 0..n {
        let mut targets = Vec::new();
        for t in 0..n {
            if rng.gen::<f64>() < density {
                targets.push(t);
            }
        }
        edges.push(targets);
    }
    FiniteSetMap {
        space: space.clone(),
        edges,
    }
}

/// Seeded random cubical space: a random box set on a random small grid.
pub fn random_cubical_space<R: Rng>(rng: &mut R) -> Arc<FiniteSpace> {
    use crate::grid::{BoxSet, EscapePolicy, Grid};
    loop {
        let d = rng.gen_range(1..=3usize);
        let subdivisions: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=5usize)).collect();
        let grid = Grid::new(
            vec![0.0; d],
            vec![1.0; d],
            subdivisions,
            EscapePolicy::Clip,
        )
        .unwrap();
        let density = rng.gen_range(0.2..0.9);
        let members: Vec<usize> = (0..grid.box_count())
            .filter(|_| rng.gen::<f64>() < density)
            .collect();
        if members.is_empty() {
            continue;
        }
        let b = BoxSet::from_members(grid, members).unwrap();
        return crate::space::make_cubical_space(b.grid(), &b).unwrap();
    }
}
