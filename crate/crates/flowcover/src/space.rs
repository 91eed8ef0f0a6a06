//! Finite T0 topological spaces given by their specialization preorder.
//!
//! A cell `f` is below a cell `c` when `f` lies in the closure of `{c}`.
//! Minimal open neighborhoods always exist in a finite space: `u(x)` is the
//! set of cells above `x`. That makes intersections over all neighborhoods
//! attain their minimum at `u(x)`, which is what turns the closure operator
//! on set-valued maps into an exactly computable one.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{BoxSet, Grid};

#[derive(Debug)]
pub struct FiniteSpace {
    names: Vec<String>,
    /// Closure of each cell (specialization down-set), self included, sorted.
    below: Vec<Vec<usize>>,
    /// Minimal open neighborhood of each cell (up-set), self included, sorted.
    above: Vec<Vec<usize>>,
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.below == other.below
    }
}
impl Eq for FiniteSpace {}

impl FiniteSpace {
    /// Discrete space: every singleton open and closed.
    pub fn discrete(n: usize) -> Arc<FiniteSpace> {
        Arc::new(FiniteSpace {
            names: (0..n).map(|i| format!("c{i}")).collect(),
            below: (0..n).map(|i| vec![i]).collect(),
            above: (0..n).map(|i| vec![i]).collect(),
        })
    }

    /// Builds a space from generating specialization pairs `(lower, upper)`
    /// meaning `lower` lies in the closure of `upper`. The reflexive
    /// transitive closure is taken.
    pub fn from_pairs(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Arc<FiniteSpace>> {
        let n = names.len();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument("pair index out of range".into()));
            }
        }
        // direct faces per cell, then BFS for transitive closure
        let mut direct: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(lower, upper) in pairs {
            direct[upper].push(lower);
        }
        let mut below = Vec::with_capacity(n);
        for c in 0..n {
            let mut seen = vec![false; n];
            let mut stack = vec![c];
            seen[c] = true;
            let mut cl = Vec::new();
            while let Some(v) = stack.pop() {
                cl.push(v);
                for &w in &direct[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            cl.sort_unstable();
            below.push(cl);
        }
        Ok(Arc::new(Self::with_below(names, below)))
    }

    fn with_below(names: Vec<String>, below: Vec<Vec<usize>>) -> FiniteSpace {
        let n = names.len();
        let mut above: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (c, cl) in below.iter().enumerate() {
            for &f in cl {
                above[f].push(c);
            }
        }
        for a in &mut above {
            a.sort_unstable();
        }
        FiniteSpace {
            names,
            below,
            above,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, cell: usize) -> &str {
        &self.names[cell]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Closure of a single cell, self included.
    pub fn below(&self, cell: usize) -> &[usize] {
        &self.below[cell]
    }

    /// Minimal open neighborhood of a single cell, self included.
    pub fn above(&self, cell: usize) -> &[usize] {
        &self.above[cell]
    }

    /// Closure of a cell set: union of per-cell closures. Idempotent and
    /// monotone.
    pub fn closure(&self, cells: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &c in cells {
            out.extend_from_slice(&self.below[c]);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Serializes as a cell list plus specialization pair list.
    pub fn to_text(&self) -> String {
        let mut out = String::from("flowcover-space v1\n");
        out.push_str("cells: ");
        out.push_str(&self.names.join(","));
        out.push('\n');
        for (c, cl) in self.below.iter().enumerate() {
            for &f in cl {
                if f != c {
                    out.push_str(&format!("{} <= {}\n", self.names[f], self.names[c]));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Arc<FiniteSpace>> {
        let mut lines = text.lines();
        match lines.next() {
            Some("flowcover-space v1") => {}
            _ => return Err(Error::Parse("missing space header".into())),
        }
        let cells_line = lines
            .next()
            .ok_or_else(|| Error::Parse("missing cells line".into()))?;
        let names: Vec<String> = cells_line
            .strip_prefix("cells: ")
            .ok_or_else(|| Error::Parse("malformed cells line".into()))?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let index: BTreeMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut pairs = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (lo, hi) = line
                .split_once(" <= ")
                .ok_or_else(|| Error::Parse(format!("malformed pair line `{line}`")))?;
            let lo = *index
                .get(lo)
                .ok_or_else(|| Error::Parse(format!("unknown cell `{lo}`")))?;
            let hi = *index
                .get(hi)
                .ok_or_else(|| Error::Parse(format!("unknown cell `{hi}`")))?;
            pairs.push((lo, hi));
        }
        FiniteSpace::from_pairs(names, &pairs)
    }
}

/// A cubical cell: per axis either a single grid vertex or a unit extent
/// starting at it, in grid vertex coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct CubicalCell(Vec<(usize, bool)>);

impl CubicalCell {
    fn dim(&self) -> usize {
        self.0.iter().filter(|(_, ext)| *ext).count()
    }

    fn name(&self) -> String {
        self.0
            .iter()
            .map(|&(lo, ext)| {
                if ext {
                    format!("{}-{}", lo, lo + 1)
                } else {
                    format!("{}", lo)
                }
            })
            .collect::<Vec<_>>()
            .join("x")
    }

    /// All faces, self included (product of per-axis restrictions).
    fn faces(&self) -> Vec<CubicalCell> {
        let mut out = vec![Vec::new()];
        for &(lo, ext) in &self.0 {
            let options: Vec<(usize, bool)> = if ext {
                vec![(lo, false), (lo + 1, false), (lo, true)]
            } else {
                vec![(lo, false)]
            };
            let mut next = Vec::with_capacity(out.len() * options.len());
            for prefix in &out {
                for &opt in &options {
                    let mut v: Vec<(usize, bool)> = prefix.clone();
                    v.push(opt);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(CubicalCell).collect()
    }
}

/// Finite space of a box set: the cubes of `b` plus all their faces, with
/// specialization = face incidence. Cells are named deterministically by
/// (dimension, vertex coordinates).
pub fn make_cubical_space(_grid: &Grid, b: &BoxSet) -> Result<Arc<FiniteSpace>> {
    if b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let grid = b.grid();
    let mut top_cells = Vec::new();
    for flat in b.iter() {
        let idx = grid.unflatten(flat);
        top_cells.push(CubicalCell(idx.iter().map(|&i| (i, true)).collect()));
    }
    // collect all cells
    let mut all: Vec<CubicalCell> = Vec::new();
    for c in &top_cells {
        all.extend(c.faces());
    }
    all.sort_by_key(|c| (c.dim(), c.0.clone()));
    all.dedup();
    let index: BTreeMap<&CubicalCell, usize> =
        all.iter().enumerate().map(|(i, c)| (c, i)).collect();

    let names: Vec<String> = all.iter().map(|c| c.name()).collect();
    let mut below: Vec<Vec<usize>> = vec![Vec::new(); all.len()];
    for (i, c) in all.iter().enumerate() {
        let mut faces: Vec<usize> = c.faces().iter().map(|f| index[f]).collect();
        faces.sort_unstable();
        faces.dedup();
        below[i] = faces;
    }
    Ok(Arc::new(FiniteSpace::with_below(names, below)))
}
