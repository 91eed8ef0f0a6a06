//! Compact-region discretization: grids of closed boxes and exact set
//! operations on sorted box-index sets.
//!
//! Boxes are closed cubes, so a set of boxes realizes a closed subset of
//! the domain. A point sitting exactly on a shared face belongs to every
//! incident box.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EscapePolicy {
    Clip,
    Drop,
    Error,
}

impl std::fmt::Display for EscapePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EscapePolicy::Clip => write!(f, "clip"),
            EscapePolicy::Drop => write!(f, "drop"),
            EscapePolicy::Error => write!(f, "error"),
        }
    }
}

impl std::str::FromStr for EscapePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clip" => Ok(EscapePolicy::Clip),
            "drop" => Ok(EscapePolicy::Drop),
            "error" => Ok(EscapePolicy::Error),
            other => Err(Error::Parse(format!("unknown escape policy `{other}`"))),
        }
    }
}

/// A uniform subdivision of a compact box `[lower, upper]` into cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub subdivisions: Vec<usize>,
    pub escape_policy: EscapePolicy,
}

impl Grid {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        subdivisions: Vec<usize>,
        escape_policy: EscapePolicy,
    ) -> Result<Arc<Grid>> {
        if lower.len() != upper.len() || lower.len() != subdivisions.len() || lower.is_empty() {
            return Err(Error::InvalidArgument(
                "lower, upper and subdivisions must share a positive dimension".into(),
            ));
        }
        for i in 0..lower.len() {
            if !(lower[i] < upper[i]) {
                return Err(Error::InvalidArgument(format!(
                    "lower[{i}] must be < upper[{i}]"
                )));
            }
            if subdivisions[i] == 0 {
                return Err(Error::InvalidArgument(format!(
                    "subdivisions[{i}] must be positive"
                )));
            }
        }
        Ok(Arc::new(Grid {
            lower,
            upper,
            subdivisions,
            escape_policy,
        }))
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn box_count(&self) -> usize {
        self.subdivisions.iter().product()
    }

    pub fn width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.subdivisions[axis] as f64
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dim()).map(|a| self.width(a)).fold(0.0, f64::max)
    }

    /// Row-major flattening of a multi-index; the flat order equals the
    /// lexicographic order on multi-indices.
    pub fn flatten(&self, index: &[usize]) -> usize {
        let mut flat = 0usize;
        for (a, &i) in index.iter().enumerate() {
            debug_assert!(i < self.subdivisions[a]);
            flat = flat * self.subdivisions[a] + i;
        }
        flat
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut index = vec![0usize; d];
        for a in (0..d).rev() {
            index[a] = flat % self.subdivisions[a];
            flat /= self.subdivisions[a];
        }
        index
    }

    /// Geometric realization of a box: the closed cube `[lo, hi]`.
    pub fn box_bounds(&self, flat: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.unflatten(flat);
        let lo = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lower[a] + i as f64 * self.width(a))
            .collect();
        let hi = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lower[a] + (i + 1) as f64 * self.width(a))
            .collect();
        (lo, hi)
    }

    pub fn box_center(&self, flat: usize) -> Point {
        let (lo, hi) = self.box_bounds(flat);
        Point(lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    /// Inclusive cell range `[imin, imax]` on one axis whose closed cells
    /// meet the closed interval `[a, b]`, or None if it misses the domain.
    pub fn axis_cells_of_interval(&self, axis: usize, a: f64, b: f64) -> Option<(usize, usize)> {
        let lo = self.lower[axis];
        let hi = self.upper[axis];
        let n = self.subdivisions[axis];
        if b < lo || a > hi || a > b {
            return None;
        }
        let imin = if a <= lo { 0 } else { self.axis_cells_of_value(axis, a).unwrap().0 };
        let imax = if b >= hi {
            n - 1
        } else {
            self.axis_cells_of_value(axis, b).unwrap().1
        };
        Some((imin, imax))
    }

    /// Inclusive range of cells containing coordinate `v` on one axis.
    /// A value on an interior cell boundary belongs to both neighbors.
    pub fn axis_cells_of_value(&self, axis: usize, v: f64) -> Option<(usize, usize)> {
        let lo = self.lower[axis];
        let hi = self.upper[axis];
        let n = self.subdivisions[axis];
        if v < lo || v > hi {
            return None;
        }
        if v == hi {
            return Some((n - 1, n - 1));
        }
        let u = (v - lo) * n as f64 / (hi - lo);
        let i = u.floor() as usize;
        let i = i.min(n - 1);
        if u == i as f64 && i > 0 {
            Some((i - 1, i))
        } else {
            Some((i, i))
        }
    }

    /// Moore neighbors (shared-vertex adjacency) of a box, including itself.
    pub fn neighborhood(&self, flat: usize, out: &mut Vec<usize>) {
        let idx = self.unflatten(flat);
        let d = self.dim();
        let mut offsets = vec![-1i64; d];
        'outer: loop {
            let mut neighbor = Vec::with_capacity(d);
            let mut valid = true;
            for a in 0..d {
                let v = idx[a] as i64 + offsets[a];
                if v < 0 || v >= self.subdivisions[a] as i64 {
                    valid = false;
                    break;
                }
                neighbor.push(v as usize);
            }
            if valid {
                out.push(self.flatten(&neighbor));
            }
            for a in 0..d {
                offsets[a] += 1;
                if offsets[a] <= 1 {
                    continue 'outer;
                }
                offsets[a] = -1;
            }
            break;
        }
    }
}

/// A duplicate-free sorted set of boxes on a shared grid.
///
/// This is the universal representation for every computed set; all
/// set operations are exact.
#[derive(Clone, Debug)]
pub struct BoxSet {
    grid: Arc<Grid>,
    members: Vec<usize>,
}

impl PartialEq for BoxSet {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.members == other.members
    }
}
impl Eq for BoxSet {}

impl BoxSet {
    pub fn empty(grid: Arc<Grid>) -> Self {
        BoxSet {
            grid,
            members: Vec::new(),
        }
    }

    pub fn from_members(grid: Arc<Grid>, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&m) = members.last() {
            if m >= grid.box_count() {
                return Err(Error::InvalidArgument(format!(
                    "box index {m} out of range for grid with {} boxes",
                    grid.box_count()
                )));
            }
        }
        Ok(BoxSet { grid, members })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.members.binary_search(&flat).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    fn check_grid(&self, other: &BoxSet) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn union(&self, other: &BoxSet) -> Result<BoxSet> {
        self.check_grid(other)?;
        let mut members = Vec::with_capacity(self.members.len() + other.members.len());
        members.extend_from_slice(&self.members);
        members.extend_from_slice(&other.members);
        members.sort_unstable();
        members.dedup();
        Ok(BoxSet {
            grid: self.grid.clone(),
            members,
        })
    }

    pub fn intersect(&self, other: &BoxSet) -> Result<BoxSet> {
        self.check_grid(other)?;
        let members = self
            .members
            .iter()
            .copied()
            .filter(|m| other.contains(*m))
            .collect();
        Ok(BoxSet {
            grid: self.grid.clone(),
            members,
        })
    }

    pub fn difference(&self, other: &BoxSet) -> Result<BoxSet> {
        self.check_grid(other)?;
        let members = self
            .members
            .iter()
            .copied()
            .filter(|m| !other.contains(*m))
            .collect();
        Ok(BoxSet {
            grid: self.grid.clone(),
            members,
        })
    }

    pub fn is_subset(&self, other: &BoxSet) -> bool {
        *self.grid == *other.grid && self.members.iter().all(|m| other.contains(*m))
    }

    /// Dilates `k` times by Moore adjacency; `k = 0` is the identity.
    pub fn ring(&self, k: usize) -> BoxSet {
        let mut current = self.members.clone();
        let mut scratch = Vec::new();
        for _ in 0..k {
            let mut next = Vec::with_capacity(current.len() * 3);
            for &m in &current {
                scratch.clear();
                self.grid.neighborhood(m, &mut scratch);
                next.extend_from_slice(&scratch);
            }
            next.sort_unstable();
            next.dedup();
            current = next;
        }
        BoxSet {
            grid: self.grid.clone(),
            members: current,
        }
    }

    /// Partition into maximal Moore-connected components, ordered by their
    /// lexicographically smallest box index.
    pub fn connected_components(&self) -> Vec<BoxSet> {
        let mut seen = vec![false; self.members.len()];
        let mut components = Vec::new();
        let mut scratch = Vec::new();
        for start in 0..self.members.len() {
            if seen[start] {
                continue;
            }
            let mut component = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(pos) = stack.pop() {
                let m = self.members[pos];
                component.push(m);
                scratch.clear();
                self.grid.neighborhood(m, &mut scratch);
                for &n in &scratch {
                    if let Ok(p) = self.members.binary_search(&n) {
                        if !seen[p] {
                            seen[p] = true;
                            stack.push(p);
                        }
                    }
                }
            }
            component.sort_unstable();
            components.push(BoxSet {
                grid: self.grid.clone(),
                members: component,
            });
        }
        // BFS seeds run in ascending member order, so components already come
        // out sorted by minimum element
        components
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.connected_components().len() == 1
    }
}

/// Minimal box set whose closed cubes contain all the given points.
pub fn cover_points(grid: &Arc<Grid>, pts: &[Point]) -> Result<BoxSet> {
    Ok(cover_points_counting(grid, pts)?.0)
}

/// Same as [`cover_points`] but also reports how many points fell outside
/// the domain (and were clipped or dropped per the grid's policy).
pub fn cover_points_counting(grid: &Arc<Grid>, pts: &[Point]) -> Result<(BoxSet, u64)> {
    let mut members = Vec::new();
    let mut escapes = 0u64;
    for p in pts {
        if p.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: p.dim(),
            });
        }
        let mut coords = p.0.clone();
        let outside = coords
            .iter()
            .enumerate()
            .any(|(a, &v)| v < grid.lower[a] || v > grid.upper[a]);
        if outside {
            escapes += 1;
            match grid.escape_policy {
                EscapePolicy::Error => {
                    return Err(Error::Escaped {
                        coords: p.0.clone(),
                    })
                }
                EscapePolicy::Drop => continue,
                EscapePolicy::Clip => {
                    for a in 0..grid.dim() {
                        coords[a] = coords[a].clamp(grid.lower[a], grid.upper[a]);
                    }
                }
            }
        }
        let ranges: Vec<(usize, usize)> = (0..grid.dim())
            .map(|a| grid.axis_cells_of_value(a, coords[a]).unwrap())
            .collect();
        push_index_product(grid, &ranges, &mut members);
    }
    let set = BoxSet::from_members(grid.clone(), members)?;
    Ok((set, escapes))
}

/// Boxes whose closed cubes meet the closed rectangle `[lo, hi]`; empty if
/// the rectangle misses the domain.
pub fn cover_rect(grid: &Arc<Grid>, lo: &[f64], hi: &[f64]) -> Result<BoxSet> {
    if lo.len() != grid.dim() || hi.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: lo.len().max(hi.len()),
        });
    }
    let mut ranges = Vec::with_capacity(grid.dim());
    for a in 0..grid.dim() {
        match grid.axis_cells_of_interval(a, lo[a], hi[a]) {
            Some(r) => ranges.push(r),
            None => return Ok(BoxSet::empty(grid.clone())),
        }
    }
    let mut members = Vec::new();
    push_index_product(grid, &ranges, &mut members);
    BoxSet::from_members(grid.clone(), members)
}

/// Appends all flat indices in the product of per-axis inclusive ranges.
pub(crate) fn push_index_product(grid: &Grid, ranges: &[(usize, usize)], out: &mut Vec<usize>) {
    let d = grid.dim();
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        out.push(grid.flatten(&idx));
        for a in (0..d).rev() {
            if idx[a] < ranges[a].1 {
                idx[a] += 1;
                continue 'outer;
            }
            idx[a] = ranges[a].0;
        }
        break;
    }
}
