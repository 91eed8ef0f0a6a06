//! Combinatorial set-valued maps: each grid box is sent to an outer
//! approximation of its time-tau flow image.
//!
//! Images are sampled (lattice points per box), fattened by a sup-norm pad
//! and covered; the construction is monotone in both the sample count and
//! the pad. Edges are computed lazily and memoized, so only boxes actually
//! visited by an analysis pay for integration.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::{FlowSpec, Point};
use crate::grid::{push_index_product, BoxSet, EscapePolicy, Grid};

/// Default image padding: one cell width, or the Lipschitz-based bound
/// when the flow carries a hint.
pub fn default_pad(flow: &FlowSpec, grid: &Grid, tau: f64) -> f64 {
    let cell = grid.max_width();
    match flow.lipschitz_hint {
        None => cell,
        Some(l) => {
            let diam: f64 = (0..grid.dim())
                .map(|a| grid.width(a) * grid.width(a))
                .sum::<f64>()
                .sqrt();
            cell + ((l * tau).exp() - 1.0) * diam / 2.0
        }
    }
}

/// Lattice sample points of a box: `samples_per_axis` points per axis,
/// endpoints included.
fn box_samples(grid: &Grid, flat: usize, samples_per_axis: usize) -> Vec<Point> {
    let (lo, hi) = grid.box_bounds(flat);
    let d = grid.dim();
    let s = samples_per_axis;
    let mut pts = Vec::with_capacity(s.pow(d as u32));
    let mut idx = vec![0usize; d];
    'outer: loop {
        let coords: Vec<f64> = (0..d)
            .map(|a| {
                let frac = idx[a] as f64 / (s - 1) as f64;
                lo[a] + frac * (hi[a] - lo[a])
            })
            .collect();
        pts.push(Point(coords));
        for a in (0..d).rev() {
            if idx[a] + 1 < s {
                idx[a] += 1;
                continue 'outer;
            }
            idx[a] = 0;
        }
        break;
    }
    pts
}

/// Advances each sample point of box `flat` by every time in `times`,
/// fattens the arrivals by `fatten` (sup-norm) and covers the result.
/// Returns the sorted target indices and the escape count.
pub fn sampled_image(
    flow: &FlowSpec,
    grid: &Arc<Grid>,
    flat: usize,
    times: &[f64],
    samples_per_axis: usize,
    fatten: f64,
) -> Result<(Vec<usize>, u64)> {
    if samples_per_axis < 2 {
        return Err(Error::InvalidArgument(
            "samples_per_axis must be >= 2".into(),
        ));
    }
    let mut members = Vec::new();
    let mut escapes = 0u64;
    for p in box_samples(grid, flat, samples_per_axis) {
        for &t in times {
            let arrived = match flow.advance(&p, t) {
                Ok(q) => q,
                Err(Error::NonFiniteState { .. }) => {
                    // blow-up counts as escaping the compact domain
                    escapes += 1;
                    if grid.escape_policy == EscapePolicy::Error {
                        return Err(Error::Escaped {
                            coords: p.0.clone(),
                        });
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            let outside = arrived
                .0
                .iter()
                .enumerate()
                .any(|(a, &v)| v < grid.lower[a] || v > grid.upper[a]);
            let mut coords = arrived.0;
            if outside {
                escapes += 1;
                match grid.escape_policy {
                    EscapePolicy::Error => return Err(Error::Escaped { coords }),
                    EscapePolicy::Drop => continue,
                    EscapePolicy::Clip => {
                        for a in 0..grid.dim() {
                            coords[a] = coords[a].clamp(grid.lower[a], grid.upper[a]);
                        }
                    }
                }
            }
            let mut ranges = Vec::with_capacity(grid.dim());
            let mut miss = false;
            for a in 0..grid.dim() {
                match grid.axis_cells_of_interval(a, coords[a] - fatten, coords[a] + fatten) {
                    Some(r) => ranges.push(r),
                    None => {
                        miss = true;
                        break;
                    }
                }
            }
            if !miss {
                push_index_product(grid, &ranges, &mut members);
            }
        }
    }
    members.sort_unstable();
    members.dedup();
    Ok((members, escapes))
}

/// Outer approximation of the time-tau image of a single box.
pub fn box_image(
    flow: &FlowSpec,
    grid: &Arc<Grid>,
    flat: usize,
    tau: f64,
    samples_per_axis: usize,
    pad: f64,
) -> Result<BoxSet> {
    let (members, _) = sampled_image(flow, grid, flat, &[tau], samples_per_axis, pad)?;
    BoxSet::from_members(grid.clone(), members)
}

enum Backend {
    Flow {
        flow: FlowSpec,
        samples_per_axis: usize,
        pad: f64,
    },
    Table(BTreeMap<usize, Vec<usize>>),
}

/// The combinatorial set-valued map F: box -> box set.
///
/// Backed either by a flow (edges computed on demand and memoized) or by an
/// explicit edge table for hand-built fixtures.
pub struct BoxMap {
    grid: Arc<Grid>,
    pub tau: f64,
    backend: Backend,
    cache: RefCell<HashMap<usize, Arc<Vec<usize>>>>,
    escapes: Cell<u64>,
}

impl BoxMap {
    pub fn from_flow(
        flow: FlowSpec,
        grid: Arc<Grid>,
        tau: f64,
        samples_per_axis: usize,
        pad: Option<f64>,
    ) -> Result<BoxMap> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
        if samples_per_axis < 2 {
            return Err(Error::InvalidArgument(
                "samples_per_axis must be >= 2".into(),
            ));
        }
        if flow.dimension != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: flow.dimension,
            });
        }
        let pad = pad.unwrap_or_else(|| default_pad(&flow, &grid, tau));
        Ok(BoxMap {
            grid,
            tau,
            backend: Backend::Flow {
                flow,
                samples_per_axis,
                pad,
            },
            cache: RefCell::new(HashMap::new()),
            escapes: Cell::new(0),
        })
    }

    /// Hand-built map from an explicit edge table; boxes absent from the
    /// table have empty image.
    pub fn from_edges(
        grid: Arc<Grid>,
        tau: f64,
        edges: BTreeMap<usize, Vec<usize>>,
    ) -> Result<BoxMap> {
        let count = grid.box_count();
        let mut table = BTreeMap::new();
        for (src, mut targets) in edges {
            if src >= count {
                return Err(Error::InvalidArgument(format!("source box {src} out of range")));
            }
            targets.sort_unstable();
            targets.dedup();
            if targets.iter().any(|&t| t >= count) {
                return Err(Error::InvalidArgument(format!(
                    "target out of range for source {src}"
                )));
            }
            table.insert(src, targets);
        }
        Ok(BoxMap {
            grid,
            tau,
            backend: Backend::Table(table),
            cache: RefCell::new(HashMap::new()),
            escapes: Cell::new(0),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Total escape count accumulated across all lazily computed edges.
    pub fn escapes(&self) -> u64 {
        self.escapes.get()
    }

    pub fn image_of(&self, flat: usize) -> Result<Arc<Vec<usize>>> {
        if let Some(hit) = self.cache.borrow().get(&flat) {
            return Ok(hit.clone());
        }
        let targets = match &self.backend {
            Backend::Table(table) => Arc::new(table.get(&flat).cloned().unwrap_or_default()),
            Backend::Flow {
                flow,
                samples_per_axis,
                pad,
            } => {
                let (members, escapes) =
                    sampled_image(flow, &self.grid, flat, &[self.tau], *samples_per_axis, *pad)?;
                self.escapes.set(self.escapes.get() + escapes);
                Arc::new(members)
            }
        };
        self.cache
            .borrow_mut()
            .insert(flat, targets.clone());
        Ok(targets)
    }

    /// Exact union of per-box images over the members of `b`.
    pub fn map_image(&self, b: &BoxSet) -> Result<BoxSet> {
        if *b.grid().as_ref() != *self.grid {
            return Err(Error::GridMismatch);
        }
        let mut members = Vec::new();
        for m in b.iter() {
            members.extend_from_slice(&self.image_of(m)?);
        }
        members.sort_unstable();
        members.dedup();
        BoxSet::from_members(self.grid.clone(), members)
    }

    /// `n`-fold image: `F^n(b)`.
    pub fn iterate_image(&self, b: &BoxSet, n: usize) -> Result<BoxSet> {
        let mut current = b.clone();
        for _ in 0..n {
            current = self.map_image(&current)?;
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::builtin_system;

    fn grid_1d(n: usize) -> Arc<Grid> {
        Grid::new(vec![-2.0], vec![2.0], vec![n], EscapePolicy::Clip).unwrap()
    }

    #[test]
    fn equilibrium_box_maps_into_itself() {
        // origin box of the sink: the field vanishes inside, image must keep it
        let flow = builtin_system("linear_sink_1d").unwrap();
        let g = grid_1d(65); // odd: origin is a cell center
        let b = crate::grid::cover_points(&g, &[Point(vec![0.0])]).unwrap();
        assert_eq!(b.len(), 1);
        let flat = b.members()[0];
        let img = box_image(&flow, &g, flat, 0.5, 2, 0.0).unwrap();
        assert!(b.is_subset(&img));
    }

    #[test]
    fn sink_image_lands_near_half() {
        let flow = builtin_system("linear_sink_1d").unwrap();
        let g = grid_1d(64);
        let b = crate::grid::cover_points(&g, &[Point(vec![1.0 + 0.01])]).unwrap();
        let flat = b.members()[0];
        let img = box_image(&flow, &g, flat, std::f64::consts::LN_2, 3, 0.0).unwrap();
        let w = g.width(0);
        for m in img.iter() {
            let (lo, hi) = g.box_bounds(m);
            // each image box within one cell of coordinate 0.5 (closed form e^{-ln2} x)
            assert!(lo[0] <= 0.55 + w && hi[0] >= 0.45 - w, "box at [{},{}]", lo[0], hi[0]);
        }
    }

    #[test]
    fn pad_is_ring_dilation_on_uniform_grid() {
        let flow = builtin_system("linear_sink_1d").unwrap();
        let g = grid_1d(64);
        let w = g.width(0);
        for flat in [0usize, 10, 31, 32, 60] {
            let plain = box_image(&flow, &g, flat, 0.3, 3, 0.0).unwrap();
            let padded = box_image(&flow, &g, flat, 0.3, 3, 2.0 * w).unwrap();
            assert_eq!(padded, plain.ring(2), "box {flat}");
        }
    }

    #[test]
    fn monotone_in_samples_and_pad() {
        let flow = builtin_system("vanderpol").unwrap();
        let g = Grid::new(vec![-4.0, -4.0], vec![4.0, 4.0], vec![32, 32], EscapePolicy::Clip)
            .unwrap();
        for flat in [100usize, 500, 700] {
            let base = box_image(&flow, &g, flat, 0.4, 2, 0.0).unwrap();
            let more_samples = box_image(&flow, &g, flat, 0.4, 4, 0.0).unwrap();
            let more_pad = box_image(&flow, &g, flat, 0.4, 2, 0.1).unwrap();
            assert!(base.is_subset(&more_samples));
            assert!(base.is_subset(&more_pad));
        }
    }

    #[test]
    fn map_image_unions_edges() {
        let g = grid_1d(8);
        let mut edges = BTreeMap::new();
        edges.insert(0, vec![1]);
        edges.insert(1, vec![2]);
        let f = BoxMap::from_edges(g.clone(), 1.0, edges).unwrap();
        let ab = BoxSet::from_members(g.clone(), vec![0, 1]).unwrap();
        assert_eq!(f.map_image(&ab).unwrap().members(), &[1, 2]);
        let empty = BoxSet::empty(g);
        assert!(f.map_image(&empty).unwrap().is_empty());
    }

    #[test]
    fn map_image_distributes_over_union() {
        let g = grid_1d(12);
        let mut edges = BTreeMap::new();
        for i in 0..12usize {
            edges.insert(i, vec![(i * 5 + 1) % 12, (i * 3 + 7) % 12]);
        }
        let f = BoxMap::from_edges(g.clone(), 1.0, edges).unwrap();
        // exhaustive over all small pairs of subsets of a 4-element carrier
        let carrier = [0usize, 3, 7, 11];
        for mask_a in 0u32..16 {
            for mask_b in 0u32..16 {
                let pick = |mask: u32| {
                    let v: Vec<usize> = carrier
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, &m)| m)
                        .collect();
                    BoxSet::from_members(g.clone(), v).unwrap()
                };
                let a = pick(mask_a);
                let b = pick(mask_b);
                let lhs = f.map_image(&a.union(&b).unwrap()).unwrap();
                let rhs = f
                    .map_image(&a)
                    .unwrap()
                    .union(&f.map_image(&b).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn sink_true_image_contained_when_pad_is_cellwidth() {
        // geometric soundness oracle: the closed-form image of every box of
        // the 1-d sink is contained in the sampled image once pad >= cell width
        let flow = builtin_system("linear_sink_1d").unwrap();
        let g = grid_1d(64);
        let w = g.width(0);
        let tau = 0.5f64;
        for flat in 0..g.box_count() {
            let (lo, hi) = g.box_bounds(flat);
            let true_img = (lo[0] * (-tau).exp(), hi[0] * (-tau).exp());
            let (a, b) = if true_img.0 <= true_img.1 {
                true_img
            } else {
                (true_img.1, true_img.0)
            };
            let truth_cover = {
                let r = g.axis_cells_of_interval(0, a, b).unwrap();
                BoxSet::from_members(g.clone(), (r.0..=r.1).collect()).unwrap()
            };
            let img = box_image(&flow, &g, flat, tau, 2, w).unwrap();
            assert!(truth_cover.is_subset(&img), "box {flat}");
        }
    }
}
