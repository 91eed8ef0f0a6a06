//! Pseudo-orbit chain graphs and attracting-set verification.
//!
//! A chain hop at stage (epsilon, t_min) is realized combinatorially as
//! between `steps_min` and `steps_max` applications of the time-tau box map
//! followed by a jump of `floor(epsilon / cellwidth)` Moore rings. Every
//! operator involved (map image, ring, union) is monotone and distributes
//! over unions, so the refinement ladder P_j >= P_k and A_j >= A_k and the
//! inclusion A_k <= P_k are exact set identities, not approximations.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::boxmap::BoxMap;
use crate::error::{Error, Result};
use crate::grid::BoxSet;

/// Jump bound and minimum flow time of one chain hop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    /// Jump bound, in grid coordinate units.
    pub epsilon: f64,
    /// Minimum flow time per hop.
    pub t_min: f64,
    /// Upper truncation of the per-hop flow time. Hops longer than this
    /// decompose into shorter hops with zero jumps, so `2 * t_min` loses
    /// no chains.
    pub hop_window: f64,
}

impl ChainParams {
    pub fn new(epsilon: f64, t_min: f64) -> Result<Self> {
        Self::with_window(epsilon, t_min, 2.0 * t_min)
    }

    pub fn with_window(epsilon: f64, t_min: f64, hop_window: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if !(t_min > 0.0) {
            return Err(Error::InvalidArgument("t_min must be positive".into()));
        }
        if !(hop_window >= t_min) {
            return Err(Error::InvalidArgument(
                "hop_window must be >= t_min".into(),
            ));
        }
        Ok(ChainParams {
            epsilon,
            t_min,
            hop_window,
        })
    }
}

/// A finite refinement sequence standing in for the quantifier
/// "for every epsilon > 0 and t > 0": strictly decreasing epsilon,
/// strictly increasing t_min.
#[derive(Clone, Debug)]
pub struct Schedule {
    stages: Vec<ChainParams>,
}

impl Schedule {
    pub fn new(stages: Vec<ChainParams>) -> Result<Self> {
        if stages.len() < 2 {
            return Err(Error::InvalidArgument(
                "schedule needs at least 2 stages".into(),
            ));
        }
        for w in stages.windows(2) {
            if !(w[1].epsilon < w[0].epsilon) || !(w[1].t_min > w[0].t_min) {
                return Err(Error::InvalidArgument(
                    "schedule must strictly decrease epsilon and increase t_min".into(),
                ));
            }
        }
        Ok(Schedule { stages })
    }

    /// Geometric refinement: `(eps0 / 2^k, t0 * 2^k)` for `k = 0..stages`.
    pub fn geometric(eps0: f64, t0: f64, stages: usize) -> Result<Self> {
        let params = (0..stages)
            .map(|k| ChainParams::new(eps0 / (1u64 << k) as f64, t0 * (1u64 << k) as f64))
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(params)
    }

    /// Default schedule for a grid: eps0 = 8 cell widths, t0 = tau, 5 stages.
    pub fn default_for(grid: &crate::grid::Grid, tau: f64) -> Result<Self> {
        Schedule::geometric(8.0 * grid.max_width(), tau, 5)
    }

    pub fn stages(&self) -> &[ChainParams] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One-hop relation of an (epsilon, t)-chain over a box map.
pub struct ChainGraph<'a> {
    map: &'a BoxMap,
    pub params: ChainParams,
    steps_min: usize,
    steps_max: usize,
    jump_radius: usize,
    cache: RefCell<HashMap<usize, Arc<Vec<usize>>>>,
}

impl<'a> ChainGraph<'a> {
    pub fn new(map: &'a BoxMap, params: ChainParams) -> Result<ChainGraph<'a>> {
        let tau = map.tau;
        let steps_min = ((params.t_min / tau).round() as usize).max(1);
        let steps_max = ((params.hop_window / tau).round() as usize).max(steps_min);
        let cell = map.grid().max_width();
        let jump_radius = ((params.epsilon / cell) + 1e-9).floor() as usize;
        Ok(ChainGraph {
            map,
            params,
            steps_min,
            steps_max,
            jump_radius,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn steps(&self) -> (usize, usize) {
        (self.steps_min, self.steps_max)
    }

    pub fn jump_radius(&self) -> usize {
        self.jump_radius
    }

    /// One hop applied to a whole set. Distributes over unions, so this is
    /// exactly the union of per-box edges.
    pub fn hop(&self, b: &BoxSet) -> Result<BoxSet> {
        let mut acc = BoxSet::empty(self.map.grid().clone());
        let mut current = b.clone();
        for step in 1..=self.steps_max {
            current = self.map.map_image(&current)?;
            if step >= self.steps_min {
                acc = acc.union(&current)?;
            }
        }
        Ok(acc.ring(self.jump_radius))
    }

    /// Edge set of a single source box (memoized).
    pub fn edges_of(&self, flat: usize) -> Result<Arc<Vec<usize>>> {
        if let Some(hit) = self.cache.borrow().get(&flat) {
            return Ok(hit.clone());
        }
        let singleton = BoxSet::from_members(self.map.grid().clone(), vec![flat])?;
        let targets = Arc::new(self.hop(&singleton)?.members().to_vec());
        self.cache.borrow_mut().insert(flat, targets.clone());
        Ok(targets)
    }

    pub fn map(&self) -> &BoxMap {
        self.map
    }
}

/// Everything reachable from `m` in one or more hops of `g`.
pub fn p_set(g: &ChainGraph, m: &BoxSet) -> Result<BoxSet> {
    let mut reach = g.hop(m)?;
    let mut frontier = reach.clone();
    loop {
        let image = g.hop(&frontier)?;
        let fresh = image.difference(&reach)?;
        if fresh.is_empty() {
            return Ok(reach);
        }
        reach = reach.union(&fresh)?;
        frontier = fresh;
    }
}

/// Per-stage chain-reachable sets and their intersection.
#[derive(Clone, Debug)]
pub struct OmegaChainResult {
    /// `P` at every schedule stage, coarsest first.
    pub stages: Vec<BoxSet>,
    /// Intersection over all stages.
    pub omega: BoxSet,
    pub escapes: u64,
}

/// Intersection over the schedule of the chain-reachable sets of `m`.
pub fn omega_chain(f: &BoxMap, m: &BoxSet, schedule: &Schedule) -> Result<OmegaChainResult> {
    if m.is_empty() {
        return Err(Error::EmptyInput);
    }
    let before = f.escapes();
    let mut stages = Vec::with_capacity(schedule.len());
    for &params in schedule.stages() {
        let g = ChainGraph::new(f, params)?;
        stages.push(p_set(&g, m)?);
    }
    let mut omega = stages[0].clone();
    for s in &stages[1..] {
        omega = omega.intersect(s)?;
    }
    Ok(OmegaChainResult {
        stages,
        omega,
        escapes: f.escapes() - before,
    })
}

/// Closure of `p` flowed forward for all times at or beyond the stage's
/// minimum: the union of iterated map images starting at `steps_min`
/// applications, closed under the map until fixpoint. Forward-invariant by
/// construction, and contained in `p` whenever `p` is a `p_set` output of
/// the same stage.
pub fn a_set(g: &ChainGraph, p: &BoxSet) -> Result<BoxSet> {
    let f = g.map();
    let (steps_min, steps_max) = g.steps();
    let mut acc = BoxSet::empty(f.grid().clone());
    let mut current = p.clone();
    for step in 1..=steps_max {
        current = f.map_image(&current)?;
        if step >= steps_min {
            acc = acc.union(&current)?;
        }
    }
    loop {
        let next = f.map_image(&acc)?;
        if next.is_subset(&acc) {
            return Ok(acc);
        }
        acc = acc.union(&next)?;
    }
}

/// Verdict of the attracting-set check.
#[derive(Clone, Debug)]
pub struct AttractingReport {
    pub a_set: BoxSet,
    pub positively_invariant: bool,
    pub witness_neighborhood: BoxSet,
    pub omega_of_witness: BoxSet,
    pub attracting: bool,
}

/// Checks that `a` is positively invariant and that the eventual set of its
/// one-ring neighborhood falls back into `a`.
pub fn verify_attracting(f: &BoxMap, a: &BoxSet) -> Result<AttractingReport> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let positively_invariant = f.map_image(a)?.is_subset(a);
    let witness = a.ring(1);
    let omega_of_witness = crate::limits::omega_set(f, &witness)?.omega;
    let attracting = positively_invariant && omega_of_witness.is_subset(a);
    Ok(AttractingReport {
        a_set: a.clone(),
        positively_invariant,
        witness_neighborhood: witness,
        omega_of_witness,
        attracting,
    })
}

/// Per-stage data of the quasi-attracting verification.
#[derive(Clone, Debug)]
pub struct QuasiStage {
    pub params: ChainParams,
    pub p: BoxSet,
    pub a: BoxSet,
    pub attracting: AttractingReport,
}

#[derive(Clone, Debug)]
pub struct QuasiAttractingReport {
    pub stages: Vec<QuasiStage>,
    /// Intersection of the per-stage chain-reachable sets.
    pub p_intersection: BoxSet,
    /// Intersection of the per-stage attracting sets.
    pub a_intersection: BoxSet,
    pub all_stages_attracting: bool,
    /// Exact easy inclusion: the A-intersection inside the P-intersection.
    pub a_inside_p: bool,
    /// Whether the converse holds within a one-ring slack at the final
    /// resolution.
    pub equality_within_ring1: bool,
    /// Whether the converse holds with no slack at all.
    pub equality_exact: bool,
    /// Chain limit of `m` contained in the A-intersection within slack.
    pub omega_inside_a: bool,
    pub pass: bool,
    pub escapes: u64,
}

/// Verifies that the chain limit of `m` is an intersection of attracting
/// sets, stage by stage.
pub fn verify_quasi_attracting(
    f: &BoxMap,
    m: &BoxSet,
    schedule: &Schedule,
) -> Result<QuasiAttractingReport> {
    if m.is_empty() {
        return Err(Error::EmptyInput);
    }
    let before = f.escapes();
    let mut stages = Vec::with_capacity(schedule.len());
    for &params in schedule.stages() {
        let g = ChainGraph::new(f, params)?;
        let p = p_set(&g, m)?;
        let a = a_set(&g, &p)?;
        let attracting = verify_attracting(f, &a)?;
        stages.push(QuasiStage {
            params,
            p,
            a,
            attracting,
        });
    }
    let mut p_intersection = stages[0].p.clone();
    let mut a_intersection = stages[0].a.clone();
    for s in &stages[1..] {
        p_intersection = p_intersection.intersect(&s.p)?;
        a_intersection = a_intersection.intersect(&s.a)?;
    }
    let all_stages_attracting = stages.iter().all(|s| s.attracting.attracting);
    let a_inside_p = a_intersection.is_subset(&p_intersection);
    let equality_exact = p_intersection.is_subset(&a_intersection);
    let equality_within_ring1 = p_intersection.is_subset(&a_intersection.ring(1));
    let omega_inside_a = equality_within_ring1; // the chain limit IS the P-intersection
    let pass = all_stages_attracting && a_inside_p && omega_inside_a;
    Ok(QuasiAttractingReport {
        stages,
        p_intersection,
        a_intersection,
        all_stages_attracting,
        a_inside_p,
        equality_within_ring1,
        equality_exact,
        omega_inside_a,
        pass,
        escapes: f.escapes() - before,
    })
}

/// Executable sanity axiom: hop-reachability is transitive.
pub fn chain_transitivity_check(g: &ChainGraph) -> Result<bool> {
    let grid = g.map().grid().clone();
    for b in 0..grid.box_count() {
        let start = BoxSet::from_members(grid.clone(), vec![b])?;
        let reach = p_set(g, &start)?;
        let reach_of_reach = p_set(g, &reach)?;
        if !reach_of_reach.is_subset(&reach) {
            return Ok(false);
        }
    }
    Ok(true)
}
