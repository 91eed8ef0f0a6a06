//! Limit sets over a box map: the eventual set of a box set, the singleton
//! limit set, prolongational variants, and the connectedness check.
//!
//! The image sequence S_{k+1} = F(S_k) lives in a finite lattice, so it is
//! eventually periodic; the limit is the union over the terminal cycle,
//! which equals the tail intersection of the unions of later terms.

use std::collections::HashMap;

use serde::Serialize;

use crate::boxmap::BoxMap;
use crate::error::{Error, Result};
use crate::flow::Point;
use crate::grid::{cover_points, BoxSet};

/// Result of an eventual-set computation.
#[derive(Clone, Debug)]
pub struct OmegaResult {
    pub omega: BoxSet,
    /// Index at which the image sequence entered its terminal cycle.
    pub transient_steps: usize,
    pub cycle_length: usize,
    pub connected: bool,
    pub components: Vec<BoxSet>,
    /// Escapes accumulated while computing the sequence.
    pub escapes: u64,
}

/// Iterates `S_0 = b`, `S_{k+1} = F(S_k)` until the sequence repeats and
/// returns the union of the sets on the detected cycle.
pub fn omega_set(f: &BoxMap, b: &BoxSet) -> Result<OmegaResult> {
    if b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let escapes_before = f.escapes();
    let mut history: Vec<BoxSet> = vec![b.clone()];
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    seen.insert(b.members().to_vec(), 0);
    let (start, period) = loop {
        let next = f.map_image(history.last().unwrap())?;
        if next.is_empty() {
            // images can only die out when members escape under drop policy
            return Err(Error::EscapeDominated);
        }
        let key = next.members().to_vec();
        let step = history.len();
        if let Some(&prev) = seen.get(&key) {
            break (prev, step - prev);
        }
        seen.insert(key, step);
        history.push(next);
    };
    let mut omega = BoxSet::empty(b.grid().clone());
    for s in &history[start..] {
        omega = omega.union(s)?;
    }
    let components = omega.connected_components();
    let connected = components.len() == 1;
    Ok(OmegaResult {
        omega,
        transient_steps: start,
        cycle_length: period,
        connected,
        components,
        escapes: f.escapes() - escapes_before,
    })
}

/// Limit set of a single point: the eventual set of its cover.
pub fn lambda_plus(f: &BoxMap, x: &Point) -> Result<BoxSet> {
    let b = cover_points(f.grid(), std::slice::from_ref(x))?;
    Ok(omega_set(f, &b)?.omega)
}

/// First prolongational limit set at ring radius `k`: the eventual set of a
/// dilated cover of `x`. The radius stands in for the neighborhood infimum
/// at this resolution.
pub fn j_plus(f: &BoxMap, x: &Point, k: usize) -> Result<BoxSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("ring radius must be >= 1".into()));
    }
    let b = cover_points(f.grid(), std::slice::from_ref(x))?.ring(k);
    Ok(omega_set(f, &b)?.omega)
}

/// First prolongational set at ring radius `k`: the dilated cover of `x`
/// united with all its iterated images, closed under the map.
pub fn d_plus(f: &BoxMap, x: &Point, k: usize) -> Result<BoxSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("ring radius must be >= 1".into()));
    }
    let mut reach = cover_points(f.grid(), std::slice::from_ref(x))?.ring(k);
    loop {
        let next = f.map_image(&reach)?;
        if next.is_subset(&reach) {
            return Ok(reach);
        }
        reach = reach.union(&next)?;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectednessReport {
    pub input_connected: bool,
    pub hypothesis_violated: bool,
    pub omega_nonempty: bool,
    pub escapes: u64,
    pub connected: bool,
    pub component_count: usize,
    pub transient_steps: usize,
    pub cycle_length: usize,
    pub pass: bool,
}

/// Checks that a connected input yields a connected eventual set.
/// PASS requires a connected input, a nonempty escape-free limit, and a
/// single component.
pub fn check_connected_omega(f: &BoxMap, b: &BoxSet) -> Result<(ConnectednessReport, OmegaResult)> {
    let input_connected = b.is_connected();
    let result = omega_set(f, b)?;
    let report = ConnectednessReport {
        input_connected,
        hypothesis_violated: !input_connected,
        omega_nonempty: !result.omega.is_empty(),
        escapes: result.escapes,
        connected: result.connected,
        component_count: result.components.len(),
        transient_steps: result.transient_steps,
        cycle_length: result.cycle_length,
        pass: input_connected
            && !result.omega.is_empty()
            && result.escapes == 0
            && result.connected,
    };
    Ok((report, result))
}
