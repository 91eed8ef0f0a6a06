//! Output artifacts: box-set serialization (text, JSON, PPM bitmaps) and
//! the JSON report structures written by the command-line runs.
//!
//! Everything here is deterministic: identical inputs produce byte-identical
//! files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::chains::{AttractingReport, QuasiAttractingReport};
use crate::config::{grid_spec_of, parse_grid_spec, RunConfig};
use crate::error::{Error, Result};
use crate::grid::BoxSet;
use crate::limits::ConnectednessReport;

/// Text form: header, grid descriptor, then one index tuple per line.
pub fn boxset_to_text(b: &BoxSet) -> String {
    let grid = b.grid();
    let mut out = String::from("flowcover-boxset v1\n");
    out.push_str(&format!(
        "grid: {} policy={}\n",
        grid_spec_of(grid),
        grid.escape_policy
    ));
    for m in b.iter() {
        let idx = grid.unflatten(m);
        let words: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

pub fn boxset_from_text(text: &str) -> Result<BoxSet> {
    let mut lines = text.lines();
    match lines.next() {
        Some("flowcover-boxset v1") => {}
        _ => return Err(Error::Parse("missing box-set header".into())),
    }
    let grid_line = lines
        .next()
        .and_then(|l| l.strip_prefix("grid: "))
        .ok_or_else(|| Error::Parse("missing grid line".into()))?;
    let (spec, policy) = grid_line
        .split_once(" policy=")
        .ok_or_else(|| Error::Parse("malformed grid line".into()))?;
    let grid = parse_grid_spec(spec, policy.parse()?)?;
    let mut members = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|w| {
                w.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad index `{w}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if idx.len() != grid.dim() {
            return Err(Error::Parse(format!(
                "index tuple `{line}` has wrong dimension"
            )));
        }
        for (a, &i) in idx.iter().enumerate() {
            if i >= grid.subdivisions[a] {
                return Err(Error::Parse(format!("index tuple `{line}` out of range")));
            }
        }
        members.push(grid.flatten(&idx));
    }
    BoxSet::from_members(grid, members)
}

#[derive(Serialize)]
struct BoxSetJson {
    grid: String,
    policy: String,
    members: Vec<Vec<usize>>,
}

pub fn boxset_to_json(b: &BoxSet) -> String {
    let grid = b.grid();
    let value = BoxSetJson {
        grid: grid_spec_of(grid),
        policy: grid.escape_policy.to_string(),
        members: b.iter().map(|m| grid.unflatten(m)).collect(),
    };
    let mut s = serde_json::to_string_pretty(&value).expect("static struct serializes");
    s.push('\n');
    s
}

/// Binary PPM (P6) bitmap of a 2-D box set: one pixel per box, members
/// black, background white. Rows run from the top of the y-axis down.
pub fn boxset_to_ppm(b: &BoxSet) -> Result<Vec<u8>> {
    let grid = b.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument(
            "PPM export requires a 2-D grid".into(),
        ));
    }
    let (nx, ny) = (grid.subdivisions[0], grid.subdivisions[1]);
    let mut out = Vec::with_capacity(32 + 3 * nx * ny);
    write!(out, "P6\n{nx} {ny}\n255\n").expect("vec write");
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            let v = if b.contains(grid.flatten(&[i, j])) {
                0u8
            } else {
                255u8
            };
            out.extend_from_slice(&[v, v, v]);
        }
    }
    Ok(out)
}

/// Writes `<name>.txt`, `<name>.json`, and for 2-D grids `<name>.ppm`.
pub fn write_boxset_files(dir: &Path, name: &str, b: &BoxSet) -> Result<()> {
    std::fs::write(dir.join(format!("{name}.txt")), boxset_to_text(b))?;
    std::fs::write(dir.join(format!("{name}.json")), boxset_to_json(b))?;
    if b.grid().dim() == 2 {
        std::fs::write(dir.join(format!("{name}.ppm")), boxset_to_ppm(b)?)?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaRunReport {
    pub system: String,
    pub grid: String,
    pub tau: f64,
    pub seed_boxes: usize,
    pub omega_boxes: usize,
    pub component_sizes: Vec<usize>,
    #[serde(flatten)]
    pub verdict: ConnectednessReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub epsilon: f64,
    pub t_min: f64,
    pub p_boxes: usize,
    pub a_boxes: usize,
    pub attracting: bool,
    pub positively_invariant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainsRunReport {
    pub system: String,
    pub grid: String,
    pub tau: f64,
    pub seed_boxes: usize,
    pub stages: Vec<StageSummary>,
    pub omega_chain_boxes: usize,
    pub ladder_monotone: bool,
    pub escapes: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiAttractingSummary {
    pub stages: Vec<StageSummary>,
    pub p_intersection_boxes: usize,
    pub a_intersection_boxes: usize,
    pub all_stages_attracting: bool,
    pub a_inside_p: bool,
    pub equality_within_ring1: bool,
    pub equality_exact: bool,
    pub omega_inside_a: bool,
    pub escapes: u64,
    pub pass: bool,
}

pub fn stage_summary(
    epsilon: f64,
    t_min: f64,
    p: &BoxSet,
    a: &BoxSet,
    attracting: &AttractingReport,
) -> StageSummary {
    StageSummary {
        epsilon,
        t_min,
        p_boxes: p.len(),
        a_boxes: a.len(),
        attracting: attracting.attracting,
        positively_invariant: attracting.positively_invariant,
    }
}

pub fn quasi_summary(r: &QuasiAttractingReport) -> QuasiAttractingSummary {
    QuasiAttractingSummary {
        stages: r
            .stages
            .iter()
            .map(|s| stage_summary(s.params.epsilon, s.params.t_min, &s.p, &s.a, &s.attracting))
            .collect(),
        p_intersection_boxes: r.p_intersection.len(),
        a_intersection_boxes: r.a_intersection.len(),
        all_stages_attracting: r.all_stages_attracting,
        a_inside_p: r.a_inside_p,
        equality_within_ring1: r.equality_within_ring1,
        equality_exact: r.equality_exact,
        omega_inside_a: r.omega_inside_a,
        escapes: r.escapes,
        pass: r.pass,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdempotencySummary {
    pub orbital_maps: usize,
    pub orbital_failures: usize,
    pub closure_maps: usize,
    pub closure_failures: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremsReport {
    pub config: RunConfig,
    pub idempotency: IdempotencySummary,
    pub connected_omega: OmegaRunReport,
    pub quasi_attracting: QuasiAttractingSummary,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{EscapePolicy, Grid};

    #[test]
    fn text_roundtrip() {
        let g = Grid::new(
            vec![-2.0, -1.0],
            vec![2.0, 3.0],
            vec![8, 4],
            EscapePolicy::Clip,
        )
        .unwrap();
        let b = BoxSet::from_members(g, vec![0, 5, 17, 31]).unwrap();
        let back = boxset_from_text(&boxset_to_text(&b)).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn text_rejects_garbage() {
        assert!(boxset_from_text("nope").is_err());
        assert!(boxset_from_text("flowcover-boxset v1\ngrid: 0,1:4 policy=clip\n9\n").is_err());
        assert!(boxset_from_text("flowcover-boxset v1\ngrid: 0,1:4 policy=clip\n1 2\n").is_err());
    }

    #[test]
    fn ppm_shape_and_pixels() {
        let g = Grid::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![3, 2],
            EscapePolicy::Clip,
        )
        .unwrap();
        // member (0,0): bottom-left pixel black
        let b = BoxSet::from_members(g.clone(), vec![g.flatten(&[0, 0])]).unwrap();
        let ppm = boxset_to_ppm(&b).unwrap();
        let header = b"P6\n3 2\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        let body = &ppm[header.len()..];
        assert_eq!(body.len(), 3 * 3 * 2);
        // top row all white, bottom row black then white
        assert_eq!(&body[..9], &[255u8; 9]);
        assert_eq!(&body[9..12], &[0, 0, 0]);
        assert_eq!(&body[12..18], &[255u8; 6]);
    }

    #[test]
    fn ppm_rejects_non_2d() {
        let g = Grid::new(vec![0.0], vec![1.0], vec![4], EscapePolicy::Clip).unwrap();
        let b = BoxSet::from_members(g, vec![1]).unwrap();
        assert!(boxset_to_ppm(&b).is_err());
    }

    #[test]
    fn json_is_deterministic() {
        let g = Grid::new(
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![4, 4],
            EscapePolicy::Clip,
        )
        .unwrap();
        let b = BoxSet::from_members(g, vec![3, 7, 11]).unwrap();
        assert_eq!(boxset_to_json(&b), boxset_to_json(&b));
    }
}
