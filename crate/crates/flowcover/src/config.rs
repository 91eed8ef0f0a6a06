//! Run configuration: flat key=value text (or JSON), grid and seed-set
//! specs, and resolution into the concrete objects a run needs.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boxmap::BoxMap;
use crate::chains::Schedule;
use crate::error::{Error, Result};
use crate::flow::{builtin_system, FlowSpec, Point};
use crate::grid::{cover_points, cover_rect, BoxSet, EscapePolicy, Grid};

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub system: String,
    /// Grid spec: `x0,x1,y0,y1:nx,ny` (interval pairs per axis, then
    /// subdivisions per axis).
    pub grid: String,
    pub tau: f64,
    /// First-stage jump bound; defaults to 8 cell widths.
    pub eps0: Option<f64>,
    /// First-stage minimum hop time; defaults to `tau`.
    pub t0: Option<f64>,
    pub stages: usize,
    /// Seed set: `box:c1,..,cd,r`, `point:c1,..,cd`, or a box-set file path.
    pub seed_set: String,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub escape_policy: EscapePolicy,
    pub samples_per_axis: usize,
    /// Image pad override in coordinate units; defaults per the box map.
    pub pad: Option<f64>,
    /// Random map count for the idempotency suite.
    pub idempotency_maps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: "linear_sink_2d".into(),
            grid: "-2,2,-2,2:64,64".into(),
            tau: 0.5,
            eps0: None,
            t0: None,
            stages: 5,
            seed_set: "box:0.9,0.9,0.1".into(),
            out_dir: PathBuf::from("out"),
            seed: 7,
            escape_policy: EscapePolicy::Clip,
            samples_per_axis: 3,
            pad: None,
            idempotency_maps: 200,
        }
    }
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}`")))
        })
        .collect()
}

/// Parses `x0,x1,y0,y1:nx,ny` into a grid.
pub fn parse_grid_spec(spec: &str, policy: EscapePolicy) -> Result<Arc<Grid>> {
    let (coords, subdiv) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("grid spec `{spec}` missing `:`")))?;
    let coords = parse_reals(coords)?;
    if coords.len() < 2 || coords.len() % 2 != 0 {
        return Err(Error::Parse(
            "grid spec needs an even number of interval endpoints".into(),
        ));
    }
    let d = coords.len() / 2;
    let lower: Vec<f64> = (0..d).map(|a| coords[2 * a]).collect();
    let upper: Vec<f64> = (0..d).map(|a| coords[2 * a + 1]).collect();
    let subdivisions: Vec<usize> = subdiv
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad subdivision `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if subdivisions.len() != d {
        return Err(Error::Parse(format!(
            "grid spec has {d} axes but {} subdivision counts",
            subdivisions.len()
        )));
    }
    Grid::new(lower, upper, subdivisions, policy)
}

/// Renders a grid back into the `x0,x1,..:nx,..` spec form.
pub fn grid_spec_of(grid: &Grid) -> String {
    let coords: Vec<String> = (0..grid.dim())
        .flat_map(|a| [grid.lower[a].to_string(), grid.upper[a].to_string()])
        .collect();
    let subdiv: Vec<String> = grid.subdivisions.iter().map(|n| n.to_string()).collect();
    format!("{}:{}", coords.join(","), subdiv.join(","))
}

/// Resolves a seed-set spec against a grid.
///
/// `box:c1,..,cd,r` covers the closed sup-norm ball of radius `r` around
/// the center; `point:c1,..,cd` covers one point; anything else is read as
/// a box-set file.
pub fn parse_seed_set(spec: &str, grid: &Arc<Grid>) -> Result<BoxSet> {
    if let Some(rest) = spec.strip_prefix("box:") {
        let vals = parse_reals(rest)?;
        if vals.len() != grid.dim() + 1 {
            return Err(Error::Parse(format!(
                "box seed needs {} coordinates plus a radius",
                grid.dim()
            )));
        }
        let r = vals[grid.dim()];
        if r < 0.0 {
            return Err(Error::Parse("seed radius must be nonnegative".into()));
        }
        let lo: Vec<f64> = (0..grid.dim()).map(|a| vals[a] - r).collect();
        let hi: Vec<f64> = (0..grid.dim()).map(|a| vals[a] + r).collect();
        let set = cover_rect(grid, &lo, &hi)?;
        if set.is_empty() {
            return Err(Error::Parse("seed box misses the domain".into()));
        }
        Ok(set)
    } else if let Some(rest) = spec.strip_prefix("point:") {
        let vals = parse_reals(rest)?;
        cover_points(grid, &[Point(vals)])
    } else {
        let text = std::fs::read_to_string(spec)?;
        crate::report::boxset_from_text(&text)
    }
}

impl RunConfig {
    /// Parses either JSON (leading `{`) or flat key=value text.
    pub fn parse(text: &str) -> Result<RunConfig> {
        if text.trim_start().starts_with('{') {
            return Ok(serde_json::from_str(text)?);
        }
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: bad {what}", lineno + 1));
            match key {
                "system" => cfg.system = value.to_string(),
                "grid" => cfg.grid = value.to_string(),
                "tau" => cfg.tau = value.parse().map_err(|_| bad("tau"))?,
                "eps0" => cfg.eps0 = Some(value.parse().map_err(|_| bad("eps0"))?),
                "t0" => cfg.t0 = Some(value.parse().map_err(|_| bad("t0"))?),
                "stages" => cfg.stages = value.parse().map_err(|_| bad("stages"))?,
                "seed_set" => cfg.seed_set = value.to_string(),
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "escape_policy" => cfg.escape_policy = value.parse()?,
                "samples_per_axis" => {
                    cfg.samples_per_axis = value.parse().map_err(|_| bad("samples_per_axis"))?
                }
                "pad" => cfg.pad = Some(value.parse().map_err(|_| bad("pad"))?),
                "idempotency_maps" => {
                    cfg.idempotency_maps = value.parse().map_err(|_| bad("idempotency_maps"))?
                }
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    /// Flat key=value rendering; `parse` inverts it.
    pub fn to_text(&self) -> String {
        let mut out = String::from("[run]\n");
        out.push_str(&format!("system = {}\n", self.system));
        out.push_str(&format!("grid = {}\n", self.grid));
        out.push_str(&format!("tau = {}\n", self.tau));
        if let Some(e) = self.eps0 {
            out.push_str(&format!("eps0 = {e}\n"));
        }
        if let Some(t) = self.t0 {
            out.push_str(&format!("t0 = {t}\n"));
        }
        out.push_str(&format!("stages = {}\n", self.stages));
        out.push_str(&format!("seed_set = {}\n", self.seed_set));
        out.push_str(&format!("out_dir = {}\n", self.out_dir.display()));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("escape_policy = {}\n", self.escape_policy));
        out.push_str(&format!("samples_per_axis = {}\n", self.samples_per_axis));
        if let Some(p) = self.pad {
            out.push_str(&format!("pad = {p}\n"));
        }
        out.push_str(&format!("idempotency_maps = {}\n", self.idempotency_maps));
        out
    }

    pub fn validate(&self) -> Result<()> {
        builtin_system(&self.system)?;
        if !(self.tau > 0.0) {
            return Err(Error::Config("tau must be positive".into()));
        }
        if self.stages < 2 {
            return Err(Error::Config("stages must be at least 2".into()));
        }
        if self.samples_per_axis < 2 {
            return Err(Error::Config("samples_per_axis must be at least 2".into()));
        }
        parse_grid_spec(&self.grid, self.escape_policy)?;
        Ok(())
    }

    pub fn flow(&self) -> Result<FlowSpec> {
        builtin_system(&self.system)
    }

    pub fn make_grid(&self) -> Result<Arc<Grid>> {
        parse_grid_spec(&self.grid, self.escape_policy)
    }

    pub fn make_seed_set(&self, grid: &Arc<Grid>) -> Result<BoxSet> {
        parse_seed_set(&self.seed_set, grid)
    }

    pub fn make_schedule(&self, grid: &Grid) -> Result<Schedule> {
        let eps0 = self.eps0.unwrap_or(8.0 * grid.max_width());
        let t0 = self.t0.unwrap_or(self.tau);
        Schedule::geometric(eps0, t0, self.stages)
    }

    pub fn make_box_map(&self) -> Result<BoxMap> {
        let flow = self.flow()?;
        let grid = self.make_grid()?;
        BoxMap::from_flow(flow, grid, self.tau, self.samples_per_axis, self.pad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_roundtrip() {
        let g = parse_grid_spec("-2,2,-1,3:64,32", EscapePolicy::Clip).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.lower, vec![-2.0, -1.0]);
        assert_eq!(g.upper, vec![2.0, 3.0]);
        assert_eq!(g.subdivisions, vec![64, 32]);
        assert_eq!(grid_spec_of(&g), "-2,2,-1,3:64,32");
    }

    #[test]
    fn grid_spec_errors() {
        assert!(parse_grid_spec("1,2", EscapePolicy::Clip).is_err());
        assert!(parse_grid_spec("1,2,3:4,4", EscapePolicy::Clip).is_err());
        assert!(parse_grid_spec("2,1:4", EscapePolicy::Clip).is_err());
        assert!(parse_grid_spec("0,1:x", EscapePolicy::Clip).is_err());
    }

    #[test]
    fn seed_box_spec_covers_interval() {
        let g = parse_grid_spec("0,1:10", EscapePolicy::Clip).unwrap();
        let s = parse_seed_set("box:0.45,0.1", &g).unwrap();
        // [0.35, 0.55] meets cells 3 (shared face at 0.35), 4, and 5
        assert_eq!(s.members(), &[3, 4, 5]);
        let p = parse_seed_set("point:0.05", &g).unwrap();
        assert_eq!(p.members(), &[0]);
    }

    #[test]
    fn config_text_roundtrip() {
        let mut cfg = RunConfig::default();
        cfg.eps0 = Some(0.25);
        cfg.pad = Some(0.03125);
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = RunConfig::default();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back = RunConfig::parse(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.system = "foo".into();
        assert!(matches!(cfg.validate(), Err(Error::UnknownSystem { .. })));
        cfg = RunConfig::default();
        cfg.stages = 1;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(
            RunConfig::parse("bogus = 1\n"),
            Err(Error::Config(_))
        ));
    }
}
