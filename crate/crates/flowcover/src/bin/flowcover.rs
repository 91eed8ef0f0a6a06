//! Command-line front door: dispatches the analyses, writes reports and
//! bitmaps, and runs the theorem-verification suite.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flowcover::chains::{p_set, verify_quasi_attracting, a_set, ChainGraph};
use flowcover::config::{grid_spec_of, RunConfig};
use flowcover::error::Error;
use flowcover::flow::builtin_manifest;
use flowcover::limits::check_connected_omega;
use flowcover::report::{
    quasi_summary, stage_summary, write_boxset_files, write_json, ChainsRunReport,
    IdempotencySummary, OmegaRunReport, TheoremsReport,
};
use flowcover::setmap::{random_cubical_space, random_map};
use flowcover::space::FiniteSpace;

#[derive(Parser)]
#[command(name = "flowcover", version, about = "Combinatorial limit-set analysis of flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eventual set of the seed region, with the connectedness verdict.
    Omega(RunArgs),
    /// Per-stage chain-reachable and attracting sets over the schedule.
    Chains(RunArgs),
    /// Quasi-attracting verification of the chain limit of the seed set.
    Verify(RunArgs),
    /// Full suite: operator idempotency, connected eventual set, and the
    /// quasi-attracting chain limit.
    VerifyTheorems(RunArgs),
    /// Print the built-in system manifest.
    Systems,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (key=value text or JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    /// Grid spec: x0,x1,y0,y1:nx,ny
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    /// First-stage jump bound (defaults to 8 cell widths).
    #[arg(long)]
    eps0: Option<f64>,
    /// First-stage minimum hop time (defaults to tau).
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    stages: Option<usize>,
    /// Seed set: box:c1,..,cd,r or point:c1,..,cd or a box-set file.
    #[arg(long = "seed-set", allow_hyphen_values = true)]
    seed_set: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "escape-policy")]
    escape_policy: Option<String>,
    /// Sample points per axis when imaging a box.
    #[arg(long)]
    samples: Option<usize>,
    /// Image pad override in coordinate units.
    #[arg(long)]
    pad: Option<f64>,
    /// Random map count for the idempotency suite.
    #[arg(long)]
    maps: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.system {
            cfg.system = v.clone();
        }
        if let Some(v) = &self.grid {
            cfg.grid = v.clone();
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.eps0 {
            cfg.eps0 = Some(v);
        }
        if let Some(v) = self.t0 {
            cfg.t0 = Some(v);
        }
        if let Some(v) = self.stages {
            cfg.stages = v;
        }
        if let Some(v) = &self.seed_set {
            cfg.seed_set = v.clone();
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.escape_policy {
            cfg.escape_policy = v.parse()?;
        }
        if let Some(v) = self.samples {
            cfg.samples_per_axis = v;
        }
        if let Some(v) = self.pad {
            cfg.pad = Some(v);
        }
        if let Some(v) = self.maps {
            cfg.idempotency_maps = v;
        }
        if let Ok(dir) = std::env::var("FLOWCOVER_OUT") {
            cfg.out_dir = PathBuf::from(dir);
        }
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.out_dir)?;
        Ok(cfg)
    }
}

fn run_omega(cfg: &RunConfig) -> Result<bool, Error> {
    let f = cfg.make_box_map()?;
    let seed = cfg.make_seed_set(f.grid())?;
    let (verdict, result) = check_connected_omega(&f, &seed)?;
    let report = OmegaRunReport {
        system: cfg.system.clone(),
        grid: grid_spec_of(f.grid()),
        tau: cfg.tau,
        seed_boxes: seed.len(),
        omega_boxes: result.omega.len(),
        component_sizes: result.components.iter().map(|c| c.len()).collect(),
        verdict: verdict.clone(),
    };
    write_json(&cfg.out_dir.join("report.json"), &report)?;
    write_boxset_files(&cfg.out_dir, "seed", &seed)?;
    write_boxset_files(&cfg.out_dir, "omega", &result.omega)?;
    std::fs::write(&cfg.out_dir.join("config.txt"), cfg.to_text())?;
    println!(
        "omega: {} boxes, {} component(s), connected={}, {}",
        result.omega.len(),
        verdict.component_count,
        verdict.connected,
        if verdict.pass { "PASS" } else { "FAIL" }
    );
    Ok(verdict.pass)
}

fn run_chains(cfg: &RunConfig) -> Result<bool, Error> {
    let f = cfg.make_box_map()?;
    let seed = cfg.make_seed_set(f.grid())?;
    let schedule = cfg.make_schedule(f.grid())?;
    let before = f.escapes();
    let mut stage_p = Vec::new();
    let mut stage_a = Vec::new();
    let mut summaries = Vec::new();
    for (k, &params) in schedule.stages().iter().enumerate() {
        let g = ChainGraph::new(&f, params)?;
        let p = p_set(&g, &seed)?;
        let a = a_set(&g, &p)?;
        let attracting = flowcover::chains::verify_attracting(&f, &a)?;
        write_boxset_files(&cfg.out_dir, &format!("P{k}"), &p)?;
        write_boxset_files(&cfg.out_dir, &format!("A{k}"), &a)?;
        summaries.push(stage_summary(params.epsilon, params.t_min, &p, &a, &attracting));
        stage_p.push(p);
        stage_a.push(a);
    }
    let ladder_monotone = stage_p.windows(2).all(|w| w[1].is_subset(&w[0]))
        && stage_a.windows(2).all(|w| w[1].is_subset(&w[0]));
    let mut omega = stage_p[0].clone();
    for p in &stage_p[1..] {
        omega = omega.intersect(p)?;
    }
    write_boxset_files(&cfg.out_dir, "omega_chain", &omega)?;
    let pass = ladder_monotone
        && stage_a.iter().zip(&stage_p).all(|(a, p)| a.is_subset(p));
    let report = ChainsRunReport {
        system: cfg.system.clone(),
        grid: grid_spec_of(f.grid()),
        tau: cfg.tau,
        seed_boxes: seed.len(),
        stages: summaries,
        omega_chain_boxes: omega.len(),
        ladder_monotone,
        escapes: f.escapes() - before,
        pass,
    };
    write_json(&cfg.out_dir.join("report.json"), &report)?;
    std::fs::write(&cfg.out_dir.join("config.txt"), cfg.to_text())?;
    println!(
        "chains: {} stages, chain limit {} boxes, ladder monotone={}, {}",
        report.stages.len(),
        omega.len(),
        ladder_monotone,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(pass)
}

fn run_verify(cfg: &RunConfig) -> Result<bool, Error> {
    let f = cfg.make_box_map()?;
    let seed = cfg.make_seed_set(f.grid())?;
    let schedule = cfg.make_schedule(f.grid())?;
    let report = verify_quasi_attracting(&f, &seed, &schedule)?;
    for (k, s) in report.stages.iter().enumerate() {
        write_boxset_files(&cfg.out_dir, &format!("P{k}"), &s.p)?;
        write_boxset_files(&cfg.out_dir, &format!("A{k}"), &s.a)?;
    }
    write_boxset_files(&cfg.out_dir, "p_intersection", &report.p_intersection)?;
    write_boxset_files(&cfg.out_dir, "a_intersection", &report.a_intersection)?;
    let summary = quasi_summary(&report);
    write_json(&cfg.out_dir.join("report.json"), &summary)?;
    std::fs::write(&cfg.out_dir.join("config.txt"), cfg.to_text())?;
    println!(
        "verify: attracting stages={}, chain limit inside A-intersection={}, {}",
        summary.all_stages_attracting,
        summary.omega_inside_a,
        if summary.pass { "PASS" } else { "FAIL" }
    );
    Ok(summary.pass)
}

fn idempotency_suite(seed: u64, maps: usize) -> IdempotencySummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let densities = [0.02, 0.1, 0.5];
    let mut orbital_failures = 0usize;
    for i in 0..maps {
        let space = FiniteSpace::discrete(rng.gen_range(2..=100));
        let gamma = random_map(&space, densities[i % densities.len()], &mut rng);
        let s = gamma.orbital();
        if s.orbital() != s {
            orbital_failures += 1;
        }
    }
    let mut closure_failures = 0usize;
    for i in 0..maps {
        let space = random_cubical_space(&mut rng);
        let gamma = random_map(&space, densities[i % densities.len()], &mut rng);
        let d = gamma.closure_map();
        if d.closure_map() != d {
            closure_failures += 1;
        }
    }
    IdempotencySummary {
        orbital_maps: maps,
        orbital_failures,
        closure_maps: maps,
        closure_failures,
        pass: orbital_failures == 0 && closure_failures == 0,
    }
}

fn run_verify_theorems(cfg: &RunConfig) -> Result<bool, Error> {
    let t = Instant::now();
    let idempotency = idempotency_suite(cfg.seed, cfg.idempotency_maps);
    eprintln!("idempotency suite: {:.2?}", t.elapsed());

    let f = cfg.make_box_map()?;
    let seed = cfg.make_seed_set(f.grid())?;

    let t = Instant::now();
    let (verdict, result) = check_connected_omega(&f, &seed)?;
    eprintln!("connected eventual set: {:.2?}", t.elapsed());
    let connected_omega = OmegaRunReport {
        system: cfg.system.clone(),
        grid: grid_spec_of(f.grid()),
        tau: cfg.tau,
        seed_boxes: seed.len(),
        omega_boxes: result.omega.len(),
        component_sizes: result.components.iter().map(|c| c.len()).collect(),
        verdict,
    };

    let t = Instant::now();
    let schedule = cfg.make_schedule(f.grid())?;
    let quasi = verify_quasi_attracting(&f, &seed, &schedule)?;
    eprintln!("quasi-attracting verification: {:.2?}", t.elapsed());
    let quasi_attracting = quasi_summary(&quasi);

    let pass = idempotency.pass && connected_omega.verdict.pass && quasi_attracting.pass;
    let report = TheoremsReport {
        config: cfg.clone(),
        idempotency: idempotency.clone(),
        connected_omega: connected_omega.clone(),
        quasi_attracting: quasi_attracting.clone(),
        pass,
    };
    write_json(&cfg.out_dir.join("report.json"), &report)?;
    write_boxset_files(&cfg.out_dir, "omega", &result.omega)?;
    write_boxset_files(&cfg.out_dir, "p_intersection", &quasi.p_intersection)?;
    write_boxset_files(&cfg.out_dir, "a_intersection", &quasi.a_intersection)?;
    std::fs::write(&cfg.out_dir.join("config.txt"), cfg.to_text())?;

    let line = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!("operator idempotency: {}", line(idempotency.pass));
    println!("connected eventual set: {}", line(connected_omega.verdict.pass));
    println!("quasi-attracting chain limit: {}", line(quasi_attracting.pass));
    Ok(pass)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonFiniteState { .. }
        | Error::Escaped { .. }
        | Error::EscapeDominated => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Systems => {
            print!("{}", builtin_manifest());
            return ExitCode::SUCCESS;
        }
        Command::Omega(args) => args.resolve().and_then(|cfg| run_omega(&cfg)),
        Command::Chains(args) => args.resolve().and_then(|cfg| run_chains(&cfg)),
        Command::Verify(args) => args.resolve().and_then(|cfg| run_verify(&cfg)),
        Command::VerifyTheorems(args) => args.resolve().and_then(|cfg| run_verify_theorems(&cfg)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
