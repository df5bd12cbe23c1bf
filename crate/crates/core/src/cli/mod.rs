//! Command-line front end. Every subcommand resolves the configuration,
//! runs one library operation, and writes CSV files whose `#` header records
//! the full resolved configuration and seed.

pub mod config;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use crate::array_model::{directivity, half_power_beamwidth, sector_width, ArrayConfig, BeamGrid};
use crate::beam_optimizer::{
    interior_theta_grid, search_beam_count, sweep_directivity_vs_sigma, sweep_directivity_vs_theta,
    sweep_spacing_vs_theta, tradeoff_curve, OptimizerResult, SearchProblem,
};
use crate::codebook::{build_phase_mapper, measure_pattern, write_mapper_csv};
use crate::report::{format_sig, CsvTable};
use crate::traversal::{events_table, simulate_traversal, summarize, TraversalConfig};

pub use config::{resolve, ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "railbeam", version, about = "Location-aware ULA beamforming for a high-speed-train link")]
pub struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override a configuration field, e.g. `--set geometry.h_m=60`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Directivity against half-power beamwidth.
    Tradeoff,
    /// Optimal beam count at one base-station angle.
    Optimize,
    /// Optimal beam count and directivity across the sector.
    SweepTheta,
    /// Spacing that holds a target directivity across the sector.
    SweepSpacing,
    /// Optimal directivity against positioning error for several thresholds.
    SweepSigma,
    /// Phase mapper plus a measured pattern summary per beam.
    Codebook,
    /// Rail traversal with location-driven beam selection.
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Tradeoff => "tradeoff",
            Command::Optimize => "optimize",
            Command::SweepTheta => "sweep-theta",
            Command::SweepSpacing => "sweep-spacing",
            Command::SweepSigma => "sweep-sigma",
            Command::Codebook => "codebook",
            Command::Simulate => "simulate",
        }
    }
}

struct Job<'a> {
    run: &'a RunConfig,
    command: Command,
    out_dir: PathBuf,
    digits: usize,
}

impl Job<'_> {
    fn metadata(&self) -> Vec<String> {
        vec![
            format!("railbeam {} {}", env!("CARGO_PKG_VERSION"), self.command.name()),
            format!("config={}", serde_json::to_string(self.run).expect("config serializes")),
            format!("seed={}", self.run.traversal.seed),
        ]
    }

    fn num(&self, x: f64) -> String {
        format_sig(x, self.digits)
    }

    fn opt(&self, x: Option<f64>) -> String {
        x.map(|v| self.num(v)).unwrap_or_default()
    }

    fn write_table(&self, name: &str, mut table: CsvTable) -> Result<PathBuf> {
        let mut meta = self.metadata();
        meta.append(&mut table.metadata);
        table.metadata = meta;
        self.write_atomic(name, |w| table.write(w))
    }

    fn write_atomic(&self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.out_dir)
            .with_context(|| format!("creating temporary file in {}", self.out_dir.display()))?;
        {
            let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
            body(&mut buf).with_context(|| format!("writing {name}"))?;
            buf.flush()?;
        }
        tmp.persist(&path).with_context(|| format!("moving output into {}", path.display()))?;
        Ok(path)
    }
}

/// Run a parsed command line; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut overrides = cli.overrides.clone();
    if let Some(out) = &cli.out {
        overrides.push(format!("output.directory={}", serde_json::to_string(&out.to_string_lossy())?));
    }
    let run = resolve(cli.config.as_deref(), &overrides)?;
    execute(cli.command, &run)
}

/// Run one subcommand against an already resolved configuration.
pub fn execute(command: Command, run: &RunConfig) -> Result<Vec<PathBuf>> {
    let out_dir = PathBuf::from(&run.output.directory);
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let ctx = Job {
        run,
        command,
        out_dir,
        digits: run.output.precision,
    };
    match command {
        Command::Tradeoff => tradeoff(&ctx),
        Command::Optimize => optimize(&ctx),
        Command::SweepTheta => sweep_theta(&ctx),
        Command::SweepSpacing => sweep_spacing(&ctx),
        Command::SweepSigma => sweep_sigma(&ctx),
        Command::Codebook => codebook(&ctx),
        Command::Simulate => simulate(&ctx),
    }
}

/// The library call behind `optimize`.
pub fn optimize_result(run: &RunConfig) -> Result<OptimizerResult> {
    let cfg = run.array_config()?;
    let res = search_beam_count(
        &cfg,
        &run.geometry()?,
        run.optimizer.theta_b_rad,
        &run.error_model()?,
        run.optimizer.p_th,
        run.optimizer.n_max,
    )
    .context("optimizer.theta_b_rad")?;
    Ok(res)
}

fn tradeoff(ctx: &Job<'_>) -> Result<Vec<PathBuf>> {
    let cfg = ctx.run.array_config()?;
    let n = ctx.run.sweep.theta_h_points;
    let grid: Vec<f64> = (1..=n).map(|k| k as f64 * PI / (n + 1) as f64).collect();
    let alpha = sector_width(&cfg);
    let mut table = CsvTable::new(["theta_h_rad", "directivity", "product", "equivalent_beam_count"]);
    for p in tradeoff_curve(&cfg, &grid)? {
        table.push(vec![ctx.num(p.theta_h), ctx.num(p.directivity), ctx.num(p.product), ctx.num(alpha / p.theta_h)]);
    }
    Ok(vec![ctx.write_table("tradeoff.csv", table)?])
}

fn optimize(ctx: &Job<'_>) -> Result<Vec<PathBuf>> {
    let r = optimize_result(ctx.run)?;
    let n = r.optimal_beam_count.map(|n| n.to_string()).unwrap_or_default();
    let lines = [
        ("feasible", r.feasible.to_string()),
        ("beam_count", n.clone()),
        ("directivity", ctx.opt(r.directivity)),
        ("half_power_beamwidth_rad", ctx.opt(r.half_power_beamwidth)),
        ("probability", ctx.num(r.achieved_probability)),
        ("p_th", ctx.num(r.constraint_threshold)),
    ];
    for (k, v) in &lines {
        println!("{k}={v}");
    }
    let mut table = CsvTable::new([
        "theta_b_rad",
        "sigma_m",
        "p_th",
        "n_max",
        "feasible",
        "beam_count",
        "directivity",
        "half_power_beamwidth_rad",
        "probability",
    ]);
    table.push(vec![
        ctx.num(ctx.run.optimizer.theta_b_rad),
        ctx.num(ctx.run.error.sigma_m),
        ctx.num(r.constraint_threshold),
        ctx.run.optimizer.n_max.to_string(),
        r.feasible.to_string(),
        n,
        ctx.opt(r.directivity),
        ctx.opt(r.half_power_beamwidth),
        ctx.num(r.achieved_probability),
    ]);
    Ok(vec![ctx.write_table("optimize.csv", table)?])
}

fn problem_parts(run: &RunConfig) -> Result<(ArrayConfig, crate::DeploymentGeometry, crate::PositioningErrorModel)> {
    Ok((run.array_config()?, run.geometry()?, run.error_model()?))
}

fn sweep_theta(ctx: &Job<'_>) -> Result<Vec<PathBuf>> {
    let (cfg, geom, err) = problem_parts(ctx.run)?;
    let problem = SearchProblem { cfg: &cfg, geom: &geom, err: &err, max_beams: ctx.run.optimizer.n_max };
    let thetas = interior_theta_grid(&cfg, ctx.run.sweep.theta_points);
    let rows = sweep_directivity_vs_theta(&problem, ctx.run.optimizer.p_th, &thetas);
    let mut table = CsvTable::new(["theta_b_rad", "theta_b_deg", "status", "beam_count", "directivity", "probability"]);
    for r in rows {
        table.push(vec![
            ctx.num(r.theta_b),
            ctx.num(r.theta_b.to_degrees()),
            r.status.label().into(),
            r.beam_count.map(|n| n.to_string()).unwrap_or_default(),
            ctx.opt(r.directivity),
            ctx.opt(r.probability),
        ]);
    }
    Ok(vec![ctx.write_table("sweep_theta.csv", table)?])
}

fn sweep_spacing(ctx: &Job<'_>) -> Result<Vec<PathBuf>> {
    let (cfg, geom, err) = problem_parts(ctx.run)?;
    let problem = SearchProblem { cfg: &cfg, geom: &geom, err: &err, max_beams: ctx.run.optimizer.n_max };
    let thetas = interior_theta_grid(&cfg, ctx.run.sweep.theta_points);
    let rows = sweep_spacing_vs_theta(&problem, ctx.run.optimizer.p_th, ctx.run.sweep.target_directivity, &thetas)?;
    let lambda = cfg.wavelength();
    let mut table = CsvTable::new(["theta_b_rad", "theta_b_deg", "status", "beam_count", "spacing_m", "spacing_over_lambda"]);
    for r in rows {
        table.push(vec![
            ctx.num(r.theta_b),
            ctx.num(r.theta_b.to_degrees()),
            r.status.label().into(),
            r.beam_count.map(|n| n.to_string()).unwrap_or_default(),
            ctx.opt(r.spacing),
            ctx.opt(r.spacing.map(|d| d / lambda)),
        ]);
    }
    Ok(vec![ctx.write_table("sweep_spacing.csv", table)?])
}

/// `points` values spaced linearly over `[min, max]`.
fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    (0..points).map(|k| min + (max - min) * k as f64 / (points - 1) as f64).collect()
}

fn sweep_sigma(ctx: &Job<'_>) -> Result<Vec<PathBuf>> {
    let (cfg, geom, err) = problem_parts(ctx.run)?;
    let problem = SearchProblem { cfg: &cfg, geom: &geom, err: &err, max_beams: ctx.run.optimizer.n_max };
    let s = &ctx.run.sweep;
    let sigmas = linear_grid(s.sigma_min_m, s.sigma_max_m, s.sigma_points);
    let rows = sweep_directivity_vs_sigma(&problem, ctx.run.optimizer.theta_b_rad, &s.p_th_list, &sigmas);
    let mut table = CsvTable::new(["p_th", "sigma_m", "status", "beam_count", "directivity", "probability"]);
    for r in rows {
        table.push(vec![
            ctx.num(r.p_th),
            ctx.num(r.sigma),
            r.status.label().into(),
            r.beam_count.map(|n| n.to_string()).unwrap_or_default(),
            ctx.opt(r.directivity),
            ctx.opt(r.probability),
        ]);
    }
    Ok(vec![ctx.write_table("sweep_sigma.csv", table)?])
}

fn codebook(ctx: &Job<'_>) -> Result<Vec<PathBuf>> {
    let cfg = ctx.run.array_config()?;
    let n = ctx.run.codebook.beam_count;
    let grid = BeamGrid::new(&cfg, n)?;
    let mapper = build_phase_mapper(&cfg, &grid);
    let resolution = ctx
        .run
        .codebook
        .angular_resolution_rad
        .unwrap_or(grid.half_power_beamwidth() / 20.0);

    let meta = ctx.metadata();
    let mapper_path = ctx.write_atomic("codebook_mapper.csv", |w| {
        for line in &meta {
            writeln!(w, "# {line}")?;
        }
        write_mapper_csv(&mapper, w)
    })?;

    let closed_hpbw = half_power_beamwidth(&cfg, n)?;
    let closed_d = directivity(&cfg, n)?;
    let mut table = CsvTable::new([
        "beam_index",
        "center_angle_rad",
        "peak_angle_rad",
        "measured_hpbw_rad",
        "closed_form_hpbw_rad",
        "measured_directivity",
        "closed_form_directivity",
    ]);
    table.metadata.push(format!("angular_resolution_rad={}", ctx.num(resolution)));
    for (i, center) in mapper.beam_center_angles().iter().enumerate() {
        let p = measure_pattern(mapper.column(i), &cfg, resolution).with_context(|| format!("beam {i}"))?;
        table.push(vec![
            i.to_string(),
            ctx.num(*center),
            ctx.num(p.peak_angle),
            ctx.num(p.measured_hpbw),
            ctx.num(closed_hpbw),
            ctx.num(p.measured_directivity),
            ctx.num(closed_d),
        ]);
    }
    let pattern_path = ctx.write_table("codebook_patterns.csv", table)?;
    Ok(vec![mapper_path, pattern_path])
}

fn simulate(ctx: &Job<'_>) -> Result<Vec<PathBuf>> {
    let (cfg, geom, err) = problem_parts(ctx.run)?;
    let t = &ctx.run.traversal;
    let n = match t.beam_count {
        Some(n) => n,
        None => optimize_result(ctx.run)?
            .optimal_beam_count
            .ok_or_else(|| anyhow!("optimizer is infeasible at optimizer.theta_b_rad; set traversal.beam_count"))?,
    };
    let grid = BeamGrid::new(&cfg, n)?;
    let mapper = build_phase_mapper(&cfg, &grid);
    let tc = match (t.start_m, t.end_m) {
        (Some(a), Some(b)) => TraversalConfig::new(t.speed_mps, t.time_step_s, a, b, err, t.seed)?,
        _ => TraversalConfig::sector_pass(&grid, &geom, t.speed_mps, t.time_step_s, err, t.seed)?,
    };
    let events = simulate_traversal(&tc, &grid, &mapper, &geom);
    let summary = summarize(&events)?;

    let mut log = events_table(&events, ctx.digits);
    log.metadata.push(format!("beam_count={n}"));
    let events_path = ctx.write_table("simulate_events.csv", log)?;

    let mut table = CsvTable::new(["metric", "value"]);
    table.push(vec!["beam_count".into(), n.to_string()]);
    table.push(vec!["effectiveness_rate".into(), ctx.num(summary.effectiveness_rate)]);
    table.push(vec!["switch_count".into(), summary.switch_count.to_string()]);
    table.push(vec!["total_time_s".into(), ctx.num(summary.total_time)]);
    for (i, d) in summary.per_beam_dwell.iter().enumerate() {
        table.push(vec![format!("dwell_s_beam_{i}"), ctx.num(*d)]);
    }
    println!("beam_count={n}");
    println!("effectiveness_rate={}", ctx.num(summary.effectiveness_rate));
    println!("switch_count={}", summary.switch_count);
    let summary_path = ctx.write_table("simulate_summary.csv", table)?;
    Ok(vec![events_path, summary_path])
}
