//! Command-line driver: named presets or TOML configurations, flag
//! overrides, artifact writing. Fields and residuals go to text grids,
//! run descriptions to `meta.json`, per-mode costs to `modes.csv`; wall-clock
//! timings are quarantined in `timings.json` so everything else is
//! bit-identical across reruns of the same configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use radscat::config::{preset, Mode, RunConfig, PRESET_NAMES};
use radscat::selftest;
use radscat::solver::{residual_map, solve_scattering, write_scalar_grid, FieldKind, Grid};
use radscat::timedomain::build_sweep;

#[derive(Parser)]
#[command(
    name = "radscat",
    version,
    about = "Acoustic scattering from radially symmetric media in 2D"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-harmonic solve: writes total/scattered field grids.
    Solve(RunArgs),
    /// Frequency sweep and time synthesis: writes one grid per frame time.
    Timedomain(TimedomainArgs),
    /// Time-harmonic solve plus a Helmholtz-residual map of the total field.
    Residual(RunArgs),
    /// Invariant checks of the numerical core; prints one verdict per check.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration (schema in the README).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment configuration.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Solver tolerance override.
    #[arg(long, value_name = "X")]
    eps: Option<f64>,
    /// Wavenumber override.
    #[arg(long, value_name = "X")]
    k: Option<f64>,
    /// Evaluation grid override.
    #[arg(long, value_names = ["NX", "NY", "EXTENT"], num_args = 3)]
    grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct TimedomainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Frame times override, comma separated.
    #[arg(long, value_name = "T1,T2,...", value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Selftest => run_selftest(),
        Command::Solve(args) => {
            let cfg = load_config(&args, Mode::Solve, None)?;
            in_pool(&cfg, || run_solve(&cfg, &args.out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Residual(args) => {
            let cfg = load_config(&args, Mode::Residual, None)?;
            in_pool(&cfg, || run_residual(&cfg, &args.out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Timedomain(args) => {
            let cfg = load_config(&args.run, Mode::Timedomain, args.times)?;
            in_pool(&cfg, || run_timedomain(&cfg, &args.run.out))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Resolve preset/config file, apply flag overrides, validate against the
/// invoked subcommand.
fn load_config(args: &RunArgs, mode: Mode, times: Option<Vec<f64>>) -> anyhow::Result<RunConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => RunConfig::from_file(path)
            .with_context(|| format!("reading {}", path.display()))?,
        (None, Some(name)) => preset(name)?,
        (None, None) => bail!(
            "no run description: pass --config PATH or --preset NAME (presets: {})",
            PRESET_NAMES.join(", ")
        ),
        (Some(_), Some(_)) => unreachable!("clap rejects --config with --preset"),
    };
    if cfg.mode != mode {
        bail!(
            "configuration declares mode `{}` but the `{mode}` subcommand was invoked",
            cfg.mode
        );
    }
    if let Some(eps) = args.eps {
        cfg.eps = eps;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(g) = &args.grid {
        let [nx, ny, extent] = g[..] else {
            bail!("--grid takes exactly NX NY EXTENT");
        };
        if nx.fract() != 0.0 || ny.fract() != 0.0 || nx < 2.0 || ny < 2.0 {
            bail!("--grid NX NY must be integers, at least 2");
        }
        cfg.grid.nx = nx as usize;
        cfg.grid.ny = ny as usize;
        cfg.grid.extent = extent;
    }
    if let Some(n) = args.threads {
        cfg.threads = n;
    }
    if let Some(ts) = times {
        cfg.timedomain.times = ts;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run `body` inside a rayon pool sized by the config (0 = library default).
fn in_pool<T>(cfg: &RunConfig, body: impl FnOnce() -> anyhow::Result<T> + Send) -> anyhow::Result<T>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .context("building thread pool")?;
    pool.install(body)
}

fn run_selftest() -> anyhow::Result<ExitCode> {
    let reports = selftest::run_all();
    let mut ok = true;
    for r in &reports {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", r.name, r.detail);
        ok &= r.passed;
    }
    if ok {
        println!("selftest: all {} checks passed", reports.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("selftest: FAILURES present");
        Ok(ExitCode::FAILURE)
    }
}

#[derive(Serialize)]
struct GridMeta {
    nx: usize,
    ny: usize,
    extent: f64,
}

#[derive(Serialize)]
struct SolveMeta<'a> {
    mode: &'a str,
    k: f64,
    eps: f64,
    potential: &'a str,
    source: &'a str,
    support_radius: f64,
    grid: GridMeta,
    mode_count: usize,
    total_panels: usize,
    outgoing_flux: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_residual: Option<f64>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Timings {
    solve_seconds: f64,
    eval_seconds: f64,
    total_seconds: f64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Per-mode cost table: order, panel count, radial node count, inner radii.
fn write_modes_csv(path: &Path, state: &radscat::solver::SolverState) -> anyhow::Result<()> {
    let mut text = String::from("m,panel_count,radial_points,r_min,r_start\n");
    for m in 0..=state.mode_count() {
        let u = state.unit_mode(m);
        let panels = u.panel_count();
        text += &format!("{m},{panels},{},{:e},{:e}\n", panels * 48, u.r_min, u.r_start);
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn grid_of(cfg: &RunConfig) -> Grid {
    Grid::centered(cfg.grid.nx, cfg.grid.ny, cfg.grid.extent)
}

fn run_solve(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out)?;
    let t_all = Instant::now();
    let q = cfg.build_potential()?;
    let src = cfg.build_incident(cfg.k, q.support_radius())?;
    let state = solve_scattering(&q, &src, cfg.eps)?;

    let grid = grid_of(cfg);
    let t_eval = Instant::now();
    let total = state.eval_grid(&grid, FieldKind::Total);
    let scattered = state.eval_grid(&grid, FieldKind::Scattered);
    let eval_seconds = t_eval.elapsed().as_secs_f64();

    total.write_text(&out.join("total.grid"))?;
    scattered.write_text(&out.join("scattered.grid"))?;
    write_modes_csv(&out.join("modes.csv"), &state)?;
    let flux = state.outgoing_flux(2.0 * q.support_radius());
    let meta = SolveMeta {
        mode: "solve",
        k: cfg.k,
        eps: cfg.eps,
        potential: q.label(),
        source: src.label(),
        support_radius: q.support_radius(),
        grid: GridMeta { nx: grid.nx, ny: grid.ny, extent: cfg.grid.extent },
        mode_count: state.mode_count(),
        total_panels: state.panel_counts().iter().sum(),
        outgoing_flux: flux,
        residual_step: None,
        max_residual: None,
        files: ["total.grid", "scattered.grid", "modes.csv"].map(String::from).to_vec(),
    };
    write_json(&out.join("meta.json"), &meta)?;
    write_json(
        &out.join("timings.json"),
        &Timings {
            solve_seconds: state.build_seconds(),
            eval_seconds,
            total_seconds: t_all.elapsed().as_secs_f64(),
        },
    )?;

    println!(
        "solve: {} potential, {} source, k = {}, eps = {:.1e}",
        q.label(),
        src.label(),
        cfg.k,
        cfg.eps
    );
    println!(
        "retained orders |m| <= {} ({} panels across all radial solves)",
        state.mode_count(),
        meta.total_panels
    );
    println!("outgoing flux {flux:.6e}");
    println!(
        "wrote total.grid, scattered.grid, modes.csv, meta.json, timings.json in {}",
        out.display()
    );
    println!(
        "solve {:.2} s, grid eval {:.2} s",
        state.build_seconds(),
        eval_seconds
    );
    Ok(())
}

fn run_residual(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out)?;
    let t_all = Instant::now();
    let q = cfg.build_potential()?;
    let src = cfg.build_incident(cfg.k, q.support_radius())?;
    let state = solve_scattering(&q, &src, cfg.eps)?;

    let grid = grid_of(cfg);
    let h = cfg.residual_step();
    let t_eval = Instant::now();
    let map = residual_map(&state, &grid, h);
    let eval_seconds = t_eval.elapsed().as_secs_f64();

    map.write_text(&out.join("residual.grid"))?;
    map.write_floor_text(&out.join("residual_floor.grid"))?;
    write_modes_csv(&out.join("modes.csv"), &state)?;
    let meta = SolveMeta {
        mode: "residual",
        k: cfg.k,
        eps: cfg.eps,
        potential: q.label(),
        source: src.label(),
        support_radius: q.support_radius(),
        grid: GridMeta { nx: grid.nx, ny: grid.ny, extent: cfg.grid.extent },
        mode_count: state.mode_count(),
        total_panels: state.panel_counts().iter().sum(),
        outgoing_flux: state.outgoing_flux(2.0 * q.support_radius()),
        residual_step: Some(h),
        max_residual: Some(map.max_value()),
        files: ["residual.grid", "residual_floor.grid", "modes.csv"].map(String::from).to_vec(),
    };
    write_json(&out.join("meta.json"), &meta)?;
    write_json(
        &out.join("timings.json"),
        &Timings {
            solve_seconds: state.build_seconds(),
            eval_seconds,
            total_seconds: t_all.elapsed().as_secs_f64(),
        },
    )?;

    let excluded = map.excluded.iter().filter(|&&e| e).count();
    println!(
        "residual: {} potential, k = {}, h = {h:.3e}, max residual {:.3e} ({} rim-adjacent points excluded)",
        q.label(),
        cfg.k,
        map.max_value(),
        excluded
    );
    println!(
        "wrote residual.grid, residual_floor.grid, modes.csv, meta.json, timings.json in {}",
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TimedomainMeta<'a> {
    mode: &'a str,
    eps: f64,
    potential: &'a str,
    pulse: PulseMeta,
    sweep: SweepMeta,
    grid: GridMeta,
    times: &'a [f64],
    files: Vec<String>,
}

#[derive(Serialize)]
struct PulseMeta {
    x0: f64,
    y0: f64,
    amplitude: f64,
    t0: f64,
    rate: f64,
    band_limit: f64,
}

#[derive(Serialize)]
struct SweepMeta {
    outer_points: usize,
    inner_points: usize,
    levels: u32,
    node_count: usize,
    mode_count_max: usize,
}

fn run_timedomain(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out)?;
    let t_all = Instant::now();
    let q = cfg.build_potential()?;
    let pulse = cfg.pulse();
    let rule = cfg.sweep_rule();
    let grid = grid_of(cfg);
    let targets = grid.points();
    let sweep = build_sweep(&pulse, &q, cfg.eps, &rule, &targets)?;

    let t_eval = Instant::now();
    let mut files = Vec::new();
    let mut index = String::from("index,time,file\n");
    for (i, &t) in cfg.timedomain.times.iter().enumerate() {
        let frame = sweep.synthesize(t);
        let name = format!("frame_{i:02}.grid");
        write_scalar_grid(&out.join(&name), &grid, t, &frame.values)?;
        index += &format!("{i},{t:e},{name}\n");
        files.push(name);
    }
    let eval_seconds = t_eval.elapsed().as_secs_f64();
    std::fs::write(out.join("frames.csv"), &index)?;
    files.push("frames.csv".into());

    let meta = TimedomainMeta {
        mode: "timedomain",
        eps: cfg.eps,
        potential: q.label(),
        pulse: PulseMeta {
            x0: pulse.x0,
            y0: pulse.y0,
            amplitude: pulse.amplitude,
            t0: pulse.t0,
            rate: pulse.rate,
            band_limit: pulse.band_limit,
        },
        sweep: SweepMeta {
            outer_points: rule.outer_points,
            inner_points: rule.inner_points,
            levels: rule.levels,
            node_count: sweep.nodes().len(),
            mode_count_max: sweep.mode_counts().iter().copied().max().unwrap_or(0),
        },
        grid: GridMeta { nx: grid.nx, ny: grid.ny, extent: cfg.grid.extent },
        times: &cfg.timedomain.times,
        files,
    };
    write_json(&out.join("meta.json"), &meta)?;
    write_json(
        &out.join("timings.json"),
        &Timings {
            solve_seconds: sweep.solve_seconds(),
            eval_seconds,
            total_seconds: t_all.elapsed().as_secs_f64(),
        },
    )?;

    println!(
        "timedomain: {} potential, pulse at ({}, {}), {} frequency nodes, band (0, {}]",
        q.label(),
        pulse.x0,
        pulse.y0,
        sweep.nodes().len(),
        pulse.band_limit
    );
    println!(
        "synthesized {} frames on a {}x{} grid; sweep {:.2} s, frames {:.2} s",
        cfg.timedomain.times.len(),
        grid.nx,
        grid.ny,
        sweep.solve_seconds(),
        eval_seconds
    );
    println!("wrote frame grids, frames.csv, meta.json, timings.json in {}", out.display());
    Ok(())
}
