//! `quaddel`: plan deliveries, fly them, detect edges, check an airframe.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible (or failed
//! requirement check), 3 flight divergence, 4 oracle size limits.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quaddel::builder::build_model;
use quaddel::config::{default_quad_config, KvConfig};
use quaddel::control::ControlGains;
use quaddel::dynamics::QuadParams;
use quaddel::flight::{fly_plan, FlightError, FlightSettings, Trajectory};
use quaddel::generate::{corpus, Shape};
use quaddel::oracle::{brute_force_solve, default_max_legs, OracleError};
use quaddel::par::Parallelism;
use quaddel::planner::{plan, PlanError, PlanOptions};
use quaddel::requirements::{spec_check, HardwareParams, UavRequirements};
use quaddel::routes::RoutePlan;
use quaddel::vision::{self, canny_stages, CannyParams, GrayImage};
use quaddel::PdpInstance;

#[derive(Parser)]
#[command(name = "quaddel", version, about = "Quadrotor delivery planning, flight simulation and edge detection")]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance exactly with the MILP and write the plan as JSON.
    Plan {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        cuts: Cuts,
        /// Absolute optimality gap for branch and bound.
        #[arg(long)]
        gap: Option<f64>,
    },
    /// Solve a tiny instance by exhaustive search.
    Oracle {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Legs per quadcopter (default and maximum 2|R| + |V|).
        #[arg(long)]
        max_legs: Option<usize>,
    },
    /// Simulate a plan and write trajectory CSV.
    Fly {
        plan: PathBuf,
        /// key = value file; omitted keys take the shipped defaults.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// CSV path. Plans with several routes get one file per
        /// quadcopter, suffixed with its id.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run Canny edge detection on a PGM image.
    Edges {
        image: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        t_low: Option<f64>,
        #[arg(long)]
        t_high: Option<f64>,
        /// Directory for smoothed, magnitude, direction and thinned stages.
        #[arg(long)]
        dump_stages: Option<PathBuf>,
    },
    /// Evaluate the airframe requirement list against a config.
    Check {
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Write a seeded corpus of random instances and the test images.
    GenFixtures {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Print the MILP in LP-like text, or the variable layout.
    DumpModel {
        instance: PathBuf,
        #[command(flatten)]
        cuts: Cuts,
        #[arg(long)]
        layout: bool,
    },
}

#[derive(Args)]
struct Cuts {
    /// Add the launch cuts (default).
    #[arg(long, overrides_with = "no_cuts")]
    cuts: bool,
    /// Omit the launch cuts.
    #[arg(long)]
    no_cuts: bool,
}

impl Cuts {
    fn enabled(&self) -> bool {
        !self.no_cuts
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
    Divergence(String),
    Limits(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Divergence(_) => 3,
            Failure::Limits(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Infeasible(m) | Failure::Divergence(m) | Failure::Limits(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn input(stage: &str, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{stage}: {e}"))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(&format!("reading {}", path.display()), e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, bytes).map_err(|e| input(&format!("writing {}", path.display()), e))
}

fn load_instance(path: &Path) -> Result<PdpInstance, Failure> {
    PdpInstance::from_json(&read_text(path)?).map_err(|e| input("parsing instance", e))
}

fn load_config(path: Option<&Path>) -> Result<KvConfig, Failure> {
    let base = default_quad_config();
    match path {
        None => Ok(base),
        Some(p) => {
            let user = KvConfig::parse(&read_text(p)?).map_err(|e| input("parsing config", e))?;
            Ok(base.merged(&user))
        }
    }
}

fn emit_plan(plan: &RoutePlan, output: Option<&Path>) -> Outcome {
    match output {
        Some(p) => write_file(p, plan.to_json()),
        None => {
            println!("{}", plan.to_json());
            Ok(())
        }
    }
}

fn cmd_plan(instance: &Path, output: Option<&Path>, with_cuts: bool, gap: Option<f64>, mode: Parallelism) -> Outcome {
    let inst = load_instance(instance)?;
    let mut opts = PlanOptions {
        with_cuts,
        ..PlanOptions::default()
    };
    opts.mip.parallelism = mode;
    if let Some(g) = gap {
        if g.is_nan() || g <= 0.0 {
            return Err(input("flags", "--gap must be positive"));
        }
        opts.mip.lp.tol.gap = g;
    }
    let out = plan(&inst, &opts).map_err(|e| match e {
        PlanError::Infeasible => Failure::Infeasible("solve: no feasible plan exists".into()),
        other => Failure::Input(format!("solve: {other}")),
    })?;
    let s = &out.stats;
    eprintln!(
        "makespan {:.6}  nodes {}  lp solves {}  pivots {}  columns {}->{}  rows {}->{}  time {:.3}s",
        out.objective,
        s.nodes,
        s.lp_solves,
        s.pivots,
        s.columns,
        s.presolved_columns,
        s.rows,
        s.presolved_rows,
        s.wall_time.as_secs_f64()
    );
    emit_plan(&out.plan, output)
}

fn cmd_oracle(instance: &Path, output: Option<&Path>, max_legs: Option<usize>, mode: Parallelism) -> Outcome {
    let inst = load_instance(instance)?;
    let legs = max_legs.unwrap_or_else(|| default_max_legs(&inst));
    let plan = brute_force_solve(&inst, legs, mode).map_err(|e| match e {
        OracleError::Infeasible => Failure::Infeasible("oracle: no feasible plan exists".into()),
        OracleError::OracleLimits(m) => Failure::Limits(format!("oracle: {m}")),
    })?;
    eprintln!("makespan {:.6}", plan.makespan);
    emit_plan(&plan, output)
}

fn trajectory_path(output: &Path, quad: &str, many: bool) -> PathBuf {
    if !many {
        return output.to_path_buf();
    }
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    let ext = output.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    output.with_file_name(format!("{stem}_{quad}.{ext}"))
}

fn write_trajectory(t: &Trajectory, path: &Path) -> Outcome {
    let mut buf = Vec::new();
    t.write_csv(&mut buf).map_err(|e| input("formatting trajectory", e))?;
    write_file(path, buf)
}

fn cmd_fly(plan_path: &Path, config: Option<&Path>, output: &Path, dt: Option<f64>, mode: Parallelism) -> Outcome {
    let plan = RoutePlan::from_json(&read_text(plan_path)?).map_err(|e| input("parsing plan", e))?;
    let mut cfg = load_config(config)?;
    if let Some(dt) = dt {
        cfg.set("dt", dt);
    }
    let params = QuadParams::from_config(&cfg).map_err(|e| input("config", e))?;
    let gains = ControlGains::from_config(&cfg).map_err(|e| input("config", e))?;
    let settings = FlightSettings::from_config(&cfg).map_err(|e| input("config", e))?;
    if plan.routes.is_empty() {
        return write_file(output, format!("{}\n", quaddel::flight::CSV_HEADER));
    }
    let trajectories = fly_plan(&plan, &params, &gains, &settings, mode).map_err(|e| match e {
        FlightError::DivergenceDetected { .. } => Failure::Divergence(format!("fly: {e}")),
    })?;
    let many = trajectories.len() > 1;
    for t in &trajectories {
        let path = trajectory_path(output, &t.quad, many);
        write_trajectory(t, &path)?;
        let status = if t.completed() { "completed" } else { "time cap reached" };
        eprintln!(
            "{}: {} of {} waypoints, {:.3} s, {} saturated steps, {status} -> {}",
            t.quad,
            t.captures.len(),
            t.waypoints.len(),
            t.samples.last().map_or(0.0, |s| s.time),
            t.saturated_steps,
            path.display()
        );
    }
    Ok(())
}

fn cmd_edges(image: &Path, output: &Path, params: CannyParams, dump: Option<&Path>, mode: Parallelism) -> Outcome {
    let bytes = fs::read(image).map_err(|e| input(&format!("reading {}", image.display()), e))?;
    let img = GrayImage::from_pgm(&bytes).map_err(|e| input("parsing image", e))?;
    let stages = canny_stages(&img, &params, mode).map_err(|e| input("edge detection", e))?;
    write_file(output, stages.edges.to_pgm())?;
    if let Some(dir) = dump {
        fs::create_dir_all(dir).map_err(|e| input(&format!("creating {}", dir.display()), e))?;
        let files = [
            ("smoothed.pgm", stages.smoothed.clone()),
            ("magnitude.pgm", GrayImage::rescaled(&stages.field.magnitude)),
            ("direction.pgm", GrayImage::from_directions(&stages.field.direction)),
            ("thinned.pgm", GrayImage::rescaled(&stages.thinned)),
            ("edges.pgm", stages.edges.clone()),
        ];
        for (name, img) in files {
            write_file(&dir.join(name), img.to_pgm())?;
        }
    }
    eprintln!(
        "{} edge pixels, t_low {:.3}, t_high {:.3}",
        vision::edge_pixels(&stages.edges).len(),
        stages.t_low,
        stages.t_high
    );
    Ok(())
}

fn cmd_check(config: Option<&Path>) -> Outcome {
    let cfg = match config {
        Some(p) => KvConfig::parse(&read_text(p)?).map_err(|e| input("parsing config", e))?,
        None => default_quad_config(),
    };
    let hw = HardwareParams::from_config(&cfg).map_err(|e| input("config", e))?;
    let report = spec_check(&hw, &UavRequirements::default());
    println!("{report}");
    if report.pass() {
        Ok(())
    } else {
        let failed: Vec<String> = report.verdicts.iter().filter(|v| !v.pass).map(|v| v.number.to_string()).collect();
        Err(Failure::Infeasible(format!("check: requirements {} not met", failed.join(", "))))
    }
}

fn cmd_gen_fixtures(output: &Path, seed: u64, count: usize) -> Outcome {
    let images = output.join("images");
    fs::create_dir_all(&images).map_err(|e| input(&format!("creating {}", images.display()), e))?;
    let shape = Shape::default();
    let instances = corpus(seed, count, &shape);
    let mut names = Vec::new();
    for (k, inst) in instances.iter().enumerate() {
        let name = format!("instance_{k:03}.json");
        write_file(&output.join(&name), inst.to_json())?;
        names.push(name);
    }
    for (name, img) in vision::fixtures::all() {
        write_file(&images.join(format!("{name}.pgm")), img.to_pgm())?;
    }
    let manifest = serde_json::json!({
        "seed": seed,
        "count": count,
        "shape": {
            "max_quads": shape.max_quads,
            "max_requests": shape.max_requests,
            "max_vehicles": shape.max_vehicles,
            "max_items": shape.max_items,
            "grid": shape.grid,
        },
        "instances": names,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| input("manifest", e))?;
    write_file(&output.join("manifest.json"), text)?;
    eprintln!("wrote {count} instances with seed {seed} to {}", output.display());
    Ok(())
}

fn cmd_dump_model(instance: &Path, with_cuts: bool, layout: bool) -> Outcome {
    let inst = load_instance(instance)?;
    let built = build_model(&inst, with_cuts);
    if layout {
        println!("{}", built.layout.dump());
    } else {
        print!("{}", built.model.to_lp_string());
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let mode = if cli.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    match cli.command {
        Command::Plan {
            instance,
            output,
            cuts,
            gap,
        } => cmd_plan(&instance, output.as_deref(), cuts.enabled(), gap, mode),
        Command::Oracle {
            instance,
            output,
            max_legs,
        } => cmd_oracle(&instance, output.as_deref(), max_legs, mode),
        Command::Fly {
            plan,
            config,
            output,
            dt,
        } => cmd_fly(&plan, config.as_deref(), &output, dt, mode),
        Command::Edges {
            image,
            output,
            sigma,
            t_low,
            t_high,
            dump_stages,
        } => cmd_edges(
            &image,
            &output,
            CannyParams { sigma, t_low, t_high },
            dump_stages.as_deref(),
            mode,
        ),
        Command::Check { config } => cmd_check(config.as_deref()),
        Command::GenFixtures { output, seed, count } => cmd_gen_fixtures(&output, seed, count),
        Command::DumpModel { instance, cuts, layout } => cmd_dump_model(&instance, cuts.enabled(), layout),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn cuts_flag_defaults_on() {
        let cli = Cli::parse_from(["quaddel", "dump-model", "x.json"]);
        let Command::DumpModel { cuts, .. } = cli.command else { panic!() };
        assert!(cuts.enabled());
        let cli = Cli::parse_from(["quaddel", "dump-model", "x.json", "--no-cuts"]);
        let Command::DumpModel { cuts, .. } = cli.command else { panic!() };
        assert!(!cuts.enabled());
    }

    #[test]
    fn multi_route_paths_get_suffixes() {
        let p = Path::new("/tmp/out.csv");
        assert_eq!(trajectory_path(p, "h1", false), PathBuf::from("/tmp/out.csv"));
        assert_eq!(trajectory_path(p, "h2", true), PathBuf::from("/tmp/out_h2.csv"));
    }

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(Failure::Input(String::new()).code(), 1);
        assert_eq!(Failure::Infeasible(String::new()).code(), 2);
        assert_eq!(Failure::Divergence(String::new()).code(), 3);
        assert_eq!(Failure::Limits(String::new()).code(), 4);
    }
}
