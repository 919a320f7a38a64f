use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmpcc::io::{load_corridor_file, load_scenario, load_trajectory_file, scenario_error, LoadError, LoadedScenario};
use cmpcc::mpcc::{assemble, Controller};
use cmpcc::qp::dump::write_dump;
use cmpcc::qp::Solver;
use cmpcc::sim::{augmented, run_scenario, Outcome, PlantState, RunOptions, ScenarioError};
use cmpcc::tube::tube_at;

mod validate;

/// Exit status for a run that ended without reaching the goal.
const EXIT_ABORT: u8 = 2;
const EXIT_INPUT: u8 = 1;

#[derive(Parser)]
#[command(name = "cmpcc", version, about = "Corridor-based model predictive contouring control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario in closed loop and write the per-tick log as CSV.
    Run {
        scenario: PathBuf,
        /// CSV log destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the progress weight.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        /// Disable the slack-relaxed recovery problem.
        #[arg(long)]
        no_recovery: bool,
    },
    /// Check a trajectory and corridor pair and print one line per check.
    Validate { trajectory: PathBuf, corridor: PathBuf },
    /// Write the swept tube rows at the given reference times as CSV.
    Tube {
        trajectory: PathBuf,
        corridor: PathBuf,
        /// Reference times; repeat the flag or separate with commas.
        #[arg(long = "theta", value_delimiter = ',', allow_negative_numbers = true)]
        thetas: Vec<f64>,
        /// Row CSV destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cross-section vertex CSV destination.
        #[arg(long)]
        vertices: Option<PathBuf>,
    },
    /// Assemble the first horizon QP of a scenario and dump it as text.
    SolveDump {
        scenario: PathBuf,
        /// Dump destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the progress weight.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
    },
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Io(io::Error),
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors are input errors; clap's own code 2 would read as an abort.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            rho,
            no_recovery,
        } => cmd_run(&scenario, out.as_deref(), seed, rho, !no_recovery),
        Command::Validate { trajectory, corridor } => validate::cmd_validate(&trajectory, &corridor),
        Command::Tube {
            trajectory,
            corridor,
            thetas,
            out,
            vertices,
        } => cmd_tube(&trajectory, &corridor, &thetas, out.as_deref(), vertices.as_deref()),
        Command::SolveDump { scenario, out, rho } => cmd_solve_dump(&scenario, out.as_deref(), rho),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Input(format!("{}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_with_overrides(path: &Path, seed: Option<u64>, rho: Option<f64>) -> Result<LoadedScenario<f64>, CliError> {
    let mut loaded = load_scenario::<f64>(path)?;
    if let Some(seed) = seed {
        loaded.scenario.seed = seed;
    }
    if let Some(rho) = rho {
        loaded.scenario.mpcc.rho = rho;
        loaded
            .scenario
            .validate()
            .map_err(|e| CliError::Input(format!("--rho: {}", scenario_error(path, e))))?;
    }
    Ok(loaded)
}

fn cmd_run(
    path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    rho: Option<f64>,
    recovery: bool,
) -> Result<ExitCode, CliError> {
    let loaded = load_with_overrides(path, seed, rho)?;
    let log = run_scenario(
        &loaded.scenario,
        &loaded.trajectory,
        &loaded.corridor,
        RunOptions { recovery },
    )
    .map_err(|e| match e {
        ScenarioError::Controller(inner) => CliError::Input(format!("{}: {inner}", path.display())),
        other => CliError::Input(scenario_error(path, other).to_string()),
    })?;
    if let Some(out) = out {
        let mut w = output(Some(out))?;
        log.write_csv(&mut w)?;
        w.flush()?;
    }
    let summary = log.summary();
    println!("{summary}");
    Ok(match &log.outcome {
        Outcome::GoalReached => ExitCode::SUCCESS,
        Outcome::Aborted(reason) => {
            eprintln!("aborted: {reason}");
            ExitCode::from(EXIT_ABORT)
        }
        Outcome::TimedOut => {
            eprintln!("aborted: goal not reached within duration_s");
            ExitCode::from(EXIT_ABORT)
        }
    })
}

pub const TUBE_ROW_COLUMNS: &str = "theta,row,nx,ny,nz,offset,fallback";
pub const TUBE_VERTEX_COLUMNS: &str = "theta,vertex,x,y,z";

fn cmd_tube(
    trajectory: &Path,
    corridor: &Path,
    thetas: &[f64],
    out: Option<&Path>,
    vertices: Option<&Path>,
) -> Result<ExitCode, CliError> {
    let traj = load_trajectory_file::<f64>(trajectory)?.build(trajectory)?;
    let corr = load_corridor_file::<f64>(corridor)?.build(corridor)?;
    traj.check_corridor_indices(corr.len())
        .map_err(|e| CliError::Input(format!("{}: {e}", trajectory.display())))?;
    if let Some(bad) = thetas.iter().find(|t| !t.is_finite()) {
        return Err(CliError::Input(format!("--theta: {bad} is not finite")));
    }

    let mut rows = output(out)?;
    let mut verts = match vertices {
        Some(p) => Some(output(Some(p))?),
        None => None,
    };
    writeln!(rows, "{TUBE_ROW_COLUMNS}")?;
    if let Some(v) = verts.as_mut() {
        writeln!(v, "{TUBE_VERTEX_COLUMNS}")?;
    }
    for &theta in thetas {
        let tube = tube_at(&corr, &traj, theta).map_err(|e| CliError::Input(format!("theta {theta}: {e}")))?;
        for (i, r) in tube.rows.iter().enumerate() {
            writeln!(
                rows,
                "{theta},{i},{:?},{:?},{:?},{:?},{}",
                r.normal[0],
                r.normal[1],
                r.normal[2],
                r.offset,
                u8::from(tube.fallback)
            )?;
        }
        if let (Some(v), Some(section)) = (verts.as_mut(), tube.section.as_ref()) {
            for (i, p) in section.vertices3d().iter().enumerate() {
                writeln!(v, "{theta},{i},{:?},{:?},{:?}", p[0], p[1], p[2])?;
            }
        }
    }
    rows.flush()?;
    if let Some(mut v) = verts {
        v.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve_dump(path: &Path, out: Option<&Path>, rho: Option<f64>) -> Result<ExitCode, CliError> {
    let loaded = load_with_overrides(path, None, rho)?;
    let sc = &loaded.scenario;
    let plant = PlantState {
        position: sc.start.position.into(),
        velocity: sc.start.velocity.into(),
        acceleration: cmpcc::Vec3::zero(),
    };
    let input_err = |e: cmpcc::mpcc::MpccError| CliError::Input(format!("{}: {e}", path.display()));
    let controller = Controller::init(
        sc.mpcc,
        &loaded.trajectory,
        &loaded.corridor,
        &augmented(&plant, [0.0; 3]),
    )
    .map_err(input_err)?;
    let current = augmented(&plant, controller.initial_virtual_state());
    let asm = assemble(
        &sc.mpcc,
        &loaded.trajectory,
        &loaded.corridor,
        &current,
        controller.thetas(),
    )
    .map_err(input_err)?;

    let mut w = output(out)?;
    write_dump(&asm.problem, &mut w)?;
    w.flush()?;

    let settings = cmpcc::qp::Settings {
        polish: true,
        ..Default::default()
    };
    let sol = Solver::new(&asm.problem, settings)
        .and_then(|mut s| s.solve())
        .map_err(|e| CliError::Input(e.to_string()))?;
    eprintln!(
        "qp: {} variables, {} rows, nnz(P)={} nnz(A)={}; {} after {} iterations, objective {:.6e}",
        asm.problem.num_vars(),
        asm.problem.num_constraints(),
        asm.problem.p.nnz(),
        asm.problem.a.nnz(),
        sol.status.as_str(),
        sol.iterations,
        sol.objective + asm.constant
    );
    Ok(ExitCode::SUCCESS)
}
