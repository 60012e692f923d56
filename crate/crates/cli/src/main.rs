mod commands;
mod error;
mod model_file;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Points;
use error::{CliError, CliResult};
use model_file::ModelSpecFile;

/// Conformally parametrized surfaces from CP^(N-1) sigma models.
#[derive(Parser)]
#[command(name = "cpsurf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the model file of the Veronese curve in CP^(N-1).
    Veronese {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local geometry (metric, Christoffel symbols, curvatures) at points.
    Analyze {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// "x,y;x,y" or "grid:NX,NY,XMIN,XMAX,YMIN,YMAX".
        #[arg(long)]
        points: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the immersion on a grid; CSV always, OBJ on request.
    Immerse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Grid nodes along x and y.
        #[arg(long, num_args = 2, value_names = ["NX", "NY"], required = true)]
        grid: Vec<usize>,
        #[arg(long, num_args = 4, value_names = ["XMIN", "XMAX", "YMIN", "YMAX"], required = true, allow_negative_numbers = true)]
        range: Vec<f64>,
        /// CSV output.
        #[arg(long)]
        out: PathBuf,
        /// Optional OBJ mesh output.
        #[arg(long)]
        obj: Option<PathBuf>,
        /// Coordinates (1-based) used as OBJ vertex positions.
        #[arg(long, num_args = 3, default_values_t = [1, 2, 3], requires = "obj")]
        project: Vec<usize>,
    },
    /// Topological charge and action over the sphere.
    Charge {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 32)]
        quad_order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadratic differential and trajectories of the meron block.
    Meron {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        trajectories: Option<PathBuf>,
        #[arg(long, requires = "trajectories")]
        out: Option<PathBuf>,
    },
    /// Run the built-in acceptance checks.
    Verify {
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Veronese { n, out } => commands::veronese(n, out.as_deref()),
        Command::Analyze { model, k, points, out } => {
            let model = ModelSpecFile::read(&model)?;
            commands::analyze(&model, k, &Points::parse("--points", &points)?, out.as_deref())
        }
        Command::Immerse { model, k, grid, range, out, obj, project } => {
            let model = ModelSpecFile::read(&model)?;
            let project: [usize; 3] =
                project.try_into().map_err(|_| CliError::input("--project: expected three coordinates"))?;
            let points = Points::grid("--grid", grid[0], grid[1], &range)?;
            commands::immerse(&model, k, &points, &out, obj.as_deref(), project)
        }
        Command::Charge { model, k, quad_order, out } => {
            let model = ModelSpecFile::read(&model)?;
            commands::charge(&model, k, quad_order, out.as_deref())
        }
        Command::Meron { model, report, trajectories, out } => {
            let model = ModelSpecFile::read(&model)?;
            commands::meron(&model, report.as_deref(), trajectories.as_deref(), out.as_deref())
        }
        Command::Verify { json } => commands::verify(json.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
