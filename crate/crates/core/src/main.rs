use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use relinfo::cli::{self, Format, SimulateArgs, StudyTable, N1};
use relinfo::montecarlo::{DEFAULT_RATIO_FLOOR, DEFAULT_TRUE_PS};
use relinfo::settings::DEFAULT_EPS_LOD;
use relinfo::{Error, LogBase, Mode, RiForm, Settings};

/// Missing-information estimates, follow-up designs and simulations for
/// binomial lod scores.
#[derive(Parser)]
#[command(name = "relinfo", version)]
struct Cli {
    /// Base for reported lod values: e or 10.
    #[arg(long, global = true, default_value = "e")]
    log_base: LogBase,
    /// Observed lods below this (natural-log units) count as unstable.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_LOD)]
    eps_lod: f64,
    /// Clamp boundary MLEs to [1/(2 n0), 1 - 1/(2 n0)] instead of failing.
    #[arg(long, global = true)]
    continuity_correction: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TableArgs {
    /// Study table CSV.
    input: PathBuf,
    /// Null probability for rows with an empty p0 cell.
    #[arg(long)]
    p0: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Plug-in relative information per variable.
    Estimate {
        #[command(flatten)]
        table: TableArgs,
        /// Missing values to resolve per row: a count or "full".
        #[arg(long, default_value = "full")]
        n1: N1,
        #[arg(long, default_value = "json")]
        format: Format,
    },
    /// Budget-constrained follow-up allocation.
    Design {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        budget: f64,
        #[arg(long, default_value = "exact")]
        mode: Mode,
        /// Evaluate each variable at this fixed alternative instead of its MLE.
        #[arg(long)]
        fixed_p: Option<f64>,
        #[arg(long, hide = true)]
        oracle: bool,
    },
    /// Joint observed/complete lod simulation.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 800)]
        n0: u64,
        #[arg(long, default_value_t = 0.55)]
        true_p: f64,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        /// Bins per axis of the contour grid.
        #[arg(long, default_value_t = 40)]
        bins: usize,
        /// Extra reference slopes, comma separated.
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_RATIO_FLOOR)]
        ratio_floor: f64,
        /// Directory receiving contour.csv, reference_lines.csv and ratio_stats.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Standard deviation of the inverse relative information against x0.
    Curves {
        #[arg(long)]
        n: u64,
        /// Defaults to 80% of n.
        #[arg(long)]
        n0: Option<u64>,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TRUE_PS)]
        true_p: Vec<f64>,
    },
}

fn read_table(args: &TableArgs) -> Result<StudyTable, Error> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Error::Invalid(format!("{}: {e}", args.input.display())))?;
    StudyTable::parse(&text, args.p0)
}

fn write(path: PathBuf, contents: &str) -> Result<(), Error> {
    std::fs::write(&path, contents).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<bool, Error> {
    let settings = Settings::default()
        .with_log_base(cli.log_base)
        .with_eps_lod(cli.eps_lod)
        .with_continuity_correction(cli.continuity_correction);
    match cli.command {
        Command::Estimate { table, n1, format } => {
            let report = cli::cmd_estimate(&read_table(&table)?, n1, &settings);
            println!("{}", report.render(format).trim_end());
            Ok(report.hard_failures == 0)
        }
        Command::Design { table, budget, mode, fixed_p, oracle } => {
            let form = fixed_p.map_or(RiForm::PlugIn, |p| RiForm::Fixed { p });
            let report = cli::cmd_design(&read_table(&table)?, budget, mode, form, oracle, &settings)?;
            println!("{}", report.to_json());
            Ok(true)
        }
        Command::Simulate { n, n0, true_p, p0, reps, seed, bins, ratios, ratio_floor, out_dir } => {
            let args = SimulateArgs {
                n,
                n0,
                true_p,
                p0,
                replicates: reps,
                seed,
                bins_x: bins,
                bins_y: bins,
                ratios,
                ratio_floor,
            };
            let out = cli::cmd_simulate(&args, &settings)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| Error::Invalid(format!("{}: {e}", out_dir.display())))?;
            write(out_dir.join("contour.csv"), &out.contour_csv)?;
            write(out_dir.join("reference_lines.csv"), &out.lines_csv)?;
            write(out_dir.join("ratio_stats.json"), &out.stats_json)?;
            Ok(true)
        }
        Command::Curves { n, n0, p0, true_p } => {
            let n0 = n0.unwrap_or_else(|| cli::default_n0(n));
            print!("{}", cli::cmd_curves(n, n0, p0, &true_p, &settings)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{}", cli::error_json(&e));
            ExitCode::FAILURE
        }
    }
}
