use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tucker_hooi::experiments::{compare, verify_all};
use tucker_hooi::io::{read_tensor_file, write_model, write_trace_csv, write_trace_json, write_tensor_file};
use tucker_hooi::solver::Initializer;
use tucker_hooi::{hosvd_init, solve, synthetic, Algorithm, SolverConfig, TraceLevel, TuckerModel};

#[derive(Parser)]
#[command(name = "tucker-hooi", version, about = "Low-multilinear-rank tensor approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Hooi,
    Greedy,
    Tuckals3,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Hooi => Algorithm::Hooi,
            AlgorithmArg::Greedy => Algorithm::Greedy,
            AlgorithmArg::Tuckals3 => Algorithm::Tuckals3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Hosvd,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceLevelArg {
    Basic,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded planted Tucker tensor plus scaled Gaussian noise.
    Gen {
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
        /// Noise Frobenius norm relative to the signal.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Truncated HOSVD: write the core and factor files.
    Hosvd {
        tensor: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
        /// Output prefix; writes <prefix>.core.dnt and <prefix>.factor<n>.dnt.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
    },
    /// Run HOOI, Greedy-HOOI or TUCKALS3 and emit a trace.
    Solve {
        tensor: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
        #[arg(long, value_enum, default_value = "hooi")]
        algorithm: AlgorithmArg,
        #[arg(long, default_value_t = 500)]
        max_sweeps: usize,
        #[arg(long, default_value_t = 1e-10)]
        change_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
        #[arg(long, value_enum, default_value = "hosvd")]
        init: InitArg,
        /// Seed for the random initializer.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "full")]
        trace_level: TraceLevelArg,
        /// Record wall time per sweep (makes traces non-reproducible).
        #[arg(long)]
        timing: bool,
        /// JSON trace output.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// CSV trace output with the same columns.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        /// Output prefix for the core and factor files.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the randomized property campaigns.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run all three methods from a shared truncated-HOSVD start and emit a
    /// joint per-sweep table (CSV).
    Compare {
        tensor: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
        #[arg(long, default_value_t = 30)]
        sweeps: usize,
        #[arg(long, default_value_t = 1e-8)]
        gap_tol: f64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn summary(model: &TuckerModel) -> serde_json::Value {
    json!({
        "objective": model.objective(),
        "fit_residual": model.fit_residual,
        "relative_residual": model.relative_residual,
        "core_shape": model.core.shape(),
    })
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen { shape, ranks, noise, seed, out } => {
            let t = synthetic::gen_synthetic(&shape, &ranks, noise, seed)?;
            write_tensor_file(&t, &out)?;
            println!("{}", json!({ "status": "ok", "out": out, "shape": t.shape() }));
        }
        Command::Hosvd { tensor, ranks, model, gap_tol } => {
            let x = read_tensor_file(&tensor)?;
            let factors = hosvd_init(&x, &ranks, gap_tol)?;
            let fitted = TuckerModel::fit(&x, factors)?;
            let files = write_model(&fitted, &model)?;
            println!("{}", json!({ "status": "ok", "files": files, "model": summary(&fitted) }));
        }
        Command::Solve {
            tensor,
            ranks,
            algorithm,
            max_sweeps,
            change_tol,
            gap_tol,
            init,
            seed,
            trace_level,
            timing,
            trace,
            trace_csv,
            model,
        } => {
            let x = read_tensor_file(&tensor)?;
            let config = SolverConfig {
                algorithm: algorithm.into(),
                max_sweeps,
                change_tol,
                gap_tol,
                init: match init {
                    InitArg::Hosvd => Initializer::Hosvd,
                    InitArg::Random => Initializer::Random,
                },
                seed,
                trace_level: match trace_level {
                    TraceLevelArg::Basic => TraceLevel::Basic,
                    TraceLevelArg::Full => TraceLevel::Full,
                },
                timing,
            };
            let sol = solve(&x, &ranks, &config)?;
            if let Some(path) = trace {
                write_trace_json(&sol.trace, &x, create(&path)?)?;
            }
            if let Some(path) = trace_csv {
                write_trace_csv(&sol.trace, create(&path)?)?;
            }
            if let Some(prefix) = model {
                write_model(&sol.model, &prefix)?;
            }
            let aborted = matches!(sol.trace.stop_reason, tucker_hooi::StopReason::Aborted { .. });
            let report = json!({
                "status": if aborted { "aborted" } else { "ok" },
                "algorithm": config.algorithm.name(),
                "sweeps": sol.trace.records.len(),
                "stop_reason": sol.trace.stop_reason,
                "kkt_aggregate": sol.trace.final_kkt.aggregate_normalized,
                "model": summary(&sol.model),
            });
            println!("{report}");
            if aborted {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify { trials, seed } => {
            let report = verify_all(trials, seed);
            for c in &report.campaigns {
                println!(
                    "{:<22} {}  passed {:>5}  failed {:>3}  skipped {:>4}  worst margin {:.3e}",
                    c.name,
                    if c.ok() { "PASS" } else { "FAIL" },
                    c.passed,
                    c.failed,
                    c.skipped,
                    c.worst_margin
                );
            }
            if !report.all_pass() {
                println!("{}", json!({ "status": "fail", "report": report }));
                return Ok(ExitCode::FAILURE);
            }
            println!("all campaigns passed");
        }
        Command::Compare { tensor, ranks, sweeps, gap_tol, out } => {
            let x = read_tensor_file(&tensor)?;
            let cmp = compare(&x, &ranks, sweeps, gap_tol)?;
            match out {
                Some(path) => cmp.write_csv(create(&path)?)?,
                None => cmp.write_csv(io::stdout().lock())?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(
                io::stderr(),
                "{}",
                json!({ "status": "error", "error": e.to_string() })
            );
            ExitCode::FAILURE
        }
    }
}
