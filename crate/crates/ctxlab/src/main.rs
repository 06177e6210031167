//! `ctxlab` command-line front end: each numerical experiment and
//! consistency check is one subcommand. Exit codes: 0 success, 1 usage or
//! validation error, 2 I/O error, 3 numerical-consistency failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ctxlab::chsh::ORACLE_TOL;
use ctxlab::functionals::{
    build_c, build_cabello18, build_cabello18_from_str, build_chsh, build_pm, eval,
    InequalityFunctional, MeasurementSettings, OperatorRealization, CABELLO18_DATA,
};
use ctxlab::pipeline::{
    filter_contextual, read_records, run_bmax_scan, run_c_scan_resumable, scatter_data, summarize,
    write_records, EnsembleRecord, RecordField, RunConfig, B_RANGE, C_RANGE,
};
use ctxlab::plot::{hist_b_svg, hist_c_svg, scatter_svg};
use ctxlab::quantum::{parse_state_file, BlochDirection};
use ctxlab::stats::Histogram;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ctxlab",
    about = "Contextuality and CHSH statistics on random pure two-qubit states",
    version
)]
struct Cli {
    /// Worker threads for the parallel scans (0 = all cores).
    #[arg(long, global = true, env = "CTXLAB_WORKERS", default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Inequality {
    Pm,
    C,
    #[value(name = "cabello18")]
    Cabello18,
    Chsh,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    HistC,
    HistB,
    Scatter,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Field {
    CValue,
    BMax,
}

#[derive(Subcommand)]
enum Command {
    /// Print the classical bound of an inequality and the enumeration size.
    Bounds {
        #[arg(long, value_enum)]
        inequality: Inequality,
        /// Override the bundled 18-ray realization file.
        #[arg(long)]
        realization: Option<PathBuf>,
    },
    /// Evaluate an inequality on every state in a state file.
    Eval {
        #[arg(long, value_enum)]
        inequality: Inequality,
        /// State file: one state per line, `re0 im0 ... re3 im3`.
        #[arg(long)]
        states: PathBuf,
        /// CHSH only: eight angles thetaA1,phiA1,thetaA2,phiA2,thetaB1,phiB1,thetaB2,phiB2.
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        #[arg(long)]
        realization: Option<PathBuf>,
    },
    /// Sample Haar-random pure states into a state file.
    Sample {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the C-distribution scan and write records, histogram and summary.
    Cscan {
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        hist: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Reuse a readable prefix of an interrupted run's record file.
        #[arg(long)]
        resume: bool,
    },
    /// Optimize CHSH on the contextual subensemble of a record file.
    Bmax {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        filter_c: f64,
        #[arg(long, default_value_t = 8)]
        restarts: u32,
        /// Record cap on the subensemble (0 = no cap).
        #[arg(long, default_value_t = 2000)]
        cap: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summary statistics over a record field.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "c-value")]
        field: Field,
        #[arg(long, default_value_t = 4.0)]
        threshold: f64,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Two-column (c_value, b_max) table for plotting.
    Scatter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit a standalone SVG figure from a record file.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        // ignore failure when a global pool already exists (e.g. tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
        if let Some(p) = cause.downcast_ref::<ctxlab::pipeline::PipelineError>() {
            return match p {
                ctxlab::pipeline::PipelineError::Io(_) => EXIT_IO,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_USAGE
}

fn build_named(
    which: Inequality,
    realization: Option<&Path>,
    angles: Option<&[f64]>,
) -> anyhow::Result<(InequalityFunctional, OperatorRealization)> {
    Ok(match which {
        Inequality::Pm => build_pm(),
        Inequality::C => build_c(),
        Inequality::Cabello18 => match realization {
            Some(p) => build_cabello18(p)?,
            None => build_cabello18_from_str(CABELLO18_DATA)?,
        },
        Inequality::Chsh => {
            let a = angles.ok_or_else(|| {
                anyhow::anyhow!("--angles t,p,t,p,t,p,t,p is required for chsh")
            })?;
            if a.len() != 8 {
                anyhow::bail!("--angles needs exactly 8 values, got {}", a.len());
            }
            let dir = |t: f64, p: f64| BlochDirection::new(t, p).map_err(anyhow::Error::from);
            let s = MeasurementSettings {
                a1: dir(a[0], a[1])?,
                a2: dir(a[2], a[3])?,
                b1: dir(a[4], a[5])?,
                b2: dir(a[6], a[7])?,
            };
            build_chsh(&s)
        }
    })
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| anyhow::anyhow!(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn run(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Bounds {
            inequality,
            realization,
        } => {
            let (f, _) = build_named(inequality, realization.as_deref(), Some(&[0.0; 8]))?;
            println!("bound={} assignments={}", f.classical_bound, f.assignment_count());
            Ok(ExitCode::SUCCESS)
        }

        Command::Eval {
            inequality,
            states,
            angles,
            realization,
        } => {
            let (f, r) = build_named(inequality, realization.as_deref(), angles.as_deref())?;
            let text = std::fs::read_to_string(&states)?;
            let (psis, _) = parse_state_file(&text)?;
            if psis.is_empty() {
                anyhow::bail!("no states in {}", states.display());
            }
            for psi in &psis {
                println!("{}", eval(&f, &r, psi)?);
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Sample { n, seed, out } => {
            if n == 0 {
                anyhow::bail!("--n must be at least 1");
            }
            let mut text = format!("# master_seed={seed}\n");
            for k in 0..n {
                let psi = ctxlab::haar::random_pure_state(ctxlab::haar::SeedSpec::new(seed, k));
                text.push_str(&psi.to_string());
                text.push('\n');
            }
            write_file(&out, &text)?;
            eprintln!("wrote {n} states to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Cscan {
            n,
            seed,
            out,
            hist,
            summary,
            bins,
            resume,
        } => {
            if n == 0 {
                anyhow::bail!("--n must be at least 1");
            }
            if bins == 0 {
                anyhow::bail!("--bins must be at least 1");
            }
            let cfg = RunConfig {
                n_states: n,
                master_seed: seed,
                histogram_bins: bins,
                ..Default::default()
            };
            eprintln!("cscan: sampling {n} states (seed {seed})...");
            let (_records, stats, histogram) = run_c_scan_resumable(&cfg, &out, resume)?;
            if let Some(h) = hist {
                write_file(&h, &histogram.to_csv())?;
            }
            let json = serde_json::to_string_pretty(&stats)?;
            if let Some(s) = summary {
                write_file(&s, &json)?;
            }
            println!("{json}");
            eprintln!("cscan: done, records in {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Bmax {
            input,
            filter_c,
            restarts,
            cap,
            out,
        } => {
            if restarts == 0 {
                anyhow::bail!("--restarts must be at least 1");
            }
            let (records, master_seed) = read_records(&input)?;
            let mut ctx = filter_contextual(&records, filter_c);
            if cap > 0 {
                ctx.truncate(cap as usize);
            }
            if ctx.is_empty() {
                println!("0 records");
                write_records(&ctx, master_seed, &out)?;
                return Ok(ExitCode::SUCCESS);
            }
            let cfg = RunConfig {
                master_seed,
                restarts,
                ..Default::default()
            };
            eprintln!("bmax: optimizing {} contextual records...", ctx.len());
            let disagreements = run_bmax_scan(&mut ctx, &cfg)?;
            write_records(&ctx, master_seed, &out)?;
            let bs: Vec<f64> = ctx.iter().filter_map(|r| r.b_max).collect();
            let min = bs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = bs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!(
                "{} records, b_max in [{min}, {max}]",
                ctx.len()
            );
            if disagreements > 0 {
                eprintln!(
                    "bmax: {disagreements} records disagree with the closed form beyond {ORACLE_TOL}"
                );
                return Ok(ExitCode::from(EXIT_NUMERIC));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Stats {
            input,
            field,
            threshold,
            summary,
        } => {
            let (records, _) = read_records(&input)?;
            let field = match field {
                Field::CValue => RecordField::CValue,
                Field::BMax => RecordField::BMax,
            };
            let stats = summarize(&records, field, threshold)?;
            let json = serde_json::to_string_pretty(&stats)?;
            if let Some(s) = summary {
                write_file(&s, &json)?;
            }
            println!("{json}");
            Ok(ExitCode::SUCCESS)
        }

        Command::Scatter { input, out } => {
            let (records, _) = read_records(&input)?;
            if records.is_empty() {
                anyhow::bail!("no records in {}", input.display());
            }
            let sc = scatter_data(&records)?;
            let mut csv = String::from("c_value,b_max\n");
            for (c, b) in &sc.points {
                csv.push_str(&format!("{c},{b}\n"));
            }
            write_file(&out, &csv)?;
            println!(
                "{} points, max |delta b_max| within |delta C| <= {}: {}",
                sc.points.len(),
                sc.c_window,
                sc.max_b_spread_within_c_window
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Plot { input, kind, out } => {
            let (records, _) = read_records(&input)?;
            if records.is_empty() {
                anyhow::bail!("no records in {}", input.display());
            }
            let svg = match kind {
                PlotKind::HistC => {
                    let values: Vec<f64> = records.iter().map(|r| r.c_value).collect();
                    hist_c_svg(&Histogram::from_values(&values, C_RANGE.0, C_RANGE.1, 100))
                }
                PlotKind::HistB => {
                    let values = bmax_column(&records)?;
                    hist_b_svg(&Histogram::from_values(&values, B_RANGE.0, B_RANGE.1, 100))
                }
                PlotKind::Scatter => {
                    let pts: Vec<(f64, f64)> = records
                        .iter()
                        .map(|r| Ok((r.c_value, require_bmax(r)?)))
                        .collect::<anyhow::Result<_>>()?;
                    scatter_svg(&pts)
                }
            };
            write_file(&out, &svg)?;
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn require_bmax(r: &EnsembleRecord) -> anyhow::Result<f64> {
    r.b_max
        .ok_or_else(|| anyhow::anyhow!("record {} has no b_max; run `ctxlab bmax` first", r.index))
}

fn bmax_column(records: &[EnsembleRecord]) -> anyhow::Result<Vec<f64>> {
    records.iter().map(require_bmax).collect()
}
