//! `plzig`: plots, analysis reports and accessibility certificates for
//! piecewise-linear interval maps.

mod plot;
mod report;
mod source;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use plzig::certificate::evaluate_stages;
use plzig::factorize::transform_point;
use plzig::plmap::{compose_with_budget, iterate_with_budget, DEFAULT_BREAKPOINT_BUDGET};
use plzig::rational::{format_rational, parse_rational};
use plzig::{certify_general, certify_minc, CertResult, Certificate, Extremum, Rational};

use plot::PlotSpec;
use report::AnalyzeOptions;
use source::MapArgs;

#[derive(Debug, Parser)]
#[command(name = "plzig", version, about = "Exact piecewise-linear interval maps: zigzags, leo checks, certificates")]
struct Cli {
    /// More log output (repeatable); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw the graph of a map as SVG, or list its vertices as CSV.
    Plot {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_enum, default_value_t = PlotFormat::Svg)]
        format: PlotFormat,
        #[arg(long, default_value_t = 400)]
        width: u32,
        #[arg(long, default_value_t = 400)]
        height: u32,
        /// Dashed guide at this level, drawn both ways (repeatable).
        #[arg(long = "guide", value_name = "Q")]
        guides: Vec<String>,
        /// Dot at `x,y` (repeatable).
        #[arg(long = "mark", value_name = "X,Y")]
        marks: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Critical set, zigzags, post-critical orbits and leo verdict as JSON.
    Analyze {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        mode: Mode,
        /// Also report the zigzag verdict at this point (repeatable).
        #[arg(long = "point", value_name = "Y")]
        points: Vec<String>,
        /// Also compute the uniform iterate count for windows of this length.
        #[arg(long, value_name = "EPS")]
        epsilon: Option<String>,
        /// Include the transition matrix of the Markov partition.
        #[arg(long)]
        matrix: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build and check a certificate for a backward orbit.
    Certify {
        #[arg(long, value_enum, default_value_t = PipelineArg::Minc)]
        pipeline: PipelineArg,
        /// Bonding map for the general pipeline (default: the Minc map).
        #[command(flatten)]
        map: MapArgs,
        /// `const:q` or an orbit file (`prefix: … ; period: …`).
        #[arg(long)]
        orbit: String,
        #[arg(long, default_value_t = 10)]
        stages: usize,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Print the transformed coordinates of the point to standard error.
        #[arg(long)]
        coordinates: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-check a certificate file from its stored data.
    Verify { certificate: PathBuf },
    /// Compose two maps: `outer∘inner`. Each is a file or `builtin:NAME`.
    Compose {
        outer: String,
        inner: String,
        /// Refuse results with more breakpoints than this.
        #[arg(long, default_value_t = DEFAULT_BREAKPOINT_BUDGET)]
        budget: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The n-th iterate of a map.
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(short = 'n', long = "times")]
        times: usize,
        #[arg(long, default_value_t = DEFAULT_BREAKPOINT_BUDGET)]
        budget: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlotFormat {
    Svg,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    NonStrict,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PipelineArg {
    Minc,
    General,
}

/// Exit status: 0 pass, 1 certificate failure, 2 error.
enum Outcome {
    Done,
    Failed,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn rational_arg(text: &str) -> Result<Rational> {
    parse_rational(text.trim()).with_context(|| format!("bad rational {text:?}"))
}

fn mark_arg(text: &str) -> Result<(Rational, Rational)> {
    let (x, y) = text.split_once(',').ok_or_else(|| anyhow!("mark {text:?} is not of the form X,Y"))?;
    Ok((rational_arg(x)?, rational_arg(y)?))
}

fn report_result(cert: &Certificate) -> Outcome {
    match &cert.result {
        CertResult::Pass => {
            log::info!("certificate passed with {} stages", cert.stages.len());
            Outcome::Done
        }
        CertResult::Fail { stage, reason } => {
            eprintln!("certificate failed at stage {stage}: {reason}");
            Outcome::Failed
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Plot { map, format, width, height, guides, marks, output } => {
            let f = map.load(None)?;
            let text = match format {
                PlotFormat::Csv => plot::csv(&f),
                PlotFormat::Svg => {
                    let spec = PlotSpec {
                        width,
                        height,
                        guides: guides.iter().map(|g| rational_arg(g)).collect::<Result<_>>()?,
                        marks: marks.iter().map(|m| mark_arg(m)).collect::<Result<_>>()?,
                    };
                    plot::svg(&f, &spec)
                }
            };
            emit(output.as_deref(), &text)?;
        }
        Command::Analyze { map, mode, points, epsilon, matrix, output } => {
            let f = map.load(None)?;
            let opts = AnalyzeOptions {
                mode: match mode {
                    Mode::Strict => Extremum::Strict,
                    Mode::NonStrict => Extremum::NonStrict,
                },
                points: points.iter().map(|p| rational_arg(p)).collect::<Result<_>>()?,
                epsilon: epsilon.as_deref().map(rational_arg).transpose()?,
                matrix,
            };
            let report = report::analyze(&f, &opts)?;
            emit(output.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Command::Certify { pipeline, map, orbit, stages, jobs, coordinates, output } => {
            if let Some(n) = jobs {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("setting up workers")?;
            }
            let orbit = source::orbit_spec(&orbit)?;
            let cert = match pipeline {
                PipelineArg::Minc => {
                    if map.file.is_some() || map.builtin.as_deref().is_some_and(|b| b != "minc") || map.iterate.is_some()
                    {
                        return Err(anyhow!("the minc pipeline always uses the Minc map; use --pipeline general"));
                    }
                    certify_minc(&orbit, stages)?
                }
                PipelineArg::General => certify_general(&map.load(Some("minc"))?, &orbit, stages)?,
            };
            if coordinates {
                let xs = transform_point(&orbit, &cert)?;
                let xs: Vec<String> = xs.iter().map(format_rational).collect();
                eprintln!("coordinates: {}", xs.join(" "));
            }
            emit(output.as_deref(), &(cert.to_json() + "\n"))?;
            return Ok(report_result(&cert));
        }
        Command::Verify { certificate } => {
            let text = fs::read_to_string(&certificate)
                .with_context(|| format!("reading {}", certificate.display()))?;
            let cert = Certificate::from_json(&text).context("parsing certificate")?;
            if let Err(e) = cert.verify() {
                eprintln!("verification failed: {e}");
                return Ok(Outcome::Failed);
            }
            if evaluate_stages(&cert) != cert.result {
                eprintln!("verification failed: recorded result does not match the stages");
                return Ok(Outcome::Failed);
            }
            println!("verified: {}", if cert.passed() { "pass" } else { "fail" });
            return Ok(report_result(&cert));
        }
        Command::Compose { outer, inner, budget, output } => {
            let h = compose_with_budget(&source::map_spec(&outer)?, &source::map_spec(&inner)?, budget)?;
            emit(output.as_deref(), &h.to_map_file())?;
        }
        Command::Iterate { map, times, budget, output } => {
            let f = map.load(None)?;
            let h = iterate_with_budget(&f, times, budget)?;
            emit(output.as_deref(), &h.to_map_file())?;
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
