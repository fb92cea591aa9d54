use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use se2_nngp::experiments::{converge_sweep, equivariance_suite, write_rows_csv, ResultRow, Summary, SweepOutcome};
use se2_nngp::kernel::{analytic_layer, empirical_kernel, gp_sample};
use se2_nngp::{DiagonalKernel, Error, KernelMatrix, ModeField, RunConfig};

#[derive(Parser)]
#[command(name = "se2-nngp", version, about = "Steerable-CNN Gaussian-process kernels: estimate, compare, check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic kernel at the probe layer, plus its Monte Carlo estimate.
    Kernel(Common),
    /// Width sweep of empirical against analytic kernels.
    Converge(Common),
    /// Equivariance, oracle and moment test battery.
    Check(Common),
    /// Draw fields from the limiting Gaussian process.
    SampleGp(Common),
    /// Kernel-constraint check of a coordinate-space filter.
    FilterCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Usage(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Usage(Error::Serde(e.to_string()))
}

struct Run {
    config: RunConfig,
    out: Box<dyn Write>,
    format: Format,
    started: Instant,
}

impl Run {
    fn open(c: &Common, default: Format) -> Result<Self, Failure> {
        let mut config = RunConfig::load(&c.config)
            .map_err(|e| Error::Invalid(format!("{}: {e}", c.config.display())))?;
        if let Some(seed) = c.seed {
            config.seed = seed;
        }
        let out: Box<dyn Write> = match &c.out {
            Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
            None => Box::new(io::BufWriter::new(io::stdout())),
        };
        Ok(Self {
            config,
            out,
            format: c.format.unwrap_or(default),
            started: Instant::now(),
        })
    }

    fn runtime(&self) -> Option<f64> {
        self.config.output.record_runtime.then(|| self.started.elapsed().as_secs_f64())
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        serde_json::to_writer_pretty(&mut self.out, value).map_err(Error::from)?;
        writeln!(self.out)?;
        Ok(())
    }

    fn finish(mut self) -> Result<(), Failure> {
        self.out.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct KernelOutput<'a> {
    layer: usize,
    analytic: &'a DiagonalKernel,
    empirical: Option<&'a KernelMatrix>,
}

fn kernel(c: &Common) -> Result<(), Failure> {
    let mut run = Run::open(c, Format::Json)?;
    let net = run.config.network()?;
    let e = run.config.experiment()?.clone();
    let analytic = analytic_layer(&net, e.layer)?;
    let empirical = if e.draws > 0 {
        Some(empirical_kernel(&net, &net.input_field()?, e.layer, e.draws, net.seed)?)
    } else {
        None
    };
    match run.format {
        Format::Json => run.json(&KernelOutput {
            layer: e.layer,
            analytic: &analytic,
            empirical: empirical.as_ref(),
        })?,
        Format::Csv => {
            let k = empirical.ok_or_else(|| Error::config("experiment.draws", "CSV output needs draws >= 1"))?;
            let s = analytic.mode();
            let inside = k.modes().contains(&s);
            let rows: Vec<ResultRow> = analytic
                .values()
                .iter()
                .enumerate()
                .map(|(a, &want)| {
                    let (got, se) = if inside { (k.codiag(s, a), k.std_err(s, s, a, a)) } else { (0.0, 0.0) };
                    ResultRow {
                        layer: e.layer,
                        width: net.widths[e.layer],
                        draws: e.draws,
                        mode: s,
                        bin: a,
                        analytic: want,
                        empirical: got,
                        std_err: se,
                        rel_err: (want != 0.0).then(|| (got - want).abs() / want.abs()),
                        seed: net.seed,
                    }
                })
                .collect();
            write_rows_csv(&rows, &mut run.out)?;
        }
    }
    run.finish()
}

#[derive(Serialize)]
struct ConvergeOutput<'a> {
    #[serde(flatten)]
    summary: Summary,
    structural_pass: bool,
    medians_decreasing: bool,
    #[serde(flatten)]
    outcome: &'a SweepOutcome,
}

fn converge(c: &Common) -> Result<(), Failure> {
    let mut run = Run::open(c, Format::Csv)?;
    let spec = run.config.sweep()?;
    let limit = run.config.experiment()?.max_rel_err;
    let outcome = converge_sweep(&spec)?;
    let structural = outcome.structural_pass();
    let decreasing = outcome.medians_strictly_decreasing();
    let widest = outcome.medians.last().map_or(f64::NAN, |m| m.median_rel_err);
    let within = limit.map_or(true, |l| widest <= l);
    let pass = structural && decreasing && within;
    match run.format {
        Format::Csv => write_rows_csv(&outcome.rows, &mut run.out)?,
        Format::Json => {
            let summary = Summary {
                suite: "converge".into(),
                pass,
                max_dev: outcome.max_rel_err(),
                runtime_seconds: run.runtime(),
            };
            run.json(&ConvergeOutput {
                summary,
                structural_pass: structural,
                medians_decreasing: decreasing,
                outcome: &outcome,
            })?;
        }
    }
    run.finish()?;
    if pass {
        return Ok(());
    }
    let mut why = Vec::new();
    if !structural {
        let bad = outcome.checks.iter().filter(|c| !c.pass()).count();
        why.push(format!("{bad} structural checks failed"));
    }
    if !decreasing {
        why.push("median relative error does not decrease strictly with width".to_string());
    }
    if !within {
        why.push(format!("median relative error {widest:.4} at the widest width exceeds max_rel_err"));
    }
    Err(Failure::Check(why.join("; ")))
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    #[serde(flatten)]
    summary: Summary,
    items: &'a [se2_nngp::experiments::SuiteItem],
}

fn check(c: &Common) -> Result<(), Failure> {
    let mut run = Run::open(c, Format::Json)?;
    let report = equivariance_suite(&run.config.suite()?);
    match run.format {
        Format::Json => {
            let summary = Summary {
                suite: "equivariance".into(),
                pass: report.pass,
                max_dev: report.max_dev(),
                runtime_seconds: run.runtime(),
            };
            run.json(&CheckOutput {
                summary,
                items: &report.items,
            })?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut run.out);
            for item in &report.items {
                w.serialize(item).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    run.finish()?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.items.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect();
        Err(Failure::Check(format!("failed items: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct GpRecord {
    channel: usize,
    mode: i32,
    bin: usize,
    re: f64,
    im: f64,
}

fn sample_gp(c: &Common) -> Result<(), Failure> {
    let mut run = Run::open(c, Format::Json)?;
    let net = run.config.network()?;
    let gp = run.config.gp()?.clone();
    let k = analytic_layer(&net, gp.layer)?;
    let rep = net.layer_windows()[gp.layer].2;
    let field: ModeField = gp_sample(&k, rep, gp.channels, net.seed)?;
    match run.format {
        Format::Json => run.json(&field)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut run.out);
            for ch in 0..field.channels() {
                for mode in field.modes() {
                    for (bin, z) in field.profile(ch, mode).iter().enumerate() {
                        w.serialize(GpRecord {
                            channel: ch,
                            mode,
                            bin,
                            re: z.re,
                            im: z.im,
                        })
                        .map_err(csv_err)?;
                    }
                }
            }
            w.flush()?;
        }
    }
    run.finish()
}

#[derive(Serialize)]
struct FilterCheckOutput {
    #[serde(flatten)]
    summary: Summary,
    tolerance: f64,
    trials: usize,
}

fn filter_check(c: &Common) -> Result<(), Failure> {
    let mut run = Run::open(c, Format::Json)?;
    let spec = run.config.filter_check()?.clone();
    let item = spec.run(run.config.seed);
    match run.format {
        Format::Json => {
            let summary = Summary {
                suite: "filter_check".into(),
                pass: item.pass,
                max_dev: item.max_dev,
                runtime_seconds: run.runtime(),
            };
            run.json(&FilterCheckOutput {
                summary,
                tolerance: item.tolerance,
                trials: spec.trials,
            })?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut run.out);
            w.serialize(&item).map_err(csv_err)?;
            w.flush()?;
        }
    }
    run.finish()?;
    if item.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "constraint deviation {:.3e} exceeds {:.3e}",
            item.max_dev, item.tolerance
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Kernel(c) => kernel(c),
        Command::Converge(c) => converge(c),
        Command::Check(c) => check(c),
        Command::SampleGp(c) => sample_gp(c),
        Command::FilterCheck(c) => filter_check(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("se2-nngp: check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("se2-nngp: error: {e}");
            ExitCode::from(2)
        }
    }
}
