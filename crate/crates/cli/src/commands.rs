use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dp2s::bench::{estimate_power, reproduce_table, scenario_by_key, PowerOptions, TableOptions};
use dp2s::kernel::rng::label_key;
use dp2s::kernel::QuantileCache;
use dp2s::two_sample::{formula_applies, resolve_threshold, run_test, TestConfig, ThresholdSource};
use dp2s::{DpParams, DpSampler, RngStream};
use serde::Serialize;

use crate::args::{Cli, Command, CommonArgs, ComparatorArgs, Format};
use crate::input::parse_sample_file;
use crate::render::{self, csv_rows, json, ReportCsvRow};

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or arguments, detected before any simulation.
    Usage(anyhow::Error),
    /// Anything that fails while reading input or computing.
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(e) | Self::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

/// Validates the arguments, then runs the subcommand on a thread pool of
/// the requested size.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.common.test_config();
    config.validate().map_err(usage)?;
    validate_command(&cli.command)?;

    let work = || execute(&cli, &config).map_err(CliError::Runtime);
    match cli.common.threads {
        None => work(),
        Some(0) => Err(usage(anyhow!("--threads must be at least 1"))),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Runtime(e.into()))?
            .install(work),
    }
}

fn validate_command(command: &Command) -> Result<(), CliError> {
    let comparators = |c: &ComparatorArgs| {
        if c.permutations == 0 {
            return Err(usage(anyhow!("--permutations must be at least 1")));
        }
        if !(c.alpha > 0.0 && c.alpha < 1.0) {
            return Err(usage(anyhow!("--alpha must lie in (0, 1)")));
        }
        Ok(())
    };
    match command {
        Command::Threshold { m1, m2 } if *m1 == 0 || *m2 == 0 => Err(usage(anyhow!("sample sizes must be positive"))),
        Command::Power { m, m1, m2, reps, comparators: c, .. } => {
            if m.is_none() && m1.is_none() {
                return Err(usage(anyhow!("give --m, or both --m1 and --m2")));
            }
            if m.or(*m1).unwrap_or(0) == 0 || m2.unwrap_or(1) == 0 {
                return Err(usage(anyhow!("sample sizes must be positive")));
            }
            if *reps == 0 {
                return Err(usage(anyhow!("--reps must be at least 1")));
            }
            comparators(c)
        }
        Command::Table { reps, comparators: c, .. } => {
            if *reps == 0 {
                return Err(usage(anyhow!("--reps must be at least 1")));
            }
            comparators(c)
        }
        Command::Paths { count: 0, .. } => Err(usage(anyhow!("--count must be at least 1"))),
        _ => Ok(()),
    }
}

fn warn_formula(source: ThresholdSource, m1: usize, m2: usize) {
    if source == ThresholdSource::Formula && !formula_applies(m1, m2) {
        eprintln!("warning: the threshold formula is calibrated for sample sizes of at least 20 (got {m1} and {m2})");
    }
}

fn execute(cli: &Cli, config: &TestConfig) -> Result<()> {
    let common = &cli.common;
    let output = match &cli.command {
        Command::Test { x, y } => {
            let xs = parse_sample_file(x)?;
            let ys = parse_sample_file(y)?;
            let report = run_test(&xs, &ys, config)?;
            warn_formula(report.threshold_source, report.m1, report.m2);
            match common.format {
                Format::Text => render::report_text(&report),
                Format::Csv => csv_rows([ReportCsvRow::from(&report)])?,
                Format::Json => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        inputs: [&'a Path; 2],
                        #[serde(flatten)]
                        report: &'a dp2s::TestReport,
                    }
                    json("test", Body { inputs: [x, y], report: &report })?
                }
            }
        }
        Command::Threshold { m1, m2 } => {
            let (u, source) = resolve_threshold(*m1, *m2, config, &QuantileCache::new())?;
            warn_formula(source, *m1, *m2);
            #[derive(Serialize)]
            struct Row {
                m1: usize,
                m2: usize,
                #[serde(rename = "U")]
                u: f64,
                threshold_source: ThresholdSource,
            }
            let row = Row { m1: *m1, m2: *m2, u, threshold_source: source };
            match common.format {
                Format::Text => format!("{}\n", render::threshold_line(u, source)),
                Format::Csv => csv_rows([row])?,
                Format::Json => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        #[serde(flatten)]
                        row: Row,
                        config: &'a TestConfig,
                    }
                    json("threshold", Body { row, config })?
                }
            }
        }
        Command::Power { scenario, m, m1, m2, reps, comparators } => {
            let (m1, m2) = match (m, m1, m2) {
                (Some(m), _, _) => (*m, *m),
                (None, Some(a), Some(b)) => (*a, *b),
                _ => bail!("missing sample sizes"),
            };
            let s = scenario_by_key(scenario, m1, m2)?;
            let result = estimate_power(&s, *reps, config, &PowerOptions::from(*comparators))?;
            match common.format {
                Format::Text => render::power_text(&result),
                Format::Csv => csv_rows([render::PowerCsvRow::from(&result)])?,
                Format::Json => {
                    #[derive(Serialize)]
                    struct Body<'a> {
                        comparators: &'a ComparatorArgs,
                        config: &'a TestConfig,
                        result: &'a dp2s::PowerResult,
                    }
                    json("power", Body { comparators, config, result: &result })?
                }
            }
        }
        Command::Table { id, reps, comparators, summary } => {
            let options = TableOptions { replications: *reps, power: PowerOptions::from(*comparators) };
            let rows = reproduce_table(*id, config, &options)?;
            #[derive(Serialize)]
            struct Body<'a> {
                table: String,
                replications: usize,
                comparators: &'a ComparatorArgs,
                config: &'a TestConfig,
                rows: &'a [dp2s::bench::TableRow],
            }
            let body = || Body {
                table: id.to_string(),
                replications: *reps,
                comparators,
                config,
                rows: &rows,
            };
            if let Some(path) = summary {
                write_file(path, &json("table", body())?)?;
            }
            match common.format {
                Format::Text | Format::Csv => render::table_csv(&rows)?,
                Format::Json => json("table", body())?,
            }
        }
        Command::Paths { data, count } => paths(common, config, data.as_deref(), *count)?,
    };
    emit(common.out.as_deref(), &output)
}

#[derive(Serialize)]
struct PathPoint {
    realization: usize,
    atom: f64,
    cumulative_weight: f64,
}

fn paths(common: &CommonArgs, config: &TestConfig, data: Option<&Path>, count: usize) -> Result<String> {
    let prior = DpParams::prior(config.a, config.base.clone())?;
    let params = match data {
        Some(p) => prior.posterior(&parse_sample_file(p)?)?,
        None => prior,
    };
    let sampler = DpSampler::new(params, config.n)?;
    let root = RngStream::new(config.seed, 0).derive(label_key("paths"));
    let mut points = Vec::new();
    let mut measures = Vec::with_capacity(count);
    for k in 0..count {
        let m = sampler.draw(root.with_stream(k as u64))?;
        for (&atom, &cw) in m.atoms().iter().zip(m.cum_weights()) {
            points.push(PathPoint { realization: k, atom, cumulative_weight: cw });
        }
        measures.push(m);
    }
    match common.format {
        Format::Text | Format::Csv => csv_rows(points),
        Format::Json => {
            #[derive(Serialize)]
            struct Path<'a> {
                atoms: &'a [f64],
                cum_weights: &'a [f64],
            }
            #[derive(Serialize)]
            struct Body<'a> {
                config: &'a TestConfig,
                data: Option<&'a std::path::Path>,
                realizations: Vec<Path<'a>>,
            }
            let realizations = measures.iter().map(|m| Path { atoms: m.atoms(), cum_weights: m.cum_weights() }).collect();
            json("paths", Body { config, data, realizations })
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
