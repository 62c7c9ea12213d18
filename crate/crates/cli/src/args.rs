use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dp2s::bench::{PowerOptions, TableId, DEFAULT_PERMUTATIONS};
use dp2s::two_sample::{TestConfig, ThresholdMode, DEFAULT_REPLICATES, DEFAULT_SEED, DEFAULT_TAIL};
use dp2s::BaseMeasure;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "dp2s", version, about = "Bayesian nonparametric two-sample test with Dirichlet-process posteriors")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Truncation level (atoms per DP realization)
    #[arg(long, global = true, default_value_t = dp2s::dp::DEFAULT_TRUNCATION)]
    pub n: usize,

    /// Number of posterior (and simulated prior) distance replicates
    #[arg(long, global = true, default_value_t = DEFAULT_REPLICATES)]
    pub r: usize,

    /// Prior concentration
    #[arg(long, global = true, default_value_t = 1.0)]
    pub a: f64,

    /// Base measure, e.g. normal:0,1  uniform:0,1  t:3  mixture:0.5,-2,1;0.5,2,1
    #[arg(long, global = true, default_value = "normal:0,1")]
    pub base: BaseMeasure,

    #[arg(long, global = true, env = "DP2S_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Threshold source: auto, simulate, table, formula or fixed:<value>
    #[arg(long, global = true, default_value = "auto")]
    pub mode: ThresholdMode,

    /// Upper fraction of prior distances removed when simulating U
    #[arg(long, global = true, default_value_t = DEFAULT_TAIL)]
    pub tail: f64,

    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the output here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    pub fn test_config(&self) -> TestConfig {
        TestConfig {
            n: self.n,
            r: self.r,
            a: self.a,
            base: self.base.clone(),
            seed: self.seed,
            threshold_mode: self.mode,
            tail: self.tail,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test whether two samples come from the same distribution
    Test {
        /// First sample: one number per line, '#' comments allowed
        x: PathBuf,
        /// Second sample
        y: PathBuf,
    },
    /// Print the threshold U for two sample sizes
    Threshold {
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
    },
    /// Estimate the power of the three tests on a simulation scenario
    Power {
        /// example1..example8 or power1..power5
        #[arg(long)]
        scenario: String,
        /// Size of both samples
        #[arg(long, conflicts_with_all = ["m1", "m2"])]
        m: Option<usize>,
        #[arg(long, requires = "m2")]
        m1: Option<usize>,
        #[arg(long, requires = "m1")]
        m2: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[command(flatten)]
        comparators: ComparatorArgs,
    },
    /// Recompute one of the reference tables as CSV
    Table {
        /// T1..T10
        #[arg(long)]
        id: TableId,
        /// Datasets per cell of the power tables (T4..T8)
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[command(flatten)]
        comparators: ComparatorArgs,
        /// Also write a JSON summary to this file
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Export DP realizations as (atom, cumulative weight) step paths
    Paths {
        /// Sample file; without it the prior is used
        data: Option<PathBuf>,
        /// Number of realizations
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ComparatorArgs {
    /// Label permutations for the K-S p-value
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    /// Level of the frequentist comparators
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

impl From<ComparatorArgs> for PowerOptions {
    fn from(c: ComparatorArgs) -> Self {
        PowerOptions { alpha: c.alpha, permutations: c.permutations }
    }
}
