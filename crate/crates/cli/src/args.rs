use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use shatterlab::compose::DEFAULT_COMPOSE_CAP;
use shatterlab::cover::{ClassDistance, CoverMode, LogBase, DEFAULT_EXACT_LIMIT, DEFAULT_PRODUCT_CAP};
use shatterlab::pacsim::ErrorEstimator;

use crate::report::Format;

/// Exact shattering, fat-shattering and covering computations on finite
/// concept and function classes.
#[derive(Debug, Parser)]
#[command(name = "shatterlab", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, env = "SHATTERLAB_THREADS")]
    pub threads: Option<usize>,
    /// Slack applied to fat-shattering threshold comparisons.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub tolerance: f64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Largest composed class that may be materialised.
    #[arg(long, global = true, default_value_t = DEFAULT_COMPOSE_CAP)]
    pub class_cap: u128,
    /// Largest product space that may be materialised for covering.
    #[arg(long, global = true, default_value_t = DEFAULT_PRODUCT_CAP)]
    pub cover_cap: usize,
    /// Above this many points exact covering falls back to greedy.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub const_c: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub const_c_prime: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub const_k: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub const_k_prime: f64,
    /// natural, 2 or 10.
    #[arg(long, global = true, default_value = "natural")]
    pub log_base: LogBase,
}

#[derive(Debug, Clone, Args)]
pub struct Input {
    /// Class document (JSON).
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct Scales {
    /// One or more scales, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricSource {
    /// Class document; the metric is built from its class.
    #[arg(long, short, conflicts_with = "matrix", required_unless_present = "matrix")]
    pub input: Option<PathBuf>,
    /// JSON distance matrix.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// l2, expected-abs or symdiff.
    #[arg(long, default_value = "l2")]
    pub distance: ClassDistance,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// VC dimension of the document's concepts.
    Vc(Input),
    /// Fat-shattering dimension of the document's functions.
    Fat {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        scales: Scales,
    },
    /// Growth function next to the Sauer bound.
    Growth {
        #[command(flatten)]
        input: Input,
        /// Largest n; defaults to the number of points.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Sauer bound (e·n/d)^d.
    Sauer {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        n: Vec<usize>,
    },
    /// Covering numbers of a class metric or distance matrix.
    Cover {
        #[command(flatten)]
        source: MetricSource,
        #[command(flatten)]
        scales: Scales,
        #[arg(long, default_value = "exact")]
        mode: CoverMode,
    },
    /// Covering numbers of the concepts under the weighted symmetric difference.
    Entropy {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        scales: Scales,
    },
    /// Compose the document's `classes` with a classical connective.
    ComposeC {
        #[command(flatten)]
        input: Input,
        /// Catalog name, a `truth_tables` entry or a literal table like 0110.
        #[arg(long)]
        connective: String,
    },
    /// Compose the document's `classes` with a continuous connective.
    ComposeF {
        #[command(flatten)]
        input: Input,
        /// mul, min, max, mean or neg.
        #[arg(long)]
        connective: String,
    },
    /// alpha_k, the smallest integer alpha with k < alpha / log(e·alpha).
    Alpha {
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        k: Vec<usize>,
    },
    /// Fat dimension of a continuous composition against its upper bound.
    BoundMain {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        connective: String,
        #[arg(long)]
        eps: f64,
    },
    /// Entropy bounds in terms of the fat dimension, next to the L2 cover.
    BoundMv {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        scales: Scales,
    },
    /// Checks that exit with status 3 when a violation is found.
    #[command(subcommand)]
    Verify(Verify),
    /// Rectangle-learning simulation.
    PacRect(PacRect),
    /// Scale-sensitive counterexample class built from a concept class.
    Counterexample {
        /// Concept class document; defaults to the powerset of --powerset points.
        #[arg(long, short, conflicts_with = "powerset")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        powerset: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Sampled uniform-continuity test of a connective's declared modulus.
    Modulus {
        #[arg(long)]
        connective: String,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.1,0.25,0.5,1")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Replace the declared modulus by min(a·eps, 1).
        #[arg(long)]
        linear_modulus: Option<f64>,
    },
    /// Modulus of the induced map on tuples of the document's `classes`.
    Phi {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        connective: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.25,0.5")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
    /// Composed cover number against the product of factor covers.
    Chain {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        connective: String,
        #[command(flatten)]
        scales: Scales,
    },
    /// Product-space cover against the product of factor covers.
    Product {
        /// Class document whose `classes` give the factors.
        #[arg(long, short, required_unless_present = "matrix")]
        input: Option<PathBuf>,
        /// Distance matrix of one factor; repeat for each factor.
        #[arg(long)]
        matrix: Vec<PathBuf>,
        #[arg(long, default_value = "l2")]
        distance: ClassDistance,
        #[command(flatten)]
        scales: Scales,
    },
    /// Image of a grid under a connective against the domain cover.
    Image {
        #[arg(long)]
        connective: String,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        /// Grid step 1/grid in each coordinate.
        #[arg(long, default_value_t = 4)]
        grid: usize,
        #[command(flatten)]
        scales: Scales,
        /// Replace the declared modulus by min(a·eps, 1).
        #[arg(long)]
        linear_modulus: Option<f64>,
    },
    /// Growth against the Sauer bound; random classes when no input is given.
    Sauer {
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        max_points: usize,
    },
    /// Fat dimension of indicators against VC; random classes when no input is given.
    BinaryEq {
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.1,0.3,0.5")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_points: usize,
    },
    /// Composed VC against d·alpha_k; random instances when no input is given.
    VcComp {
        #[arg(long, short, requires = "connective")]
        input: Option<PathBuf>,
        #[arg(long)]
        connective: Option<String>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        max_points: usize,
        #[arg(long, default_value_t = 2)]
        max_vc: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PacRect {
    /// Experiment JSON; replaces every other experiment flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Sample size per trial, or `auto` for the sufficient size.
    #[arg(long, default_value = "auto")]
    pub m: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Target as x_min,x_max,y_min,y_max.
    #[arg(long, value_delimiter = ',', num_args = 4, default_value = "0.25,0.75,0.25,0.75")]
    pub target: Vec<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    pub estimator: EstimatorArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EstimatorArg {
    Exact,
    MonteCarlo,
}

impl From<EstimatorArg> for ErrorEstimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Exact => ErrorEstimator::Exact,
            EstimatorArg::MonteCarlo => ErrorEstimator::MonteCarlo,
        }
    }
}
