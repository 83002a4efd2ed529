use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mahler",
    version,
    about = "Irrationality exponents of Mahler numbers"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// Gaps are enumerated for denominator degrees up to this value.
    #[arg(long, global = true, default_value_t = 200)]
    pub horizon: i64,
    /// Successor steps per primitive gap sequence.
    #[arg(long, global = true, default_value_t = 24)]
    pub steps: usize,
    /// Number of agreeing entries required to accept a period.
    #[arg(long, global = true, default_value_t = 8)]
    pub window: usize,
    /// Decimal digits for evaluating f(b).
    #[arg(long, global = true, default_value_t = 5000)]
    pub digits: u32,
    /// Evaluation point; repeatable.
    #[arg(long = "b", global = true, allow_negative_numbers = true)]
    pub b: Vec<String>,
    /// Output selection: report, csv, gaps or series, optionally KIND=PATH.
    #[arg(long, global = true)]
    pub emit: Vec<String>,
    /// Value for a free coefficient, as index=rational; repeatable.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seed: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degree candidates and leading coefficients of the series solution.
    Expand {
        file: String,
        /// Number of coefficients to print.
        #[arg(short, long, default_value_t = 20)]
        n: usize,
        /// Plain text instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// Continued fraction of the series.
    Cf {
        file: String,
        /// Expand until a convergent denominator reaches this degree.
        #[arg(long, default_value_t = 20)]
        degree: i64,
    },
    /// Gap table with big and primitive flags.
    Gaps {
        file: String,
        /// Successor denominators are not followed past this degree.
        #[arg(long, default_value_t = 20_000)]
        max_degree: i64,
    },
    /// Irrationality exponent of f(b).
    Mu {
        file: String,
        /// Skip the rationality analysis (results are then at most conjectural).
        #[arg(long)]
        no_rationality: bool,
    },
    /// Decimal value of f(b).
    Eval { file: String },
    /// Rationality analysis of the exponent.
    CheckRationality { file: String },
    /// Full report, rational approximations and plot data.
    Report {
        file: String,
        /// Approximation levels m = 1..levels.
        #[arg(long, default_value_t = 6)]
        levels: u32,
    },
}

impl Command {
    pub fn file(&self) -> &str {
        match self {
            Command::Expand { file, .. }
            | Command::Cf { file, .. }
            | Command::Gaps { file, .. }
            | Command::Mu { file, .. }
            | Command::Eval { file }
            | Command::CheckRationality { file }
            | Command::Report { file, .. } => file,
        }
    }
}
