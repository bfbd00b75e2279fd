//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_angles, parse_complex, CoinChoice, Format, InitSection, Mode, OutputSection,
    PartialConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Quantum walks on the line: exact evolution and Monte Carlo estimates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single evolution or estimate and write its distribution.
    Simulate {
        /// discrete_mc, discrete_reference, discrete_series, continuous_mc or continuous_reference.
        #[arg(long)]
        mode: Option<Mode>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo estimate side by side with the exact distribution.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Total-variation error against the sample count, with a log-log slope.
    Convergence {
        /// Increasing sample counts, e.g. 10000,100000,1000000.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<u64>>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML experiment manifest; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named coin preset (hadamard, identity).
    #[arg(long, conflicts_with = "angles")]
    pub coin: Option<String>,
    /// Coin angles δ,λ1,λ2,λ3; multiples of pi such as 3pi/2 are accepted.
    #[arg(long, value_parser = parse_angles, allow_hyphen_values = true)]
    pub angles: Option<[f64; 4]>,
    /// Initial amplitude on the +1 coin state, as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha: Option<[f64; 2]>,
    /// Initial amplitude on the −1 coin state, as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub beta: Option<[f64; 2]>,
    /// Number of discrete steps.
    #[arg(long, conflicts_with = "time")]
    pub steps: Option<usize>,
    /// Continuous evolution time.
    #[arg(long)]
    pub time: Option<f64>,
    /// Jump rate λ of the continuous walk.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: $QWALK_WORKERS, else all cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output stem; each format is written to <OUT>.<ext>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

impl CommonArgs {
    fn to_partial(&self) -> PartialConfig {
        let coin = match (&self.coin, self.angles) {
            (Some(name), _) => Some(CoinChoice::Preset(name.clone())),
            (None, Some([delta, lambda1, lambda2, lambda3])) => Some(CoinChoice::Angles {
                delta,
                lambda1,
                lambda2,
                lambda3,
            }),
            (None, None) => None,
        };
        let init = (self.alpha.is_some() || self.beta.is_some()).then_some(InitSection {
            alpha: self.alpha,
            beta: self.beta,
        });
        let output = (self.out.is_some() || self.format.is_some()).then(|| OutputSection {
            path: self.out.clone(),
            formats: self.format.clone(),
        });
        PartialConfig {
            mode: None,
            coin,
            init,
            steps: self.steps,
            time: self.time,
            rate: self.rate,
            samples: self.samples,
            seed: self.seed,
            workers: self.workers,
            grid: None,
            output,
        }
    }
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate { common, .. }
            | Command::Compare { common }
            | Command::Convergence { common, .. } => common,
        }
    }

    /// Flag values as a partial config; the subcommand fixes the mode for
    /// `compare` and `convergence`.
    pub fn to_partial(&self) -> PartialConfig {
        let mut partial = self.common().to_partial();
        match self {
            Command::Simulate { mode, .. } => partial.mode = *mode,
            Command::Compare { .. } => partial.mode = Some(Mode::Compare),
            Command::Convergence { grid, .. } => {
                partial.mode = Some(Mode::Convergence);
                partial.grid = grid.clone();
            }
        }
        partial
    }
}
