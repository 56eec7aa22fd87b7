//! `bellprobe`: Bell-diagonal state identification and cavity-QED gate simulation.

mod commands;
mod qed_config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "bellprobe",
    version,
    about = "Nondestructive identification of Bell-diagonal states and cavity-QED gate simulation",
    after_help = "Cavity frequencies are in units of g_a and times in units of 1/g_a.\n\
                  Exit codes: 0 success, 1 check failure, 2 configuration error, 3 numerical abort."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the noiseless three-step identification on a Bell-diagonal state.
    Identify {
        /// Bell weights c1,c2,c3,c4 (nonnegative, summing to one).
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        coeffs: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the Bell weights from sampled probe outcomes.
    Sample {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        coeffs: Vec<f64>,
        /// Probe readouts per step.
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pool the recovery-pass readouts, doubling the shots per step.
        #[arg(long)]
        recovery_shots: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the protocol algebra: unitarity, factorization, Bell action,
    /// round trip and nondestructiveness.
    Verify {
        /// Random coefficient sets for the round-trip checks.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe expectation under the full cavity model and the effective coupling.
    QedSim {
        #[command(flatten)]
        qed: QedArgs,
        /// End of the time window, in units of 1/g_a.
        #[arg(long, default_value_t = 510.0)]
        t_max: f64,
        #[arg(long, default_value_t = 511)]
        n_samples: usize,
        #[arg(long, value_enum, default_value_t = SeriesFormat::Csv)]
        format: SeriesFormat,
        /// Time series output.
        #[arg(long)]
        out: PathBuf,
        /// Summary output; defaults to the series path with a `.json` extension.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Fidelity of the realized two-qubit factor at the first gate time.
    QedFidelity {
        #[command(flatten)]
        qed: QedArgs,
        /// Use the effective Hamiltonian instead of integrating the full model.
        #[arg(long)]
        effective_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct QedArgs {
    /// JSON file with g_a, omega_ra, delta_a, delta_b0, Delta_a, Delta_b0, delta_1, n_ph.
    #[arg(long)]
    params: PathBuf,
    /// Protocol step (1: XX, 2: YY, 3: ZZ coupling).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    step: u8,
    /// Residual-field formula used to tune delta_1.
    #[arg(long, value_enum, default_value_t = FieldArg::SecondOrder)]
    field: FieldArg,
    /// Keep delta_1 from the parameter file instead of tuning it.
    #[arg(long)]
    no_tune: bool,
    /// Integration step, in units of 1/g_a.
    #[arg(long, default_value_t = bellprobe::cavity_qed::DEFAULT_DT)]
    dt: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldArg {
    Published,
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesFormat {
    Csv,
    Json,
}

/// Failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub const CHECK_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NUMERICAL: u8 = 3;

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: Self::CONFIG,
            message: message.into(),
        }
    }

    pub fn check_failed(message: impl Into<String>) -> Self {
        Self {
            code: Self::CHECK_FAILED,
            message: message.into(),
        }
    }
}

impl From<bellprobe::Error> for CliError {
    fn from(e: bellprobe::Error) -> Self {
        let code = match e {
            bellprobe::Error::NormDrift { .. } => Self::NUMERICAL,
            _ => Self::CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integration_abort_maps_to_numerical_exit_code() {
        let drift = bellprobe::Error::NormDrift {
            time: 1.0,
            drift: 1e-3,
            limit: 1e-4,
        };
        assert_eq!(CliError::from(drift).code, CliError::NUMERICAL);
        let bad = bellprobe::Error::InvalidArgument("x".into());
        assert_eq!(CliError::from(bad).code, CliError::CONFIG);
    }
}
