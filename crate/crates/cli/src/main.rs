//! `sigma-lab`: command-line access to every lab operation.
//!
//! Exit status: 0 when the run met expectations, 1 when a checked claim met
//! a counterexample, 2 when items were left unresolved by the budget or
//! horizon, 64 on a usage error, 74 when output or the cache cannot be
//! written.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use sigma_lab::ExactRatio;

pub const EXIT_OK: u8 = 0;
pub const EXIT_COUNTEREXAMPLE: u8 = 1;
pub const EXIT_UNRESOLVED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

#[derive(Parser, Debug)]
#[command(name = "sigma-lab", version, about = "Exact checks on iterated sum-of-divisors dynamics")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Iteration horizon for σ-iteration searches
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub k_max: u32,
    /// Probe steps allowed per trace or per factorization
    #[arg(long, global = true, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_work: u64,
    /// Refuse to factor values with more decimal digits than this
    #[arg(long, global = true, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub digit_limit: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    /// Factorization cache file, created if missing
    #[arg(long, global = true, env = "SIGMA_LAB_CACHE")]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write data here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Factor one or more integers
    Factor {
        #[arg(required = true, value_parser = parse_positive)]
        n: Vec<BigUint>,
    },
    /// σ(n), the σ-iteration trace, or the power sum σ_k(n)
    Sigma {
        #[arg(value_parser = parse_positive)]
        n: BigUint,
        /// Trace σ^1(n), ..., σ^K(n)
        #[arg(long, value_name = "K", conflicts_with = "power")]
        iterate: Option<u32>,
        /// Power sum σ_K(n) instead of iteration
        #[arg(long, value_name = "K")]
        power: Option<u32>,
    },
    /// Aliquot trace s(n), s²(n), ... with cycle detection
    Aliquot {
        #[arg(value_parser = parse_positive)]
        n: BigUint,
        /// Steps to take (default: --k-max)
        #[arg(long)]
        steps: Option<u32>,
    },
    /// Smallest k with n | σ^k(n) for each n in a range
    CtrScan {
        #[arg(long, default_value_t = 2)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Retry budget-limited n once with this multiple of the budget
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        retry_factor: u64,
    },
    /// First k with n ∤ σ^k(n) for multiperfect n
    MetaScan {
        /// Multiperfect numbers to test (default: all up to --limit)
        #[arg(value_parser = parse_positive)]
        n: Vec<BigUint>,
        #[arg(long, default_value_t = 1_000_000)]
        limit: u32,
    },
    /// Multiperfect numbers up to a limit, with index and L invariant
    MpScan {
        #[arg(long, default_value_t = 1_000_000)]
        limit: u32,
    },
    /// Multiperfect numbers whose L invariant is prime
    Lprime {
        #[arg(long, default_value_t = 1_000_000)]
        limit: u32,
    },
    /// Period of k ↦ σ_k(n) mod σ(n) against L
    Periodicity {
        #[arg(required = true, value_parser = parse_positive)]
        n: Vec<BigUint>,
        /// Terms to sample (default max(4L, 24))
        #[arg(long)]
        horizon: Option<u32>,
    },
    /// σ_k(p^e) mod σ(p^e) against the gcd(k, e+1) formula over a grid
    PowersumCheck {
        /// Primes below this bound
        #[arg(long, default_value_t = 50)]
        p_below: u64,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
        e_max: u32,
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
        k_to: u32,
    },
    /// Smallest m whose aliquot iterates rise for k steps, for k = 1..=K
    Lenstra {
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long, default_value_t = 1_000_000)]
        m_max: u64,
    },
    /// Exceptions to the aliquot growth inequality over a range of m
    ErdosSample {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        #[arg(long, default_value = "9/10", value_parser = parse_ratio)]
        delta: ExactRatio,
        #[arg(long, default_value_t = 2)]
        from: u64,
        #[arg(long, default_value_t = 100_000)]
        to: u64,
        /// How many violating m to list
        #[arg(long, default_value_t = 20)]
        violators: usize,
    },
    /// Structure forced by σ(n) ≡ 0, σ_2(n) ≡ 2 (mod n) and 4 | n
    ConjectureScan {
        #[arg(long, default_value_t = 2)]
        from: u64,
        #[arg(long, default_value_t = 1_000_000)]
        to: u64,
    },
    /// Run every claim check and report PASS / FAIL / FINDING / UNRESOLVED
    VerifyAll {
        /// Run only these claims (repeatable)
        #[arg(long)]
        claim: Vec<String>,
        /// Horizon for the divisibility claim over n ≤ 400
        #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u32).range(1..))]
        ctr_k_max: u32,
        #[arg(long, default_value_t = 1_000_000)]
        mp_limit: u32,
    },
}

fn parse_positive(s: &str) -> Result<BigUint, String> {
    let n: BigUint = s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))?;
    if n == BigUint::from(0u32) {
        return Err("must be positive".into());
    }
    Ok(n)
}

fn parse_ratio(s: &str) -> Result<ExactRatio, String> {
    s.parse::<ExactRatio>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(commands::run(cli))
}
