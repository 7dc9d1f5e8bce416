use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symext::{OracleOptions, Symmetry};

use crate::decide::Method;

#[derive(Parser, Debug)]
#[command(name = "symext", version, about = "Symmetric extendibility of bipartite states and channel degradability")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a state has a symmetric extension.
    Check {
        file: PathBuf,
        #[command(flatten)]
        decide: DecideArgs,
        #[arg(long)]
        json: bool,
    },
    /// Write a symmetric extension of an extendible state.
    Extend {
        file: PathBuf,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        decide: DecideArgs,
        #[arg(long)]
        json: bool,
    },
    /// Check that an extension file is a symmetric extension of a state file.
    VerifyExtension {
        extension: PathBuf,
        state: PathBuf,
        #[arg(long, default_value_t = symext::oracle::WITNESS_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Channel operations on a Kraus file.
    Channel {
        #[command(subcommand)]
        command: ChannelCommand,
    },
    /// Worked examples with their verdicts recomputed.
    Gallery {
        #[command(subcommand)]
        name: GalleryCommand,
    },
    /// Parameter sweeps written as CSV.
    Scan {
        #[command(subcommand)]
        family: ScanCommand,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Auto,
    Spectrum,
    Conjecture,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Spectrum => Method::Spectrum,
            MethodArg::Conjecture => Method::Conjecture,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SymmetryArg {
    Any,
    Bosonic,
    Fermionic,
}

impl From<SymmetryArg> for Symmetry {
    fn from(s: SymmetryArg) -> Self {
        match s {
            SymmetryArg::Any => Symmetry::Any,
            SymmetryArg::Bosonic => Symmetry::Bosonic,
            SymmetryArg::Fermionic => Symmetry::Fermionic,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value_t = SymmetryArg::Any)]
    pub symmetry: SymmetryArg,
    /// Residual below which the oracle accepts.
    #[arg(long, default_value_t = OracleOptions::default().tol_feasible)]
    pub tol: f64,
    /// Residual floor above which a stalled oracle rejects.
    #[arg(long, default_value_t = OracleOptions::default().tol_infeasible)]
    pub tol_infeasible: f64,
    #[arg(long, default_value_t = OracleOptions::default().max_iterations)]
    pub max_iterations: usize,
    /// Accepted for reproducibility records; all methods here are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OracleArgs {
    pub fn options(&self) -> OracleOptions {
        OracleOptions {
            symmetry: self.symmetry.into(),
            tol_feasible: self.tol,
            tol_infeasible: self.tol_infeasible,
            max_iterations: self.max_iterations,
            ..OracleOptions::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct DecideArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[command(flatten)]
    pub oracle: OracleArgs,
}

#[derive(Subcommand, Debug)]
pub enum ChannelCommand {
    /// Degradable, anti-degradable, both or neither.
    Classify {
        kraus: PathBuf,
        /// Skip the closed-form two-qubit verdicts and the environment bound.
        #[arg(long)]
        no_shortcuts: bool,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        json: bool,
    },
    /// Write the Choi state.
    Choi {
        kraus: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a minimal complementary channel.
    Complement {
        kraus: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GalleryCommand {
    /// `I/2 ⊗ Φ⁺` with Alice holding two qubits.
    Example1,
    /// A qutrit-qubit state rescued from the spectrum condition by a local filter.
    Example2,
    /// The qubit-qutrit family with positive coherent information after filtering.
    Example3 {
        #[arg(long, default_value_t = 0.75)]
        s: f64,
        /// Filter weight on `|0⟩`.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Qutrit state with a fermionic but no bosonic extension.
    QutritFermionic,
    /// Werner sweep comparing closed form, conjecture and oracle.
    Werner {
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RangeArgs {
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

impl RangeArgs {
    /// `steps + 1` evenly spaced points from `from` to `to`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps.max(1);
        (0..=n)
            .map(|k| self.from + (self.to - self.from) * k as f64 / n as f64)
            .collect()
    }
}

#[derive(Subcommand, Debug)]
pub enum ScanCommand {
    /// `p Φ⁺ + (1 − p) I/4` over a range of `p`.
    Werner {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Bell-diagonal states on a simplex grid: inequality form vs. conjecture form.
    Bell {
        /// Grid resolution; points are compositions of `grid` into four parts.
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Seeded Z-correlated draws with no `y` coupling: closed-form vs. grid bound.
    Zcorr {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Amplitude damping classification over a range of transmissivities.
    AmplitudeDamping {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        no_shortcuts: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}
