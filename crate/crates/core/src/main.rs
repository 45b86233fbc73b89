use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leelab::cli::{run, CommandKind, RunOptions};

/// Bound-state laboratory for a two-level impurity coupled to relativistic
/// bosons on a compact surface, driven by the principal-operator resolvent.
#[derive(Parser)]
#[command(name = "leelab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; the desk-scale defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides LEELAB_OUT and the config's output block).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Enable the explicit truncated-Hamiltonian cross-checks.
    #[arg(long)]
    oracle: bool,
    /// Recompute even when a cached report exists.
    #[arg(long)]
    no_cache: bool,
    /// Worker threads for grid scans (defaults to all cores).
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the bare mass mu(Lambda) over cutoffs and fit its log divergence
    Renorm(Common),
    /// Track the eigenvalue flow of Phi(E) over a spectral-parameter window
    Flow(Common),
    /// Root-find omega0(E) = 0 and reconstruct the ground-state wavefunction
    Groundstate(Common),
    /// Evaluate the analytic upper/lower bounds and the sandwich test
    Bounds(Common),
    /// Pseudo-resolvent identity, adjoint symmetry and decay checks
    ResolventCheck(Common),
    /// Heat-kernel diagnostics on the configured surface
    Heatkernel(Common),
    /// Continuum light-front bounds by adaptive quadrature
    LightfrontBounds(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Cmd::Renorm(c) => (CommandKind::Renorm, c),
        Cmd::Flow(c) => (CommandKind::Flow, c),
        Cmd::Groundstate(c) => (CommandKind::Groundstate, c),
        Cmd::Bounds(c) => (CommandKind::Bounds, c),
        Cmd::ResolventCheck(c) => (CommandKind::ResolventCheck, c),
        Cmd::Heatkernel(c) => (CommandKind::Heatkernel, c),
        Cmd::LightfrontBounds(c) => (CommandKind::LightfrontBounds, c),
    };
    let options = RunOptions {
        config_path: common.config,
        out_dir: common.out,
        oracle: common.oracle,
        no_cache: common.no_cache,
        threads: common.threads,
    };
    ExitCode::from(run(kind, &options))
}
