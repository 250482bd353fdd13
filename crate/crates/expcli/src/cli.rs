//! Command-line surface. Every flag mirrors a config-file key; flags
//! override file values, and the resolved set is written next to outputs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "expcli",
    about = "Rank scans, Lie closures, trainings and phase-diagram sweeps for variational unitary learning",
    disable_help_subcommand = true
)]
pub struct Cli {
    /// Flat key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Effective-dimension scans: R_L, M_c, R_inf, L_c and the rank curves.
    Rank(RankArgs),
    /// Dynamical Lie algebra dimension for a family's generator set.
    Dla(DlaArgs),
    /// Seeded training repetitions for a single (M, L) cell.
    Train(TrainArgs),
    /// (M, L, seed) training sweep with the predicted phase boundary.
    Sweep(SweepArgs),
    /// Isometry degree-of-freedom bound 2dL − L² − 1 (saturating at d² − 1).
    Bound(BoundArgs),
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Ansatz family: he | xy | xy-open | xxz | y-cz.
    #[arg(long)]
    pub family: Option<String>,
    /// Number of qubits.
    #[arg(long)]
    pub n: Option<usize>,
    /// Training ensemble: haar | product | sector:<p> | comp.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Master seed; per-cell streams derive from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (env EXPCLI_OUT_DIR overrides).
    #[arg(long)]
    pub out_dir: Option<String>,
    /// Worker threads, 0 = core count (env EXPCLI_WORKERS overrides).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl CommonArgs {
    fn apply(&self, s: &mut Settings) {
        if let Some(v) = &self.family {
            s.set("family", v.clone());
        }
        if let Some(v) = self.n {
            s.set("n", v.to_string());
        }
        if let Some(v) = &self.ensemble {
            s.set("ensemble", v.clone());
        }
        if let Some(v) = self.seed {
            s.set("seed", v.to_string());
        }
        if let Some(v) = &self.out_dir {
            s.set("out_dir", v.clone());
        }
        if let Some(v) = self.workers {
            s.set("workers", v.to_string());
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct RankArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Scan L = 1..=lmax.
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Explicit ascending L list starting at 1 (overrides --lmax).
    #[arg(long, value_delimiter = ',')]
    pub l_grid: Option<Vec<usize>>,
    /// Random parameter draws per depth.
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Unchanged depth increments that close the scan.
    #[arg(long)]
    pub plateau_window: Option<usize>,
    /// Dataset redraws (max rank kept).
    #[arg(long)]
    pub n_data: Option<usize>,
    /// Depth budget.
    #[arg(long)]
    pub g_max: Option<usize>,
    /// Basis cap for the companion Lie closure (0 skips it).
    #[arg(long)]
    pub dla_cap: Option<usize>,
}

impl RankArgs {
    pub fn apply(&self, s: &mut Settings) {
        self.common.apply(s);
        if let Some(v) = self.lmax {
            s.set("lmax", v.to_string());
        }
        if let Some(v) = &self.l_grid {
            s.set(
                "l_grid",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            );
        }
        if let Some(v) = self.n_theta {
            s.set("n_theta", v.to_string());
        }
        if let Some(v) = self.plateau_window {
            s.set("plateau_window", v.to_string());
        }
        if let Some(v) = self.n_data {
            s.set("n_data", v.to_string());
        }
        if let Some(v) = self.g_max {
            s.set("g_max", v.to_string());
        }
        if let Some(v) = self.dla_cap {
            s.set("dla_cap", v.to_string());
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct DlaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Closure basis cap; reaching it flags the span truncated (exit 3).
    #[arg(long)]
    pub cap: Option<usize>,
}

impl DlaArgs {
    pub fn apply(&self, s: &mut Settings) {
        self.common.apply(s);
        if let Some(v) = self.cap {
            s.set("cap", v.to_string());
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct TrainOpts {
    /// Optimizer: bfgs | adam | gd.
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// E-crossing threshold on C_train (also the stop unless
    /// --stop-threshold is given).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Optional deeper stopping cost (keep minimizing past the crossing).
    #[arg(long)]
    pub stop_threshold: Option<f64>,
    /// Local-minimum stop on the gradient norm.
    #[arg(long)]
    pub grad_threshold: Option<f64>,
    /// Monte-Carlo test states.
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Test ensemble (defaults to the training ensemble).
    #[arg(long)]
    pub test_ensemble: Option<String>,
    /// Depth at which the target parameter θ_g is drawn.
    #[arg(long)]
    pub target_g: Option<usize>,
}

impl TrainOpts {
    fn apply(&self, s: &mut Settings) {
        if let Some(v) = &self.optimizer {
            s.set("optimizer", v.clone());
        }
        if let Some(v) = self.learning_rate {
            s.set("learning_rate", v.to_string());
        }
        if let Some(v) = self.max_steps {
            s.set("max_steps", v.to_string());
        }
        if let Some(v) = self.threshold {
            s.set("convergence_threshold", v.to_string());
        }
        if let Some(v) = self.stop_threshold {
            s.set("stop_threshold", v.to_string());
        }
        if let Some(v) = self.grad_threshold {
            s.set("gradient_threshold", v.to_string());
        }
        if let Some(v) = self.n_test {
            s.set("n_test", v.to_string());
        }
        if let Some(v) = &self.test_ensemble {
            s.set("test_ensemble", v.clone());
        }
        if let Some(v) = self.target_g {
            s.set("target_g", v.to_string());
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Circuit depth G (M = G·K parameters).
    #[arg(long)]
    pub g: Option<usize>,
    /// Training-set size.
    #[arg(long)]
    pub l: Option<usize>,
    /// Seeded repetitions.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Start from θ_g instead of a random parameter.
    #[arg(long)]
    pub theta0_from_target: bool,
}

impl TrainArgs {
    pub fn apply(&self, s: &mut Settings) {
        self.common.apply(s);
        self.opts.apply(s);
        if let Some(v) = self.g {
            s.set("g", v.to_string());
        }
        if let Some(v) = self.l {
            s.set("l", v.to_string());
        }
        if let Some(v) = self.reps {
            s.set("reps", v.to_string());
        }
        if self.theta0_from_target {
            s.set("theta0_from_target", "true".into());
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Depth grid (one M = G·K column per entry).
    #[arg(long, value_delimiter = ',')]
    pub g_grid: Option<Vec<usize>>,
    /// Training-set-size grid.
    #[arg(long, value_delimiter = ',')]
    pub l_grid: Option<Vec<usize>>,
    /// Seeded repetitions per cell.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Skip the predicted-boundary overlay computation.
    #[arg(long)]
    pub no_overlay: bool,
    /// Depth budget for the overlay rank scans.
    #[arg(long)]
    pub overlay_g_max: Option<usize>,
}

impl SweepArgs {
    pub fn apply(&self, s: &mut Settings) {
        self.common.apply(s);
        self.opts.apply(s);
        if let Some(v) = &self.g_grid {
            s.set(
                "g_grid",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            );
        }
        if let Some(v) = &self.l_grid {
            s.set(
                "l_grid",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            );
        }
        if let Some(v) = self.reps {
            s.set("reps", v.to_string());
        }
        if self.no_overlay {
            s.set("no_overlay", "true".into());
        }
        if let Some(v) = self.overlay_g_max {
            s.set("overlay_g_max", v.to_string());
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct BoundArgs {
    /// Hilbert dimension d (alternatively give --n for d = 2^n).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest L to print.
    #[arg(long)]
    pub lmax: Option<usize>,
}

impl BoundArgs {
    pub fn apply(&self, s: &mut Settings) {
        if let Some(v) = self.d {
            s.set("d", v.to_string());
        }
        if let Some(v) = self.n {
            s.set("n", v.to_string());
        }
        if let Some(v) = self.lmax {
            s.set("lmax", v.to_string());
        }
    }
}
