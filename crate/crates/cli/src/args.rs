use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "weakcover", version, about = "Weak covering experiments on the unit cube", args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Covered fraction F_d(r, X_n) over an r-grid.
    Coverage(CoverageArgs),
    /// Radii r_{n,1-γ} at δ = 1 and at the best δ for (d, n) cells.
    Table1(Table1Args),
    /// Empirical and asymptotic n_γ over an r-grid.
    Ngamma(NgammaArgs),
    /// Ball-cube intersection probability: oracle, normal and Edgeworth.
    Intersect(IntersectArgs),
    /// Histogram of the normalised intersection κ_U.
    Kappa(KappaArgs),
    /// Uniform versus Sobol designs across dimensions.
    SobolCompare(SobolCompareArgs),
    /// Coverage as a function of δ at fixed (d, n, r).
    DeltaSweep(DeltaSweepArgs),
    /// Empirical and asymptotic radius quantiles.
    Radius(RadiusArgs),
    /// Dump a design to CSV.
    Design(DesignArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coverage(_) => "coverage",
            Command::Table1(_) => "table1",
            Command::Ngamma(_) => "ngamma",
            Command::Intersect(_) => "intersect",
            Command::Kappa(_) => "kappa",
            Command::SobolCompare(_) => "sobol-compare",
            Command::DeltaSweep(_) => "delta-sweep",
            Command::Radius(_) => "radius",
            Command::Design(_) => "design",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Coverage(a) => &a.common,
            Command::Table1(a) => &a.common,
            Command::Ngamma(a) => &a.common,
            Command::Intersect(a) => &a.common,
            Command::Kappa(a) => &a.common,
            Command::SobolCompare(a) => &a.common,
            Command::DeltaSweep(a) => &a.common,
            Command::Radius(a) => &a.common,
            Command::Design(a) => &a.common,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerKind {
    /// Monte Carlo with --inner samples.
    Mc,
    Edgeworth,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; every random stream derives from it.
    #[arg(long)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key = value file with default flag values; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Append a wall_time_s column (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
    /// Experiment id written in every row; defaults to the command name.
    #[arg(long)]
    pub experiment: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// uniform, beta, sobol or vertex.
    #[arg(long, default_value = "uniform")]
    pub scheme: String,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Shape of the beta scheme.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// uniform or beta.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[arg(long, default_value_t = 1.0)]
    pub prior_alpha: f64,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    /// Independent designs per estimate.
    #[arg(long, default_value_t = 4)]
    pub designs: usize,
    /// Targets per design.
    #[arg(long, default_value_t = 4000)]
    pub targets: usize,
}

#[derive(Args, Debug, Clone)]
pub struct CoverageArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: Option<f64>,
    /// Comma list or start:stop:step.
    #[arg(long)]
    pub r_grid: Option<String>,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Add the limiting curve 1 - exp(-n V_d r^d).
    #[arg(long)]
    pub asymptotic: bool,
    /// Add the Jensen bounds at U = 1/2 and U = 3/4.
    #[arg(long)]
    pub jensen: bool,
    /// Add 1 - (1 - p̄)^n from paired draws.
    #[arg(long)]
    pub product: bool,
    /// Inner probability method for the Jensen bounds.
    #[arg(long, value_enum, default_value_t = InnerKind::Mc)]
    pub inner_method: InnerKind,
    /// Inner Monte Carlo samples.
    #[arg(long, default_value_t = 200_000)]
    pub inner: usize,
    /// Edgeworth order when --inner-method edgeworth.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Table1Args {
    /// Cells as dxn, comma separated, or "all".
    #[arg(long, default_value = "10x1000,20x10000,50x100000")]
    pub cells: String,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    /// Coarse δ-grid; the best value is refined by ± --refine-step.
    #[arg(long, default_value = "0.1:1.0:0.1")]
    pub delta_grid: String,
    #[arg(long, default_value_t = 0.05)]
    pub refine_step: f64,
    #[arg(long, default_value_t = 0.005)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub designs: usize,
    #[arg(long, default_value_t = 2000)]
    pub targets: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct NgammaArgs {
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    /// Required except for d = 20 and d = 50, which have built-in grids.
    #[arg(long)]
    pub r_grid: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value = "0.05:1.0:0.05")]
    pub delta_grid: String,
    #[arg(long, default_value_t = 1 << 22)]
    pub n_cap: usize,
    #[arg(long, default_value_t = 2)]
    pub designs: usize,
    #[arg(long, default_value_t = 2000)]
    pub targets: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct IntersectArgs {
    #[arg(long)]
    pub dim: usize,
    /// Centre: one value repeated in every coordinate, or a comma list.
    #[arg(long, default_value = "0.5")]
    pub u: String,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub r_grid: String,
    /// Oracle samples.
    #[arg(long, default_value_t = 1_000_000)]
    pub inner: usize,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct KappaArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Number of centres U.
    #[arg(long, default_value_t = 2000)]
    pub targets: usize,
    /// Samples of X per centre.
    #[arg(long, default_value_t = 20_000)]
    pub inner: usize,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Fix U instead of drawing it uniformly (scalar or comma list).
    #[arg(long)]
    pub u: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct SobolCompareArgs {
    #[arg(long, default_value = "5,10,15,20,25,30,40,50")]
    pub dims: String,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    /// Fixed radius; by default the asymptotic radius for (d, n, γ).
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value = "0.05:1.0:0.05")]
    pub delta_grid: String,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct DeltaSweepArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value = "0.05:1.0:0.05")]
    pub delta_grid: String,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct RadiusArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.005)]
    pub tol: f64,
    /// Also minimise the radius over this δ-grid.
    #[arg(long)]
    pub delta_grid: Option<String>,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub common: Common,
}
