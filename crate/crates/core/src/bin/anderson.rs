use std::path::PathBuf;
use std::process::ExitCode;

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::eigensolve::{full_spectrum, Interval};
use anderson_spectra::error::Result;
use anderson_spectra::experiments::{
    default_output_root, run, window_spectrum, EnsembleConfig, ExperimentConfig, IdsConfig, IdsMethod, Model,
    ModelConfig, Statistic, StatisticsConfig, TwoScaleConfig, WindowConfig,
};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Finite-volume Anderson Hamiltonians and their spectral statistics.
#[derive(Parser)]
#[command(name = "anderson", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the eigenvalues of one realization.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Realization index.
        #[arg(long, default_value_t = 0)]
        realization: u64,
        /// Restrict to energies at or above this value.
        #[arg(long, requires = "hi")]
        lo: Option<f64>,
        #[arg(long, requires = "lo")]
        hi: Option<f64>,
    },
    /// Estimate the integrated density of states.
    Ids(Common),
    /// Unfolded level-spacing distributions (local and macroscopic).
    Spacings(Common),
    /// Localization centers of the in-window eigenvectors of realization 0.
    Centers {
        #[command(flatten)]
        common: Common,
        /// Stretch exponent for decay fits.
        #[arg(long)]
        xi: Option<f64>,
    },
    /// Center-spacing distribution.
    Dcs(Common),
    /// Poisson and independence tests of unfolded counts.
    Poisson(Common),
    /// Sub-cube decomposition and eigenvalue matching.
    TwoScale {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Large-deviation check of window counts.
    Ldp {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
    },
    /// Wegner and Minami ratios on shrinking windows.
    WegnerMinami {
        #[command(flatten)]
        common: Common,
        /// Window widths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05])]
        widths: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
    },
    /// Run an experiment described by a TOML file.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_root: Option<PathBuf>,
        /// Override the worker count of the file.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Uniform,
    Bump,
}

#[derive(Args)]
struct ModelArgs {
    /// Lattice dimension.
    #[arg(long = "d", default_value_t = 1)]
    dim: usize,
    /// Cube side.
    #[arg(long = "L")]
    side: usize,
    #[arg(long, default_value = "periodic")]
    boundary: Boundary,
    /// Disorder coupling.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Uniform on [-1, 1] or the smooth bump on (-1, 1).
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    dist: Dist,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ModelArgs {
    fn distribution(&self) -> SiteDistribution {
        match self.dist {
            Dist::Uniform => SiteDistribution::Uniform { lo: -1.0, hi: 1.0 },
            Dist::Bump => SiteDistribution::SmoothBump { center: 0.0, halfwidth: 1.0 },
        }
    }
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    model: ModelArgs,
    /// Center energy of the window.
    #[arg(long, default_value_t = 0.0)]
    e0: f64,
    /// Expected number of levels N(I)|Λ| in the window.
    #[arg(long, conflicts_with = "alpha")]
    expected: Option<f64>,
    /// Window of IDS mass |Λ|^-α on each side of N(E0).
    #[arg(long)]
    alpha: Option<f64>,
    /// Ensemble size.
    #[arg(long, short = 'R', default_value_t = 100)]
    realizations: usize,
    /// Side of the IDS boxes (defaults to L).
    #[arg(long)]
    ids_side: Option<usize>,
    #[arg(long, default_value_t = 100)]
    ids_realizations: usize,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    output_root: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    ell_prime: Option<usize>,
    #[arg(long, conflicts_with_all = ["ell", "ell_prime"])]
    beta: Option<f64>,
    #[arg(long)]
    beta_prime: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value = "periodic")]
    sub_boundary: Boundary,
}

impl Common {
    fn config(&self, name: &str, compute: Vec<Statistic>) -> ExperimentConfig {
        let m = &self.model;
        let window = match (self.alpha, self.expected) {
            (Some(alpha), _) => WindowConfig::Alpha { e0: self.e0, alpha },
            (None, e) => WindowConfig::Count { e0: self.e0, expected: e.unwrap_or(100.0) },
        };
        let mut statistics: StatisticsConfig = toml::from_str("compute = []").expect("defaults");
        statistics.compute = compute;
        ExperimentConfig {
            name: name.to_string(),
            model: ModelConfig {
                dim: m.dim,
                side: m.side,
                boundary: m.boundary,
                distribution: m.distribution(),
                coupling: m.lambda,
            },
            ids: IdsConfig {
                side: self.ids_side.unwrap_or(m.side),
                realizations: self.ids_realizations,
                method: IdsMethod::Counting,
                grid_points: 600,
            },
            window,
            statistics,
            two_scale: None,
            ensemble: EnsembleConfig { realizations: self.realizations, master_seed: m.seed, workers: self.workers },
            output: None,
        }
    }

    fn execute(&self, cfg: ExperimentConfig) -> Result<()> {
        let root = self.output_root.clone().unwrap_or_else(default_output_root);
        report(run(&cfg, &root)?)
    }
}

fn report(record: anderson_spectra::experiments::ResultRecord) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&record.summaries)?);
    eprintln!("wrote {} files to {}", record.files.len(), record.output_dir.display());
    Ok(())
}

fn spectrum(model: &ModelArgs, realization: u64, window: Option<Interval>) -> Result<()> {
    let cube = LatticeCube::new(model.dim, model.side, model.boundary)?;
    let disorder = DisorderConfig::new(model.distribution(), model.lambda, model.seed)?;
    let h = Model::new(cube, disorder)?.hamiltonian(realization)?;
    let spec = match window {
        Some(w) => window_spectrum(&h, w, false, false)?,
        None => full_spectrum(&h, false)?,
    };
    for e in spec.eigenvalues() {
        // twelve decimals hide round-off in exact spectra; avoid printing -0
        let e = if e.abs() < 5e-13 { 0.0 } else { *e };
        println!("{e:.12}");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum { model, realization, lo, hi } => {
            let window = match (lo, hi) {
                (Some(lo), Some(hi)) => Some(Interval::new(lo, hi)?),
                _ => None,
            };
            spectrum(&model, realization, window)
        }
        Command::Ids(c) => c.execute(c.config("ids", vec![Statistic::Ids])),
        Command::Spacings(c) => c.execute(c.config("spacings", vec![Statistic::Dls, Statistic::DlsMacroscopic])),
        Command::Centers { common, xi } => {
            let mut cfg = common.config("centers", vec![Statistic::Centers]);
            cfg.statistics.decay_xi = xi;
            common.execute(cfg)
        }
        Command::Dcs(c) => c.execute(c.config("dcs", vec![Statistic::Dcs])),
        Command::Poisson(c) => c.execute(c.config("poisson", vec![Statistic::Poisson, Statistic::Independence])),
        Command::TwoScale { common, split } => {
            let mut cfg = common.config("two_scale", vec![Statistic::TwoScale, Statistic::Bernoulli]);
            cfg.two_scale = Some(TwoScaleConfig {
                beta: split.beta,
                beta_prime: split.beta_prime,
                ell: split.ell,
                ell_prime: split.ell_prime,
                tol: split.tol,
                boundary: split.sub_boundary,
            });
            common.execute(cfg)
        }
        Command::Ldp { common, delta } => {
            let mut cfg = common.config("ldp", vec![Statistic::LargeDeviation]);
            cfg.statistics.ldp_delta = delta;
            common.execute(cfg)
        }
        Command::WegnerMinami { common, widths, rho } => {
            let mut cfg = common.config("wegner_minami", vec![Statistic::WegnerMinami]);
            cfg.statistics.wegner_widths = widths;
            cfg.statistics.minami_rho = rho;
            common.execute(cfg)
        }
        Command::Run { config, output_root, workers } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.ensemble.workers = w;
            }
            report(run(&cfg, &output_root.unwrap_or_else(default_output_root))?)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
