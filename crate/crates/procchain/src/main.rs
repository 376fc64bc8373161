use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use procchain::commands::{cmd_coefficients, cmd_exponents, cmd_lobe, cmd_oracle, cmd_potential, Outcome};
use procchain::config::{keys_help, ConfigLayers, RunConfig};
use procchain::error::AppResult;
use std::path::PathBuf;
use std::process::ExitCode;

/// Strong-coupling series for the Bose-Hubbard model: process-chain
/// coefficients, Mott lobe, effective potential and critical exponents.
#[derive(Parser, Debug)]
#[command(name = "procchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute and cache gamma_2k^(nu) for k_min..=k_max and nu_min..=nu_max.
    Coefficients(Common),
    /// Scan mu_grid: ratio-test boundary, odd/even bounds and the lobe tip.
    Lobe(Common),
    /// Finite-order and extrapolated exponents beta_c and zeta (Dlog analysis).
    Exponents(Common),
    /// Effective potential Gamma(psi)/M for each order in `orders`.
    Potential(Common),
    /// Verify Kato terms and kernel against independent oracles.
    Oracle(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file with `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Lattice dimension (key `d`).
    #[arg(short = 'd', long = "dim")]
    d: Option<String>,
    /// Chemical potential mu/U (key `mu`).
    #[arg(long)]
    mu: Option<String>,
    /// Largest hopping order (key `nu_max`).
    #[arg(long)]
    nu_max: Option<String>,
    /// Truncation orders (key `orders`).
    #[arg(long)]
    orders: Option<String>,
    /// Twist values theta/ell (key `twists`).
    #[arg(long, allow_hyphen_values = true)]
    twists: Option<String>,
    /// Output directory (key `out_dir`).
    #[arg(long)]
    out_dir: Option<String>,
    /// Cache root (key `cache_dir`).
    #[arg(long)]
    cache_dir: Option<String>,
    /// Worker threads, 0 = all cores (key `workers`).
    #[arg(long)]
    workers: Option<String>,
    /// Perturb the weight of Kato term ORDER:INDEX (key `inject_fault`).
    #[arg(long, value_name = "ORDER:INDEX")]
    inject_fault: Option<String>,
    /// Suppress progress messages.
    #[arg(long, short)]
    quiet: bool,
}

impl Common {
    fn resolve(&self) -> AppResult<RunConfig> {
        let mut layers = ConfigLayers::default();
        if let Some(path) = &self.config {
            layers.load_file(path)?;
        }
        let flags = [
            ("d", &self.d),
            ("mu", &self.mu),
            ("nu_max", &self.nu_max),
            ("orders", &self.orders),
            ("twists", &self.twists),
            ("out_dir", &self.out_dir),
            ("cache_dir", &self.cache_dir),
            ("workers", &self.workers),
            ("inject_fault", &self.inject_fault),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                layers.set(key, v)?;
            }
        }
        for pair in &self.set {
            layers.set_pair(pair)?;
        }
        RunConfig::from_layers(&layers)
    }
}

fn run(cli: Cli) -> AppResult<Outcome> {
    let (common, f): (&Common, fn(&RunConfig, bool) -> AppResult<Outcome>) = match &cli.command {
        Command::Coefficients(c) => (c, cmd_coefficients),
        Command::Lobe(c) => (c, cmd_lobe),
        Command::Exponents(c) => (c, cmd_exponents),
        Command::Potential(c) => (c, cmd_potential),
        Command::Oracle(c) => (c, cmd_oracle),
    };
    let cfg = common.resolve()?;
    f(&cfg, common.quiet)
}

fn main() -> ExitCode {
    let help = keys_help();
    let mut cmd = Cli::command().after_long_help(help.clone());
    for name in ["coefficients", "lobe", "exponents", "potential", "oracle"] {
        cmd = cmd.mut_subcommand(name, |s| s.after_long_help(help.clone()));
    }
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            println!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
