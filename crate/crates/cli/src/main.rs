use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iqofdm::harness::{
    create_output, default_output_dir, parse_grid, run_mse_check_with, run_snr_loss_surface, write_ber_csv,
    write_mse_csv, write_surface_csv, Executor, Scheme, SimConfig, SweepContext,
};
use iqofdm::Error;

const RANGES: &str = "Grids are written start:step:stop (stop is included when it lies on the grid), \
as a comma-separated list, or as a single number. Config files hold `key = value` lines; \
`#` starts a comment. Flags override the config file.";

#[derive(Parser)]
#[command(name = "iqofdm", version, about = "OFDM link simulator with receiver IQ imbalance", after_help = RANGES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER versus SNR for each selected scheme
    BerSweep(Common),
    /// Estimator MSE against its closed-form prediction, with the FD-LS baseline
    MseCheck {
        #[command(flatten)]
        common: Common,
        /// Monte-Carlo trials per SNR point
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Closed-form GE SNR loss over a theta/alpha grid
    SnrLossSurface(Common),
    /// All schemes at 0, 10 and 20 dB unless --snr/--scheme say otherwise
    Demo(Common),
}

#[derive(Args)]
#[command(after_help = RANGES)]
struct Common {
    /// Config file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path [default: $IQOFDM_OUTPUT_DIR/<command>.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// SNR grid in dB, e.g. 0:2:30
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Comma-separated schemes: ideal, none, td_ls_fd_ge, fd_ls_postfft
    #[arg(long)]
    scheme: Option<String>,
    /// Phase imbalance in degrees (a grid for snr-loss-surface)
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// I/Q gain ratio in dB (a grid for snr-loss-surface)
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Frames per SNR point
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training symbols for the FD-LS baseline
    #[arg(long)]
    nt: Option<usize>,
    /// Any config key, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

enum Failure {
    MissingConfig(PathBuf),
    Sim(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Sim(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::MissingConfig(_) => 2,
            Failure::Sim(
                Error::Config(_)
                | Error::Domain(_)
                | Error::InvalidSize(_)
                | Error::ProfileTooLong { .. }
                | Error::CyclicPrefixTooShort { .. }
                | Error::ZeroPilot(_),
            ) => 3,
            Failure::Sim(_) => 1,
        }
    }
}

impl Common {
    fn load(&self, grids: bool) -> Result<SimConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) if !path.is_file() => return Err(Failure::MissingConfig(path.clone())),
            Some(path) => SimConfig::from_file(path)?,
            None => SimConfig::default(),
        };
        if let Some(v) = &self.snr {
            cfg.snr_db = parse_grid(v)?;
        }
        if let Some(v) = &self.scheme {
            cfg.set("scheme", v)?;
        }
        if let Some(v) = &self.theta {
            cfg.set(if grids { "theta_grid" } else { "theta_deg" }, v)?;
        }
        if let Some(v) = &self.alpha {
            cfg.set(if grids { "alpha_grid" } else { "alpha_db" }, v)?;
        }
        if let Some(v) = self.frames {
            cfg.frames = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.nt {
            cfg.training_symbols = Some(v);
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k, v)?;
        }
        if let Some(v) = self.jobs {
            cfg.jobs = v;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        for w in cfg.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(cfg)
    }
}

fn output_path(cfg: &SimConfig, name: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| default_output_dir().join(format!("{name}.csv")))
}

fn ber_sweep(cfg: &SimConfig, name: &str) -> Result<PathBuf, Failure> {
    let exec = Executor::new(cfg.workers())?;
    let ctx = SweepContext::new(cfg)?;
    let mut records = Vec::new();
    for &scheme in &cfg.schemes {
        for &snr in &cfg.snr_db {
            let r = ctx.run_point(scheme, snr, &exec)?;
            println!(
                "{:<14} snr {:>6.2} dB  ber {:.4e}  errors {:>8}  bits {:>10}  frames {:>6}{}  {:.2} s",
                r.scheme.id(),
                r.snr_db,
                r.ber,
                r.errors,
                r.bits,
                r.frames,
                if r.erasures > 0 { format!("  erasures {}", r.erasures) } else { String::new() },
                r.wall_time.as_secs_f64()
            );
            records.push(r);
        }
    }
    let path = output_path(cfg, name);
    write_ber_csv(create_output(&path)?, cfg, &records)?;
    Ok(path)
}

fn mse_check(cfg: &SimConfig, trials: Option<usize>) -> Result<PathBuf, Failure> {
    let trials = trials.unwrap_or(cfg.mse_trials);
    let records = run_mse_check_with(cfg, trials, &Executor::new(cfg.workers())?)?;
    for r in &records {
        println!(
            "snr {:>6.2} dB  mse mu {:.4e}  nu {:.4e}  predicted {:.4e}  ratio {:.3}/{:.3}  fd-ls {:.4e}  suppression {:.2}",
            r.snr_db,
            r.mse_mu,
            r.mse_nu,
            r.predicted,
            r.ratio_mu(),
            r.ratio_nu(),
            r.mse_fd,
            r.suppression()
        );
    }
    let path = output_path(cfg, "mse_check");
    write_mse_csv(create_output(&path)?, cfg, &records)?;
    Ok(path)
}

fn surface(cfg: &SimConfig) -> Result<PathBuf, Failure> {
    let cells = run_snr_loss_surface(&cfg.theta_grid, &cfg.alpha_grid);
    let defined: Vec<f64> = cells.iter().filter_map(|c| c.loss_db).collect();
    let max = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "{} cells ({} theta x {} alpha), {} undefined, max loss {:.4} dB",
        cells.len(),
        cfg.theta_grid.len(),
        cfg.alpha_grid.len(),
        cells.len() - defined.len(),
        max
    );
    let path = output_path(cfg, "snr_loss_surface");
    write_surface_csv(create_output(&path)?, cfg, &cells)?;
    Ok(path)
}

fn run(cli: Cli) -> Result<PathBuf, Failure> {
    match cli.command {
        Command::BerSweep(c) => ber_sweep(&c.load(false)?, "ber_sweep"),
        Command::MseCheck { common, trials } => mse_check(&common.load(false)?, trials),
        Command::SnrLossSurface(c) => surface(&c.load(true)?),
        Command::Demo(c) => {
            let mut cfg = c.load(false)?;
            if c.snr.is_none() {
                cfg.snr_db = vec![0.0, 10.0, 20.0];
            }
            if c.scheme.is_none() {
                cfg.schemes = Scheme::ALL.to_vec();
            }
            ber_sweep(&cfg, "demo")
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::MissingConfig(p) => eprintln!("error: config file {} not found", p.display()),
                Failure::Sim(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}
