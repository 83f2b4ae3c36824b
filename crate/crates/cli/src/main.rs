use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use risnoma::geometry::NetworkRealization;
use risnoma::harness::{self, Profile, PAPER_DEFAULTS};
use risnoma::simulator::trial_rng;
use risnoma::{oracle, specfun};

/// Coverage and ergodic-rate engine for RIS-aided multi-cell NOMA networks.
///
/// The worker thread count comes from RISNOMA_THREADS (default: all cores).
#[derive(Parser)]
#[command(name = "risnoma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write CSV.
    Sweep {
        /// TOML config file, or `paper-defaults`.
        #[arg(long, default_value = PAPER_DEFAULTS)]
        config: PathBuf,
        /// Preset (fig3..fig8); without it the config's [sweep] section is used.
        #[arg(long)]
        preset: Option<String>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of Monte Carlo trials.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-check analytic results against simulation and oracles.
    Validate {
        #[arg(long, default_value = PAPER_DEFAULTS)]
        config: PathBuf,
        /// Tolerance profile: default or strict.
        #[arg(long, default_value = "default")]
        profile: Profile,
        /// Report file; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print one network realization as text.
    Realization {
        #[arg(long, default_value = PAPER_DEFAULTS)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trial index within the seed's stream.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Evaluate kernel functions.
    #[command(hide = true)]
    Specfun {
        #[command(subcommand)]
        op: SpecfunOp,
    },
}

#[derive(Subcommand)]
enum SpecfunOp {
    /// `eval <fn> <args...>`; single-argument functions map over all arguments.
    Eval {
        function: String,
        #[arg(allow_negative_numbers = true)]
        args: Vec<f64>,
    },
}

fn init_threads() {
    let Ok(v) = std::env::var("RISNOMA_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the thread pool: {e}");
            }
        }
        _ => warn!("ignoring RISNOMA_THREADS={v:?}; expected a positive integer"),
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn specfun_eval(function: &str, args: &[f64]) -> Result<Vec<f64>, String> {
    let unary: Option<fn(f64) -> f64> = match function {
        "erf" => Some(specfun::erf),
        "erfc" => Some(specfun::erfc),
        "erfcx" => Some(specfun::erfcx),
        "gamma" => Some(specfun::gamma),
        "ln_gamma" => Some(specfun::ln_gamma),
        "alzer_eta" => Some(specfun::alzer_eta),
        "erfc_quadrature" => Some(oracle::erfc_quadrature),
        _ => None,
    };
    if let Some(f) = unary {
        if args.is_empty() {
            return Err(format!("{function} needs at least one argument"));
        }
        return Ok(args.iter().map(|&x| f(x)).collect());
    }
    let need = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{function} takes {n} arguments, got {}", args.len()))
        }
    };
    match function {
        "gauss_2f1" => {
            need(4)?;
            specfun::gauss_2f1(args[0], args[1], args[2], args[3])
                .map(|v| vec![v])
                .map_err(|e| e.to_string())
        }
        "hyp2f1_euler" => {
            need(4)?;
            oracle::hyp2f1_euler(args[0], args[1], args[2], args[3])
                .map(|v| vec![v])
                .map_err(|e| e.to_string())
        }
        "gamma_p" => {
            need(2)?;
            Ok(vec![specfun::gamma_p(args[0], args[1])])
        }
        "gamma_cdf_alzer_approx" => {
            need(2)?;
            Ok(vec![specfun::gamma_cdf_alzer_approx(args[0], args[1])])
        }
        "chebyshev_gauss" => {
            need(1)?;
            let rule = specfun::chebyshev_gauss(args[0] as usize).map_err(|e| e.to_string())?;
            Ok(rule.nodes.iter().chain(&rule.weights).copied().collect())
        }
        other => Err(format!(
            "unknown function {other:?}; known: erf erfc erfcx gamma ln_gamma alzer_eta gamma_p \
             gamma_cdf_alzer_approx gauss_2f1 chebyshev_gauss hyp2f1_euler erfc_quadrature"
        )),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Sweep {
            config,
            preset,
            out,
            trials,
            seed,
        } => {
            let cfg = harness::load_config(&config)?;
            let mut spec = match (&preset, &cfg.sweep) {
                (Some(name), _) => harness::preset(name)?,
                (None, Some(spec)) => spec.clone(),
                (None, None) => return Err("no --preset given and the config has no [sweep] section".into()),
            };
            if let Some(n) = trials {
                spec.n_trials = n;
            }
            if let Some(s) = seed {
                spec.master_seed = s;
            }
            let started = std::time::Instant::now();
            let output = harness::run_sweep(&cfg, &spec)?;
            info!("sweep finished in {:.2?}", started.elapsed());
            if output.failed() > 0 {
                warn!("{} rows did not evaluate", output.failed());
            }
            write_out(out.as_ref(), &output.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            config,
            profile,
            report,
            trials,
            seed,
        } => {
            let mut cfg = harness::load_config(&config)?;
            if let Some(n) = trials {
                cfg.validate.n_trials = n;
            }
            if let Some(s) = seed {
                cfg.validate.master_seed = s;
            }
            let started = std::time::Instant::now();
            let r = harness::validate(&cfg, profile);
            info!("validation finished in {:.2?}", started.elapsed());
            for c in &r.checks {
                eprintln!(
                    "[{:>12}] C{:<2} {:<34} measured {:.3e} tolerance {:.3e}",
                    c.status, c.criterion, c.name, c.measured, c.tolerance
                );
            }
            write_out(report.as_ref(), &r.to_csv())?;
            Ok(if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Realization { config, seed, index } => {
            let cfg = harness::load_config(&config)?;
            let net = NetworkRealization::sample(&cfg.params.spatial, &mut trial_rng(seed, index));
            print!("{}", net.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Specfun {
            op: SpecfunOp::Eval { function, args },
        } => {
            for v in specfun_eval(&function, &args)? {
                println!("{v:.17e}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
