use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ns1d::identity::MeasuredOrder;
use ns1d::io::driver;
use ns1d::io::RunConfig;

/// 1D Lagrangian compressible Navier-Stokes solver and verification harness.
#[derive(Parser, Debug)]
#[command(name = "ns1d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the configured initial data to t_end.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Stop at the first record at or after this time and checkpoint.
        #[arg(long)]
        until: Option<f64>,
    },
    /// Continue a run from a checkpoint in the same output directory.
    Resume {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        until: Option<f64>,
    },
    /// Run every gamma of [experiment] gammas on the same initial data.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Long run at [gas] gamma, checking the decay envelope.
    Decay {
        #[arg(long)]
        config: PathBuf,
    },
    /// Manufactured-solution convergence over [experiment] levels.
    Convergence {
        #[arg(long)]
        config: PathBuf,
    },
    /// Refinement study of every operator identity.
    CheckIdentities {
        #[arg(long)]
        config: PathBuf,
    },
    /// Growth check of the Kanel functional.
    Kanel {
        #[arg(long)]
        config: PathBuf,
    },
    /// Summarise the series already written to the output directory.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
}

const ORDER_BAND: (f64, f64) = (1.8, 2.2);

fn load(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn in_band(p: f64) -> bool {
    (ORDER_BAND.0..=ORDER_BAND.1).contains(&p)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, until } => {
            let s = driver::run(&load(&config)?, until)?;
            print_run(&s);
        }
        Command::Resume {
            config,
            checkpoint,
            until,
        } => {
            let s = driver::resume(&load(&config)?, &checkpoint, until)?;
            print_run(&s);
        }
        Command::Sweep { config } => {
            let rows = driver::sweep(&load(&config)?)?;
            println!("{:>8} {:>12} {:>24} {:>24} {:>12}", "gamma", "status", "v window", "theta window", "decay");
            for r in &rows {
                let status = if r.positivity_held() { "ok" } else { "regime_exit" };
                let (vw, tw) = r.envelope.map_or(("-".into(), "-".into()), |e| {
                    (
                        format!("[{:.5}, {:.5}]", e.v_min, e.v_max),
                        format!("[{:.5}, {:.5}]", e.theta_min, e.theta_max),
                    )
                });
                let decay = r.decay_ratio.map_or("equilibrium".into(), |d| format!("{d:.4}"));
                println!("{:>8} {:>12} {vw:>24} {tw:>24} {decay:>12}", r.gamma, status);
            }
        }
        Command::Decay { config } => {
            let rep = driver::decay(&load(&config)?)?;
            println!(
                "gamma {}: {} steps, decay ratio {}, tail envelope non-increasing: {}",
                rep.gamma,
                rep.steps,
                rep.decay_ratio.map_or("equilibrium".into(), |d| format!("{d:.4}")),
                rep.tail_nonincreasing
            );
        }
        Command::Convergence { config } => {
            let rep = driver::convergence(&load(&config)?)?;
            for (n, e) in rep.levels.iter().zip(&rep.errors) {
                println!("n = {n:>5}: errors v {:.3e}  u {:.3e}  theta {:.3e}", e[0], e[1], e[2]);
            }
            println!(
                "orders: v {:.3}  u {:.3}  theta {:.3}",
                rep.orders[0], rep.orders[1], rep.orders[2]
            );
            if !rep.orders.iter().all(|&p| in_band(p)) {
                bail!("convergence orders outside [{}, {}]", ORDER_BAND.0, ORDER_BAND.1);
            }
        }
        Command::CheckIdentities { config } => {
            let reports = driver::check_identities(&load(&config)?)?;
            let mut bad = Vec::new();
            for r in &reports {
                println!("{:<6} {}", r.id, r.order);
                if let MeasuredOrder::Order(p) = r.order {
                    if !in_band(p) {
                        bad.push(r.id.to_string());
                    }
                }
            }
            if !bad.is_empty() {
                bail!(
                    "orders outside [{}, {}] for {}",
                    ORDER_BAND.0,
                    ORDER_BAND.1,
                    bad.join(", ")
                );
            }
        }
        Command::Kanel { config } => {
            let rep = driver::kanel(&load(&config)?)?;
            println!(
                "A1 = {}, A2 = {:.6}",
                rep.fit.a1.map_or("n/a".into(), |a| format!("{a:.6}")),
                rep.fit.a2
            );
            println!("Psi(v_max)/(2 sqrt(v_max)) = {:.6}", rep.large_ratio);
            println!("|Psi(v_min)|/((2/3)|ln v_min|^1.5) = {:.6}", rep.small_ratio);
            if !rep.asymptotics_hold() || !rep.strictly_increasing() {
                bail!("Kanel functional growth check failed");
            }
        }
        Command::Report { config } => {
            let s = driver::report(&load(&config)?)?;
            println!("records: {}", s.records);
            println!("t: {} -> {}", s.first.t, s.last.t);
            println!(
                "sup perturbation: {:.6e} -> {:.6e}",
                s.first.sup_perturbation, s.last.sup_perturbation
            );
            println!("entropy balance residual: {:.3e}", s.balance_residual);
            println!("mass drift {:.3e}, momentum drift {:.3e}", s.mass_drift, s.momentum_drift);
            println!("cumulative dissipation non-decreasing: {}", s.dissipation_monotone);
        }
    }
    Ok(())
}

fn print_run(s: &driver::RunSummary) {
    println!(
        "t = {} after {} steps ({} records){}",
        s.final_time,
        s.steps,
        s.records,
        if s.interrupted { ", stopped early" } else { "" }
    );
    println!("series: {}", s.series.display());
    println!("checkpoint: {}", s.checkpoint.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(e @ (ns1d::Error::RegimeExit(_) | ns1d::Error::NonFinite { .. })) =
                err.downcast_ref::<ns1d::Error>()
            {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
