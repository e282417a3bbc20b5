//! File-level orchestration behind each command: every output goes under
//! `[output] dir`.

use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use crate::diagnostics::{kanel_growth_check, log_grid, DissipationAccumulator, KanelReport};
use crate::error::{Error, Result};
use crate::experiments::{
    build_initial_state, decay_study, gamma_sweep, manufactured_convergence, ConvergenceReport,
    DecayReport, ExperimentKind, SweepRow, SweepStatus,
};
use crate::identity::{measure_order, IdentityId, OrderReport, SmoothFieldSpec};
use crate::solver::{RunOptions, RunStart, Solver};

use super::checkpoint::Checkpoint;
use super::config::RunConfig;
use super::series::{fmt_f64, read_series, write_series, write_table};
use super::svg::{write_plot, Series};

pub const SERIES_FILE: &str = "series.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.ns1d";
pub const ECHO_FILE: &str = "config_echo.cfg";

fn prepare(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let echo = dir.join(ECHO_FILE);
    let text = format!(
        "# resolved configuration (defaults included)\n# config hash {:016x}\n{}",
        cfg.hash(),
        cfg.canonical()
    );
    std::fs::write(&echo, text).map_err(|e| Error::io(&echo, e))?;
    Ok(dir)
}

/// Outcome of `run` or `resume`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub series: PathBuf,
    pub checkpoint: PathBuf,
    pub records: usize,
    pub steps: usize,
    pub final_time: f64,
    /// Stopped at the `until` time before reaching `t_end`.
    pub interrupted: bool,
}

fn solver_for(cfg: &RunConfig) -> Result<Solver<f64>> {
    Solver::new(cfg.grid, cfg.gas, cfg.law, cfg.control)
}

/// Runs from the configured initial data. With `until`, stops at the first
/// record at or after that time and leaves a checkpoint there.
pub fn run(cfg: &RunConfig, until: Option<f64>) -> Result<RunSummary> {
    let dir = prepare(cfg)?;
    let (state, _) = build_initial_state(&cfg.initial_data(), &cfg.grid, &cfg.gas)?;
    advance(cfg, &dir, RunStart::fresh(state), Vec::new(), until)
}

/// Continues a run from `checkpoint`, reproducing the rows the uninterrupted
/// run would have written. The existing series in the output directory
/// supplies the entropy and dissipation totals up to the checkpoint.
pub fn resume(cfg: &RunConfig, checkpoint: &Path, until: Option<f64>) -> Result<RunSummary> {
    let ckpt = Checkpoint::load(checkpoint)?;
    if ckpt.config_hash != cfg.hash() {
        return Err(Error::Checkpoint(format!(
            "config hash {:016x} does not match checkpoint hash {:016x}",
            cfg.hash(),
            ckpt.config_hash
        )));
    }
    if ckpt.state.len() != cfg.grid.n()
        || ckpt.half_width != cfg.grid.half_width()
        || ckpt.gamma != cfg.gas.gamma()
        || ckpt.law != cfg.law
    {
        return Err(Error::Checkpoint("grid, gamma or transport law differ from the config".into()));
    }
    let dir = prepare(cfg)?;
    let series_path = dir.join(SERIES_FILE);
    let mut prior = read_series(&series_path)?;
    let t = ckpt.state.t;
    prior.retain(|r| r.t <= t);
    let (first, last) = match (prior.first(), prior.last()) {
        (Some(f), Some(l)) if l.t == t => (*f, *l),
        _ => {
            return Err(Error::Checkpoint(format!(
                "{} has no record at the checkpoint time {t}",
                series_path.display()
            )))
        }
    };
    let acc = DissipationAccumulator::resume(
        first.eta_total,
        last.dissipation_cum,
        &ckpt.state,
        &cfg.grid,
        &cfg.law,
    )?;
    // The checkpoint row is already in `prior`; the resumed run must not
    // record it twice.
    let start = RunStart {
        state: ckpt.state,
        accumulator: Some(acc),
        step: 0,
    };
    advance(cfg, &dir, start, prior, until)
}

fn advance(
    cfg: &RunConfig,
    dir: &Path,
    start: RunStart<f64>,
    mut records: Vec<crate::diagnostics::DiagnosticsRecord<f64>>,
    until: Option<f64>,
) -> Result<RunSummary> {
    let solver = solver_for(cfg)?;
    let series = dir.join(SERIES_FILE);
    let checkpoint = dir.join(CHECKPOINT_FILE);
    let opts = RunOptions {
        record_every: cfg.record_every,
        ..RunOptions::default()
    };
    let stop = until.unwrap_or(f64::INFINITY);
    let mut observer = |r: &crate::diagnostics::DiagnosticsRecord<f64>, _: &_| {
        if r.t >= stop {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    match solver.run_observed(start, cfg.t_end, opts, &mut observer) {
        Ok(out) => {
            records.extend(out.records);
            write_series(&records, &series)?;
            Checkpoint {
                config_hash: cfg.hash(),
                half_width: cfg.grid.half_width(),
                gamma: cfg.gas.gamma(),
                law: cfg.law,
                state: out.final_state.clone(),
            }
            .save(&checkpoint)?;
            if cfg.output.emit_svg {
                plot_series(dir, &records)?;
            }
            Ok(RunSummary {
                series,
                checkpoint,
                records: records.len(),
                steps: out.steps,
                final_time: out.final_state.t,
                interrupted: out.interrupted,
            })
        }
        Err(failure) => {
            records.extend(failure.records);
            if !records.is_empty() {
                write_series(&records, &series)?;
            }
            Err(failure.error)
        }
    }
}

fn plot_series(dir: &Path, records: &[crate::diagnostics::DiagnosticsRecord<f64>]) -> Result<()> {
    let sup: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.sup_perturbation)).collect();
    let eta: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.eta_total)).collect();
    write_plot(
        &dir.join("sup_perturbation.svg"),
        "sup |(v - 1, u, theta - 1)|",
        "t",
        &[Series {
            label: "sup_perturbation",
            points: &sup,
        }],
    )?;
    write_plot(
        &dir.join("eta_total.svg"),
        "total entropy",
        "t",
        &[Series {
            label: "eta_total",
            points: &eta,
        }],
    )
}

pub const SWEEP_HEADER: [&str; 15] = [
    "gamma",
    "status",
    "exit_time",
    "v_min",
    "v_max",
    "theta_min",
    "theta_max",
    "theta0_min",
    "theta0_max",
    "theta_within_initial",
    "decay_ratio",
    "balance_residual",
    "mass_drift",
    "momentum_drift",
    "steps",
];

pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let dir = prepare(cfg)?;
    let ex = cfg.experiment(ExperimentKind::GammaSweep);
    let rows = gamma_sweep(&ex.run_setup(), &ex.gammas)?;
    let nan = f64::NAN;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let (status, exit_time) = match &r.status {
                SweepStatus::Completed => ("completed".to_string(), nan),
                SweepStatus::RegimeExit { time, .. } => ("regime_exit".to_string(), *time),
                SweepStatus::Failed(m) => (format!("failed: {m}"), nan),
            };
            let e = r.envelope;
            vec![
                fmt_f64(r.gamma),
                status,
                fmt_f64(exit_time),
                fmt_f64(e.map_or(nan, |e| e.v_min)),
                fmt_f64(e.map_or(nan, |e| e.v_max)),
                fmt_f64(e.map_or(nan, |e| e.theta_min)),
                fmt_f64(e.map_or(nan, |e| e.theta_max)),
                fmt_f64(r.initial.theta_min),
                fmt_f64(r.initial.theta_max),
                r.theta_within_initial().to_string(),
                r.decay_ratio.map_or_else(|| "equilibrium".to_string(), fmt_f64),
                fmt_f64(r.balance_residual),
                fmt_f64(r.mass_drift),
                fmt_f64(r.momentum_drift),
                r.steps.to_string(),
            ]
        })
        .collect();
    write_table(&dir.join("sweep.csv"), &SWEEP_HEADER, &table)?;
    Ok(rows)
}

pub fn decay(cfg: &RunConfig) -> Result<DecayReport> {
    let dir = prepare(cfg)?;
    let ex = cfg.experiment(ExperimentKind::Decay);
    let rep = decay_study(&ex.run_setup(), cfg.gas.gamma())?;
    write_series(&rep.records, &dir.join("decay.csv"))?;
    if cfg.output.emit_svg {
        let sup = rep.sup_series();
        write_plot(
            &dir.join("decay.svg"),
            &format!("decay, gamma = {}", rep.gamma),
            "t",
            &[Series {
                label: "sup_perturbation",
                points: &sup,
            }],
        )?;
    }
    Ok(rep)
}

pub fn convergence(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let dir = prepare(cfg)?;
    let rep = manufactured_convergence(&cfg.experiment(ExperimentKind::Convergence).convergence()?)?;
    let mut rows: Vec<Vec<String>> = rep
        .levels
        .iter()
        .zip(&rep.errors)
        .zip(&rep.dx)
        .map(|((n, e), dx)| {
            vec![
                n.to_string(),
                fmt_f64(*dx),
                fmt_f64(e[0]),
                fmt_f64(e[1]),
                fmt_f64(e[2]),
            ]
        })
        .collect();
    rows.push(vec![
        "order".into(),
        String::new(),
        fmt_f64(rep.orders[0]),
        fmt_f64(rep.orders[1]),
        fmt_f64(rep.orders[2]),
    ]);
    write_table(
        &dir.join("convergence.csv"),
        &["n", "dx", "error_v", "error_u", "error_theta"],
        &rows,
    )?;
    Ok(rep)
}

pub fn check_identities(cfg: &RunConfig) -> Result<Vec<OrderReport>> {
    let dir = prepare(cfg)?;
    let spec = SmoothFieldSpec::with_seed(cfg.ic.seed);
    let reports = IdentityId::ALL
        .iter()
        .map(|&id| measure_order(id, &spec, &cfg.levels, &cfg.gas, &cfg.law))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let residuals: Vec<String> = r.max_residuals.iter().map(|&x| fmt_f64(x)).collect();
            vec![
                r.id.to_string(),
                spec.seed.to_string(),
                r.order.to_string(),
                residuals.join(" "),
            ]
        })
        .collect();
    write_table(
        &dir.join("identities.csv"),
        &["tag", "seed", "order", "max_residuals"],
        &rows,
    )?;
    Ok(reports)
}

pub fn kanel(cfg: &RunConfig) -> Result<KanelReport> {
    let dir = prepare(cfg)?;
    let rep = kanel_growth_check(&log_grid(1e-6, 1e6, 50))?;
    let rows: Vec<Vec<String>> = rep
        .samples
        .iter()
        .map(|&(v, psi)| vec![fmt_f64(v), fmt_f64(psi)])
        .collect();
    write_table(&dir.join("kanel.csv"), &["v", "psi"], &rows)?;
    Ok(rep)
}

/// Summary of an existing series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSummary {
    pub records: usize,
    pub first: crate::diagnostics::DiagnosticsRecord<f64>,
    pub last: crate::diagnostics::DiagnosticsRecord<f64>,
    pub balance_residual: f64,
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub dissipation_monotone: bool,
}

pub fn report(cfg: &RunConfig) -> Result<SeriesSummary> {
    let path = cfg.output.dir.join(SERIES_FILE);
    let records = read_series(&path)?;
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::Invalid(format!("{} is empty", path.display()))),
    };
    let (mass_drift, momentum_drift) = crate::experiments::conservation_drift(&records);
    Ok(SeriesSummary {
        records: records.len(),
        first,
        last,
        balance_residual: crate::diagnostics::entropy_balance_residual(&records)?,
        mass_drift,
        momentum_drift,
        dissipation_monotone: records
            .windows(2)
            .all(|w| w[1].dissipation_cum >= w[0].dissipation_cum),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path, extra: &str) -> RunConfig {
        RunConfig::parse(&format!(
            "[gas]\ngamma = 1.4\n[grid]\nn = 64\nL = 4\n[ic]\namplitude = 0.1\nsupport = 1.5\n\
             [control]\nt_end = 0.5\nrecord_every = 7\n[output]\ndir = {}\n{extra}",
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn resume_reproduces_uninterrupted_series() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let full = run(&cfg(a.path(), ""), None).unwrap();
        assert!(!full.interrupted);

        let cb = cfg(b.path(), "");
        let part = run(&cb, Some(0.2)).unwrap();
        assert!(part.interrupted);
        assert!(part.final_time >= 0.2 && part.final_time < 0.5);
        let done = resume(&cb, &part.checkpoint, None).unwrap();
        assert_eq!(done.final_time, 0.5);

        let ta = std::fs::read(&full.series).unwrap();
        let tb = std::fs::read(&done.series).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(
            std::fs::read(&full.checkpoint).unwrap(),
            std::fs::read(&done.checkpoint).unwrap()
        );
    }

    #[test]
    fn resume_rejects_other_config() {
        let a = tempfile::tempdir().unwrap();
        let part = run(&cfg(a.path(), ""), Some(0.1)).unwrap();
        let other = RunConfig::parse(&format!(
            "[gas]\ngamma = 1.5\n[grid]\nn = 64\nL = 4\n[ic]\nsupport = 1.5\n[output]\ndir = {}\n",
            a.path().display()
        ))
        .unwrap();
        assert!(matches!(resume(&other, &part.checkpoint, None), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run(&cfg(a.path(), ""), None).unwrap();
        let rb = run(&cfg(b.path(), ""), None).unwrap();
        assert_eq!(std::fs::read(ra.series).unwrap(), std::fs::read(rb.series).unwrap());
    }

    #[test]
    fn regime_exit_is_reported() {
        let a = tempfile::tempdir().unwrap();
        let c = cfg(a.path(), "");
        let c = RunConfig {
            control: crate::solver::StepControl {
                positivity_floor: 0.95,
                ..c.control
            },
            ..c
        };
        let err = run(&c, None).unwrap_err();
        assert!(err.is_regime_exit(), "{err}");
    }

    #[test]
    fn report_summarises_series() {
        let a = tempfile::tempdir().unwrap();
        let c = cfg(a.path(), "");
        run(&c, None).unwrap();
        let s = report(&c).unwrap();
        assert_eq!(s.last.t, 0.5);
        assert!(s.dissipation_monotone);
        assert!(s.mass_drift <= 1e-10);
    }
}
