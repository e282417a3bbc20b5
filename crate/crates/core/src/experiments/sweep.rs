//! γ-sweep and long-time decay runs on fixed `(v₀, u₀, s₀)` data.

use rayon::prelude::*;

use crate::diagnostics::{entropy_balance_residual, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::gas::{GasParams, TransportLaw};
use crate::grid::Grid;
use crate::solver::{Envelope, RunOptions, Solver, StepControl};

use super::initial::{build_initial_state, IcReport, InitialData};
use super::thread_pool;

/// Shared setup of a sweep or decay run.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub n: usize,
    pub half_width: f64,
    pub t_end: f64,
    pub r: f64,
    pub a: f64,
    pub law: TransportLaw<f64>,
    pub ic: InitialData,
    pub control: StepControl<f64>,
    pub record_every: usize,
}

impl RunSetup {
    fn params(&self, gamma: f64) -> Result<GasParams<f64>> {
        GasParams::new(gamma, self.r, self.a)
    }
}

/// Relative drift of mass and momentum over a series. Momentum is measured
/// against `max(|P(0)|, M(0))` since it usually starts at zero.
pub fn conservation_drift(records: &[DiagnosticsRecord<f64>]) -> (f64, f64) {
    let Some(first) = records.first() else {
        return (0.0, 0.0);
    };
    let mass_scale = first.mass.abs();
    let mom_scale = first.momentum.abs().max(mass_scale);
    records.iter().fold((0.0f64, 0.0f64), |(m, p), r| {
        (
            m.max((r.mass - first.mass).abs() / mass_scale),
            p.max((r.momentum - first.momentum).abs() / mom_scale),
        )
    })
}

/// Drift bound for mass and momentum.
pub const CONSERVATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum SweepStatus {
    Completed,
    RegimeExit { time: f64, message: String },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub status: SweepStatus,
    pub initial: IcReport,
    /// Extremes over every accepted step.
    pub envelope: Option<Envelope<f64>>,
    /// `sup_perturbation(t_end) / sup_perturbation(0)`; `None` when the data
    /// is the exact equilibrium.
    pub decay_ratio: Option<f64>,
    pub balance_residual: f64,
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub steps: usize,
}

impl SweepRow {
    pub fn positivity_held(&self) -> bool {
        self.status == SweepStatus::Completed
    }

    pub fn theta_window_width(&self) -> Option<f64> {
        self.envelope.map(|e| e.theta_max - e.theta_min)
    }

    /// Whether `θ` stayed inside the initial `[Θ̲₀, Θ̄₀]` window.
    pub fn theta_within_initial(&self) -> bool {
        self.envelope.is_some_and(|e| {
            e.theta_min >= self.initial.theta_min && e.theta_max <= self.initial.theta_max
        })
    }

    pub fn conserved(&self) -> bool {
        self.mass_drift <= CONSERVATION_TOLERANCE && self.momentum_drift <= CONSERVATION_TOLERANCE
    }
}

fn sweep_one(setup: &RunSetup, gamma: f64) -> Result<SweepRow> {
    let params = setup.params(gamma)?;
    let grid = Grid::new(setup.n, setup.half_width)?;
    let (state, initial) = build_initial_state(&setup.ic, &grid, &params)?;
    let solver = Solver::new(grid, params, setup.law, setup.control)?;
    let opts = RunOptions {
        record_every: setup.record_every,
        ..RunOptions::default()
    };
    let mut row = SweepRow {
        gamma,
        status: SweepStatus::Completed,
        initial,
        envelope: None,
        decay_ratio: None,
        balance_residual: f64::NAN,
        mass_drift: f64::NAN,
        momentum_drift: f64::NAN,
        steps: 0,
    };
    match solver.run(state, setup.t_end, opts) {
        Ok(out) => {
            let first = out.records[0].sup_perturbation;
            let last = out.records.last().expect("final record").sup_perturbation;
            row.decay_ratio = (first > 0.0).then(|| last / first);
            row.envelope = Some(out.envelope);
            row.balance_residual = entropy_balance_residual(&out.records)?;
            (row.mass_drift, row.momentum_drift) = conservation_drift(&out.records);
            row.steps = out.steps;
        }
        Err(f) => {
            row.status = match &f.error {
                Error::RegimeExit(e) => SweepStatus::RegimeExit {
                    time: e.time,
                    message: f.error.to_string(),
                },
                Error::NonFinite { time, .. } => SweepStatus::RegimeExit {
                    time: *time,
                    message: f.error.to_string(),
                },
                other => SweepStatus::Failed(other.to_string()),
            };
            if !f.records.is_empty() {
                (row.mass_drift, row.momentum_drift) = conservation_drift(&f.records);
            }
            row.steps = f.steps;
        }
    }
    Ok(row)
}

/// Runs every `γ` concurrently (capped by `NS1D_THREADS`) and returns the
/// rows sorted by `γ`. Regime exits become row entries.
pub fn gamma_sweep(setup: &RunSetup, gammas: &[f64]) -> Result<Vec<SweepRow>> {
    if gammas.is_empty() {
        return Err(Error::Invalid("gamma list is empty".into()));
    }
    for &g in gammas {
        if !(g > 1.0) {
            return Err(Error::domain("gamma", g, "> 1"));
        }
    }
    let mut sorted = gammas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows: Vec<Result<SweepRow>> =
        thread_pool()?.install(|| sorted.par_iter().map(|&g| sweep_one(setup, g)).collect());
    rows.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub gamma: f64,
    pub initial: IcReport,
    pub records: Vec<DiagnosticsRecord<f64>>,
    pub envelope: Envelope<f64>,
    pub steps: usize,
    /// `max_{t >= t_end/2} sup_perturbation <= max_{t <= t_end/2} sup_perturbation`.
    pub tail_nonincreasing: bool,
    pub decay_ratio: Option<f64>,
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub balance_residual: f64,
}

impl DecayReport {
    pub fn sup_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.sup_perturbation)).collect()
    }
}

/// Single long run recording `sup_perturbation(t)`.
pub fn decay_study(setup: &RunSetup, gamma: f64) -> Result<DecayReport> {
    let params = setup.params(gamma)?;
    let grid = Grid::new(setup.n, setup.half_width)?;
    let (state, initial) = build_initial_state(&setup.ic, &grid, &params)?;
    let solver = Solver::new(grid, params, setup.law, setup.control)?;
    let opts = RunOptions {
        record_every: setup.record_every,
        ..RunOptions::default()
    };
    let out = solver.run(state, setup.t_end, opts).map_err(|f| f.error)?;
    let half = 0.5 * setup.t_end;
    let (head, tail) = out.records.iter().fold((0.0f64, 0.0f64), |(h, t), r| {
        (
            if r.t <= half { h.max(r.sup_perturbation) } else { h },
            if r.t >= half { t.max(r.sup_perturbation) } else { t },
        )
    });
    let first = out.records[0].sup_perturbation;
    let last = out.records.last().expect("final record").sup_perturbation;
    let (mass_drift, momentum_drift) = conservation_drift(&out.records);
    Ok(DecayReport {
        gamma,
        initial,
        balance_residual: entropy_balance_residual(&out.records)?,
        tail_nonincreasing: tail <= head,
        decay_ratio: (first > 0.0).then(|| last / first),
        envelope: out.envelope,
        steps: out.steps,
        records: out.records,
        mass_drift,
        momentum_drift,
    })
}
