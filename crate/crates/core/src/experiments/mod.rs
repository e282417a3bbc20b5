//! Pre-built studies: manufactured-solution convergence, γ-sweeps and
//! long-time decay.

mod initial;
mod manufactured;
mod sweep;

use std::path::PathBuf;

pub use initial::{build_initial_state, IcFamily, IcReport, InitialData, ProfileFn};
pub use manufactured::{
    manufactured_convergence, manufactured_error, ConvergenceConfig, ConvergenceReport, LevelError,
    ManufacturedSolution,
};
pub use sweep::{
    conservation_drift, decay_study, gamma_sweep, DecayReport, RunSetup, SweepRow, SweepStatus,
    CONSERVATION_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::gas::{GasParams, TransportLaw};
use crate::solver::StepControl;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "NS1D_THREADS";

/// Rayon pool sized by `NS1D_THREADS` (default: all logical cores).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Invalid(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start thread pool: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    GammaSweep,
    Decay,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Grid sizes for refinement studies; the first entry is used by single-grid runs.
    pub levels: Vec<usize>,
    pub half_width: f64,
    pub t_end: f64,
    pub gammas: Vec<f64>,
    pub r: f64,
    pub a: f64,
    pub law: TransportLaw<f64>,
    pub ic: InitialData,
    pub seed: u64,
    pub control: StepControl<f64>,
    pub record_every: usize,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Invalid("levels must not be empty".into()));
        }
        if self.levels.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(Error::Invalid(format!(
                "levels {:?} must each double the previous one",
                self.levels
            )));
        }
        if self.gammas.is_empty() {
            return Err(Error::Invalid("gamma list is empty".into()));
        }
        for &g in &self.gammas {
            GasParams::new(g, self.r, self.a)?;
        }
        if !(self.t_end > 0.0) {
            return Err(Error::domain("t_end", self.t_end, "> 0"));
        }
        self.control.validate()
    }

    /// Single-grid setup on the first level.
    pub fn run_setup(&self) -> RunSetup {
        RunSetup {
            n: self.levels[0],
            half_width: self.half_width,
            t_end: self.t_end,
            r: self.r,
            a: self.a,
            law: self.law,
            ic: self.ic.clone(),
            control: self.control,
            record_every: self.record_every,
        }
    }

    /// Manufactured-solution study at the first `γ`.
    pub fn convergence(&self) -> Result<ConvergenceConfig> {
        Ok(ConvergenceConfig {
            levels: self.levels.clone(),
            half_width: self.half_width,
            t_end: self.t_end,
            epsilon: 0.1,
            params: GasParams::new(self.gammas[0], self.r, self.a)?,
            law: self.law,
            control: self.control,
        })
    }

    pub fn run(&self) -> Result<ExperimentOutcome> {
        self.validate()?;
        Ok(match self.kind {
            ExperimentKind::Convergence => {
                ExperimentOutcome::Convergence(manufactured_convergence(&self.convergence()?)?)
            }
            ExperimentKind::GammaSweep => {
                ExperimentOutcome::Sweep(gamma_sweep(&self.run_setup(), &self.gammas)?)
            }
            ExperimentKind::Decay => {
                ExperimentOutcome::Decay(Box::new(decay_study(&self.run_setup(), self.gammas[0])?))
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum ExperimentOutcome {
    Convergence(ConvergenceReport),
    Sweep(Vec<SweepRow>),
    Decay(Box<DecayReport>),
}
