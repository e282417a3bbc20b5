//! Method-of-lines discretization of the Lagrangian system
//!
//! ```text
//! v_t = u_x
//! u_t = -p_x + (μ(θ) u_x / v)_x
//! c_v θ_t = μ(θ) u_x² / v + (κ(θ) θ_x / v)_x - p u_x
//! ```
//!
//! with centered first differences, flux-form second differences and explicit
//! SSP-RK3 time stepping under a combined hyperbolic/parabolic step limit.

use std::ops::ControlFlow;
use std::sync::Arc;

use crate::diagnostics::{self, DiagnosticsRecord, DissipationAccumulator};
use crate::error::{Error, Result};
use crate::gas::{GasParams, TransportLaw, MIN_ADMISSIBLE};
use crate::grid::{div_flux_unchecked, dx_central_unchecked, Grid, State};
use crate::num::Real;

/// Time derivatives of `(v, u, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsOutput<T> {
    pub dv_dt: Vec<T>,
    pub du_dt: Vec<T>,
    pub dtheta_dt: Vec<T>,
}

impl<T: Real> RhsOutput<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            dv_dt: vec![T::zero(); n],
            du_dt: vec![T::zero(); n],
            dtheta_dt: vec![T::zero(); n],
        }
    }
}

/// Semi-discrete right-hand side.
pub fn rhs<T: Real>(
    state: &State<T>,
    grid: &Grid<T>,
    params: &GasParams<T>,
    law: &TransportLaw<T>,
) -> Result<RhsOutput<T>> {
    if state.len() != grid.n() {
        return Err(Error::LengthMismatch {
            expected: grid.n(),
            got: state.len(),
        });
    }
    state.check_admissible(T::lit(MIN_ADMISSIBLE))?;
    Ok(rhs_unchecked(state, grid, params, law))
}

pub(crate) fn rhs_unchecked<T: Real>(
    state: &State<T>,
    grid: &Grid<T>,
    params: &GasParams<T>,
    law: &TransportLaw<T>,
) -> RhsOutput<T> {
    let n = state.len();
    let dx = grid.dx();
    let (v, u, theta) = (&state.v, &state.u, &state.theta);

    let ux = dx_central_unchecked(u, dx);
    let p: Vec<T> = (0..n).map(|i| params.pressure_unchecked(v[i], theta[i])).collect();
    let px = dx_central_unchecked(&p, dx);
    let mu: Vec<T> = theta.iter().map(|&th| law.mu_unchecked(th)).collect();
    let mu_over_v: Vec<T> = (0..n).map(|i| mu[i] / v[i]).collect();
    let kappa_over_v: Vec<T> = (0..n).map(|i| law.kappa_unchecked(theta[i]) / v[i]).collect();
    let viscous = div_flux_unchecked(&mu_over_v, u, dx);
    let heat = div_flux_unchecked(&kappa_over_v, theta, dx);

    let inv_cv = T::one() / params.c_v();
    let du_dt = (0..n).map(|i| viscous[i] - px[i]).collect();
    let dtheta_dt = (0..n)
        .map(|i| (mu_over_v[i] * ux[i] * ux[i] + heat[i] - p[i] * ux[i]) * inv_cv)
        .collect();
    RhsOutput {
        dv_dt: ux,
        du_dt,
        dtheta_dt,
    }
}

/// Safety factors and caps for explicit stepping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    pub cfl_hyperbolic: T,
    pub cfl_parabolic: T,
    pub dt_max: T,
    /// Smallest admissible `v` and `θ`; reaching it is a regime exit.
    pub positivity_floor: T,
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        Self {
            cfl_hyperbolic: T::lit(0.4),
            cfl_parabolic: T::lit(0.4),
            dt_max: T::infinity(),
            positivity_floor: T::lit(1e-8),
        }
    }
}

impl<T: Real> StepControl<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x > T::zero() && x <= T::one();
        if !unit(self.cfl_hyperbolic) {
            return Err(Error::domain("cfl_hyperbolic", self.cfl_hyperbolic.as_f64(), "in (0, 1]"));
        }
        if !unit(self.cfl_parabolic) {
            return Err(Error::domain("cfl_parabolic", self.cfl_parabolic.as_f64(), "in (0, 1]"));
        }
        if !(self.dt_max > T::zero()) {
            return Err(Error::domain("dt_max", self.dt_max.as_f64(), "> 0"));
        }
        if !(self.positivity_floor > T::zero()) || !self.positivity_floor.is_finite() {
            return Err(Error::domain(
                "positivity_floor",
                self.positivity_floor.as_f64(),
                "> 0",
            ));
        }
        Ok(())
    }
}

/// Explicit step limit
/// `min(C_h dx / c_max, C_p dx² / (2 D_max), dt_max)` with
/// `c_max = max sqrt(γ R θ) / v` and `D_max = max(μ/v, κ/(c_v v))`.
pub fn stable_dt<T: Real>(
    state: &State<T>,
    grid: &Grid<T>,
    params: &GasParams<T>,
    law: &TransportLaw<T>,
    ctl: &StepControl<T>,
) -> Result<T> {
    ctl.validate()?;
    state.check_admissible(ctl.positivity_floor)?;
    let dx = grid.dx();
    let mut c_max = T::zero();
    let mut d_max = T::zero();
    for i in 0..state.len() {
        let (v, th) = (state.v[i], state.theta[i]);
        c_max = c_max.max(params.lagrangian_sound_speed(v, th));
        let visc = law.mu_unchecked(th) / v;
        let cond = law.kappa_unchecked(th) / (params.c_v() * v);
        d_max = d_max.max(visc.max(cond));
    }
    let hyperbolic = ctl.cfl_hyperbolic * dx / c_max;
    let parabolic = ctl.cfl_parabolic * dx * dx / (T::lit(2.0) * d_max);
    let dt = hyperbolic.min(parabolic).min(ctl.dt_max);
    if dt > T::zero() && dt.is_finite() {
        Ok(dt)
    } else {
        Err(Error::Invalid(format!("stable time step {dt} is not positive")))
    }
}

/// Source term added to the semi-discrete right-hand side, evaluated at the
/// grid nodes and time `t`.
pub trait Forcing<T>: Send + Sync {
    fn forcing(&self, grid: &Grid<T>, t: T) -> RhsOutput<T>;
}

/// A failed step, with the state it started from.
#[derive(Debug)]
pub struct StepFailure<T> {
    pub error: Error,
    pub state: State<T>,
}

/// Options for [`Solver::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Record diagnostics every this many accepted steps (and at the end).
    pub record_every: usize,
    pub max_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_every: 100,
            max_steps: 50_000_000,
        }
    }
}

/// Extremes of `v` and `θ` over every accepted step of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope<T> {
    pub v_min: T,
    pub v_max: T,
    pub theta_min: T,
    pub theta_max: T,
}

impl<T: Real> Envelope<T> {
    fn of(state: &State<T>) -> Self {
        let mut e = Self {
            v_min: T::infinity(),
            v_max: T::neg_infinity(),
            theta_min: T::infinity(),
            theta_max: T::neg_infinity(),
        };
        e.include(state);
        e
    }

    fn include(&mut self, state: &State<T>) {
        for (&v, &th) in state.v.iter().zip(&state.theta) {
            self.v_min = self.v_min.min(v);
            self.v_max = self.v_max.max(v);
            self.theta_min = self.theta_min.min(th);
            self.theta_max = self.theta_max.max(th);
        }
    }
}

/// Where a run picks up: either a fresh start or a checkpoint.
#[derive(Debug, Clone)]
pub struct RunStart<T> {
    pub state: State<T>,
    /// Accumulator carried over from an interrupted run; `None` starts fresh
    /// and records the initial state.
    pub accumulator: Option<DissipationAccumulator<T>>,
    /// Accepted steps already taken (keeps the record cadence aligned).
    pub step: usize,
}

impl<T> RunStart<T> {
    pub fn fresh(state: State<T>) -> Self {
        Self {
            state,
            accumulator: None,
            step: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub final_state: State<T>,
    pub records: Vec<DiagnosticsRecord<T>>,
    pub steps: usize,
    pub envelope: Envelope<T>,
    pub accumulator: DissipationAccumulator<T>,
    /// The observer asked to stop before `t_end`.
    pub interrupted: bool,
}

#[derive(Debug)]
pub struct RunFailure<T> {
    pub error: Error,
    pub records: Vec<DiagnosticsRecord<T>>,
    pub last_state: State<T>,
    pub steps: usize,
}

/// Observer invoked after every diagnostics record.
pub type Observer<'a, T> = dyn FnMut(&DiagnosticsRecord<T>, &State<T>) -> ControlFlow<()> + 'a;

/// A configured problem: mesh, gas, transport law, step control and an
/// optional source term.
#[derive(Clone)]
pub struct Solver<T> {
    pub grid: Grid<T>,
    pub params: GasParams<T>,
    pub law: TransportLaw<T>,
    pub ctl: StepControl<T>,
    forcing: Option<Arc<dyn Forcing<T>>>,
}

impl<T: Real> std::fmt::Debug for Solver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("law", &self.law)
            .field("ctl", &self.ctl)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl<T: Real> Solver<T> {
    pub fn new(
        grid: Grid<T>,
        params: GasParams<T>,
        law: TransportLaw<T>,
        ctl: StepControl<T>,
    ) -> Result<Self> {
        ctl.validate()?;
        Ok(Self {
            grid,
            params,
            law,
            ctl,
            forcing: None,
        })
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing<T>>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Right-hand side including the source term, if any.
    pub fn rhs(&self, state: &State<T>) -> Result<RhsOutput<T>> {
        let mut out = rhs(state, &self.grid, &self.params, &self.law)?;
        if let Some(f) = &self.forcing {
            let src = f.forcing(&self.grid, state.t);
            let inv_cv = T::one() / self.params.c_v();
            for i in 0..state.len() {
                out.dv_dt[i] = out.dv_dt[i] + src.dv_dt[i];
                out.du_dt[i] = out.du_dt[i] + src.du_dt[i];
                // the energy-equation source enters θ_t divided by c_v
                out.dtheta_dt[i] = out.dtheta_dt[i] + src.dtheta_dt[i] * inv_cv;
            }
        }
        Ok(out)
    }

    pub fn stable_dt(&self, state: &State<T>) -> Result<T> {
        stable_dt(state, &self.grid, &self.params, &self.law, &self.ctl)
    }

    fn checked(&self, state: State<T>) -> Result<State<T>> {
        state.check_admissible(self.ctl.positivity_floor)?;
        Ok(state)
    }

    /// One SSP-RK3 (Shu-Osher) step; every stage is checked against the
    /// positivity floor.
    pub fn step(&self, state: &State<T>, dt: T) -> Result<State<T>, StepFailure<T>> {
        let fail = |error| StepFailure {
            error,
            state: state.clone(),
        };
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(fail(Error::domain("dt", dt.as_f64(), "finite and > 0")));
        }
        let (quarter, third) = (T::lit(0.25), T::one() / T::lit(3.0));
        let three_quarters = T::lit(0.75);
        let two_thirds = T::lit(2.0) * third;
        let t0 = state.t;

        state
            .check_admissible(self.ctl.positivity_floor)
            .map_err(fail)?;
        let k0 = self.rhs(state).map_err(fail)?;
        let s1 = combine(state, None, &k0, T::one(), T::zero(), dt, t0 + dt);
        let s1 = self.checked(s1).map_err(fail)?;

        let k1 = self.rhs(&s1).map_err(fail)?;
        let s2 = combine(state, Some(&s1), &k1, three_quarters, quarter, quarter * dt, t0 + dt * T::lit(0.5));
        let s2 = self.checked(s2).map_err(fail)?;

        let k2 = self.rhs(&s2).map_err(fail)?;
        let s3 = combine(state, Some(&s2), &k2, third, two_thirds, two_thirds * dt, t0 + dt);
        self.checked(s3).map_err(fail)
    }

    /// Advances to `t_end` with adaptive steps, recording diagnostics.
    #[allow(clippy::result_large_err)]
    pub fn run(
        &self,
        initial: State<T>,
        t_end: T,
        opts: RunOptions,
    ) -> Result<RunOutcome<T>, RunFailure<T>> {
        self.run_observed(RunStart::fresh(initial), t_end, opts, &mut |_, _| {
            ControlFlow::Continue(())
        })
    }

    /// General driver: resumable start plus an observer called after each
    /// record that may stop the run early.
    #[allow(clippy::result_large_err)]
    pub fn run_observed(
        &self,
        start: RunStart<T>,
        t_end: T,
        opts: RunOptions,
        observer: &mut Observer<'_, T>,
    ) -> Result<RunOutcome<T>, RunFailure<T>> {
        let RunStart {
            state,
            accumulator,
            step,
        } = start;
        let mut records = Vec::new();
        let mut steps = step;
        let record_every = opts.record_every.max(1);
        let fail = |error, records, last_state: &State<T>, steps| RunFailure {
            error,
            records,
            last_state: last_state.clone(),
            steps,
        };

        if let Err(e) = state.check_admissible(self.ctl.positivity_floor) {
            return Err(fail(e, records, &state, steps));
        }
        if !(t_end >= state.t) {
            return Err(fail(
                Error::Invalid(format!("t_end = {t_end} precedes state time {}", state.t)),
                records,
                &state,
                steps,
            ));
        }
        let mut envelope = Envelope::of(&state);
        let mut acc = match accumulator {
            Some(acc) => acc,
            None => {
                let acc = match DissipationAccumulator::start(&state, &self.grid, &self.params, &self.law) {
                    Ok(a) => a,
                    Err(e) => return Err(fail(e, records, &state, steps)),
                };
                match diagnostics::record(&state, &self.grid, &self.params, &acc) {
                    Ok(r) => {
                        records.push(r);
                        if observer(&r, &state).is_break() {
                            return Ok(RunOutcome {
                                final_state: state,
                                records,
                                steps,
                                envelope,
                                accumulator: acc,
                                interrupted: true,
                            });
                        }
                    }
                    Err(e) => return Err(fail(e, records, &state, steps)),
                }
                acc
            }
        };

        let mut state = state;
        let mut interrupted = false;
        while state.t < t_end {
            if steps >= opts.max_steps {
                return Err(fail(
                    Error::Invalid(format!("step limit {} reached at t = {}", opts.max_steps, state.t)),
                    records,
                    &state,
                    steps,
                ));
            }
            let dt_stable = match self.stable_dt(&state) {
                Ok(dt) => dt,
                Err(e) => return Err(fail(e, records, &state, steps)),
            };
            let remaining = t_end - state.t;
            let last = dt_stable >= remaining;
            let dt = if last { remaining } else { dt_stable };
            let mut next = match self.step(&state, dt) {
                Ok(s) => s,
                Err(f) => return Err(fail(f.error, records, &f.state, steps)),
            };
            if last {
                next.t = t_end;
            }
            state = next;
            steps += 1;
            envelope.include(&state);
            let rate = diagnostics::dissipation_rate_unchecked(&state, &self.grid, &self.law);
            acc.advance(state.t, rate);

            if steps % record_every == 0 || state.t >= t_end {
                match diagnostics::record(&state, &self.grid, &self.params, &acc) {
                    Ok(r) => {
                        records.push(r);
                        if observer(&r, &state).is_break() && state.t < t_end {
                            interrupted = true;
                            break;
                        }
                    }
                    Err(e) => return Err(fail(e, records, &state, steps)),
                }
            }
        }
        Ok(RunOutcome {
            final_state: state,
            records,
            steps,
            envelope,
            accumulator: acc,
            interrupted,
        })
    }
}

/// `a·base + b·other + c·k`, with `other` defaulting to `base`.
fn combine<T: Real>(
    base: &State<T>,
    other: Option<&State<T>>,
    k: &RhsOutput<T>,
    a: T,
    b: T,
    c: T,
    t: T,
) -> State<T> {
    let other = other.unwrap_or(base);
    let mix = |x: &[T], y: &[T], d: &[T]| -> Vec<T> {
        x.iter()
            .zip(y)
            .zip(d)
            .map(|((&x, &y), &d)| a * x + b * y + c * d)
            .collect()
    };
    State {
        v: mix(&base.v, &other.v, &k.dv_dt),
        u: mix(&base.u, &other.u, &k.du_dt),
        theta: mix(&base.theta, &other.theta, &k.dtheta_dt),
        t,
    }
}
