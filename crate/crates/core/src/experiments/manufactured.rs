//! Manufactured-solution convergence study.
//!
//! With `S = sin(kx)`, `C = cos(kx)`, `k = π/L` the exact fields are
//!
//! ```text
//! v* = 1 + ε S cos t,   u* = ε S sin t,   θ* = 1 + ε C cos t
//! ```
//!
//! and the source terms follow by substituting them into the system:
//!
//! ```text
//! F_v = v_t - u_x
//! F_u = u_t + p_x - (μ u_x / v)_x
//! F_θ = c_v θ_t + p u_x - μ u_x² / v - (κ θ_x / v)_x
//! ```
//!
//! with `p_x = R(θ_x/v - θ v_x/v²)`,
//! `(μ u_x/v)_x = (μ' θ_x u_x + μ u_xx)/v - μ u_x v_x/v²` and
//! `(κ θ_x/v)_x = (κ' θ_x² + κ θ_xx)/v - κ θ_x v_x/v²`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gas::{GasParams, TransportLaw};
use crate::grid::{Grid, State};
use crate::identity::least_squares_slope;
use crate::num::Real;
use crate::solver::{Forcing, RhsOutput, RunOptions, Solver, StepControl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution<T> {
    pub epsilon: T,
    pub wavenumber: T,
    pub params: GasParams<T>,
    pub law: TransportLaw<T>,
}

/// Pointwise exact fields and their derivatives.
struct Exact<T> {
    v: T,
    vx: T,
    vt: T,
    u: T,
    ux: T,
    uxx: T,
    ut: T,
    th: T,
    tx: T,
    txx: T,
    tt: T,
}

impl<T: Real> ManufacturedSolution<T> {
    pub fn new(epsilon: T, half_width: T, params: GasParams<T>, law: TransportLaw<T>) -> Self {
        Self {
            epsilon,
            wavenumber: T::PI() / half_width,
            params,
            law,
        }
    }

    fn exact(&self, x: T, t: T) -> Exact<T> {
        let (e, k) = (self.epsilon, self.wavenumber);
        let (s, c) = (k * x).sin_cos();
        let (st, ct) = t.sin_cos();
        Exact {
            v: T::one() + e * s * ct,
            vx: e * k * c * ct,
            vt: -e * s * st,
            u: e * s * st,
            ux: e * k * c * st,
            uxx: -e * k * k * s * st,
            ut: e * s * ct,
            th: T::one() + e * c * ct,
            tx: -e * k * s * ct,
            txx: -e * k * k * c * ct,
            tt: -e * c * st,
        }
    }

    pub fn state(&self, grid: &Grid<T>, t: T) -> Result<State<T>> {
        let xs = grid.coordinates();
        let f = |sel: fn(&Exact<T>) -> T| xs.iter().map(|&x| sel(&self.exact(x, t))).collect();
        State::new(grid, f(|e| e.v), f(|e| e.u), f(|e| e.th), t)
    }

    /// `(F_v, F_u, F_θ)` at one point.
    pub fn source(&self, x: T, t: T) -> (T, T, T) {
        let e = self.exact(x, t);
        let r = self.params.r();
        let mu = self.law.mu_unchecked(e.th);
        let ka = self.law.kappa_unchecked(e.th);
        let (mu1, ka1) = match (self.law.mu_derivs(e.th), self.law.kappa_derivs(e.th)) {
            (Ok(m), Ok(k)) => (m.d1, k.d1),
            _ => (T::nan(), T::nan()),
        };
        let v2 = e.v * e.v;
        let p = r * e.th / e.v;
        let px = r * (e.tx / e.v - e.th * e.vx / v2);
        let visc = (mu1 * e.tx * e.ux + mu * e.uxx) / e.v - mu * e.ux * e.vx / v2;
        let heat = (ka1 * e.tx * e.tx + ka * e.txx) / e.v - ka * e.tx * e.vx / v2;
        let f_v = e.vt - e.ux;
        let f_u = e.ut + px - visc;
        let f_th = self.params.c_v() * e.tt + p * e.ux - mu * e.ux * e.ux / e.v - heat;
        (f_v, f_u, f_th)
    }
}

impl<T: Real> Forcing<T> for ManufacturedSolution<T> {
    fn forcing(&self, grid: &Grid<T>, t: T) -> RhsOutput<T> {
        let mut out = RhsOutput::zeros(grid.n());
        for (i, x) in grid.coordinates().into_iter().enumerate() {
            let (a, b, c) = self.source(x, t);
            out.dv_dt[i] = a;
            out.du_dt[i] = b;
            out.dtheta_dt[i] = c;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub levels: Vec<usize>,
    pub half_width: f64,
    pub t_end: f64,
    pub epsilon: f64,
    pub params: GasParams<f64>,
    pub law: TransportLaw<f64>,
    pub control: StepControl<f64>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            levels: vec![128, 256, 512],
            half_width: 2.0,
            t_end: 1.0,
            epsilon: 0.1,
            params: GasParams::default(),
            law: TransportLaw::default(),
            control: StepControl::default(),
        }
    }
}

/// Sup-norm errors per level and the fitted order of each field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub levels: Vec<usize>,
    pub dx: Vec<f64>,
    /// `[v, u, θ]` errors at `t_end` for each level.
    pub errors: Vec<[f64; 3]>,
    pub orders: [f64; 3],
    pub steps: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelError {
    pub dx: f64,
    pub errors: [f64; 3],
    pub steps: usize,
}

/// Runs the forced problem on `n` cells and measures the error at `t_end`.
pub fn manufactured_error(cfg: &ConvergenceConfig, n: usize) -> Result<LevelError> {
    let grid = Grid::new(n, cfg.half_width)?;
    let ms = ManufacturedSolution::new(cfg.epsilon, cfg.half_width, cfg.params, cfg.law);
    let solver = Solver::new(grid, cfg.params, cfg.law, cfg.control)?.with_forcing(Arc::new(ms));
    let out = solver
        .run(
            ms.state(&grid, 0.0)?,
            cfg.t_end,
            RunOptions {
                record_every: usize::MAX,
                ..RunOptions::default()
            },
        )
        .map_err(|f| f.error)?;
    let exact = ms.state(&grid, cfg.t_end)?;
    let err = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(LevelError {
        dx: grid.dx(),
        errors: [
            err(&out.final_state.v, &exact.v),
            err(&out.final_state.u, &exact.u),
            err(&out.final_state.theta, &exact.theta),
        ],
        steps: out.steps,
    })
}

pub fn manufactured_convergence(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    if cfg.levels.len() < 3 {
        return Err(Error::Invalid(format!(
            "convergence study needs at least 3 levels, got {}",
            cfg.levels.len()
        )));
    }
    if !(cfg.t_end > 0.0) {
        return Err(Error::domain("t_end", cfg.t_end, "> 0"));
    }
    let mut dx = Vec::new();
    let mut errors = Vec::new();
    let mut steps = Vec::new();
    for &n in &cfg.levels {
        let level = manufactured_error(cfg, n)?;
        dx.push(level.dx);
        errors.push(level.errors);
        steps.push(level.steps);
    }
    let lx: Vec<f64> = dx.iter().map(|h| h.ln()).collect();
    let order = |k: usize| {
        let ly: Vec<f64> = errors.iter().map(|e| e[k].ln()).collect();
        least_squares_slope(&lx, &ly)
    };
    Ok(ConvergenceReport {
        levels: cfg.levels.clone(),
        dx,
        orders: [order(0), order(1), order(2)],
        errors,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms() -> ManufacturedSolution<f64> {
        ManufacturedSolution::new(
            0.1,
            2.0,
            GasParams::normalized(1.4).unwrap(),
            TransportLaw::kinetic(4.0, 1.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn equilibrium_solution_has_no_forcing() {
        let mut m = ms();
        m.epsilon = 0.0;
        let grid = Grid::new(32, 2.0).unwrap();
        for t in [0.0, 0.3, 1.7] {
            let f = m.forcing(&grid, t);
            for field in [&f.dv_dt, &f.du_dt, &f.dtheta_dt] {
                assert!(field.iter().all(|&x| x == 0.0));
            }
        }
    }

    #[test]
    fn source_matches_finite_difference_residual() {
        // Independent check: difference the exact fields numerically and
        // rebuild the residual of each equation.
        let m = ms();
        let (h, ht) = (1e-4, 1e-5);
        let field = |x: f64, t: f64| {
            let e = m.exact(x, t);
            (e.v, e.u, e.th)
        };
        for &(x, t) in &[(0.3, 0.2), (-1.1, 0.9), (1.7, 2.5)] {
            let d_t = |sel: fn((f64, f64, f64)) -> f64| {
                (sel(field(x, t + ht)) - sel(field(x, t - ht))) / (2.0 * ht)
            };
            let at = |x: f64| field(x, t);
            let dx = |g: &dyn Fn(f64) -> f64, x: f64| (g(x + h) - g(x - h)) / (2.0 * h);
            let p = |x: f64| at(x).2 / at(x).0;
            let ux = |x: f64| dx(&|y| at(y).1, x);
            let tx = |x: f64| dx(&|y| at(y).2, x);
            let mu = |x: f64| m.law.mu(at(x).2).unwrap();
            let ka = |x: f64| m.law.kappa(at(x).2).unwrap();
            let visc = dx(&|y| mu(y) * ux(y) / at(y).0, x);
            let heat = dx(&|y| ka(y) * tx(y) / at(y).0, x);
            let (v, _, _) = at(x);
            let f_v = d_t(|f| f.0) - ux(x);
            let f_u = d_t(|f| f.1) + dx(&p, x) - visc;
            let f_th = m.params.c_v() * d_t(|f| f.2) + p(x) * ux(x) - mu(x) * ux(x).powi(2) / v - heat;
            let (a, b, c) = m.source(x, t);
            assert!((a - f_v).abs() < 1e-6, "{a} {f_v}");
            assert!((b - f_u).abs() < 1e-6, "{b} {f_u}");
            assert!((c - f_th).abs() < 1e-6, "{c} {f_th}");
        }
    }

    #[test]
    fn forced_solver_converges_at_second_order() {
        let cfg = ConvergenceConfig {
            levels: vec![32, 64, 128],
            law: TransportLaw::kinetic(4.0, 1.0, 1.0).unwrap(),
            t_end: 0.5,
            ..ConvergenceConfig::default()
        };
        let rep = manufactured_convergence(&cfg).unwrap();
        for p in rep.orders {
            assert!((1.8..=2.2).contains(&p), "{rep:?}");
        }
    }

    #[test]
    fn time_step_halving_leaves_error_unchanged() {
        let base = ConvergenceConfig {
            t_end: 0.5,
            ..ConvergenceConfig::default()
        };
        let run = |cfl: f64| {
            let mut c = base.clone();
            c.control.cfl_parabolic = cfl;
            c.control.cfl_hyperbolic = cfl;
            manufactured_error(&c, 64).unwrap().errors
        };
        let (a, b) = (run(0.4), run(0.2));
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= 0.01 * a[k], "{a:?} {b:?}");
        }
    }

    #[test]
    fn needs_three_levels() {
        let cfg = ConvergenceConfig {
            levels: vec![64, 128],
            ..ConvergenceConfig::default()
        };
        assert!(manufactured_convergence(&cfg).is_err());
    }
}
