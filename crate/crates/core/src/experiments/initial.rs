//! Compactly supported initial data given in `(v₀, u₀, s₀)` and converted to
//! `θ₀` through the gas model.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gas::GasParams;
use crate::grid::{discrete_sobolev_norm, Grid, State};
use crate::num::Real;

/// `(v₀, u₀, s₀)` as a function of `x`.
pub type ProfileFn = dyn Fn(f64) -> (f64, f64, f64) + Send + Sync;

/// Shape of the initial perturbation.
#[derive(Clone)]
pub enum IcFamily {
    /// `v₀ = 1 + a sin(πx/w) b(x)`, `u₀ = a sin(πx/w) b(x)`, `s₀ = 0`.
    SineBump,
    /// `v₀ = 1`, `u₀ = 0`, `s₀ = a (1 - 2ξ²) e^(-ξ²) b(x)` with `ξ = 3|x|/w`.
    GaussianEntropyBump,
    /// User profile; must equal `(1, 0, 0)` for `|x| >= w`.
    Custom(Arc<ProfileFn>),
}

impl fmt::Debug for IcFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl IcFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SineBump => "sine_bump",
            Self::GaussianEntropyBump => "gaussian_entropy_bump",
            Self::Custom(_) => "custom",
        }
    }

    /// Parses the built-in family names (`custom` has no textual form).
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sine_bump" => Some(Self::SineBump),
            "gaussian_entropy_bump" | "entropy_bump" => Some(Self::GaussianEntropyBump),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub family: IcFamily,
    pub amplitude: f64,
    /// Half-width `w` of the support.
    pub support: f64,
}

impl InitialData {
    pub fn sine_bump(amplitude: f64, support: f64) -> Self {
        Self {
            family: IcFamily::SineBump,
            amplitude,
            support,
        }
    }

    pub fn entropy_bump(amplitude: f64, support: f64) -> Self {
        Self {
            family: IcFamily::GaussianEntropyBump,
            amplitude,
            support,
        }
    }

    /// `(v₀, u₀, s₀)` at `x`.
    pub fn profile(&self, x: f64) -> (f64, f64, f64) {
        let w = self.support;
        let r = x.abs() / w;
        if r >= 1.0 {
            if let IcFamily::Custom(f) = &self.family {
                return f(x);
            }
            return (1.0, 0.0, 0.0);
        }
        let b = taper(r);
        let a = self.amplitude;
        match &self.family {
            IcFamily::SineBump => {
                let s = (std::f64::consts::PI * x / w).sin();
                (1.0 + a * s * b, a * s * b, 0.0)
            }
            IcFamily::GaussianEntropyBump => {
                let xi2 = 9.0 * r * r;
                (1.0, 0.0, a * (1.0 - 2.0 * xi2) * (-xi2).exp() * b)
            }
            IcFamily::Custom(f) => f(x),
        }
    }
}

/// `(1 - r²)⁴`: three continuous derivatives across `r = 1`.
fn taper(r: f64) -> f64 {
    (1.0 - r * r).powi(4)
}

/// Bounds and norms of the sampled initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcReport {
    pub v_min: f64,
    pub v_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// `‖θ₀ - 1‖₃ / sqrt(γ - 1)`.
    pub scaled_theta_norm: f64,
    /// `‖θ₀ - 1‖₃ / (γ - 1)`: stays bounded as `γ → 1` for fixed entropy data.
    pub theta_norm_ratio: f64,
}

/// Samples `ic` on `grid` and converts the entropy to temperature.
pub fn build_initial_state<T: Real>(
    ic: &InitialData,
    grid: &Grid<T>,
    params: &GasParams<T>,
) -> Result<(State<T>, IcReport)> {
    let l = grid.half_width().as_f64();
    let dx = grid.dx().as_f64();
    let w = ic.support;
    if !(w.is_finite() && w >= 8.0 * dx) {
        return Err(Error::Invalid(format!(
            "support {w} must cover at least 8 cells (dx = {dx})"
        )));
    }
    if !(w < 0.5 * l) {
        return Err(Error::Invalid(format!(
            "support {w} must be below half the half-width {}",
            0.5 * l
        )));
    }
    if !ic.amplitude.is_finite() {
        return Err(Error::domain("amplitude", ic.amplitude, "finite"));
    }

    let n = grid.n();
    let (mut v, mut u, mut theta) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, x) in grid.coordinates().into_iter().enumerate() {
        let xf = x.as_f64();
        let (v0, u0, s0) = ic.profile(xf);
        if xf.abs() >= w && (v0, u0, s0) != (1.0, 0.0, 0.0) {
            return Err(Error::Invalid(format!(
                "initial data is not compactly supported: ({v0}, {u0}, {s0}) at x = {xf}"
            )));
        }
        if !(v0 > 0.0) {
            return Err(Error::Invalid(format!("initial volume {v0} <= 0 at node {i}")));
        }
        let v0 = T::lit(v0);
        v.push(v0);
        u.push(T::lit(u0));
        theta.push(params.temperature_from_entropy(v0, T::lit(s0))?);
    }
    let state = State::new(grid, v, u, theta, T::zero())?;

    let fold = |f: &[T]| {
        f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x.as_f64()), hi.max(x.as_f64()))
        })
    };
    let (v_min, v_max) = fold(&state.v);
    let (theta_min, theta_max) = fold(&state.theta);
    let dth: Vec<T> = state.theta.iter().map(|&x| x - T::one()).collect();
    let norm = discrete_sobolev_norm(&[&dth], 3, grid)?.as_f64();
    let gm1 = (params.gamma() - T::one()).as_f64();
    let report = IcReport {
        v_min,
        v_max,
        theta_min,
        theta_max,
        scaled_theta_norm: norm / gm1.sqrt(),
        theta_norm_ratio: norm / gm1,
    };
    Ok((state, report))
}
