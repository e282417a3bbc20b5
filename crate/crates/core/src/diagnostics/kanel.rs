//! Kanel's functional `Ψ(v) = ∫₁^v sqrt(φ(z)) / z dz` and its growth law.
//!
//! `Ψ` converts an `L²` bound on `v_x / v` into pointwise bounds on `v`: it is
//! strictly increasing, vanishes at `v = 1`, grows like `2 sqrt(v)` as
//! `v → ∞` and like `-(2/3) |ln v|^(3/2)` as `v → 0⁺`.

use crate::error::{Error, Result};
use crate::quadrature;

/// Absolute tolerance of every `Ψ` evaluation.
pub const PSI_TOLERANCE: f64 = 1e-10;
const MAX_PANELS: usize = 4096;

/// Largest relative deviation accepted for the two asymptotic ratios.
pub const ASYMPTOTIC_BAND: f64 = 0.15;

/// `√φ(e^t)` with `φ(e^t) = e^t - 1 - t`.
#[inline]
fn integrand_log(t: f64) -> f64 {
    (t.exp_m1() - t).max(0.0).sqrt()
}

/// `Ψ'(v) = sqrt(φ(v)) / v`.
pub fn kanel_psi_derivative(v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain("v", v, "> 0"));
    }
    Ok(integrand_log(v.ln()) / v)
}

/// `Ψ(v)` to absolute accuracy [`PSI_TOLERANCE`].
///
/// Integrated in `t = ln z`, where the integrand `sqrt(e^t - 1 - t)` is smooth
/// on either side of `t = 0` and the interval never crosses it.
pub fn kanel_psi(v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain("v", v, "> 0"));
    }
    if v == 1.0 {
        return Ok(0.0);
    }
    let q = quadrature::integrate(integrand_log, 0.0, v.ln(), PSI_TOLERANCE, MAX_PANELS)?;
    Ok(q.value)
}

/// Growth envelope `v^(1/2) + |ln v|^(3/2)`.
pub fn growth_envelope(v: f64) -> f64 {
    v.sqrt() + v.ln().abs().powf(1.5)
}

/// Constants of the bound `|Ψ(v)| >= A₁ (v^(1/2) + |ln v|^(3/2)) - A₂`.
///
/// The bound always forces `A₂ >= A₁` (take `v = 1`). `a1` is the largest
/// constant for which the bound holds on the samples with `A₂ = A₁`; it is
/// `None` when every sample sits at `v = 1`, where any `A₂ >= A₁` works.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KanelFit {
    pub a1: Option<f64>,
    pub a2: f64,
}

pub fn fit_kanel_bound(samples: &[f64]) -> Result<KanelFit> {
    let mut a1: Option<f64> = None;
    for &v in samples {
        let psi = kanel_psi(v)?.abs();
        let excess = growth_envelope(v) - 1.0;
        if excess > 0.0 {
            let c = psi / excess;
            a1 = Some(a1.map_or(c, |m| m.min(c)));
        }
    }
    Ok(KanelFit {
        a1,
        a2: a1.unwrap_or(0.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KanelReport {
    pub fit: KanelFit,
    pub v_min: f64,
    pub v_max: f64,
    /// `Ψ(v_max) / (2 sqrt(v_max))`, tends to 1 as `v_max → ∞`.
    pub large_ratio: f64,
    /// `|Ψ(v_min)| / ((2/3) |ln v_min|^(3/2))`, tends to 1 as `v_min → 0⁺`.
    pub small_ratio: f64,
    pub samples: Vec<(f64, f64)>,
}

impl KanelReport {
    pub fn asymptotics_hold(&self) -> bool {
        (self.large_ratio - 1.0).abs() <= ASYMPTOTIC_BAND
            && (self.small_ratio - 1.0).abs() <= ASYMPTOTIC_BAND
    }

    /// Whether `Ψ` is strictly increasing across the (sorted) samples.
    pub fn strictly_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

/// Evaluates `Ψ` over samples spanning at least `[1e-3, 1e3]`, fits the
/// growth constants and measures both asymptotic ratios.
pub fn kanel_growth_check(samples: &[f64]) -> Result<KanelReport> {
    let v_min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let v_max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(v_min <= 1e-3 && v_max >= 1e3) {
        return Err(Error::Invalid(format!(
            "Kanel samples span [{v_min:e}, {v_max:e}], need at least [1e-3, 1e3]"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let values = sorted
        .iter()
        .map(|&v| kanel_psi(v).map(|p| (v, p)))
        .collect::<Result<Vec<_>>>()?;
    let psi_max = values.last().expect("nonempty").1;
    let psi_min = values[0].1;
    Ok(KanelReport {
        fit: fit_kanel_bound(&sorted)?,
        v_min,
        v_max,
        large_ratio: psi_max / (2.0 * v_max.sqrt()),
        small_ratio: psi_min.abs() / (2.0 / 3.0 * v_min.ln().abs().powf(1.5)),
        samples: values,
    })
}

/// `count` points log-uniform on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
