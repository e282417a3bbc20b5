//! Consistency checks between the discrete operators and hand-expanded
//! chain-rule identities for the transport, pressure and heat-flux terms.
//!
//! Each identity is evaluated as `LHS - RHS` on a smooth periodic state: the
//! left side nests the discrete operators of [`crate::grid`], the right side is
//! the fully expanded form using the closed-form derivatives of `μ` and `κ`.
//! Both sides agree in the continuum, so the residual is pure truncation error
//! and should vanish at second order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gas::{CoefDerivs, GasParams, TransportLaw};
use crate::grid::{div_flux_unchecked, dx_central_unchecked, dxx_compact_unchecked, Grid, State};
use crate::num::Real;
use crate::solver;

/// Identity under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    /// `(μ v_x / v)_t = u_t + p_x + μ'(θ_t v_x - u_x θ_x) / v`
    I2_1,
    /// `c_v θ_t` against its expanded right-hand side
    I2_2,
    /// `(θ/v)_x`
    I2_5,
    /// `(θ/v)_xx`
    I2_6,
    /// `(θ/v)_xxx`
    I2_7,
    /// `(μ v_x / v)_x`
    I2_8,
    /// `(μ v_x / v)_xx - μ v_xxx / v`
    I2_9,
    /// `(μ u_x² / v)_x`
    I2_10,
    /// `(μ u_x² / v)_xx`
    I2_11,
    /// `(μ u_x / v)_x`
    I2_12,
    /// `(μ u_x / v)_xx - μ u_xxx / v`
    I2_13,
    /// `(μ u_x / v)_xxx - μ u_xxxx / v`
    I2_14,
    /// `(κ θ_x / v)_x`
    I2_15,
    /// `(κ θ_x / v)_xx - κ θ_xxx / v`
    I2_16,
}

impl IdentityId {
    pub const ALL: [IdentityId; 14] = [
        Self::I2_1,
        Self::I2_2,
        Self::I2_5,
        Self::I2_6,
        Self::I2_7,
        Self::I2_8,
        Self::I2_9,
        Self::I2_10,
        Self::I2_11,
        Self::I2_12,
        Self::I2_13,
        Self::I2_14,
        Self::I2_15,
        Self::I2_16,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::I2_1 => "I2_1",
            Self::I2_2 => "I2_2",
            Self::I2_5 => "I2_5",
            Self::I2_6 => "I2_6",
            Self::I2_7 => "I2_7",
            Self::I2_8 => "I2_8",
            Self::I2_9 => "I2_9",
            Self::I2_10 => "I2_10",
            Self::I2_11 => "I2_11",
            Self::I2_12 => "I2_12",
            Self::I2_13 => "I2_13",
            Self::I2_14 => "I2_14",
            Self::I2_15 => "I2_15",
            Self::I2_16 => "I2_16",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown identity tag {s:?}")))
    }
}

/// Seeded truncated Fourier series around the far-field state.
///
/// Each field is `base + amplitude · Σ_k c_k cos(kπx/L + φ_k)` for
/// `k = 1..=num_modes`, with `c_k` uniform in `[0.5, 1] / k` and `φ_k` uniform
/// in `[0, 2π)`, so `|field - base| <= num_modes · amplitude`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothFieldSpec {
    pub seed: u64,
    pub num_modes: usize,
    pub amplitude: f64,
    /// Base state `(v̄, ū, θ̄)`.
    pub base: (f64, f64, f64),
    /// Half-width `L` of the periodic domain the fields live on.
    pub half_width: f64,
}

impl Default for SmoothFieldSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            num_modes: 3,
            amplitude: 0.1,
            base: (1.0, 0.0, 1.0),
            half_width: std::f64::consts::PI,
        }
    }
}

impl SmoothFieldSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let reach = self.num_modes as f64 * self.amplitude.abs();
        if !(self.base.0 - reach > 0.0) || !(self.base.2 - reach > 0.0) {
            return Err(Error::Invalid(format!(
                "smooth fields may reach nonpositive v or theta: base ({}, {}), {} modes of amplitude {}",
                self.base.0, self.base.2, self.num_modes, self.amplitude
            )));
        }
        Ok(())
    }

    /// Samples `(v, u, θ)` on `grid` at `t = 0`.
    pub fn generate<T: Real>(&self, grid: &Grid<T>) -> Result<State<T>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let l = grid.half_width().as_f64();
        let xs: Vec<f64> = grid.coordinates().iter().map(|x| x.as_f64()).collect();
        let mut field = |base: f64| -> Vec<T> {
            let modes: Vec<(f64, f64, f64)> = (1..=self.num_modes)
                .map(|k| {
                    let k = k as f64;
                    let c = rng.gen_range(0.5..=1.0) / k;
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    (k * std::f64::consts::PI / l, c, phase)
                })
                .collect();
            xs.iter()
                .map(|&x| {
                    let s: f64 = modes.iter().map(|&(w, c, ph)| c * (w * x + ph).cos()).sum();
                    T::lit(base + self.amplitude * s)
                })
                .collect()
        };
        let v = field(self.base.0);
        let u = field(self.base.1);
        let theta = field(self.base.2);
        State::new(grid, v, u, theta, T::zero())
    }
}

/// Pointwise `LHS - RHS` of identity `id` on `state`.
///
/// Time derivatives needed by `I2_1` and `I2_2` come from the semi-discrete
/// right-hand side of the solver.
pub fn evaluate_identity<T: Real>(
    id: IdentityId,
    state: &State<T>,
    law: &TransportLaw<T>,
    params: &GasParams<T>,
    grid: &Grid<T>,
) -> Result<Vec<T>> {
    if state.len() != grid.n() {
        return Err(Error::LengthMismatch {
            expected: grid.n(),
            got: state.len(),
        });
    }
    state.check_admissible(T::zero())?;
    let n = grid.n();
    let h = grid.dx();
    let d1 = |f: &[T]| dx_central_unchecked(f, h);
    let d2 = |f: &[T]| dxx_compact_unchecked(f, h);
    let (v, u, th) = (&state.v, &state.u, &state.theta);

    let vx = d1(v);
    let vxx = d2(v);
    let ux = d1(u);
    let uxx = d2(u);
    let tx = d1(th);
    let txx = d2(th);
    let mu: Vec<CoefDerivs<T>> = th.iter().map(|&t| law.mu_derivs(t)).collect::<Result<_>>()?;
    let ka: Vec<CoefDerivs<T>> = th.iter().map(|&t| law.kappa_derivs(t)).collect::<Result<_>>()?;
    let mu_v: Vec<T> = (0..n).map(|i| mu[i].value / v[i]).collect();
    let ka_v: Vec<T> = (0..n).map(|i| ka[i].value / v[i]).collect();
    let (two, three, four, six) = (T::lit(2.0), T::lit(3.0), T::lit(4.0), T::lit(6.0));
    let pointwise = |lhs: Vec<T>, rhs: &dyn Fn(usize) -> T| -> Vec<T> {
        lhs.into_iter().enumerate().map(|(i, l)| l - rhs(i)).collect()
    };

    let residual = match id {
        IdentityId::I2_1 => {
            let dt = solver::rhs(state, grid, params, law)?;
            let vt_x = d1(&dt.dv_dt);
            let p: Vec<T> = (0..n).map(|i| params.r() * th[i] / v[i]).collect();
            let px = d1(&p);
            let lhs = (0..n)
                .map(|i| {
                    mu[i].d1 * dt.dtheta_dt[i] * vx[i] / v[i] + mu[i].value * vt_x[i] / v[i]
                        - mu[i].value * vx[i] * dt.dv_dt[i] / (v[i] * v[i])
                })
                .collect();
            pointwise(lhs, &|i| {
                dt.du_dt[i] + px[i] + mu[i].d1 / v[i] * (dt.dtheta_dt[i] * vx[i] - ux[i] * tx[i])
            })
        }
        IdentityId::I2_2 => {
            let dt = solver::rhs(state, grid, params, law)?;
            let lhs = dt.dtheta_dt.iter().map(|&x| params.c_v() * x).collect();
            pointwise(lhs, &|i| {
                (mu[i].value * ux[i] * ux[i] + ka[i].d1 * tx[i] * tx[i] + ka[i].value * txx[i]
                    - params.r() * th[i] * ux[i])
                    / v[i]
                    - ka[i].value * tx[i] * vx[i] / (v[i] * v[i])
            })
        }
        IdentityId::I2_5 | IdentityId::I2_6 | IdentityId::I2_7 => {
            let q: Vec<T> = (0..n).map(|i| th[i] / v[i]).collect();
            match id {
                IdentityId::I2_5 => pointwise(d1(&q), &|i| {
                    tx[i] / v[i] - th[i] * vx[i] / (v[i] * v[i])
                }),
                IdentityId::I2_6 => pointwise(d2(&q), &|i| {
                    let w = v[i];
                    txx[i] / w - (two * tx[i] * vx[i] + th[i] * vxx[i]) / (w * w)
                        + two * th[i] * vx[i] * vx[i] / (w * w * w)
                }),
                _ => {
                    let vxxx = d1(&vxx);
                    let txxx = d1(&txx);
                    pointwise(d1(&d2(&q)), &|i| {
                        let w = v[i];
                        txxx[i] / w
                            - (three * txx[i] * vx[i] + three * tx[i] * vxx[i] + th[i] * vxxx[i])
                                / (w * w)
                            + (six * tx[i] * vx[i] * vx[i] + six * th[i] * vx[i] * vxx[i])
                                / (w * w * w)
                            - six * th[i] * vx[i].powi(3) / (w * w * w * w)
                    })
                }
            }
        }
        IdentityId::I2_8 | IdentityId::I2_9 => {
            let q: Vec<T> = (0..n).map(|i| mu_v[i] * vx[i]).collect();
            if id == IdentityId::I2_8 {
                pointwise(d1(&q), &|i| {
                    let m = &mu[i];
                    (m.d1 * tx[i] * vx[i] + m.value * vxx[i]) / v[i]
                        - m.value * vx[i] * vx[i] / (v[i] * v[i])
                })
            } else {
                let vxxx = d1(&vxx);
                let lhs = d2(&q)
                    .into_iter()
                    .enumerate()
                    .map(|(i, x)| x - mu_v[i] * vxxx[i])
                    .collect();
                pointwise(lhs, &|i| {
                    let (m, w) = (&mu[i], v[i]);
                    (m.d2 * tx[i] * tx[i] * vx[i] + m.d1 * txx[i] * vx[i]
                        + two * m.d1 * tx[i] * vxx[i])
                        / w
                        - (two * m.d1 * tx[i] * vx[i] * vx[i] + three * m.value * vx[i] * vxx[i])
                            / (w * w)
                        + two * m.value * vx[i].powi(3) / (w * w * w)
                })
            }
        }
        IdentityId::I2_10 | IdentityId::I2_11 => {
            let q: Vec<T> = (0..n).map(|i| mu_v[i] * ux[i] * ux[i]).collect();
            if id == IdentityId::I2_10 {
                pointwise(d1(&q), &|i| {
                    let m = &mu[i];
                    (m.d1 * tx[i] * ux[i] * ux[i] + two * m.value * ux[i] * uxx[i]) / v[i]
                        - m.value * ux[i] * ux[i] * vx[i] / (v[i] * v[i])
                })
            } else {
                let uxxx = d1(&uxx);
                pointwise(d2(&q), &|i| {
                    let (m, w) = (&mu[i], v[i]);
                    let u2 = ux[i] * ux[i];
                    (m.d2 * tx[i] * tx[i] * u2 + m.d1 * txx[i] * u2
                        + four * m.d1 * tx[i] * ux[i] * uxx[i]
                        + two * m.value * uxx[i] * uxx[i]
                        + two * m.value * ux[i] * uxxx[i])
                        / w
                        - (two * m.d1 * tx[i] * u2 * vx[i]
                            + four * m.value * ux[i] * uxx[i] * vx[i]
                            + m.value * u2 * vxx[i])
                            / (w * w)
                        + two * m.value * u2 * vx[i] * vx[i] / (w * w * w)
                })
            }
        }
        IdentityId::I2_12 => pointwise(div_flux_unchecked(&mu_v, u, h), &|i| {
            let m = &mu[i];
            (m.d1 * tx[i] * ux[i] + m.value * uxx[i]) / v[i] - m.value * ux[i] * vx[i] / (v[i] * v[i])
        }),
        IdentityId::I2_13 => {
            let q: Vec<T> = (0..n).map(|i| mu_v[i] * ux[i]).collect();
            let uxxx = d1(&uxx);
            let lhs = d2(&q)
                .into_iter()
                .enumerate()
                .map(|(i, x)| x - mu_v[i] * uxxx[i])
                .collect();
            pointwise(lhs, &|i| {
                let (m, w) = (&mu[i], v[i]);
                (m.d2 * tx[i] * tx[i] * ux[i] + m.d1 * txx[i] * ux[i] + two * m.d1 * tx[i] * uxx[i])
                    / w
                    - (two * m.d1 * tx[i] * vx[i] * ux[i]
                        + two * m.value * uxx[i] * vx[i]
                        + m.value * ux[i] * vxx[i])
                        / (w * w)
                    + two * m.value * ux[i] * vx[i] * vx[i] / (w * w * w)
            })
        }
        IdentityId::I2_14 => {
            let q: Vec<T> = (0..n).map(|i| mu_v[i] * ux[i]).collect();
            let uxxx = d1(&uxx);
            let uxxxx = d2(&uxx);
            let vxxx = d1(&vxx);
            let txxx = d1(&txx);
            let lhs = d1(&d2(&q))
                .into_iter()
                .enumerate()
                .map(|(i, x)| x - mu_v[i] * uxxxx[i])
                .collect();
            pointwise(lhs, &|i| {
                let (m, w) = (&mu[i], v[i]);
                let (tx, txx, txxx) = (tx[i], txx[i], txxx[i]);
                let (ux, uxx, uxxx) = (ux[i], uxx[i], uxxx[i]);
                let (vx, vxx, vxxx) = (vx[i], vxx[i], vxxx[i]);
                (m.d3 * tx.powi(3) * ux
                    + three * m.d2 * tx * tx * uxx
                    + three * m.d2 * ux * tx * txx
                    + three * m.d1 * tx * uxxx
                    + m.d1 * txxx * ux
                    + three * m.d1 * txx * uxx)
                    / w
                    - (three * m.d2 * tx * tx * ux * vx
                        + three * m.d1 * txx * ux * vx
                        + six * m.d1 * uxx * tx * vx
                        + three * m.d1 * tx * ux * vxx
                        + three * m.value * uxxx * vx
                        + three * m.value * vxx * uxx
                        + m.value * ux * vxxx)
                        / (w * w)
                    + (six * m.d1 * tx * ux * vx * vx
                        + six * m.value * uxx * vx * vx
                        + six * m.value * vxx * ux * vx)
                        / (w * w * w)
                    - six * m.value * ux * vx.powi(3) / (w * w * w * w)
            })
        }
        IdentityId::I2_15 => pointwise(div_flux_unchecked(&ka_v, th, h), &|i| {
            let k = &ka[i];
            (k.d1 * tx[i] * tx[i] + k.value * txx[i]) / v[i] - k.value * tx[i] * vx[i] / (v[i] * v[i])
        }),
        IdentityId::I2_16 => {
            let txxx = d1(&txx);
            let lhs = d1(&div_flux_unchecked(&ka_v, th, h))
                .into_iter()
                .enumerate()
                .map(|(i, x)| x - ka_v[i] * txxx[i])
                .collect();
            pointwise(lhs, &|i| {
                let (k, w) = (&ka[i], v[i]);
                (k.d2 * tx[i].powi(3) + three * k.d1 * tx[i] * txx[i]) / w
                    - (two * k.value * txx[i] * vx[i]
                        + two * k.d1 * tx[i] * tx[i] * vx[i]
                        + k.value * tx[i] * vxx[i])
                        / (w * w)
                    + two * k.value * tx[i] * vx[i] * vx[i] / (w * w * w)
            })
        }
    };
    Ok(residual)
}

/// Coarsest-level residual below which the order is reported as exact.
pub const EXACT_THRESHOLD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasuredOrder {
    /// The residual is at roundoff on every level.
    Exact,
    /// Least-squares slope of `log(max residual)` against `log(dx)`.
    Order(f64),
}

impl fmt::Display for MeasuredOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact => f.write_str("exact"),
            Self::Order(p) => write!(f, "{p:.4}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub id: IdentityId,
    pub levels: Vec<usize>,
    pub dx: Vec<f64>,
    pub max_residuals: Vec<f64>,
    pub order: MeasuredOrder,
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Refinement study of one identity over grids of `levels` cells, each twice
/// the previous one. Deterministic for a fixed spec.
pub fn measure_order(
    id: IdentityId,
    spec: &SmoothFieldSpec,
    levels: &[usize],
    params: &GasParams<f64>,
    law: &TransportLaw<f64>,
) -> Result<OrderReport> {
    if levels.len() < 3 {
        return Err(Error::Invalid(format!(
            "order measurement needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    if levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Invalid(format!("levels {levels:?} must double")));
    }
    let mut dx = Vec::with_capacity(levels.len());
    let mut max_residuals = Vec::with_capacity(levels.len());
    for &n in levels {
        let grid = Grid::new(n, spec.half_width)?;
        let state = spec.generate(&grid)?;
        let r = evaluate_identity(id, &state, law, params, &grid)?;
        dx.push(grid.dx());
        max_residuals.push(r.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    let order = if max_residuals[0] < EXACT_THRESHOLD {
        MeasuredOrder::Exact
    } else {
        let lx: Vec<f64> = dx.iter().map(|h| h.ln()).collect();
        let ly: Vec<f64> = max_residuals.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
        MeasuredOrder::Order(least_squares_slope(&lx, &ly))
    };
    Ok(OrderReport {
        id,
        levels: levels.to_vec(),
        dx,
        max_residuals,
        order,
    })
}

/// Transport law used by the default identity sweep: both exponents nonzero
/// so every derivative term of `μ` and `κ` participates.
pub fn default_identity_law() -> TransportLaw<f64> {
    TransportLaw::power_law(1.0, 1.5, 0.75, 1.25).expect("valid constants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LEVELS: [usize; 3] = [128, 256, 512];

    fn gas() -> GasParams<f64> {
        GasParams::new(1.4, 1.3, 1.0).unwrap()
    }

    #[test]
    fn tags_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.label().parse::<IdentityId>().unwrap(), id);
        }
        assert!("I2_3".parse::<IdentityId>().is_err());
        assert!("I2_17".parse::<IdentityId>().is_err());
    }

    #[test]
    fn equilibrium_residual_is_zero() {
        let grid = Grid::new(64, 3.0).unwrap();
        let st = State::equilibrium(&grid);
        for id in IdentityId::ALL {
            let r = evaluate_identity(id, &st, &default_identity_law(), &gas(), &grid).unwrap();
            assert!(r.iter().all(|&x| x == 0.0), "{id}");
        }
    }

    #[test]
    fn generated_fields_respect_bounds() {
        let spec = SmoothFieldSpec {
            amplitude: 0.3,
            ..SmoothFieldSpec::with_seed(3)
        };
        let grid = Grid::new(128, spec.half_width).unwrap();
        let st = spec.generate(&grid).unwrap();
        let lo = 1.0 - 3.0 * 0.3;
        assert!(st.v.iter().all(|&x| x >= lo));
        assert!(st.theta.iter().all(|&x| x >= lo));
        assert_eq!(st, spec.generate(&grid).unwrap());
        let too_big = SmoothFieldSpec {
            amplitude: 0.4,
            ..spec
        };
        assert!(too_big.generate(&grid).is_err());
    }

    #[test]
    fn every_identity_converges_at_second_order() {
        for id in IdentityId::ALL {
            for seed in [1, 42] {
                let rep = measure_order(
                    id,
                    &SmoothFieldSpec::with_seed(seed),
                    &LEVELS,
                    &gas(),
                    &default_identity_law(),
                )
                .unwrap();
                match rep.order {
                    MeasuredOrder::Order(p) => assert!(p >= 1.8, "{id} seed {seed}: {rep:?}"),
                    MeasuredOrder::Exact => panic!("{id}: unexpectedly exact"),
                }
            }
        }
    }

    #[test]
    fn pressure_second_derivative_order_seed_42() {
        let rep = measure_order(
            IdentityId::I2_6,
            &SmoothFieldSpec::with_seed(42),
            &LEVELS,
            &gas(),
            &default_identity_law(),
        )
        .unwrap();
        let MeasuredOrder::Order(p) = rep.order else { panic!() };
        assert!((1.8..=2.2).contains(&p), "{p}");
    }

    #[test]
    fn heat_flux_order_seed_7() {
        let rep = measure_order(
            IdentityId::I2_15,
            &SmoothFieldSpec::with_seed(7),
            &LEVELS,
            &gas(),
            &default_identity_law(),
        )
        .unwrap();
        let MeasuredOrder::Order(p) = rep.order else { panic!() };
        assert!((1.8..=2.2).contains(&p), "{p}");
    }

    #[test]
    fn zero_amplitude_is_exact() {
        let spec = SmoothFieldSpec {
            amplitude: 0.0,
            ..SmoothFieldSpec::default()
        };
        for id in [IdentityId::I2_1, IdentityId::I2_14] {
            let rep = measure_order(id, &spec, &LEVELS, &gas(), &default_identity_law()).unwrap();
            assert_eq!(rep.order, MeasuredOrder::Exact);
        }
    }

    #[test]
    fn measure_order_validates_levels() {
        let spec = SmoothFieldSpec::default();
        let law = default_identity_law();
        assert!(measure_order(IdentityId::I2_5, &spec, &[128, 256], &gas(), &law).is_err());
        assert!(measure_order(IdentityId::I2_5, &spec, &[128, 256, 384], &gas(), &law).is_err());
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let grid = Grid::new(32, 1.0).unwrap();
        let mut st = State::equilibrium(&grid);
        st.u[4] = f64::NAN;
        let err = evaluate_identity(IdentityId::I2_12, &st, &default_identity_law(), &gas(), &grid);
        assert!(matches!(err, Err(Error::NonFinite { index: 4, .. })));
    }

    #[test]
    fn v_x_variant_of_third_derivative_term_does_not_converge() {
        // Replacing u_x by v_x in the μ''' term leaves an O(1) residual, which
        // is what singles out the u_x form.
        let spec = SmoothFieldSpec::with_seed(5);
        let law = default_identity_law();
        let params = gas();
        let mut last = 0.0;
        for n in LEVELS {
            let grid = Grid::new(n, spec.half_width).unwrap();
            let st = spec.generate(&grid).unwrap();
            let r = evaluate_identity(IdentityId::I2_14, &st, &law, &params, &grid).unwrap();
            let vx = crate::grid::dx_central(&st.v, &grid).unwrap();
            let ux = crate::grid::dx_central(&st.u, &grid).unwrap();
            let tx = crate::grid::dx_central(&st.theta, &grid).unwrap();
            let wrong = (0..n)
                .map(|i| {
                    let m3 = law.mu_derivs(st.theta[i]).unwrap().d3;
                    (r[i] + m3 * tx[i].powi(3) * (ux[i] - vx[i]) / st.v[i]).abs()
                })
                .fold(0.0, f64::max);
            last = wrong;
        }
        assert!(last > 1e-4, "{last}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn residual_is_translation_equivariant(seed in 0u64..1000, shift in 1usize..63, tag in 0usize..14) {
            let id = IdentityId::ALL[tag];
            let spec = SmoothFieldSpec::with_seed(seed);
            let grid = Grid::new(64, spec.half_width).unwrap();
            let st = spec.generate(&grid).unwrap();
            let law = default_identity_law();
            let mut base = evaluate_identity(id, &st, &law, &gas(), &grid).unwrap();
            let shifted = evaluate_identity(id, &st.rotated(shift), &law, &gas(), &grid).unwrap();
            base.rotate_right(shift);
            for (a, b) in base.iter().zip(&shifted) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
