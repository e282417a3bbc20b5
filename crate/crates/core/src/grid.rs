//! Uniform periodic mesh in the Lagrangian mass coordinate, field storage,
//! second-order difference operators and discrete norms.

use crate::error::{Error, Field, RegimeExit, Result};
use crate::num::Real;

/// Periodic mesh on `[-L, L)` with `n` cells; `x_i = -L + i dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    n: usize,
    half_width: T,
}

impl<T: Real> Grid<T> {
    pub const MIN_CELLS: usize = 16;

    pub fn new(n: usize, half_width: T) -> Result<Self> {
        if n < Self::MIN_CELLS || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be even and >= {}",
                Self::MIN_CELLS
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half width L = {half_width} must be positive"
            )));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn length(&self) -> T {
        T::lit(2.0) * self.half_width
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.length() / T::from_index(self.n)
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        -self.half_width + T::from_index(i) * self.dx()
    }

    pub fn coordinates(&self) -> Vec<T> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    fn check_len(&self, f: &[T]) -> Result<()> {
        if f.len() == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n,
                got: f.len(),
            })
        }
    }
}

/// Primary fields `(v, u, θ)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub v: Vec<T>,
    pub u: Vec<T>,
    pub theta: Vec<T>,
    pub t: T,
}

impl<T: Real> State<T> {
    /// Builds a state, checking lengths and strict positivity of `v` and `θ`.
    pub fn new(grid: &Grid<T>, v: Vec<T>, u: Vec<T>, theta: Vec<T>, t: T) -> Result<Self> {
        for f in [&v, &u, &theta] {
            grid.check_len(f)?;
        }
        if !(t >= T::zero()) {
            return Err(Error::domain("t", t.as_f64(), ">= 0"));
        }
        let state = Self { v, u, theta, t };
        state.check_admissible(T::zero())?;
        Ok(state)
    }

    /// The constant far-field state `(1, 0, 1)`.
    pub fn equilibrium(grid: &Grid<T>) -> Self {
        Self {
            v: vec![T::one(); grid.n()],
            u: vec![T::zero(); grid.n()],
            theta: vec![T::one(); grid.n()],
            t: T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Fails on the first non-finite entry, or on `v`/`θ` at or below `floor`.
    pub fn check_admissible(&self, floor: T) -> Result<()> {
        let time = self.t.as_f64();
        for (field, data) in [
            (Field::Volume, &self.v),
            (Field::Velocity, &self.u),
            (Field::Temperature, &self.theta),
        ] {
            for (index, &x) in data.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite { field, index, time });
                }
                if field != Field::Velocity && x <= floor {
                    return Err(Error::RegimeExit(RegimeExit {
                        field,
                        index,
                        time,
                        value: x.as_f64(),
                        floor: floor.as_f64(),
                    }));
                }
            }
        }
        Ok(())
    }

    /// Perturbation fields `(v - 1, u, θ - 1)` about the far-field state.
    pub fn perturbation(&self) -> [Vec<T>; 3] {
        [
            self.v.iter().map(|&x| x - T::one()).collect(),
            self.u.clone(),
            self.theta.iter().map(|&x| x - T::one()).collect(),
        ]
    }

    /// Shifts every field by `k` cells (periodic).
    pub fn rotated(&self, k: usize) -> Self {
        let rot = |f: &[T]| {
            let mut g = f.to_vec();
            g.rotate_right(k % f.len().max(1));
            g
        };
        Self {
            v: rot(&self.v),
            u: rot(&self.u),
            theta: rot(&self.theta),
            t: self.t,
        }
    }

    /// Converts the scalar type of the state.
    pub fn cast<U: Real>(&self) -> State<U> {
        let c = |f: &[T]| f.iter().map(|x| U::lit(x.as_f64())).collect();
        State {
            v: c(&self.v),
            u: c(&self.u),
            theta: c(&self.theta),
            t: U::lit(self.t.as_f64()),
        }
    }
}

#[inline]
fn neighbours(i: usize, n: usize) -> (usize, usize) {
    (if i == 0 { n - 1 } else { i - 1 }, if i + 1 == n { 0 } else { i + 1 })
}

/// Centered first difference `(f[i+1] - f[i-1]) / (2 dx)` with wraparound.
pub fn dx_central<T: Real>(f: &[T], grid: &Grid<T>) -> Result<Vec<T>> {
    grid.check_len(f)?;
    Ok(dx_central_unchecked(f, grid.dx()))
}

pub(crate) fn dx_central_unchecked<T: Real>(f: &[T], dx: T) -> Vec<T> {
    let n = f.len();
    let inv = T::one() / (T::lit(2.0) * dx);
    (0..n)
        .map(|i| {
            let (l, r) = neighbours(i, n);
            (f[r] - f[l]) * inv
        })
        .collect()
}

/// Flux-form second difference of `(coef g_x)_x`.
///
/// Face coefficients are arithmetic means of the adjacent cell values, so the
/// output is a difference of face fluxes and sums to zero over the periodic
/// grid up to roundoff.
pub fn div_flux<T: Real>(coef: &[T], g: &[T], grid: &Grid<T>) -> Result<Vec<T>> {
    grid.check_len(coef)?;
    grid.check_len(g)?;
    Ok(div_flux_unchecked(coef, g, grid.dx()))
}

pub(crate) fn div_flux_unchecked<T: Real>(coef: &[T], g: &[T], dx: T) -> Vec<T> {
    let n = g.len();
    let half = T::lit(0.5);
    let inv = T::one() / (dx * dx);
    // flux[i] lives on face i+1/2
    let flux: Vec<T> = (0..n)
        .map(|i| {
            let r = if i + 1 == n { 0 } else { i + 1 };
            half * (coef[i] + coef[r]) * (g[r] - g[i])
        })
        .collect();
    (0..n)
        .map(|i| {
            let l = if i == 0 { n - 1 } else { i - 1 };
            (flux[i] - flux[l]) * inv
        })
        .collect()
}

/// Compact second difference `(f[i+1] - 2 f[i] + f[i-1]) / dx²`.
pub fn dxx_compact<T: Real>(f: &[T], grid: &Grid<T>) -> Result<Vec<T>> {
    grid.check_len(f)?;
    Ok(dxx_compact_unchecked(f, grid.dx()))
}

pub(crate) fn dxx_compact_unchecked<T: Real>(f: &[T], dx: T) -> Vec<T> {
    let n = f.len();
    let inv = T::one() / (dx * dx);
    (0..n)
        .map(|i| {
            let (l, r) = neighbours(i, n);
            ((f[r] - f[i]) - (f[i] - f[l])) * inv
        })
        .collect()
}

/// Discrete `H^k` norm: `sqrt(Σ_{j<=k} Σ_i |D^j f|_i² dx)` summed over
/// fields, with `D` the centered difference.
pub fn discrete_sobolev_norm<T: Real>(fields: &[&[T]], k: usize, grid: &Grid<T>) -> Result<T> {
    if k > 3 {
        return Err(Error::Invalid(format!(
            "Sobolev order k = {k} unsupported (0..=3)"
        )));
    }
    let dx = grid.dx();
    let mut total = T::zero();
    for f in fields {
        grid.check_len(f)?;
        let mut d = f.to_vec();
        for j in 0..=k {
            if j > 0 {
                d = dx_central_unchecked(&d, dx);
            }
            total = total + d.iter().map(|&x| x * x).sum::<T>() * dx;
        }
    }
    Ok(total.sqrt())
}

/// Largest absolute sample over all fields.
pub fn sup_norm<T: Real>(fields: &[&[T]]) -> Result<T> {
    if fields.is_empty() || fields.iter().all(|f| f.is_empty()) {
        return Err(Error::Invalid("sup norm of empty input".into()));
    }
    Ok(fields
        .iter()
        .flat_map(|f| f.iter())
        .fold(T::zero(), |m, &x| m.max(x.abs())))
}

/// Plain rectangle-rule integral `Σ f_i dx` (exact trapezoid on a periodic grid).
pub fn integrate<T: Real>(f: &[T], grid: &Grid<T>) -> T {
    f.iter().copied().sum::<T>() * grid.dx()
}
