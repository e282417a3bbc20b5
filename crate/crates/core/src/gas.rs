//! Polytropic ideal gas closure and temperature-dependent transport laws.
//!
//! The gas obeys `p = R θ / v`, `e = c_v θ` with `c_v = R / (γ - 1)`, and
//! specific entropy `s = c_v ln(R θ v^(γ-1) / A)`. With the default constants
//! `A = R = 1` the far-field state `(v, θ) = (1, 1)` has zero entropy.

use crate::error::{Error, Result};
use crate::num::Real;

/// Volumes and temperatures at or below this value are outside the model.
pub const MIN_ADMISSIBLE: f64 = 1e-12;

#[inline]
pub(crate) fn check_positive<T: Real>(what: &'static str, x: T) -> Result<()> {
    if x > T::lit(MIN_ADMISSIBLE) {
        Ok(())
    } else {
        Err(Error::domain(what, x.as_f64(), "> 1e-12"))
    }
}

/// Thermodynamic constants of a polytropic gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams<T> {
    gamma: T,
    r: T,
    a: T,
    c_v: T,
}

impl<T: Real> GasParams<T> {
    pub fn new(gamma: T, r: T, a: T) -> Result<Self> {
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(Error::domain("gamma", gamma.as_f64(), "> 1"));
        }
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::domain("R", r.as_f64(), "> 0"));
        }
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::domain("A", a.as_f64(), "> 0"));
        }
        Ok(Self {
            gamma,
            r,
            a,
            c_v: r / (gamma - T::one()),
        })
    }

    /// Gas with `A = R = 1`, so the reference entropy vanishes.
    pub fn normalized(gamma: T) -> Result<Self> {
        Self::new(gamma, T::one(), T::one())
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn c_v(&self) -> T {
        self.c_v
    }

    /// Far-field entropy `c_v ln(R / A)` of the state `(v, θ) = (1, 1)`.
    pub fn reference_entropy(&self) -> T {
        self.c_v * (self.r / self.a).ln()
    }

    pub fn pressure(&self, v: T, theta: T) -> Result<T> {
        check_positive("v", v)?;
        check_positive("theta", theta)?;
        Ok(self.pressure_unchecked(v, theta))
    }

    #[inline]
    pub(crate) fn pressure_unchecked(&self, v: T, theta: T) -> T {
        self.r * theta / v
    }

    pub fn internal_energy(&self, theta: T) -> Result<T> {
        check_positive("theta", theta)?;
        Ok(self.c_v * theta)
    }

    pub fn entropy(&self, v: T, theta: T) -> Result<T> {
        check_positive("v", v)?;
        check_positive("theta", theta)?;
        let g1 = self.gamma - T::one();
        // ln(R θ v^(γ-1) / A) split into logs to stay finite for extreme inputs.
        Ok(self.c_v * ((self.r / self.a).ln() + theta.ln() + g1 * v.ln()))
    }

    /// Inverse of [`GasParams::entropy`] in `θ` at fixed `v`.
    pub fn temperature_from_entropy(&self, v: T, s: T) -> Result<T> {
        check_positive("v", v)?;
        if !s.is_finite() {
            return Err(Error::domain("s", s.as_f64(), "finite"));
        }
        let g1 = self.gamma - T::one();
        let exponent = (self.a / self.r).ln() - g1 * v.ln() + g1 * s / self.r;
        let theta = exponent.exp();
        if !theta.is_finite() {
            return Err(Error::Overflow("temperature_from_entropy"));
        }
        if theta <= T::lit(MIN_ADMISSIBLE) {
            return Err(Error::domain("theta", theta.as_f64(), "> 1e-12"));
        }
        Ok(theta)
    }

    /// Lagrangian sound speed `sqrt(γ R θ) / v`.
    #[inline]
    pub(crate) fn lagrangian_sound_speed(&self, v: T, theta: T) -> T {
        (self.gamma * self.r * theta).sqrt() / v
    }
}

impl<T: Real> Default for GasParams<T> {
    fn default() -> Self {
        Self::normalized(T::lit(1.4)).expect("valid default gas")
    }
}

/// Kinetic-theory exponent `(α + 4) / (2α)` for an inverse-power
/// intermolecular potential `r^(-α)`.
///
/// Maxwellian molecules (`α = 4`) give a linear law; hard spheres
/// (`α → ∞`) give `θ^(1/2)`.
pub fn transport_exponent<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::zero()) || alpha.is_nan() {
        return Err(Error::domain("alpha", alpha.as_f64(), "> 0"));
    }
    let two = T::lit(2.0);
    Ok(T::one() / two + two / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    PowerLaw,
    Constant,
}

/// Viscosity `μ(θ) = μ₀ θ^β_μ` and conductivity `κ(θ) = κ₀ θ^β_κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportLaw<T> {
    kind: TransportKind,
    mu0: T,
    kappa0: T,
    beta_mu: T,
    beta_kappa: T,
}

/// Value and first three derivatives of a transport coefficient at one `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefDerivs<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T: Real> TransportLaw<T> {
    pub fn power_law(mu0: T, kappa0: T, beta_mu: T, beta_kappa: T) -> Result<Self> {
        Self::check_prefactors(mu0, kappa0)?;
        if !beta_mu.is_finite() {
            return Err(Error::domain("beta_mu", beta_mu.as_f64(), "finite"));
        }
        if !beta_kappa.is_finite() {
            return Err(Error::domain("beta_kappa", beta_kappa.as_f64(), "finite"));
        }
        Ok(Self {
            kind: TransportKind::PowerLaw,
            mu0,
            kappa0,
            beta_mu,
            beta_kappa,
        })
    }

    /// Shared kinetic exponent for both coefficients.
    pub fn kinetic(alpha: T, mu0: T, kappa0: T) -> Result<Self> {
        let beta = transport_exponent(alpha)?;
        Self::power_law(mu0, kappa0, beta, beta)
    }

    pub fn constant(mu0: T, kappa0: T) -> Result<Self> {
        Self::check_prefactors(mu0, kappa0)?;
        Ok(Self {
            kind: TransportKind::Constant,
            mu0,
            kappa0,
            beta_mu: T::zero(),
            beta_kappa: T::zero(),
        })
    }

    fn check_prefactors(mu0: T, kappa0: T) -> Result<()> {
        if !(mu0 > T::zero()) || !mu0.is_finite() {
            return Err(Error::domain("mu0", mu0.as_f64(), "> 0"));
        }
        if !(kappa0 > T::zero()) || !kappa0.is_finite() {
            return Err(Error::domain("kappa0", kappa0.as_f64(), "> 0"));
        }
        Ok(())
    }

    pub fn kind(&self) -> TransportKind {
        self.kind
    }

    pub fn mu0(&self) -> T {
        self.mu0
    }

    pub fn kappa0(&self) -> T {
        self.kappa0
    }

    /// Effective viscosity exponent (zero for the constant law).
    pub fn beta_mu(&self) -> T {
        self.beta_mu
    }

    pub fn beta_kappa(&self) -> T {
        self.beta_kappa
    }

    pub fn mu(&self, theta: T) -> Result<T> {
        check_positive("theta", theta)?;
        Ok(self.mu_unchecked(theta))
    }

    pub fn kappa(&self, theta: T) -> Result<T> {
        check_positive("theta", theta)?;
        Ok(self.kappa_unchecked(theta))
    }

    pub fn mu_derivs(&self, theta: T) -> Result<CoefDerivs<T>> {
        check_positive("theta", theta)?;
        Ok(power_derivs(self.mu0, self.beta_mu, theta))
    }

    pub fn kappa_derivs(&self, theta: T) -> Result<CoefDerivs<T>> {
        check_positive("theta", theta)?;
        Ok(power_derivs(self.kappa0, self.beta_kappa, theta))
    }

    #[inline]
    pub(crate) fn mu_unchecked(&self, theta: T) -> T {
        power(self.mu0, self.beta_mu, theta)
    }

    #[inline]
    pub(crate) fn kappa_unchecked(&self, theta: T) -> T {
        power(self.kappa0, self.beta_kappa, theta)
    }
}

impl<T: Real> Default for TransportLaw<T> {
    fn default() -> Self {
        Self::constant(T::one(), T::one()).expect("valid default law")
    }
}

#[inline]
fn power<T: Real>(c: T, beta: T, theta: T) -> T {
    if beta == T::zero() {
        c
    } else {
        c * theta.powf(beta)
    }
}

fn power_derivs<T: Real>(c: T, beta: T, theta: T) -> CoefDerivs<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let value = power(c, beta, theta);
    // d^k/dθ^k c θ^β = c β (β-1)...(β-k+1) θ^(β-k); written via the value to
    // keep exact zeros for the constant law.
    let d1 = value * beta / theta;
    let d2 = d1 * (beta - one) / theta;
    let d3 = d2 * (beta - two) / theta;
    CoefDerivs { value, d1, d2, d3 }
}
