//! Target functions: a rational part plus an optional entire part from a small
//! closed-form catalog (`c * exp(a z)` and polynomials).
//!
//! All oracles are exact recursions. Taylor coefficients of the rational part
//! come from power-series division of the shifted numerator by the shifted
//! denominator, carried out in the caller's scalar backend.

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpair;
use crate::geometry::CompactSet;
use crate::poly::{PolyError, Polynomial, Root, RootSet};
use crate::scalar::{cexp, lift, lower, Real};

/// Poles with orders. Total order equals the degree of the denominator.
pub type PoleList = RootSet;

/// Evaluation closer than this to a pole is refused.
pub const POLE_PROXIMITY: f64 = 1e-12;

/// Numerator and denominator must be coprime at this relative tolerance.
pub const COPRIME_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("pole proximity: {z} is within {distance:e} of the pole {pole}")]
    PoleProximity {
        z: Complex64,
        pole: Complex64,
        distance: f64,
    },
    #[error("numerator and denominator share the root {0} (tolerance 1e-10)")]
    NotCoprime(Complex64),
    #[error("the denominator is identically zero")]
    ZeroDenominator,
    #[error("give exactly one of `den` and `poles`")]
    AmbiguousDenominator,
    #[error("pole {0} lies on the compact set E")]
    PoleOnE(Complex64),
    #[error("pole orders must be positive")]
    ZeroOrder,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `{"at": [re, im], "order": k}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    #[serde(with = "cpair::one")]
    pub at: Complex64,
    #[serde(default = "PoleSpec::default_order")]
    pub order: usize,
}

impl PoleSpec {
    fn default_order() -> usize {
        1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalSpec {
    pub num: Polynomial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Polynomial>,
    /// Alternative to `den`: the denominator is the monic product over poles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<Vec<PoleSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpSpec {
    #[serde(with = "cpair::one")]
    pub c: Complex64,
    #[serde(with = "cpair::one")]
    pub a: Complex64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntireSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp: Option<ExpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Polynomial>,
}

/// Configuration form of a [`TargetFunction`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<RationalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entire: Option<EntireSpec>,
}

/// `num/den + c exp(a z) + poly(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetFunction {
    num: Polynomial,
    den: Polynomial,
    poles: PoleList,
    exp: Option<(Complex64, Complex64)>,
    poly: Polynomial,
}

fn eval_lifted<R: Real>(p: &Polynomial, z: Complex<R>) -> Complex<R> {
    p.coeffs()
        .iter()
        .rev()
        .fold(Complex::zero(), |acc, &c| acc * z + lift::<R>(c))
}

impl TargetFunction {
    /// Rational function `num/den`; the numerator and denominator must be
    /// coprime.
    pub fn rational(num: Polynomial, den: Polynomial) -> Result<Self, ModelError> {
        if den.is_zero() {
            return Err(ModelError::ZeroDenominator);
        }
        let poles = if den.degree() == Some(0) {
            RootSet::default()
        } else {
            den.roots(1e-10)?
        };
        Self::checked(num, den, poles)
    }

    /// Rational function `num / prod (z - pole)^order`.
    pub fn from_poles(num: Polynomial, poles: &[(Complex64, usize)]) -> Result<Self, ModelError> {
        if poles.iter().any(|&(_, k)| k == 0) {
            return Err(ModelError::ZeroOrder);
        }
        let set = RootSet::new(
            poles
                .iter()
                .map(|&(value, multiplicity)| Root { value, multiplicity })
                .collect(),
        );
        let den = Polynomial::from_roots(&set, Complex64::one());
        Self::checked(num, den, set)
    }

    /// The entire function `c exp(a z)`.
    pub fn exponential(c: Complex64, a: Complex64) -> Self {
        Self {
            num: Polynomial::zero(),
            den: Polynomial::one(),
            poles: RootSet::default(),
            exp: Some((c, a)),
            poly: Polynomial::zero(),
        }
    }

    fn checked(num: Polynomial, den: Polynomial, poles: PoleList) -> Result<Self, ModelError> {
        let degree = num.degree().unwrap_or(0) as i32;
        for pole in poles.iter() {
            let bound = COPRIME_TOL * num.scale() * pole.value.norm().max(1.0).powi(degree);
            if !num.is_zero() && num.eval(pole.value).norm() <= bound {
                return Err(ModelError::NotCoprime(pole.value));
            }
        }
        Ok(Self {
            num,
            den,
            poles,
            exp: None,
            poly: Polynomial::zero(),
        })
    }

    pub fn from_spec(spec: &TargetSpec) -> Result<Self, ModelError> {
        let mut f = match &spec.rational {
            None => Self::rational(Polynomial::zero(), Polynomial::one())?,
            Some(r) => match (&r.den, &r.poles) {
                (Some(den), None) => Self::rational(r.num.clone(), den.clone())?,
                (None, Some(poles)) => {
                    let list: Vec<_> = poles.iter().map(|p| (p.at, p.order)).collect();
                    Self::from_poles(r.num.clone(), &list)?
                }
                _ => return Err(ModelError::AmbiguousDenominator),
            },
        };
        if let Some(entire) = &spec.entire {
            f.exp = entire.exp.as_ref().map(|e| (e.c, e.a));
            f.poly = entire.poly.clone().unwrap_or_else(Polynomial::zero);
        }
        Ok(f)
    }

    /// Add the entire term `c exp(a z)`, replacing any previous one.
    pub fn with_exp(mut self, c: Complex64, a: Complex64) -> Self {
        self.exp = Some((c, a));
        self
    }

    /// Add an entire polynomial term.
    pub fn with_poly(mut self, p: Polynomial) -> Self {
        self.poly = &self.poly + &p;
        self
    }

    /// `c * f`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let s = Polynomial::constant(c);
        Self {
            num: &self.num * &s,
            den: self.den.clone(),
            poles: self.poles.clone(),
            exp: self.exp.map(|(k, a)| (k * c, a)),
            poly: &self.poly * &s,
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    /// Reject models with a pole on `e`.
    pub fn validate_against(&self, e: &CompactSet) -> Result<(), ModelError> {
        match self.poles.iter().find(|p| e.contains(p.value, 1e-9)) {
            Some(p) => Err(ModelError::PoleOnE(p.value)),
            None => Ok(()),
        }
    }

    fn check_pole_distance(&self, z: Complex64) -> Result<(), ModelError> {
        for p in self.poles.iter() {
            let distance = (z - p.value).norm();
            if distance <= POLE_PROXIMITY {
                return Err(ModelError::PoleProximity {
                    z,
                    pole: p.value,
                    distance,
                });
            }
        }
        Ok(())
    }

    /// `f(z)` in the backend `R`.
    pub fn eval<R: Real>(&self, z: Complex<R>) -> Result<Complex<R>, ModelError> {
        self.check_pole_distance(lower(z))?;
        let mut value = eval_lifted(&self.num, z) / eval_lifted(&self.den, z);
        if let Some((c, a)) = self.exp {
            value += lift::<R>(c) * cexp(lift::<R>(a) * z);
        }
        if !self.poly.is_zero() {
            value += eval_lifted(&self.poly, z);
        }
        Ok(value)
    }

    /// Taylor coefficients `c_0..=c_k` at `z0` in the backend `R`.
    pub fn taylor<R: Real>(&self, z0: Complex<R>, k: usize) -> Result<Vec<Complex<R>>, ModelError> {
        self.check_pole_distance(lower(z0))?;
        let shift = |p: &Polynomial| -> Vec<Complex<R>> {
            let mut t = Polynomial::<R>::lift_from(p).taylor_at(z0);
            t.resize(k + 1, Complex::zero());
            t
        };
        let n = shift(&self.num);
        let d = shift(&self.den);
        let mut out: Vec<Complex<R>> = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let mut acc = n[j];
            for i in 1..=j {
                acc -= d[i] * out[j - i];
            }
            out.push(acc / d[0]);
        }
        if let Some((c, a)) = self.exp {
            let a = lift::<R>(a);
            let mut term = lift::<R>(c) * cexp(a * z0);
            for (j, slot) in out.iter_mut().enumerate() {
                *slot += term;
                term = term * a / R::from_usize(j + 1);
            }
        }
        if !self.poly.is_zero() {
            for (slot, t) in out.iter_mut().zip(shift(&self.poly)) {
                *slot += t;
            }
        }
        Ok(out)
    }

    /// Poles with orders, from the rational denominator.
    pub fn poles(&self) -> &PoleList {
        &self.poles
    }
}

/// `f(z)` in binary64.
pub fn model_eval(f: &TargetFunction, z: Complex64) -> Result<Complex64, ModelError> {
    f.eval(z)
}

/// Taylor coefficients of `f` at `z0` through order `k`, in binary64.
pub fn model_taylor(f: &TargetFunction, z0: Complex64, k: usize) -> Result<Vec<Complex64>, ModelError> {
    f.taylor(z0, k)
}

pub fn model_poles(f: &TargetFunction) -> PoleList {
    f.poles.clone()
}
