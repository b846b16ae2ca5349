//! Rational test functions: sums of pole terms `c/(E - p)^k` with all poles
//! off the real axis and in a single half-plane.
//!
//! These stand in for detector-side wave functions in the pole pairings. The
//! half-plane and decay constraints make the pairing integrands absolutely
//! integrable and give every pairing a closed residue form that tests can
//! evaluate independently of quadrature.

use num_complex::Complex64;
use std::ops::Add;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RationalError {
    #[error("pole {0} lies on the real axis")]
    PoleOnRealAxis(Complex64),
    #[error("poles must share one half-plane")]
    MixedHalfPlanes,
    #[error("term order must be >= 1")]
    ZeroOrder,
    #[error("decay degree < 2: order-1 coefficients must cancel (residual {0:.3e})")]
    SlowDecay(f64),
    #[error("a test function needs at least one term")]
    Empty,
}

/// One pole term `coefficient / (E - pole)^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalTerm {
    pub coefficient: Complex64,
    pub pole: Complex64,
    pub order: u32,
}

/// Sum of pole terms, decaying at least like `1/E²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTestFunction {
    terms: Vec<RationalTerm>,
}

impl RationalTestFunction {
    pub fn new(terms: Vec<RationalTerm>) -> Result<Self, RationalError> {
        if terms.is_empty() {
            return Err(RationalError::Empty);
        }
        let mut sign = 0.0f64;
        for t in &terms {
            if t.order == 0 {
                return Err(RationalError::ZeroOrder);
            }
            if t.pole.im == 0.0 {
                return Err(RationalError::PoleOnRealAxis(t.pole));
            }
            if sign == 0.0 {
                sign = t.pole.im.signum();
            } else if t.pole.im.signum() != sign {
                return Err(RationalError::MixedHalfPlanes);
            }
        }
        // Sum of order-1 coefficients is the 1/E tail; it must vanish for the
        // pairing integrands to be absolutely integrable.
        let tail: Complex64 = terms
            .iter()
            .filter(|t| t.order == 1)
            .map(|t| t.coefficient)
            .sum();
        let scale = terms
            .iter()
            .map(|t| t.coefficient.norm())
            .fold(0.0, f64::max);
        if tail.norm() > 1e-12 * scale.max(1.0) {
            return Err(RationalError::SlowDecay(tail.norm()));
        }
        Ok(Self { terms })
    }

    /// Single term `coefficient / (E - pole)^order` with `order >= 2`.
    pub fn single(
        coefficient: Complex64,
        pole: Complex64,
        order: u32,
    ) -> Result<Self, RationalError> {
        if order < 2 {
            return Err(RationalError::SlowDecay(coefficient.norm()));
        }
        Self::new(vec![RationalTerm {
            coefficient,
            pole,
            order,
        }])
    }

    /// The standard probe `1/(E - pole)²`.
    pub fn double_pole(pole: Complex64) -> Result<Self, RationalError> {
        Self::single(Complex64::new(1.0, 0.0), pole, 2)
    }

    pub fn terms(&self) -> &[RationalTerm] {
        &self.terms
    }

    /// Evaluate at a real or complex energy away from the poles.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coefficient / (z - t.pole).powu(t.order))
            .sum()
    }

    pub fn eval_real(&self, e: f64) -> Complex64 {
        self.eval(Complex64::new(e, 0.0))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| RationalTerm {
                    coefficient: t.coefficient * factor,
                    ..*t
                })
                .collect(),
        }
    }

    /// Mirror image: conjugated coefficients, poles reflected across the axis.
    pub fn conjugated(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| RationalTerm {
                    coefficient: t.coefficient.conj(),
                    pole: t.pole.conj(),
                    order: t.order,
                })
                .collect(),
        }
    }

    pub fn all_poles_upper(&self) -> bool {
        self.terms.iter().all(|t| t.pole.im > 0.0)
    }

    /// Largest |Im pole|; sets the energy scale of the pairing integrands.
    pub fn pole_scale(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.pole.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn pole_energies(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.pole.re).collect()
    }
}

impl Add for RationalTestFunction {
    type Output = Result<RationalTestFunction, RationalError>;

    fn add(self, rhs: RationalTestFunction) -> Self::Output {
        let mut terms = self.terms;
        terms.extend(rhs.terms);
        RationalTestFunction::new(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_pole_evaluates() {
        let f = RationalTestFunction::double_pole(Complex64::new(5.0, 2.0)).unwrap();
        let v = f.eval_real(5.0);
        // 1/(0 - 2i)² = 1/(-4) = -0.25
        assert!((v - Complex64::new(-0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn real_pole_rejected() {
        let err = RationalTestFunction::double_pole(Complex64::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, RationalError::PoleOnRealAxis(_)));
    }

    #[test]
    fn mixed_half_planes_rejected() {
        let a = RationalTestFunction::double_pole(Complex64::new(0.0, 1.0)).unwrap();
        let b = RationalTestFunction::double_pole(Complex64::new(0.0, -1.0)).unwrap();
        assert_eq!(RationalError::MixedHalfPlanes, (a + b).unwrap_err());
    }

    #[test]
    fn order_one_needs_cancelling_tails() {
        // 1/((E-p)(E-q)) in partial fractions: coefficients cancel at infinity.
        let p = Complex64::new(1.0, 1.0);
        let q = Complex64::new(-1.0, 2.0);
        let c = 1.0 / (p - q);
        let ok = RationalTestFunction::new(vec![
            RationalTerm {
                coefficient: c,
                pole: p,
                order: 1,
            },
            RationalTerm {
                coefficient: -c,
                pole: q,
                order: 1,
            },
        ]);
        assert!(ok.is_ok());

        let bad = RationalTestFunction::new(vec![RationalTerm {
            coefficient: Complex64::new(1.0, 0.0),
            pole: p,
            order: 1,
        }]);
        assert!(matches!(bad, Err(RationalError::SlowDecay(_))));
    }

    #[test]
    fn conjugation_mirrors_poles() {
        let f = RationalTestFunction::double_pole(Complex64::new(3.0, 1.5)).unwrap();
        let g = f.conjugated();
        assert!(!g.all_poles_upper());
        let e = 2.7;
        assert!((g.eval_real(e) - f.eval_real(e).conj()).norm() < 1e-15);
    }
}
