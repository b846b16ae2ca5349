//! Breit-Wigner resonance amplitudes, Gamow energy densities, pole pairings,
//! and survival probabilities.
//!
//! A first-order S-matrix pole at `z_R = E_R - iΓ/2` fixes everything here:
//! the Breit-Wigner amplitude `R/(E - z_R)`, the normalized Gamow energy
//! density `i·sqrt(Γ/2π)/(E - z_R)`, and the pairings of that pole against
//! rational test functions whose poles sit strictly in the upper half-plane.
//! For such test functions the pairing integral closes around the resonance
//! pole alone, so evolving by `e^{-iEt/ħ}` multiplies the pairing by
//! `e^{-i z_R t/ħ}` — an exactly exponential modulus decay — for `t >= 0`
//! and for no negative `t`.

use crate::quad::{self, Integral, QuadratureConfig};
use crate::rational::RationalTestFunction;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ResonanceError {
    #[error("resonance width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("negative duration {0} rejected: probabilities exist only after preparation")]
    CausalityViolation(f64),
    #[error("test function has a pole in the lower half-plane; pairing is not single-residue")]
    NonHardyTest,
    #[error("quadrature did not converge: achieved absolute error {achieved:.3e}")]
    QuadratureFailure { achieved: f64 },
    #[error("half-line support needs a resonance energy above threshold, got e_r = {0}")]
    PoleBelowThreshold(f64),
}

/// Complex S-matrix pole `z_R = e_r - i·gamma/2` with residue normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    e_r: f64,
    gamma: f64,
    residue: Complex64,
}

impl ResonancePole {
    pub fn new(e_r: f64, gamma: f64) -> Result<Self, ResonanceError> {
        if !(gamma > 0.0) || !gamma.is_finite() || !e_r.is_finite() {
            return Err(ResonanceError::InvalidWidth(gamma));
        }
        Ok(Self {
            e_r,
            gamma,
            residue: Complex64::new(1.0, 0.0),
        })
    }

    pub fn with_residue(mut self, residue: Complex64) -> Self {
        self.residue = residue;
        self
    }

    pub fn e_r(&self) -> f64 {
        self.e_r
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn residue(&self) -> Complex64 {
        self.residue
    }

    /// The pole position `e_r - i·gamma/2`; always in the lower half-plane.
    pub fn complex_energy(&self) -> Complex64 {
        Complex64::new(self.e_r, -0.5 * self.gamma)
    }
}

/// A non-negative evolution parameter. Construction rejects negative values:
/// an experimental duration is measured from the preparation time and is
/// always positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Duration(f64);

impl Duration {
    pub fn new(t: f64) -> Result<Self, ResonanceError> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(ResonanceError::CausalityViolation(t));
        }
        Ok(Self(t))
    }

    pub fn seconds(&self) -> f64 {
        self.0
    }
}

/// Support of the energy integrals: the whole real axis, or the physical
/// half-axis `[0, ∞)` on which the Breit-Wigner loses a small tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    FullLine,
    HalfLine,
}

/// Breit-Wigner amplitude `residue / (E - z_R)`.
pub fn bw_amplitude(e: f64, pole: &ResonancePole) -> Complex64 {
    pole.residue / (Complex64::new(e, 0.0) - pole.complex_energy())
}

/// Gamow-state energy density `i·sqrt(Γ/2π) / (E - z_R)`.
///
/// Its modulus squared is the Lorentzian `(Γ/2π)/((E-E_R)² + Γ²/4)`, a unit
/// probability density on the real line.
pub fn gamow_density(e: f64, pole: &ResonancePole) -> Complex64 {
    let c = Complex64::new(0.0, (pole.gamma / (2.0 * PI)).sqrt());
    c / (Complex64::new(e, 0.0) - pole.complex_energy())
}

/// `|gamow_density|²` as a real function.
fn lorentzian_density(e: f64, pole: &ResonancePole) -> f64 {
    let d = e - pole.e_r;
    (pole.gamma / (2.0 * PI)) / (d * d + 0.25 * pole.gamma * pole.gamma)
}

/// Mass of the Lorentzian density on the given domain, in closed form.
///
/// The full line gives exactly 1. The half line gives
/// `1/2 + arctan(2·e_r/Γ)/π`, strictly between 1/2 and 1, approaching 1 as
/// the pole moves far above threshold.
pub fn lorentzian_norm(pole: &ResonancePole, domain: Domain) -> Result<f64, ResonanceError> {
    match domain {
        Domain::FullLine => Ok(1.0),
        Domain::HalfLine => {
            if pole.e_r <= 0.0 {
                return Err(ResonanceError::PoleBelowThreshold(pole.e_r));
            }
            Ok(0.5 + (2.0 * pole.e_r / pole.gamma).atan() / PI)
        }
    }
}

fn pairing_breakpoints(test: &RationalTestFunction, pole: &ResonancePole) -> Vec<f64> {
    let mut extra = test.pole_energies();
    extra.push(pole.e_r);
    extra.push(pole.e_r - pole.gamma);
    extra.push(pole.e_r + pole.gamma);
    extra
}

/// Raw pairing integral `∫ test(E)·e^{-iEt/ħ}/(E - z_R) dE` without the
/// half-plane guard. Shared by the guarded operations and by symmetry tests.
pub(crate) fn pairing_integral_unchecked(
    test: &RationalTestFunction,
    pole: &ResonancePole,
    t_over_hbar: f64,
    cfg: QuadratureConfig,
) -> Integral {
    let z_r = pole.complex_energy();
    let width = pole.gamma.max(test.pole_scale());
    quad::integrate_real_line(
        |e| {
            let ec = Complex64::new(e, 0.0);
            let phase = Complex64::new(0.0, -e * t_over_hbar).exp();
            test.eval(ec) * phase / (ec - z_r)
        },
        pole.e_r,
        width,
        t_over_hbar.abs(),
        &pairing_breakpoints(test, pole),
        cfg,
    )
}

fn require_upper(test: &RationalTestFunction) -> Result<(), ResonanceError> {
    if test.all_poles_upper() {
        Ok(())
    } else {
        Err(ResonanceError::NonHardyTest)
    }
}

/// Pairing `∫ test(E)/(E - z_R) dE` over the real line by adaptive
/// quadrature.
///
/// With all test poles strictly in the upper half-plane the contour closes
/// around `z_R` alone and the value equals `-2πi·test(z_R)`; the quadrature
/// here must reproduce that residue value within its tolerance.
pub fn cauchy_pairing(
    test: &RationalTestFunction,
    pole: &ResonancePole,
    cfg: QuadratureConfig,
) -> Result<Complex64, ResonanceError> {
    require_upper(test)?;
    Ok(pairing_integral_unchecked(test, pole, 0.0, cfg).value)
}

/// Defect of the generalized eigenvalue relation, with the test integral
/// reported alongside.
#[derive(Debug, Clone, Copy)]
pub struct EigenvalueDefect {
    /// `|∫ E·test/(E-z_R) - z_R·∫ test/(E-z_R) - ∫ test|`; zero up to
    /// quadrature tolerance by the identity `E/(E-z) = 1 + z/(E-z)`.
    pub defect: f64,
    /// `∫ test(E) dE`, which vanishes for decay degree >= 2.
    pub test_integral: Complex64,
}

/// Checks `H^×`-eigenvector behaviour of the pole pairing: applying the
/// energy multiplication inside the pairing equals multiplying by `z_R`,
/// up to the (vanishing) test integral.
pub fn eigenvalue_defect(
    test: &RationalTestFunction,
    pole: &ResonancePole,
    cfg: QuadratureConfig,
) -> Result<EigenvalueDefect, ResonanceError> {
    require_upper(test)?;
    let z_r = pole.complex_energy();
    let width = pole.gamma.max(test.pole_scale());
    let breaks = pairing_breakpoints(test, pole);

    let weighted = quad::integrate_real_line(
        |e| {
            let ec = Complex64::new(e, 0.0);
            ec * test.eval(ec) / (ec - z_r)
        },
        pole.e_r,
        width,
        0.0,
        &breaks,
        cfg,
    );
    let plain = pairing_integral_unchecked(test, pole, 0.0, cfg);
    let test_integral = quad::integrate_real_line(
        |e| test.eval(Complex64::new(e, 0.0)),
        pole.e_r,
        width,
        0.0,
        &breaks,
        cfg,
    );

    let defect = (weighted.value - z_r * plain.value - test_integral.value).norm();
    Ok(EigenvalueDefect {
        defect,
        test_integral: test_integral.value,
    })
}

/// Time-evolved pairing `∫ test(E)·e^{-iEt/ħ}/(E - z_R) dE`.
///
/// This is the time-asymmetry probe, so it deliberately accepts negative
/// `t`. For `t >= 0` the value equals `e^{-i z_R t/ħ}` times
/// [`cauchy_pairing`], so its modulus decays exactly as `e^{-Γt/2ħ}`. For
/// `t < 0` the contour closes around the test-function poles instead and the
/// extrapolated exponential law fails.
pub fn evolved_pairing(
    test: &RationalTestFunction,
    pole: &ResonancePole,
    t: f64,
    hbar: f64,
    cfg: QuadratureConfig,
) -> Result<Complex64, ResonanceError> {
    require_upper(test)?;
    let r = pairing_integral_unchecked(test, pole, t / hbar, cfg);
    if !r.converged {
        return Err(ResonanceError::QuadratureFailure {
            achieved: r.abs_error,
        });
    }
    Ok(r.value)
}

/// Fourier amplitude `∫_domain |gamow_density|²·e^{-iEt/ħ} dE` by adaptive
/// quadrature. This is the cross-check route behind
/// [`survival_probability`]; the full-line closed form is
/// `e^{-i E_R t/ħ}·e^{-Γ|t|/2ħ}`.
pub fn survival_amplitude(
    pole: &ResonancePole,
    t: f64,
    domain: Domain,
    hbar: f64,
    cfg: QuadratureConfig,
) -> Integral {
    let osc = (t / hbar).abs();
    let integrand = |e: f64| {
        Complex64::new(lorentzian_density(e, pole), 0.0) * Complex64::new(0.0, -e * t / hbar).exp()
    };
    match domain {
        Domain::FullLine => {
            quad::integrate_real_line(integrand, pole.e_r, pole.gamma, osc, &[], cfg)
        }
        Domain::HalfLine => quad::integrate_half_line(
            integrand,
            pole.e_r.max(pole.gamma),
            osc,
            &[
                pole.e_r - pole.gamma,
                pole.e_r,
                pole.e_r + pole.gamma,
            ],
            cfg,
        ),
    }
}

/// Probability that the decaying state survives to duration `t`:
/// `|∫_domain |gamow_density|²·e^{-iEt/ħ} dE|² / lorentzian_norm(domain)²`.
///
/// On the full line this equals `e^{-Γt/ħ}` exactly and the closed form is
/// returned; [`survival_amplitude`] provides the independent quadrature
/// route. On the half line the amplitude is computed by quadrature (best
/// achieved estimate; the integrand is a smooth truncated Lorentzian) and
/// the value is 1 at `t = 0` by normalization.
pub fn survival_probability(
    pole: &ResonancePole,
    t: Duration,
    domain: Domain,
    hbar: f64,
    cfg: QuadratureConfig,
) -> Result<f64, ResonanceError> {
    match domain {
        Domain::FullLine => Ok((-pole.gamma * t.seconds() / hbar).exp()),
        Domain::HalfLine => {
            let norm = lorentzian_norm(pole, Domain::HalfLine)?;
            let amp = survival_amplitude(pole, t.seconds(), Domain::HalfLine, hbar, cfg);
            Ok(amp.value.norm_sqr() / (norm * norm))
        }
    }
}
