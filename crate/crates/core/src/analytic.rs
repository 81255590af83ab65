//! Closed-form first-order solution for a far-detuned square pulse.
//!
//! Inside the pulse the driving phase integral is
//!
//! ```text
//! θ(t) = −iη [cos(ωt + φ + iβ) e^{iω_c t} − cos(φ + iβ)]
//! ```
//!
//! and the amplitude ratio `f = C/D` is approximated by
//! `f(t) = −(i/2)(1 + e^{−iη²ω_c t}) θ(t)`. At the end of a pulse holding an
//! integer number `N` of carrier cycles the final inversion reduces to
//!
//! ```text
//! w_f = (Q η² cos²φ − 1) / (Q η² cos²φ + 1)
//! Q   = (1 + cos 2Nη²(ω_c/ω)π) (1 − cos 2N(ω_c/ω)π)
//! ```
//!
//! where `cosh 2β ≈ 1` has been used. The `*_exact` companions keep the
//! `cosh 2β` factor so the cost of that approximation can be measured.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pulse::{derive_params, DerivedParams, PulseSpec, Shape, TlsParams, VALIDITY_THRESHOLD};
use crate::quadrature::Quadrature;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `θ`, `θ*`, `θ̇` and `θ̇*`, each evaluated from its own closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaQuad {
    pub theta: Complex64,
    pub theta_conj: Complex64,
    pub theta_dot: Complex64,
    pub theta_dot_conj: Complex64,
}

/// Raised when `(ω/ω_c)² + (Ω₀/ω)²` is too large for the perturbative result to be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityWarning {
    pub metric: f64,
    pub threshold: f64,
}

impl ValidityWarning {
    fn check(d: &DerivedParams) -> Option<Self> {
        d.is_flagged().then_some(ValidityWarning { metric: d.validity_metric, threshold: VALIDITY_THRESHOLD })
    }
}

/// A closed-form value together with the regime flag it was computed under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked<T> {
    pub value: T,
    pub warning: Option<ValidityWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalInversionResult {
    pub w_f: f64,
    /// `(w_f + 1) / 2`
    pub delta_w: f64,
    pub q: f64,
    pub theta_f_sq: f64,
    /// First-order expansion `−1 + 2Qη²cos²φ`.
    pub w_f_linear: f64,
    /// `|θ(τ)|²` without the `cosh 2β ≈ 1` step.
    pub theta_f_sq_exact: f64,
    /// Inversion of the closed-form `f(τ)`, again without `cosh 2β ≈ 1`.
    pub w_f_exact: f64,
    pub warning: Option<ValidityWarning>,
}

fn require_square(pulse: &PulseSpec) -> Result<()> {
    match pulse.shape() {
        Shape::Square => Ok(()),
        other => Err(Error::ShapeMismatch(other.to_string())),
    }
}

fn require_inside(t: f64, pulse: &PulseSpec) -> Result<()> {
    let (start, end) = pulse.support();
    if !(start..=end).contains(&t) {
        return Err(Error::OutsidePulse { t, start, end });
    }
    Ok(())
}

fn integer_cycles(pulse: &PulseSpec) -> Result<u32> {
    let n = pulse.cycles();
    if !pulse.is_integer_cycles() || n < 1.0 || n > u32::MAX as f64 {
        return Err(Error::NonIntegerCycles(n));
    }
    Ok(n as u32)
}

fn prepare(t: f64, pulse: &PulseSpec, tls: &TlsParams) -> Result<DerivedParams> {
    require_square(pulse)?;
    let d = derive_params(pulse, tls)?;
    require_inside(t, pulse)?;
    Ok(d)
}

fn theta_from(t: f64, pulse: &PulseSpec, tls: &TlsParams, d: &DerivedParams) -> Complex64 {
    let (w, wc, phi) = (pulse.carrier_freq(), tls.transition_freq(), pulse.cep());
    let ib = I * d.beta;
    let head = (ib + (w * t + phi)).cos() * (I * (wc * t)).exp();
    let tail = (ib + phi).cos();
    -I * d.eta * (head - tail)
}

pub fn theta_closed(t: f64, pulse: &PulseSpec, tls: &TlsParams) -> Result<Complex64> {
    let d = prepare(t, pulse, tls)?;
    Ok(theta_from(t, pulse, tls, &d))
}

pub fn theta_quad_closed(t: f64, pulse: &PulseSpec, tls: &TlsParams) -> Result<ThetaQuad> {
    let d = prepare(t, pulse, tls)?;
    let (w, wc, phi) = (pulse.carrier_freq(), tls.transition_freq(), pulse.cep());
    let ib = I * d.beta;
    let theta_conj = I * d.eta * ((-ib + (w * t + phi)).cos() * (-I * (wc * t)).exp() - (-ib + phi).cos());
    let carrier = pulse.peak_rabi() * (w * t + phi).cos();
    Ok(ThetaQuad {
        theta: theta_from(t, pulse, tls, &d),
        theta_conj,
        theta_dot: carrier * (I * (wc * t)).exp(),
        theta_dot_conj: carrier * (-I * (wc * t)).exp(),
    })
}

/// `α(t′; t) = −iη²ω_c (t − t′)`: the secular part of the exponent.
pub fn alpha_simplified(t_prime: f64, t: f64, d: &DerivedParams, tls: &TlsParams) -> Complex64 {
    Complex64::new(0.0, -d.eta * d.eta * tls.transition_freq() * (t - t_prime))
}

/// Integrand of `α = 2∫θθ̇*` written as the constant, 2ω and ω-oscillating terms.
pub fn alpha_integrand(s: f64, pulse: &PulseSpec, tls: &TlsParams, d: &DerivedParams) -> Complex64 {
    let (w, wc, phi) = (pulse.carrier_freq(), tls.transition_freq(), pulse.cep());
    let ib = I * d.beta;
    let constant = Complex64::new(d.beta.cosh(), 0.0);
    let double = (ib + (2.0 * w * s + 2.0 * phi)).cos();
    let single = 2.0 * (ib + phi).cos() * (w * s + phi).cos() * (-I * (wc * s)).exp();
    -I * d.eta * pulse.peak_rabi() * (constant + double - single)
}

/// Full exponent `α(t′; t)` by quadrature, keeping the oscillating terms.
pub fn alpha_full(t_prime: f64, t: f64, pulse: &PulseSpec, tls: &TlsParams, quad: &Quadrature) -> Result<Complex64> {
    let d = prepare(t, pulse, tls)?;
    require_inside(t_prime, pulse)?;
    if t_prime == t {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (lo, hi, sign) = if t_prime < t { (t_prime, t, 1.0) } else { (t, t_prime, -1.0) };
    let r = quad.integrate(|s| alpha_integrand(s, pulse, tls, &d), &[lo, hi])?;
    Ok(r.value * sign)
}

pub fn f_analytic(t: f64, pulse: &PulseSpec, tls: &TlsParams) -> Result<Checked<Complex64>> {
    let d = prepare(t, pulse, tls)?;
    let theta = theta_from(t, pulse, tls, &d);
    let phase = Complex64::new(0.0, -d.eta * d.eta * tls.transition_freq() * t).exp();
    Ok(Checked { value: -0.5 * I * (1.0 + phase) * theta, warning: ValidityWarning::check(&d) })
}

/// `|θ(t)|²` expanded into real trigonometric terms (keeps `cosh 2β`, `sinh 2β`).
pub fn theta_abs_sq_expanded(t: f64, pulse: &PulseSpec, tls: &TlsParams) -> Result<f64> {
    let d = prepare(t, pulse, tls)?;
    let (w, wc, phi) = (pulse.carrier_freq(), tls.transition_freq(), pulse.cep());
    let (wt, wct) = (w * t, wc * t);
    let two_beta = 2.0 * d.beta;
    let sum = two_beta.cosh() * (1.0 - wt.cos() * wct.cos()) + (wt + 2.0 * phi).cos() * (wt.cos() - wct.cos())
        - two_beta.sinh() * wt.sin() * wct.sin();
    Ok(d.eta * d.eta * sum)
}

fn final_common(pulse: &PulseSpec, tls: &TlsParams) -> Result<(DerivedParams, u32, f64)> {
    require_square(pulse)?;
    let n = integer_cycles(pulse)?;
    let d = derive_params(pulse, tls)?;
    let ratio = tls.transition_freq() / pulse.carrier_freq();
    Ok((d, n, ratio))
}

/// `1 − cos 2N(ω_c/ω)π`
fn resonance_factor(n: u32, ratio: f64) -> f64 {
    1.0 - (2.0 * n as f64 * ratio * PI).cos()
}

/// `|θ_f|² = 2η²cos²φ (1 − cos 2N(ω_c/ω)π)`, using `cosh 2β ≈ 1`.
pub fn theta_f_sq(pulse: &PulseSpec, tls: &TlsParams) -> Result<f64> {
    let (d, n, ratio) = final_common(pulse, tls)?;
    let c = pulse.cep().cos();
    Ok(2.0 * d.eta * d.eta * c * c * resonance_factor(n, ratio))
}

/// `|θ(τ)|² = η² (cosh 2β + cos 2φ)(1 − cos 2N(ω_c/ω)π)` with no approximation.
pub fn theta_f_sq_exact(pulse: &PulseSpec, tls: &TlsParams) -> Result<f64> {
    let (d, n, ratio) = final_common(pulse, tls)?;
    Ok(d.eta * d.eta * ((2.0 * d.beta).cosh() + (2.0 * pulse.cep()).cos()) * resonance_factor(n, ratio))
}

/// CEP-coupling factor `Q`, bounded in `[0, 4]`.
pub fn q_factor(cycles: u32, d: &DerivedParams, pulse: &PulseSpec, tls: &TlsParams) -> f64 {
    let ratio = tls.transition_freq() / pulse.carrier_freq();
    let n = cycles as f64;
    (1.0 + (2.0 * n * d.eta * d.eta * ratio * PI).cos()) * resonance_factor(cycles, ratio)
}

pub fn final_inversion_analytic(cep: f64, pulse: &PulseSpec, tls: &TlsParams) -> Result<FinalInversionResult> {
    let pulse = pulse.with_cep(cep);
    let (d, n, ratio) = final_common(&pulse, tls)?;
    let q = q_factor(n, &d, &pulse, tls);
    let c = cep.cos();
    let x = q * d.eta * d.eta * c * c;
    let w_f = (x - 1.0) / (x + 1.0);

    let exact = theta_f_sq_exact(&pulse, tls)?;
    let f_sq_exact = 0.5 * (1.0 + (2.0 * n as f64 * d.eta * d.eta * ratio * PI).cos()) * exact;
    Ok(FinalInversionResult {
        w_f,
        delta_w: 0.5 * (w_f + 1.0),
        q,
        theta_f_sq: theta_f_sq(&pulse, tls)?,
        w_f_linear: -1.0 + 2.0 * x,
        theta_f_sq_exact: exact,
        w_f_exact: (f_sq_exact - 1.0) / (f_sq_exact + 1.0),
        warning: ValidityWarning::check(&d),
    })
}

/// Inversion `w = |C|² − |D|²` of a normalized state with ratio `f = C/D`.
pub fn inversion_from_f(f: Complex64) -> f64 {
    let m = f.norm_sqr();
    (m - 1.0) / (m + 1.0)
}

/// Upper-level probability `|C|²` of a normalized state with ratio `f = C/D`.
pub fn upper_prob_from_f(f: Complex64) -> f64 {
    let m = f.norm_sqr();
    m / (1.0 + m)
}
