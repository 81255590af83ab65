//! Direct integration of the amplitude equations
//!
//! ```text
//! Ċ = −i Ω(t) cos(ωt + φ) e^{ iω_c t} D
//! Ḋ = −i Ω(t) cos(ωt + φ) e^{−iω_c t} C
//! ```
//!
//! with no rotating-wave or envelope approximation, plus the quadrature
//! route to the driving phase integral `θ(t)`.

mod integrator;
mod trajectory;

pub use integrator::{
    norm, propagate, IntegratorConfig, Propagator, State, StepMode, GROUND, MIN_STEPS_PER_CYCLE, NORM_DRIFT_LIMIT,
};
pub use trajectory::{
    final_state, integrate_final, integrate_tls, riccati_residual, riccati_residual_of, FinalState, RiccatiResidual,
    Trajectory, D_GUARD,
};

use num_complex::Complex64;

use crate::error::Result;
use crate::pulse::{PulseSpec, TlsParams};
use crate::quadrature::{Quadrature, QuadratureResult};

/// `θ(t) = ∫ Ω(t′) cos(ωt′ + φ) e^{iω_c t′} dt′` from the start of the support,
/// for any pulse shape.
pub fn theta_quadrature(t: f64, pulse: &PulseSpec, tls: &TlsParams, quad: &Quadrature) -> Result<QuadratureResult> {
    let (start, end) = pulse.support();
    let upper = t.min(end);
    if upper <= start || pulse.peak_rabi() == 0.0 {
        return Ok(QuadratureResult { value: Complex64::new(0.0, 0.0), error_re: 0.0, error_im: 0.0, intervals: 0 });
    }
    let mut points: Vec<f64> = pulse.breakpoints().into_iter().filter(|&p| p < upper).collect();
    points.push(upper);
    let wc = tls.transition_freq();
    quad.integrate(|s| pulse.field(s) * Complex64::new(0.0, wc * s).exp(), &points)
}
