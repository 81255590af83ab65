//! Drive pulses and two-level-system parameters.
//!
//! Everything runs in internal units where the carrier frequency is usually
//! 1, so callers mostly work with the ratios `ω/ω_c` (detuning ratio) and
//! `Ω₀/ω` (field ratio). [`PhysicalScale`] maps back to SI units for an
//! 800 nm carrier.
//!
//! The drive seen by the atom is `Ω₀·E(t)·cos(ωt + φ)` where `E(t)` is the
//! normalized envelope returned by [`PulseSpec::envelope`]; time is absolute,
//! so a pulse whose window is shifted needs its CEP shifted by `ω·Δt` to
//! present the same field to the atom.

use std::f64::consts::{LN_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of FWHM on each side of the Gaussian center kept in the window.
pub const GAUSSIAN_HALF_WINDOW_FWHM: f64 = 4.0;

/// Threshold on `(ω/ω_c)² + (Ω₀/ω)²` above which the closed forms are flagged.
pub const VALIDITY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Flat envelope switched on at `t = 0` and off at `t = τ`.
    Square,
    /// Flat top with sin² ramps of half a carrier period on each edge.
    TopHat,
    /// Gaussian field envelope whose FWHM spans `cycles` carrier periods.
    Gaussian,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Square => "square",
            Shape::TopHat => "tophat",
            Shape::Gaussian => "gaussian",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" | "sp" => Ok(Shape::Square),
            "tophat" | "top-hat" | "th" => Ok(Shape::TopHat),
            "gaussian" | "gauss" => Ok(Shape::Gaussian),
            other => Err(Error::param("shape", format!("unknown shape `{other}`"))),
        }
    }
}

/// A drive pulse. Immutable once built; use the `with_*` methods for variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    shape: Shape,
    carrier_freq: f64,
    cep: f64,
    peak_rabi: f64,
    cycles: f64,
    origin: f64,
}

impl PulseSpec {
    pub fn new(shape: Shape, carrier_freq: f64, cep: f64, peak_rabi: f64, cycles: f64) -> Result<Self> {
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(Error::param("carrier_freq", format!("must be positive and finite, got {carrier_freq}")));
        }
        if !(peak_rabi.is_finite() && peak_rabi >= 0.0) {
            return Err(Error::param("peak_rabi", format!("must be non-negative and finite, got {peak_rabi}")));
        }
        if !(cycles.is_finite() && cycles > 0.0) {
            return Err(Error::param("cycles", format!("must be positive and finite, got {cycles}")));
        }
        if shape == Shape::TopHat && cycles < 0.5 {
            return Err(Error::param("cycles", "top-hat needs at least half a cycle to hold both ramps"));
        }
        if !cep.is_finite() {
            return Err(Error::param("cep", "must be finite"));
        }
        Ok(PulseSpec { shape, carrier_freq, cep, peak_rabi, cycles, origin: 0.0 })
    }

    /// Pulse in internal units (`ω = 1`) with peak Rabi frequency `field_ratio·ω`.
    pub fn from_ratios(shape: Shape, field_ratio: f64, cep: f64, cycles: f64) -> Result<Self> {
        Self::new(shape, 1.0, cep, field_ratio, cycles)
    }

    pub fn square(field_ratio: f64, cep: f64, cycles: f64) -> Result<Self> {
        Self::from_ratios(Shape::Square, field_ratio, cep, cycles)
    }

    pub fn with_cep(mut self, cep: f64) -> Self {
        self.cep = cep;
        self
    }

    pub fn with_peak_rabi(mut self, peak_rabi: f64) -> Result<Self> {
        if !(peak_rabi.is_finite() && peak_rabi >= 0.0) {
            return Err(Error::param("peak_rabi", format!("must be non-negative and finite, got {peak_rabi}")));
        }
        self.peak_rabi = peak_rabi;
        Ok(self)
    }

    /// Moves the start of the window to `origin`. The square pulse is pinned to `t = 0`.
    pub fn with_origin(mut self, origin: f64) -> Result<Self> {
        if self.shape == Shape::Square && origin != 0.0 {
            return Err(Error::param("origin", "the square pulse always starts at t = 0"));
        }
        if !origin.is_finite() {
            return Err(Error::param("origin", "must be finite"));
        }
        self.origin = origin;
        Ok(self)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn cep(&self) -> f64 {
        self.cep
    }

    pub fn peak_rabi(&self) -> f64 {
        self.peak_rabi
    }

    pub fn cycles(&self) -> f64 {
        self.cycles
    }

    pub fn field_ratio(&self) -> f64 {
        self.peak_rabi / self.carrier_freq
    }

    pub fn carrier_period(&self) -> f64 {
        TAU / self.carrier_freq
    }

    /// Gaussian FWHM of the field envelope; for the other shapes the total width.
    pub fn width(&self) -> f64 {
        self.cycles * self.carrier_period()
    }

    pub fn support(&self) -> (f64, f64) {
        let len = match self.shape {
            Shape::Square | Shape::TopHat => self.width(),
            Shape::Gaussian => 2.0 * GAUSSIAN_HALF_WINDOW_FWHM * self.width(),
        };
        (self.origin, self.origin + len)
    }

    /// Center of the envelope (peak position).
    pub fn center(&self) -> f64 {
        let (a, b) = self.support();
        0.5 * (a + b)
    }

    fn ramp(&self) -> f64 {
        0.5 * self.carrier_period()
    }

    /// Times at which the field or its derivatives jump. Integration never
    /// steps across these; the list always starts and ends with the support edges.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.support();
        match self.shape {
            Shape::Square | Shape::Gaussian => vec![a, b],
            Shape::TopHat => {
                let r = self.ramp();
                if (b - a) > 2.0 * r {
                    vec![a, a + r, b - r, b]
                } else {
                    vec![a, a + r, b]
                }
            }
        }
    }

    /// Normalized envelope in `[0, 1]`; exactly zero outside the support.
    pub fn envelope(&self, t: f64) -> f64 {
        let (a, b) = self.support();
        if t < a || t > b {
            return 0.0;
        }
        match self.shape {
            Shape::Square => 1.0,
            Shape::TopHat => {
                let r = self.ramp();
                let edge = (t - a).min(b - t);
                if edge >= r {
                    1.0
                } else {
                    let s = (0.5 * PI * edge / r).sin();
                    s * s
                }
            }
            Shape::Gaussian => {
                let x = (t - self.center()) / self.width();
                (-4.0 * LN_2 * x * x).exp()
            }
        }
    }

    /// Instantaneous coupling `Ω₀·E(t)·cos(ωt + φ)`.
    pub fn field(&self, t: f64) -> f64 {
        let env = self.envelope(t);
        if env == 0.0 {
            return 0.0;
        }
        self.peak_rabi * env * (self.carrier_freq * t + self.cep).cos()
    }

    pub fn is_integer_cycles(&self) -> bool {
        self.cycles.fract() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsParams {
    transition_freq: f64,
}

impl TlsParams {
    pub fn new(transition_freq: f64) -> Result<Self> {
        if !(transition_freq.is_finite() && transition_freq > 0.0) {
            return Err(Error::param("transition_freq", format!("must be positive and finite, got {transition_freq}")));
        }
        Ok(TlsParams { transition_freq })
    }

    /// Transition frequency for a given detuning ratio `ω/ω_c`.
    pub fn from_detuning(carrier_freq: f64, detuning_ratio: f64) -> Result<Self> {
        if !(detuning_ratio.is_finite() && detuning_ratio > 0.0) {
            return Err(Error::param("detuning", format!("ω/ω_c must be positive, got {detuning_ratio}")));
        }
        Self::new(carrier_freq / detuning_ratio)
    }

    pub fn transition_freq(&self) -> f64 {
        self.transition_freq
    }
}

/// Quantities shared by all closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// `Ω₀ / √(ω_c² − ω²)`
    pub eta: f64,
    /// `cosh β = ω_c / √(ω_c² − ω²)`, `sinh β = ω / √(ω_c² − ω²)`
    pub beta: f64,
    /// `(ω/ω_c)² + (Ω₀/ω)²`; the closed forms assume this is small.
    pub validity_metric: f64,
}

impl DerivedParams {
    pub fn is_flagged(&self) -> bool {
        self.validity_metric >= VALIDITY_THRESHOLD
    }
}

pub fn validity_metric(detuning_ratio: f64, field_ratio: f64) -> f64 {
    detuning_ratio * detuning_ratio + field_ratio * field_ratio
}

/// Derives η, β and the validity metric. Only the `ω < ω_c` branch exists.
pub fn derive_params(pulse: &PulseSpec, tls: &TlsParams) -> Result<DerivedParams> {
    let w = pulse.carrier_freq();
    let wc = tls.transition_freq();
    if w >= wc {
        return Err(Error::BranchUndefined { carrier: w, transition: wc });
    }
    let root = ((wc - w) * (wc + w)).sqrt();
    Ok(DerivedParams {
        eta: pulse.peak_rabi() / root,
        beta: (w / wc).atanh(),
        validity_metric: validity_metric(w / wc, pulse.field_ratio()),
    })
}

/// Conversion between internal units and SI for a fixed carrier wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScale {
    /// Carrier angular frequency in rad/s.
    pub carrier_rad_per_s: f64,
}

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

impl PhysicalScale {
    pub fn from_wavelength_nm(nm: f64) -> Self {
        PhysicalScale { carrier_rad_per_s: TAU * SPEED_OF_LIGHT / (nm * 1e-9) }
    }

    pub fn ti_sapphire() -> Self {
        Self::from_wavelength_nm(800.0)
    }

    /// Internal frequency (multiples of ω) to rad/s.
    pub fn angular_frequency(&self, internal: f64) -> f64 {
        internal * self.carrier_rad_per_s
    }

    /// Internal time (units of 1/ω) to femtoseconds.
    pub fn time_fs(&self, internal: f64) -> f64 {
        internal / self.carrier_rad_per_s * 1e15
    }

    pub fn transition_wavelength_nm(&self, detuning_ratio: f64) -> f64 {
        TAU * SPEED_OF_LIGHT / self.angular_frequency(1.0 / detuning_ratio) * 1e9
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_envelope_inside_and_outside() {
        let p = PulseSpec::square(0.1, 0.0, 2.0).unwrap();
        let tau = p.support().1;
        assert_eq!(tau, 4.0 * PI);
        assert_eq!(p.envelope(tau / 2.0), 1.0);
        assert_eq!(p.envelope(-0.1 * TAU), 0.0);
        assert_eq!(p.envelope(tau + 1e-9), 0.0);
        assert_eq!(p.breakpoints(), vec![0.0, tau]);
    }

    #[test]
    fn square_field_values() {
        let p = PulseSpec::square(0.2, 0.0, 2.0).unwrap();
        assert_eq!(p.field(0.0), 0.2);
        assert!((p.field(PI) + 0.2).abs() < 1e-15);
        let q = p.with_cep(PI / 2.0);
        assert!(q.field(0.0).abs() < 1e-16);
    }

    #[test]
    fn gaussian_half_maximum_at_half_width() {
        let p = PulseSpec::from_ratios(Shape::Gaussian, 0.1, 0.0, 1.5).unwrap();
        let c = p.center();
        assert!((p.envelope(c) - 1.0).abs() < 1e-15);
        assert!((p.envelope(c + p.width() / 2.0) - 0.5).abs() < 1e-12);
        let (a, b) = p.support();
        assert!(p.envelope(a) < 2e-5);
        assert_eq!(p.envelope(b + 1e-12), 0.0);
    }

    #[test]
    fn tophat_is_flat_in_the_middle_with_smooth_ramps() {
        let p = PulseSpec::from_ratios(Shape::TopHat, 0.28, 0.0, 2.0).unwrap();
        let bp = p.breakpoints();
        assert_eq!(bp, vec![0.0, PI, 3.0 * PI, 4.0 * PI]);
        assert_eq!(p.envelope(0.0), 0.0);
        assert!((p.envelope(PI / 2.0) - 0.5).abs() < 1e-15);
        assert_eq!(p.envelope(2.0 * PI), 1.0);
        assert!(p.envelope(4.0 * PI).abs() < 1e-15);
        assert!(PulseSpec::from_ratios(Shape::TopHat, 0.1, 0.0, 0.25).is_err());
    }

    #[test]
    fn derive_params_examples() {
        let tls = TlsParams::new(5.0 / 3.0).unwrap();
        let p = PulseSpec::square(0.1, 0.0, 2.0).unwrap();
        let d = derive_params(&p, &tls).unwrap();
        assert!((d.eta - 0.075).abs() < 1e-15);

        let tls = TlsParams::new(10.0 / 3.0).unwrap();
        let p = PulseSpec::square(0.05, 0.0, 2.0).unwrap();
        let d = derive_params(&p, &tls).unwrap();
        assert!((d.validity_metric - 0.0925).abs() < 1e-15);

        let p0 = PulseSpec::square(0.0, 0.0, 2.0).unwrap();
        assert_eq!(derive_params(&p0, &tls).unwrap().eta, 0.0);
    }

    #[test]
    fn derive_params_rejects_upper_branch() {
        let p = PulseSpec::square(0.1, 0.0, 2.0).unwrap();
        for wc in [1.0, 0.5] {
            let tls = TlsParams::new(wc).unwrap();
            assert!(matches!(derive_params(&p, &tls), Err(Error::BranchUndefined { .. })));
        }
    }

    #[test]
    fn rejects_bad_pulses() {
        assert!(PulseSpec::new(Shape::Square, 0.0, 0.0, 0.1, 2.0).is_err());
        assert!(PulseSpec::new(Shape::Square, 1.0, 0.0, -0.1, 2.0).is_err());
        assert!(PulseSpec::new(Shape::Square, 1.0, 0.0, 0.1, 0.0).is_err());
        assert!(PulseSpec::square(0.1, 0.0, 2.0).unwrap().with_origin(1.0).is_err());
        assert!(TlsParams::from_detuning(1.0, 0.0).is_err());
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("square".parse::<Shape>().unwrap(), Shape::Square);
        assert_eq!("TopHat".parse::<Shape>().unwrap(), Shape::TopHat);
        assert_eq!("gaussian".parse::<Shape>().unwrap(), Shape::Gaussian);
        assert!("sawtooth".parse::<Shape>().is_err());
    }

    #[test]
    fn ti_sapphire_scale() {
        let s = PhysicalScale::ti_sapphire();
        // 800 nm carrier period is about 2.67 fs
        assert!((s.time_fs(TAU) - 2.6685).abs() < 1e-3);
        assert!((s.transition_wavelength_nm(0.5) - 400.0).abs() < 1e-9);
    }

    fn any_shape() -> impl Strategy<Value = Shape> {
        prop_oneof![Just(Shape::Square), Just(Shape::TopHat), Just(Shape::Gaussian)]
    }

    proptest! {
        #[test]
        fn field_bounded_and_zero_outside(
            shape in any_shape(),
            a in 0.0f64..0.5,
            phi in -7.0f64..7.0,
            n in 0.5f64..4.0,
            s in -0.5f64..1.5,
        ) {
            let p = PulseSpec::from_ratios(shape, a, phi, n).unwrap();
            let (t0, t1) = p.support();
            let t = t0 + s * (t1 - t0);
            let env = p.envelope(t);
            prop_assert!((0.0..=1.0).contains(&env));
            prop_assert!(p.field(t).abs() <= a);
            if !(t0..=t1).contains(&t) {
                prop_assert_eq!(p.field(t), 0.0);
            }
        }

        #[test]
        fn cep_is_two_pi_periodic(shape in any_shape(), phi in -3.0f64..3.0, s in 0.0f64..1.0) {
            let p = PulseSpec::from_ratios(shape, 0.2, phi, 2.0).unwrap();
            let q = p.with_cep(phi + TAU);
            let (t0, t1) = p.support();
            let t = t0 + s * (t1 - t0);
            prop_assert!((p.field(t) - q.field(t)).abs() < 1e-14);
        }

        #[test]
        fn gaussian_is_symmetric(d in 0.0f64..30.0) {
            let p = PulseSpec::from_ratios(Shape::Gaussian, 0.1, 0.0, 1.5).unwrap();
            let c = p.center();
            prop_assert!((p.envelope(c + d) - p.envelope(c - d)).abs() < 1e-12);
        }

        #[test]
        fn beta_definitions_agree(r in 0.01f64..0.99, a in 0.0f64..1.0) {
            let p = PulseSpec::square(a, 0.0, 2.0).unwrap();
            let tls = TlsParams::from_detuning(1.0, r).unwrap();
            let d = derive_params(&p, &tls).unwrap();
            let (ch, sh) = (d.beta.cosh(), d.beta.sinh());
            prop_assert!((ch * ch - sh * sh - 1.0).abs() < 1e-12);
            let root = (tls.transition_freq().powi(2) - 1.0).sqrt();
            prop_assert!((ch - tls.transition_freq() / root).abs() < 1e-10 * ch);
            prop_assert_eq!(d.eta > 0.0, a > 0.0);
        }
    }
}
