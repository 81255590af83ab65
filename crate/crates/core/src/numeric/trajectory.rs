use num_complex::Complex64;
use serde::Serialize;

use super::integrator::{norm, IntegratorConfig, Propagator, State, GROUND};
use crate::error::{Error, Result};
use crate::pulse::{PulseSpec, TlsParams};

/// `f = C/D` is only formed where `|D|` exceeds this.
pub const D_GUARD: f64 = 1e-6;

/// Sampled solution of the amplitude equations starting from the ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub c_amp: Vec<Complex64>,
    pub d_amp: Vec<Complex64>,
    pub f_ratio: Vec<Option<Complex64>>,
    pub norm: Vec<f64>,
    pub upper_prob: Vec<f64>,
    pub inversion: Vec<f64>,
    /// Sample indices that sit on a segment node (field or derivative jump).
    pub boundaries: Vec<usize>,
    /// Index of the sample at the end of the pulse support.
    pub pulse_end: usize,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(n),
            c_amp: Vec::with_capacity(n),
            d_amp: Vec::with_capacity(n),
            f_ratio: Vec::with_capacity(n),
            norm: Vec::with_capacity(n),
            upper_prob: Vec::with_capacity(n),
            inversion: Vec::with_capacity(n),
            boundaries: Vec::new(),
            pulse_end: 0,
        }
    }

    fn push(&mut self, t: f64, y: &State) {
        let [c, d] = *y;
        self.times.push(t);
        self.c_amp.push(c);
        self.d_amp.push(d);
        self.f_ratio.push((d.norm() > D_GUARD).then(|| c / d));
        self.norm.push(norm(y));
        self.upper_prob.push(c.norm_sqr());
        self.inversion.push(c.norm_sqr() - d.norm_sqr());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_norm_error(&self) -> f64 {
        self.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinalState {
    pub upper_prob: f64,
    pub inversion: f64,
    pub f: Option<Complex64>,
    pub c: Complex64,
    pub d: Complex64,
}

impl FinalState {
    fn from_state(y: &State) -> Self {
        let [c, d] = *y;
        FinalState {
            upper_prob: c.norm_sqr(),
            inversion: c.norm_sqr() - d.norm_sqr(),
            f: (d.norm() > D_GUARD).then(|| c / d),
            c,
            d,
        }
    }

    /// `(w_f + 1) / 2`
    pub fn delta_w(&self) -> f64 {
        0.5 * (self.inversion + 1.0)
    }
}

/// Integrates the amplitude equations over the pulse (plus the configured margin)
/// from `C = 0, D = 1` at the left edge of the support.
pub fn integrate_tls(pulse: &PulseSpec, tls: &TlsParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let prop = Propagator::new(pulse, tls, cfg)?;
    let nodes = prop.default_nodes();
    let span = nodes.last().unwrap() - nodes[0];
    let estimate = (cfg.steps_per_cycle as f64 * span / pulse.carrier_period()) as usize + nodes.len() + 1;
    let mut traj = Trajectory::with_capacity(estimate);
    let pulse_end_time = pulse.support().1;
    prop.run(GROUND, &nodes, |t, y, node| {
        if node {
            traj.boundaries.push(traj.times.len());
            if t == pulse_end_time {
                traj.pulse_end = traj.times.len();
            }
        }
        traj.push(t, y);
    })?;
    Ok(traj)
}

/// Final amplitudes at the end of the pulse without storing the trajectory.
pub fn integrate_final(pulse: &PulseSpec, tls: &TlsParams, cfg: &IntegratorConfig) -> Result<FinalState> {
    let prop = Propagator::new(pulse, tls, cfg)?;
    let y = prop.run(GROUND, &pulse.breakpoints(), |_, _, _| {})?;
    Ok(FinalState::from_state(&y))
}

/// Observables at the last sample of the pulse support.
pub fn final_state(traj: &Trajectory) -> FinalState {
    let i = traj.pulse_end;
    FinalState::from_state(&[traj.c_amp[i], traj.d_amp[i]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiResidual {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl RiccatiResidual {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Residual of the Riccati equation for `f = C/D` along a trajectory, using
/// three-point differences that never straddle a segment node.
pub fn riccati_residual(traj: &Trajectory, pulse: &PulseSpec, tls: &TlsParams) -> Result<RiccatiResidual> {
    for (i, d) in traj.d_amp.iter().enumerate() {
        if d.norm() <= D_GUARD {
            return Err(Error::DivisionGuard { t: traj.times[i], magnitude: d.norm() });
        }
    }
    let f: Vec<Complex64> = traj.f_ratio.iter().map(|f| f.expect("guarded above")).collect();
    Ok(riccati_residual_of(&traj.times, &f, &traj.boundaries, pulse, tls))
}

/// Riccati residual of any sampled `f(t)`; `boundaries` lists indices that
/// must not be the center of a difference stencil.
pub fn riccati_residual_of(
    times: &[f64],
    f: &[Complex64],
    boundaries: &[usize],
    pulse: &PulseSpec,
    tls: &TlsParams,
) -> RiccatiResidual {
    let i_unit = Complex64::new(0.0, 1.0);
    let wc = tls.transition_freq();
    let mut out = RiccatiResidual { times: Vec::new(), values: Vec::new() };
    for i in 1..times.len().saturating_sub(1) {
        if boundaries.binary_search(&i).is_ok() {
            continue;
        }
        let (h1, h2) = (times[i] - times[i - 1], times[i + 1] - times[i]);
        let df =
            f[i - 1] * (-h2 / (h1 * (h1 + h2))) + f[i] * ((h2 - h1) / (h1 * h2)) + f[i + 1] * (h1 / (h2 * (h1 + h2)));
        let t = times[i];
        let g = pulse.field(t);
        let e = (i_unit * (wc * t)).exp();
        let r = df - i_unit * g * e.conj() * f[i] * f[i] + i_unit * g * e;
        out.times.push(t);
        out.values.push(r.norm());
    }
    out
}
