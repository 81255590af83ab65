use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{PulseSpec, TlsParams};

/// Hard failure threshold for `| |C|² + |D|² − 1 |`.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

pub const MIN_STEPS_PER_CYCLE: u32 = 100;

/// Amplitudes `(C, D)` in the frame where the upper level carries `e^{−iω_c t}`.
pub type State = [Complex64; 2];

pub const GROUND: State = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    FixedStep,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub mode: StepMode,
    pub steps_per_cycle: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub norm_check_interval: u32,
    /// Free evolution appended after the pulse, in carrier cycles.
    pub margin_cycles: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            mode: StepMode::FixedStep,
            steps_per_cycle: 2000,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            norm_check_interval: 64,
            margin_cycles: 0.0,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed(steps_per_cycle: u32) -> Self {
        IntegratorConfig { steps_per_cycle, ..Self::default() }
    }

    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig { mode: StepMode::Adaptive, rel_tol, abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_cycle < MIN_STEPS_PER_CYCLE {
            return Err(Error::param(
                "steps_per_cycle",
                format!("must be at least {MIN_STEPS_PER_CYCLE}, got {}", self.steps_per_cycle),
            ));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::param("tolerance", "rel_tol and abs_tol must be positive"));
        }
        if self.norm_check_interval == 0 {
            return Err(Error::param("norm_check_interval", "must be positive"));
        }
        if !(self.margin_cycles.is_finite() && self.margin_cycles >= 0.0) {
            return Err(Error::param("margin_cycles", "must be non-negative"));
        }
        Ok(())
    }
}

/// Right-hand side of the amplitude equations on one smooth segment.
#[derive(Clone, Copy)]
struct Rhs<'a> {
    pulse: &'a PulseSpec,
    transition: f64,
    driven: bool,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, t: f64, y: &State) -> State {
        if !self.driven {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let g = self.pulse.field(t);
        let (s, c) = (self.transition * t).sin_cos();
        let e = Complex64::new(c, s);
        // −i g e D  and  −i g e* C
        let a = g * e * y[1];
        let b = g * e.conj() * y[0];
        [Complex64::new(a.im, -a.re), Complex64::new(b.im, -b.re)]
    }
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    [y[0] + k[0] * h, y[1] + k[1] * h]
}

pub fn norm(y: &State) -> f64 {
    y[0].norm_sqr() + y[1].norm_sqr()
}

fn rk4_step(rhs: &Rhs, t: f64, y: &State, h: f64) -> State {
    let k1 = rhs.eval(t, y);
    let k2 = rhs.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs.eval(t + h, &axpy(y, h, &k3));
    let w = h / 6.0;
    [y[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * w, y[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * w]
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (w, k) in terms {
        out[0] += k[0] * (h * w);
        out[1] += k[1] * (h * w);
    }
    out
}

/// One Dormand-Prince step; returns the 5th-order solution and the embedded error vector.
fn dopri_step(rhs: &Rhs, t: f64, y: &State, h: f64) -> (State, State) {
    let k1 = rhs.eval(t, y);
    let k2 = rhs.eval(t + C2 * h, &combine(y, h, &[(A21, &k1)]));
    let k3 = rhs.eval(t + C3 * h, &combine(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = rhs.eval(t + C4 * h, &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs.eval(t + C5 * h, &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs.eval(t + h, &combine(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = combine(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs.eval(t + h, &y5);
    let zero = [Complex64::new(0.0, 0.0); 2];
    let err = combine(&zero, h, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
    (y5, err)
}

/// Piecewise propagation of the amplitude equations across pulse segments.
pub struct Propagator<'a> {
    pulse: &'a PulseSpec,
    tls: &'a TlsParams,
    cfg: &'a IntegratorConfig,
}

impl<'a> Propagator<'a> {
    pub fn new(pulse: &'a PulseSpec, tls: &'a TlsParams, cfg: &'a IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Propagator { pulse, tls, cfg })
    }

    /// Node times for the default run: pulse breakpoints plus the trailing margin.
    pub fn default_nodes(&self) -> Vec<f64> {
        let mut nodes = self.pulse.breakpoints();
        if self.cfg.margin_cycles > 0.0 {
            let end = *nodes.last().expect("breakpoints are never empty");
            nodes.push(end + self.cfg.margin_cycles * self.pulse.carrier_period());
        }
        nodes
    }

    /// Integrates from `nodes[0]` through every node in turn (the list may run
    /// backwards in time). No step crosses a node. `observe` sees the start
    /// state and every accepted step; the last call of each segment lands
    /// exactly on the node and carries `true`.
    pub fn run<F>(&self, start: State, nodes: &[f64], mut observe: F) -> Result<State>
    where
        F: FnMut(f64, &State, bool),
    {
        let mut y = start;
        let Some(&first) = nodes.first() else {
            return Ok(y);
        };
        observe(first, &y, true);
        let (support_start, support_end) = self.pulse.support();
        let mut since_audit = 0u32;
        for seg in nodes.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if a == b {
                continue;
            }
            let mid = 0.5 * (a + b);
            let rhs = Rhs {
                pulse: self.pulse,
                transition: self.tls.transition_freq(),
                driven: mid > support_start && mid < support_end && self.pulse.peak_rabi() > 0.0,
            };
            let mut audit = |t: f64, y: &State, force: bool| -> Result<()> {
                since_audit += 1;
                if force || since_audit >= self.cfg.norm_check_interval {
                    since_audit = 0;
                    let drift = (norm(y) - 1.0).abs();
                    if drift > NORM_DRIFT_LIMIT {
                        return Err(Error::NormDrift { t, drift, limit: NORM_DRIFT_LIMIT });
                    }
                }
                Ok(())
            };
            match self.cfg.mode {
                StepMode::FixedStep => {
                    let span = b - a;
                    let steps = (self.cfg.steps_per_cycle as f64 * span.abs() / self.pulse.carrier_period())
                        .ceil()
                        .max(1.0) as usize;
                    let h = span / steps as f64;
                    for k in 0..steps {
                        let t = a + k as f64 * h;
                        let last = k + 1 == steps;
                        let t_next = if last { b } else { a + (k + 1) as f64 * h };
                        y = rk4_step(&rhs, t, &y, t_next - t);
                        audit(t_next, &y, last)?;
                        observe(t_next, &y, last);
                    }
                }
                StepMode::Adaptive => {
                    y = self.adaptive_segment(&rhs, a, b, y, &mut audit, &mut observe)?;
                }
            }
        }
        Ok(y)
    }

    fn adaptive_segment<A, F>(
        &self,
        rhs: &Rhs,
        a: f64,
        b: f64,
        mut y: State,
        audit: &mut A,
        observe: &mut F,
    ) -> Result<State>
    where
        A: FnMut(f64, &State, bool) -> Result<()>,
        F: FnMut(f64, &State, bool),
    {
        let dir = (b - a).signum();
        let period = self.pulse.carrier_period();
        let floor = 1e-15 * period;
        let mut h = dir * (period / self.cfg.steps_per_cycle as f64 * 10.0).min((b - a).abs());
        let mut t = a;
        loop {
            let remaining = b - t;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            let (y_new, err) = dopri_step(rhs, t, &y, h);
            let mut worst: f64 = 0.0;
            for i in 0..2 {
                let scale = self.cfg.abs_tol + self.cfg.rel_tol * y[i].norm().max(y_new[i].norm());
                worst = worst.max(err[i].norm() / scale);
            }
            if worst <= 1.0 {
                t = if last { b } else { t + h };
                y = y_new;
                audit(t, &y, last)?;
                observe(t, &y, last);
                if last {
                    return Ok(y);
                }
            }
            let factor = if worst == 0.0 { 5.0 } else { (0.9 * worst.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if h.abs() < floor {
                return Err(Error::StepUnderflow { t, step: h.abs(), floor });
            }
        }
    }
}

/// Evolves `start` from time `from` to time `to`, honouring every pulse breakpoint in between.
pub fn propagate(
    pulse: &PulseSpec,
    tls: &TlsParams,
    cfg: &IntegratorConfig,
    start: State,
    from: f64,
    to: f64,
) -> Result<State> {
    let prop = Propagator::new(pulse, tls, cfg)?;
    let (lo, hi) = (from.min(to), from.max(to));
    let mut nodes: Vec<f64> = std::iter::once(lo)
        .chain(pulse.breakpoints().into_iter().filter(|&p| p > lo && p < hi))
        .chain(std::iter::once(hi))
        .collect();
    if to < from {
        nodes.reverse();
    }
    prop.run(start, &nodes, |_, _, _| {})
}
