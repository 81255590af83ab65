//! Analytic-versus-numeric comparison campaigns.
//!
//! Every campaign evaluates independent points on a [`WorkerPool`]; results
//! come back in input order regardless of which worker finished first, so a
//! fixed-step run is bit-for-bit reproducible. Failed points are kept as
//! records carrying the error instead of aborting the sweep.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{f_analytic, final_inversion_analytic, upper_prob_from_f, ValidityWarning};
use crate::error::{Error, Result};
use crate::numeric::{integrate_final, integrate_tls, IntegratorConfig};
use crate::pulse::{validity_metric, PulseSpec, Shape, TlsParams, VALIDITY_THRESHOLD};

#[derive(Default)]
pub struct WorkerPool {
    pool: Option<rayon::ThreadPool>,
}

impl WorkerPool {
    /// `None` uses rayon's global pool.
    pub fn new(workers: Option<usize>) -> Result<Self> {
        let pool = match workers {
            None => None,
            Some(0) => return Err(Error::param("parallel", "worker count must be positive")),
            Some(n) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::param("parallel", e.to_string()))?,
            ),
        };
        Ok(WorkerPool { pool })
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        let run = || items.par_iter().map(&f).collect();
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }
}

/// Which solution routes a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engines {
    Analytic,
    Numeric,
    Both,
}

impl Engines {
    fn analytic(self) -> bool {
        matches!(self, Engines::Analytic | Engines::Both)
    }

    fn numeric(self) -> bool {
        matches!(self, Engines::Numeric | Engines::Both)
    }
}

/// Square-pulse parameters in ratio form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareCase {
    /// `ω/ω_c`
    pub detuning: f64,
    /// `Ω₀/ω`
    pub field: f64,
    pub cep: f64,
    pub cycles: f64,
}

impl SquareCase {
    pub fn new(detuning: f64, field: f64, cep: f64, cycles: f64) -> Self {
        SquareCase { detuning, field, cep, cycles }
    }

    pub fn build(&self, shape: Shape) -> Result<(PulseSpec, TlsParams)> {
        if !(self.detuning > 0.0 && self.detuning < 1.0) {
            return Err(Error::param("detuning", format!("ω/ω_c must lie in (0, 1), got {}", self.detuning)));
        }
        let pulse = PulseSpec::from_ratios(shape, self.field, self.cep, self.cycles)?;
        let tls = TlsParams::from_detuning(pulse.carrier_freq(), self.detuning)?;
        Ok((pulse, tls))
    }

    pub fn validity_metric(&self) -> f64 {
        validity_metric(self.detuning, self.field)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub parameter: f64,
    pub analytic: Option<f64>,
    pub numeric: Option<f64>,
    /// `|analytic − numeric|` when both are present.
    pub difference: Option<f64>,
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn new(parameter: f64, analytic: Option<f64>, numeric: Option<f64>) -> Self {
        let difference = analytic.zip(numeric).map(|(a, n)| (a - n).abs());
        SweepRecord { parameter, analytic, numeric, difference, error: None }
    }

    pub fn failed(parameter: f64, error: &Error) -> Self {
        SweepRecord { parameter, analytic: None, numeric: None, difference: None, error: Some(error.to_string()) }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceComparison {
    pub case: SquareCase,
    pub times: Vec<f64>,
    pub analytic_abs_f: Vec<f64>,
    /// NaN where `|D|` fell below the division guard.
    pub numeric_abs_f: Vec<f64>,
    pub max_gap: f64,
    pub max_norm_error: f64,
    pub warning: Option<ValidityWarning>,
}

/// `|f(t)|` from the closed form and from the integrator on the integrator's own time grid.
pub fn trace_compare(case: &SquareCase, cfg: &IntegratorConfig) -> Result<TraceComparison> {
    let (pulse, tls) = case.build(Shape::Square)?;
    let traj = integrate_tls(&pulse, &tls, cfg)?;
    let end = traj.pulse_end;
    let times = traj.times[..=end].to_vec();
    let mut analytic = Vec::with_capacity(times.len());
    let mut warning = None;
    for &t in &times {
        let f = f_analytic(t, &pulse, &tls)?;
        warning = warning.or(f.warning);
        analytic.push(f.value.norm());
    }
    let numeric: Vec<f64> = traj.f_ratio[..=end].iter().map(|f| f.map_or(f64::NAN, |f| f.norm())).collect();
    let max_gap =
        analytic.iter().zip(&numeric).filter(|(_, n)| n.is_finite()).map(|(a, n)| (a - n).abs()).fold(0.0, f64::max);
    Ok(TraceComparison {
        case: *case,
        times,
        analytic_abs_f: analytic,
        numeric_abs_f: numeric,
        max_gap,
        max_norm_error: traj.max_norm_error(),
        warning,
    })
}

fn analytic_final(pulse: &PulseSpec, tls: &TlsParams) -> Result<crate::analytic::Checked<num_complex::Complex64>> {
    f_analytic(pulse.support().1, pulse, tls)
}

/// Final upper-level probability `|C_final|²` against `ω/ω_c` at fixed `Ω₀/ω`.
pub fn detuning_scan(
    field: f64,
    detunings: &[f64],
    cep: f64,
    cycles: f64,
    cfg: &IntegratorConfig,
    pool: &WorkerPool,
) -> Vec<SweepRecord> {
    pool.map(detunings, |&r| {
        let run = || -> Result<SweepRecord> {
            let (pulse, tls) = SquareCase::new(r, field, cep, cycles).build(Shape::Square)?;
            let analytic = upper_prob_from_f(analytic_final(&pulse, &tls)?.value);
            let numeric = integrate_final(&pulse, &tls, cfg)?.upper_prob;
            Ok(SweepRecord::new(r, Some(analytic), Some(numeric)))
        };
        run().unwrap_or_else(|e| SweepRecord::failed(r, &e))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Axis { name: name.into(), values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Parameters shared by every cell or point of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMeta {
    pub campaign: String,
    pub shape: Shape,
    pub cycles: f64,
    pub cep: Option<f64>,
    pub detuning: Option<f64>,
    pub field: Option<f64>,
    pub integrator: IntegratorConfig,
    pub notes: Vec<String>,
}

/// Scalar observable on a rectangular `(x, y)` grid; `values[j][i]` belongs to
/// `(x_axis[i], y_axis[j])`. Failed cells hold NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMap {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub values: Vec<Vec<f64>>,
    pub failures: Vec<(usize, usize, String)>,
    /// `(Ω₀/ω, ω/ω_c)` points on the validity guideline `v = VALIDITY_THRESHOLD`.
    pub guideline: Vec<(f64, f64)>,
    pub meta: ScanMeta,
}

impl GridMap {
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.y_axis.values.iter().enumerate().flat_map(move |(j, &y)| {
            self.x_axis.values.iter().enumerate().map(move |(i, &x)| (x, y, self.values[j][i]))
        })
    }
}

/// Points of the curve `(Ω₀/ω)² + (ω/ω_c)² = threshold` over the given field values.
pub fn validity_guideline(fields: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    fields.iter().filter(|&&a| a * a < threshold).map(|&a| (a, (threshold - a * a).sqrt())).collect()
}

/// `Δ|C_final| = | |C|_analytic − |C|_numeric |` over `Ω₀/ω × ω/ω_c`.
pub fn agreement_map(
    fields: &[f64],
    detunings: &[f64],
    cep: f64,
    cycles: f64,
    cfg: &IntegratorConfig,
    pool: &WorkerPool,
) -> GridMap {
    let cells: Vec<(usize, usize)> =
        (0..detunings.len()).flat_map(|j| (0..fields.len()).map(move |i| (j, i))).collect();
    let results = pool.map(&cells, |&(j, i)| -> Result<f64> {
        let (pulse, tls) = SquareCase::new(detunings[j], fields[i], cep, cycles).build(Shape::Square)?;
        let analytic = upper_prob_from_f(analytic_final(&pulse, &tls)?.value).sqrt();
        let numeric = integrate_final(&pulse, &tls, cfg)?.upper_prob.sqrt();
        Ok((analytic - numeric).abs())
    });
    let mut values = vec![vec![f64::NAN; fields.len()]; detunings.len()];
    let mut failures = Vec::new();
    for (&(j, i), r) in cells.iter().zip(results) {
        match r {
            Ok(v) => values[j][i] = v,
            Err(e) => failures.push((j, i, e.to_string())),
        }
    }
    GridMap {
        x_axis: Axis::new("field_ratio", fields.to_vec()),
        y_axis: Axis::new("detuning_ratio", detunings.to_vec()),
        values,
        failures,
        guideline: validity_guideline(fields, VALIDITY_THRESHOLD),
        meta: ScanMeta {
            campaign: "agreement_map".into(),
            shape: Shape::Square,
            cycles,
            cep: Some(cep),
            detuning: None,
            field: None,
            integrator: *cfg,
            notes: vec![format!("guideline drawn at validity metric {VALIDITY_THRESHOLD}")],
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CepSweep {
    pub shape: Shape,
    pub case: SquareCase,
    /// Observable: `Δw_f = (w_f + 1)/2` against `φ`.
    pub records: Vec<SweepRecord>,
    /// Pearson correlation of the analytic and numeric curves, when both exist.
    pub shape_correlation: Option<f64>,
}

impl CepSweep {
    pub fn numeric_curve(&self) -> Vec<(f64, f64)> {
        self.records.iter().filter_map(|r| r.numeric.map(|n| (r.parameter, n))).collect()
    }

    pub fn analytic_curve(&self) -> Vec<(f64, f64)> {
        self.records.iter().filter_map(|r| r.analytic.map(|a| (r.parameter, a))).collect()
    }
}

/// Final-inversion excursion `Δw_f` over a CEP grid. The closed form is only
/// evaluated for square pulses.
pub fn cep_sweep(
    shape: Shape,
    case: &SquareCase,
    ceps: &[f64],
    engines: Engines,
    cfg: &IntegratorConfig,
    pool: &WorkerPool,
) -> CepSweep {
    let use_analytic = engines.analytic() && shape == Shape::Square;
    let records = pool.map(ceps, |&phi| {
        let run = || -> Result<SweepRecord> {
            let (pulse, tls) = SquareCase { cep: phi, ..*case }.build(shape)?;
            let analytic = if use_analytic { Some(final_inversion_analytic(phi, &pulse, &tls)?.delta_w) } else { None };
            let numeric = if engines.numeric() { Some(integrate_final(&pulse, &tls, cfg)?.delta_w()) } else { None };
            Ok(SweepRecord::new(phi, analytic, numeric))
        };
        run().unwrap_or_else(|e| SweepRecord::failed(phi, &e))
    });
    let (a, n): (Vec<f64>, Vec<f64>) = records.iter().filter_map(|r| r.analytic.zip(r.numeric)).unzip();
    let shape_correlation = (a.len() >= 3).then(|| pearson(&a, &n)).flatten();
    CepSweep { shape, case: *case, records, shape_correlation }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSweepCurve {
    pub cep: f64,
    /// Observable: `w_f` against `Ω₀/ω`.
    pub records: Vec<SweepRecord>,
}

/// Final inversion `w_f` against `Ω₀/ω`, one curve per CEP.
#[allow(clippy::too_many_arguments)]
pub fn field_sweep(
    shape: Shape,
    detuning: f64,
    cycles: f64,
    ceps: &[f64],
    fields: &[f64],
    engines: Engines,
    cfg: &IntegratorConfig,
    pool: &WorkerPool,
) -> Vec<FieldSweepCurve> {
    let use_analytic = engines.analytic() && shape == Shape::Square;
    let points: Vec<(f64, f64)> = ceps.iter().flat_map(|&p| fields.iter().map(move |&a| (p, a))).collect();
    let records = pool.map(&points, |&(phi, a)| {
        let run = || -> Result<SweepRecord> {
            let (pulse, tls) = SquareCase::new(detuning, a, phi, cycles).build(shape)?;
            let analytic = if use_analytic { Some(final_inversion_analytic(phi, &pulse, &tls)?.w_f) } else { None };
            let numeric = if engines.numeric() { Some(integrate_final(&pulse, &tls, cfg)?.inversion) } else { None };
            Ok(SweepRecord::new(a, analytic, numeric))
        };
        run().unwrap_or_else(|e| SweepRecord::failed(a, &e))
    });
    let mut it = records.into_iter();
    ceps.iter().map(|&cep| FieldSweepCurve { cep, records: it.by_ref().take(fields.len()).collect() }).collect()
}

/// Field ratios `Ω₀/ω ≤ max_field` where the first factor of `Q` vanishes,
/// i.e. `2Nη²(ω_c/ω) = 2k + 1`. These do not depend on the CEP.
pub fn q_zero_fields(detuning: f64, cycles: u32, max_field: f64) -> Vec<f64> {
    let wc = 1.0 / detuning;
    let mut out = Vec::new();
    for k in 0.. {
        let eta_sq = (2 * k + 1) as f64 / (2.0 * cycles as f64 * wc);
        let a = (eta_sq * (wc * wc - 1.0)).sqrt();
        if a > max_field {
            break;
        }
        out.push(a);
    }
    out
}

/// Interior strict local minima of a sampled curve lying below `ceiling`.
pub fn local_minima(curve: &[(f64, f64)], ceiling: f64) -> Vec<(f64, f64)> {
    curve.windows(3).filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1 && w[1].1 < ceiling).map(|w| w[1]).collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let mean = |v: &[f64]| v[..n].iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Inclusive linear grid of `n` points.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Default CEP grid: 64 intervals over `[0, 2π]`.
pub fn default_cep_grid() -> Vec<f64> {
    linspace(0.0, 2.0 * PI, 65)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use std::time::Instant;

    fn coarse() -> IntegratorConfig {
        IntegratorConfig::fixed(400)
    }

    #[test]
    fn trace_compare_trends() {
        let cfg = IntegratorConfig::default();
        let good = trace_compare(&SquareCase::new(0.3, 0.05, 0.0, 2.0), &cfg).unwrap();
        assert!(good.max_gap < 5e-3);
        assert!(good.warning.is_none());
        let bad = trace_compare(&SquareCase::new(0.9, 0.2, 0.0, 2.0), &cfg).unwrap();
        assert!(bad.max_gap > 10.0 * good.max_gap);
        assert!(bad.warning.is_some());
        assert_eq!(good.times.len(), good.analytic_abs_f.len());
        assert_eq!(good.times.len(), good.numeric_abs_f.len());

        let zero = trace_compare(&SquareCase::new(0.6, 0.0, 0.0, 2.0), &cfg).unwrap();
        assert!(zero.analytic_abs_f.iter().chain(&zero.numeric_abs_f).all(|&v| v == 0.0));
    }

    #[test]
    fn gap_grows_with_field_at_fixed_detuning() {
        let cfg = coarse();
        for r in [0.3, 0.6, 0.9] {
            let gaps: Vec<f64> = [0.05, 0.1, 0.15, 0.2]
                .iter()
                .map(|&a| trace_compare(&SquareCase::new(r, a, 0.0, 2.0), &cfg).unwrap().max_gap)
                .collect();
            assert!(gaps.windows(2).all(|w| w[1] >= w[0]), "{r}: {gaps:?}");
        }
    }

    #[test]
    fn detuning_scan_weak_field_agrees() {
        let pool = WorkerPool::default();
        let grid = linspace(0.1, 0.9, 17);
        let recs = detuning_scan(0.05, &grid, 0.0, 2.0, &coarse(), &pool);
        assert_eq!(recs.len(), grid.len());
        assert!(recs.iter().all(|r| r.difference.unwrap() < 1e-2));
        assert!(recs.iter().zip(&grid).all(|(r, &g)| r.parameter == g));

        let zero = detuning_scan(0.0, &grid, 0.0, 2.0, &coarse(), &pool);
        assert!(zero.iter().all(|r| r.difference == Some(0.0)));
    }

    #[test]
    fn detuning_scan_strong_field_disagreement_grows_toward_resonance() {
        let pool = WorkerPool::default();
        let grid = [0.3, 0.5, 0.7, 0.9];
        let recs = detuning_scan(0.2, &grid, 0.0, 2.0, &coarse(), &pool);
        let d: Vec<f64> = recs.iter().map(|r| r.difference.unwrap()).collect();
        assert!(d[3] > d[0] && d[3] > d[1], "{d:?}");
    }

    #[test]
    fn detuning_scan_records_failures_and_continues() {
        let pool = WorkerPool::default();
        let recs = detuning_scan(0.05, &[0.3, 1.2, 0.6], 0.0, 2.0, &coarse(), &pool);
        assert!(!recs[0].is_failed());
        assert!(recs[1].is_failed());
        assert!(!recs[2].is_failed());
    }

    #[test]
    fn agreement_map_shape_and_zero_field_column() {
        let pool = WorkerPool::new(Some(2)).unwrap();
        let fields = [0.0, 0.05];
        let detunings = [0.3, 0.6];
        let map = agreement_map(&fields, &detunings, 0.0, 2.0, &coarse(), &pool);
        assert_eq!(map.values.len(), 2);
        assert!(map.values.iter().all(|row| row.len() == 2));
        assert!(map.values.iter().all(|row| row[0] == 0.0));
        assert!((map.values[0][1]).abs() < 5e-3);
        assert!(map.failures.is_empty());
        assert_eq!(map.cells().count(), 4);
    }

    #[test]
    fn agreement_map_marks_failed_cells() {
        let pool = WorkerPool::default();
        let map = agreement_map(&[0.05], &[0.3, 1.5], 0.0, 2.0, &coarse(), &pool);
        assert!(map.values[0][0].is_finite());
        assert!(map.values[1][0].is_nan());
        assert_eq!(map.failures.len(), 1);
    }

    #[test]
    fn guideline_points_sit_on_threshold() {
        let g = validity_guideline(&[0.1, 0.2, 0.8], 0.5);
        assert_eq!(g.len(), 2);
        for (a, r) in g {
            assert!((a * a + r * r - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn cep_sweep_square_symmetry_and_minimum() {
        let pool = WorkerPool::default();
        let ceps = default_cep_grid();
        let case = SquareCase::new(0.366, 0.181, 0.0, 2.0);
        let sweep = cep_sweep(Shape::Square, &case, &ceps, Engines::Both, &coarse(), &pool);
        let num = sweep.numeric_curve();
        // φ and φ + π are 32 grid steps apart
        for i in 0..32 {
            assert!((num[i].1 - num[i + 32].1).abs() < 1e-3);
        }
        let (imin, _) = num.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).unwrap();
        let step = ceps[1] - ceps[0];
        let dist = ((num[imin].0 - FRAC_PI_2).rem_euclid(PI)).min(PI - (num[imin].0 - FRAC_PI_2).rem_euclid(PI));
        assert!(dist <= step + 1e-12);
        assert!(sweep.shape_correlation.unwrap() > 0.99);

        // Δw/(1 − Δw) is exactly proportional to cos²φ
        let ana = sweep.analytic_curve();
        let x: Vec<f64> = ana.iter().map(|(p, _)| p.cos().powi(2)).collect();
        let y: Vec<f64> = ana.iter().map(|(_, v)| v / (1.0 - v)).collect();
        let (slope, intercept) = least_squares(&x, &y);
        let resid = x.iter().zip(&y).map(|(x, y)| (slope * x + intercept - y).abs()).fold(0.0, f64::max);
        assert!(resid < 1e-12 && intercept.abs() < 1e-12, "{resid:e} {intercept:e}");
    }

    fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let slope = sxy / sxx;
        (slope, my - slope * mx)
    }

    #[test]
    fn cep_sweep_non_square_is_numeric_only() {
        let pool = WorkerPool::default();
        let ceps = linspace(0.0, PI, 5);
        let case = SquareCase::new(0.366, 0.28, 0.0, 2.0);
        let sweep = cep_sweep(Shape::TopHat, &case, &ceps, Engines::Both, &coarse(), &pool);
        assert!(sweep.records.iter().all(|r| r.analytic.is_none() && r.numeric.is_some()));
        assert!(sweep.shape_correlation.is_none());
        let first = sweep.records[0].numeric.unwrap();
        let last = sweep.records[4].numeric.unwrap();
        assert!((first - last).abs() < 1e-3);
    }

    #[test]
    fn q_zero_positions_shared_by_all_ceps() {
        let pool = WorkerPool::default();
        let zeros = q_zero_fields(0.366, 2, 2.0);
        assert!(!zeros.is_empty());
        let ceps = [0.0, PI / 4.0, FRAC_PI_2 - 0.2];
        let curves = field_sweep(Shape::Square, 0.366, 2.0, &ceps, &zeros, Engines::Analytic, &coarse(), &pool);
        for c in &curves {
            for r in &c.records {
                assert_eq!(r.analytic.unwrap(), -1.0, "cep {} field {}", c.cep, r.parameter);
                assert!(r.numeric.is_none());
            }
        }
    }

    #[test]
    fn field_sweep_layout_and_minima() {
        let pool = WorkerPool::default();
        let fields = linspace(0.05, 1.2, 60);
        let curves = field_sweep(Shape::Square, 0.366, 2.0, &[0.0, 1.0], &fields, Engines::Analytic, &coarse(), &pool);
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[1].cep, 1.0);
        assert!(curves.iter().all(|c| c.records.len() == fields.len()));
        let curve: Vec<(f64, f64)> = curves[0].records.iter().map(|r| (r.parameter, r.analytic.unwrap())).collect();
        assert!(!local_minima(&curve, -0.9).is_empty());
    }

    #[test]
    fn local_minima_and_pearson_helpers() {
        let curve = [(0.0, 1.0), (1.0, -1.0), (2.0, 0.5), (3.0, 0.2), (4.0, 0.9)];
        assert_eq!(local_minima(&curve, 0.0), vec![(1.0, -1.0)]);
        assert_eq!(local_minima(&curve, 1.0).len(), 2);
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn analytic_sweeps_are_much_faster() {
        let pool = WorkerPool::new(Some(1)).unwrap();
        let fields = linspace(0.01, 0.2, 16);
        let cfg = IntegratorConfig::default();
        let start = Instant::now();
        field_sweep(Shape::Square, 0.366, 2.0, &[0.0], &fields, Engines::Analytic, &cfg, &pool);
        let analytic = start.elapsed();
        let start = Instant::now();
        field_sweep(Shape::Square, 0.366, 2.0, &[0.0], &fields, Engines::Numeric, &cfg, &pool);
        let numeric = start.elapsed();
        assert!(numeric > analytic * 100, "{analytic:?} vs {numeric:?}");
    }

    #[test]
    fn parallel_results_match_sequential_bitwise() {
        let grid = linspace(0.2, 0.8, 9);
        let one = detuning_scan(0.1, &grid, 0.3, 2.0, &coarse(), &WorkerPool::new(Some(1)).unwrap());
        let four = detuning_scan(0.1, &grid, 0.3, 2.0, &coarse(), &WorkerPool::new(Some(4)).unwrap());
        assert_eq!(one, four);
        assert!(WorkerPool::new(Some(0)).is_err());
    }
}
