//! Displacement sweeps of the overlap and concurrence, minima counting, and
//! before/after field maps.

use log::info;
use rayon::prelude::*;

use crate::analysis::{count_phase_singularities, waist_for_correlation_ratio};
use crate::entanglement::{BiphotonScenario, ConcurrenceResult, Encoding, ScenarioRunner};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, TransverseGrid};
use crate::modes::{lg_waist_for_obstacle, ModeSpec};
use crate::obstacle::{apply_obstacle, ObstacleSpec};
use crate::propagator::{edge_intensity_ratio, Propagator};

pub const DEFAULT_RADIUS: f64 = 200e-6;
pub const DEFAULT_WAVELENGTH: f64 = 710e-9;
pub const DEFAULT_KAPPA: f64 = 30e3;
pub const DEFAULT_BG_WAIST: f64 = 1e-3;
pub const DEFAULT_DISTANCE: f64 = 0.05;
/// Radius of the window in which field-map singularities are counted.
pub const DEFAULT_MAP_RADIUS: f64 = 300e-6;

/// Minimum dip depth, in curve units, for a local minimum to be counted.
pub const DEFAULT_PROMINENCE: f64 = 0.005;
pub const DEFAULT_SAMPLES: usize = 51;
pub const DEFAULT_MAX_D_OVER_A: f64 = 2.5;

/// Scenario with the default LG beam: waist from the ring rule.
pub fn default_lg_scenario(l0: u32) -> Result<BiphotonScenario> {
    let waist = lg_waist_for_obstacle(DEFAULT_RADIUS, l0)?;
    Ok(BiphotonScenario::new(Encoding::Lg { waist }, l0, DEFAULT_WAVELENGTH, DEFAULT_RADIUS))
}

/// Scenario with the default BG beam.
pub fn default_bg_scenario(l0: u32) -> BiphotonScenario {
    BiphotonScenario::new(
        Encoding::Bg { waist: DEFAULT_BG_WAIST, k_rho: DEFAULT_KAPPA },
        l0,
        DEFAULT_WAVELENGTH,
        DEFAULT_RADIUS,
    )
}

/// LG scenario whose waist gives the requested `ξ(l0)/a`.
pub fn correlation_scenario(ratio: f64, l0: u32) -> Result<BiphotonScenario> {
    let waist = waist_for_correlation_ratio(ratio, DEFAULT_RADIUS, l0 as i32)?;
    Ok(BiphotonScenario::new(Encoding::Lg { waist }, l0, DEFAULT_WAVELENGTH, DEFAULT_RADIUS))
}

/// A scenario and the `d/a` values at which to evaluate it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    scenario: BiphotonScenario,
    d_over_a: Vec<f64>,
}

impl SweepPlan {
    pub fn new(scenario: BiphotonScenario, d_over_a: Vec<f64>) -> Result<Self> {
        if d_over_a.len() < 2 {
            return Err(Error::param("samples", "a sweep needs at least 2 samples"));
        }
        if d_over_a.iter().any(|v| !v.is_finite()) || d_over_a.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("d_over_a", "samples must be finite and strictly increasing"));
        }
        Ok(Self { scenario, d_over_a })
    }

    /// `samples` evenly spaced values on `[0, max]`.
    pub fn uniform(scenario: BiphotonScenario, max: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::param("samples", "a sweep needs at least 2 samples"));
        }
        let values = (0..samples).map(|i| max * i as f64 / (samples - 1) as f64).collect();
        Self::new(scenario, values)
    }

    pub fn scenario(&self) -> &BiphotonScenario {
        &self.scenario
    }

    pub fn d_over_a(&self) -> &[f64] {
        &self.d_over_a
    }
}

/// A sampled curve with its minima statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub points: Vec<(f64, f64)>,
    pub n_min: usize,
    /// `(d/a, value)` of the smallest sample; earliest on ties.
    pub global_min: (f64, f64),
}

impl CurveSummary {
    pub fn new(points: Vec<(f64, f64)>, prominence: f64) -> Self {
        let values: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n_min = if values.len() >= 3 { count_minima(&values, prominence) } else { 0 };
        let global_min = points.iter().copied().fold((f64::NAN, f64::INFINITY), |m, p| if p.1 < m.1 { p } else { m });
        Self { points, n_min, global_min }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.1.abs()))
    }
}

/// Results of a concurrence sweep, one row per `d/a`.
#[derive(Debug, Clone)]
pub struct ConcurrenceSweep {
    pub rows: Vec<ConcurrenceResult>,
    /// Minima statistics of `C_paper`.
    pub summary: CurveSummary,
    /// `|b(+d) - b(-d)|` at the mid-sweep displacement.
    pub mirror_residual: f64,
}

fn evaluate<T, F>(plan: &SweepPlan, runner: &ScenarioRunner, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&ScenarioRunner, f64) -> Result<T> + Sync,
{
    let a = plan.scenario.radius;
    let results: Vec<Result<T>> = plan
        .d_over_a
        .par_iter()
        .map(|&x| f(runner, x * a).map_err(|e| Error::AtSample { d_over_a: x, source: Box::new(e) }))
        .collect();
    // report the first failure in sweep order, independent of scheduling
    results.into_iter().collect()
}

fn mirror_residual(plan: &SweepPlan, runner: &ScenarioRunner) -> Result<f64> {
    let x = plan.d_over_a[plan.d_over_a.len() / 2];
    runner
        .mirror_check(x * plan.scenario.radius)
        .map(|(residual, _)| residual)
        .map_err(|e| Error::AtSample { d_over_a: x, source: Box::new(e) })
}

/// `b(d/a)` over the plan. Extremum statistics use [`count_extrema`].
pub fn sweep_overlap(plan: &SweepPlan, grid: &TransverseGrid) -> Result<CurveSummary> {
    let runner = ScenarioRunner::new(plan.scenario, grid)?;
    mirror_residual(plan, &runner)?;
    let bs = evaluate(plan, &runner, |r, d| r.overlap(d))?;
    info!("overlap sweep: {} samples, l0 = {}", bs.len(), plan.scenario.l0);
    Ok(CurveSummary::new(plan.d_over_a.iter().copied().zip(bs).collect(), 0.0))
}

/// Concurrence (both variants) and purities over the plan. A domain error at any
/// sample aborts the sweep and names that sample.
pub fn sweep_concurrence(plan: &SweepPlan, grid: &TransverseGrid, prominence: f64) -> Result<ConcurrenceSweep> {
    let runner = ScenarioRunner::new(plan.scenario, grid)?;
    let mirror = mirror_residual(plan, &runner)?;
    let rows = evaluate(plan, &runner, |r, d| r.run(d))?;
    info!("concurrence sweep: {} samples, l0 = {}", rows.len(), plan.scenario.l0);
    let summary = CurveSummary::new(rows.iter().map(|r| (r.d_over_a, r.c_paper)).collect(), prominence);
    Ok(ConcurrenceSweep { rows, summary, mirror_residual: mirror })
}

/// Number of interior strict local minima whose prominence is at least `eps`.
///
/// Runs of equal values are merged first. The prominence of a minimum is the
/// lower of the two highest values reached on either side before the curve
/// drops below the minimum (or the ends are reached), minus the minimum.
pub fn count_minima(values: &[f64], eps: f64) -> usize {
    let mut v: Vec<f64> = Vec::with_capacity(values.len());
    for &x in values {
        if v.last() != Some(&x) {
            v.push(x);
        }
    }
    let n = v.len();
    if n < 3 {
        return 0;
    }
    (1..n - 1)
        .filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1])
        .filter(|&i| {
            let left = v[..i].iter().rev().take_while(|&&x| x >= v[i]).fold(f64::MIN, |m, &x| m.max(x));
            let right = v[i + 1..].iter().take_while(|&&x| x >= v[i]).fold(f64::MIN, |m, &x| m.max(x));
            left.min(right) - v[i] >= eps
        })
        .count()
}

/// Minima plus maxima, each filtered with prominence `eps`.
pub fn count_extrema(values: &[f64], eps: f64) -> usize {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    count_minima(values, eps) + count_minima(&negated, eps)
}

/// Field before and after the obstacle, both propagated to `z`.
#[derive(Debug, Clone)]
pub struct FieldMaps {
    pub z: f64,
    pub undiffracted: ScalarField,
    pub diffracted: ScalarField,
    /// `(positive, negative)` vortex charge within the counting radius.
    pub singularities_undiffracted: (usize, usize),
    pub singularities_diffracted: (usize, usize),
    pub edge_ratio: f64,
}

/// Propagates a mode to `z` with and without the obstacle and counts vortices
/// within `radius` of the axis.
pub fn field_maps(mode: &ModeSpec, obstacle: Option<&ObstacleSpec>, z: f64, grid: &TransverseGrid, radius: f64) -> Result<FieldMaps> {
    grid.check_covers_waist(mode.waist())?;
    let u = mode.generate(grid)?;
    let psi = match obstacle {
        Some(o) => apply_obstacle(&u, o)?.field,
        None => u.clone(),
    };
    let prop = Propagator::new(grid);
    let undiffracted = prop.propagate(&u, z)?;
    let diffracted = prop.propagate(&psi, z)?;
    Ok(FieldMaps {
        z,
        singularities_undiffracted: count_phase_singularities(&undiffracted, radius)?,
        singularities_diffracted: count_phase_singularities(&diffracted, radius)?,
        edge_ratio: edge_intensity_ratio(&diffracted).max(edge_intensity_ratio(&undiffracted)),
        undiffracted,
        diffracted,
    })
}
