//! Integration of the reduced radial system with endpoint analysis and
//! constraint monitoring.

pub mod dopri;
pub mod frobenius;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

pub use frobenius::{endpoint_launch, frobenius, Exponent, IndicialData, Launch, DEFAULT_OFFSET};

use crate::error::{domain, Error, Result};
use crate::radial::{normalized_residuals, ConstraintSet, RadialSystem, REDUCED};

/// One accepted point of a trajectory.
#[derive(Clone, Debug)]
pub struct TraceSample {
    pub omega: f64,
    pub state: [Complex64; REDUCED],
    /// Normalized residuals of the four constraint rows.
    pub residuals: [f64; 4],
    /// Size of the step that reached this point.
    pub step: f64,
    /// Scaled local error estimate of that step.
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct SolutionTrace {
    pub samples: Vec<TraceSample>,
    pub segments: Vec<dopri::DenseSegment>,
    pub rejected: usize,
    pub evaluations: usize,
    pub tolerance: f64,
}

impl SolutionTrace {
    pub fn accepted_steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn last(&self) -> &TraceSample {
        self.samples.last().expect("trace holds the initial sample")
    }

    /// Continuous solution at `omega` from the step interpolants.
    pub fn state_at(&self, omega: f64) -> Option<[Complex64; REDUCED]> {
        let seg = self.segments.iter().find(|s| s.contains(omega))?;
        let v = seg.eval(omega);
        Some(std::array::from_fn(|k| v[k]))
    }

    /// Largest normalized residual of the given rows over the trace.
    pub fn max_residual(&self, rows: std::ops::Range<usize>) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.residuals[rows.clone()].iter().cloned())
            .fold(0.0, f64::max)
    }
}

/// Integrator settings.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Tolerances {
    pub fn new(tolerance: f64) -> Self {
        Tolerances {
            tolerance,
            max_steps: 200_000,
        }
    }
}

/// Integrates `Y' = A8(ω) Y` from `start` to `end`, recording constraint residuals
/// at every accepted step.
pub fn integrate(
    system: &RadialSystem,
    constraints: &ConstraintSet,
    start: f64,
    end: f64,
    initial: &[Complex64; REDUCED],
    tol: &Tolerances,
) -> Result<SolutionTrace> {
    if system.dimension() != REDUCED {
        return domain("integration runs on the reduced system");
    }
    for w in [start, end] {
        if !(w > 0.0 && w < FRAC_PI_2) {
            return domain(format!(
                "integration range must lie inside (0, pi/2), got {w}"
            ));
        }
    }
    if initial
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return domain("initial state is not finite");
    }
    let mut opts = dopri::Options::new(tol.tolerance);
    opts.max_steps = tol.max_steps;
    let out = dopri::integrate(
        |w, y, dy| system.apply_into(w, y, dy),
        start,
        end,
        initial,
        &opts,
    )?;
    let mut samples = Vec::with_capacity(out.steps.len());
    for s in &out.steps {
        let state: [Complex64; REDUCED] = std::array::from_fn(|k| s.y[k]);
        if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singularity { omega: s.t });
        }
        let r = normalized_residuals(&constraints.rows(s.t)?, &state);
        samples.push(TraceSample {
            omega: s.t,
            state,
            residuals: [r[0], r[1], r[2], r[3]],
            step: s.h,
            error: s.err,
        });
    }
    Ok(SolutionTrace {
        samples,
        segments: out.segments,
        rejected: out.rejected,
        evaluations: out.evaluations,
        tolerance: tol.tolerance,
    })
}

/// Effective order from a tolerance sweep: the negated slope of `log(error)` against
/// `log(accepted steps)` by least squares.
pub fn effective_order(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

/// One row of a tolerance sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub tolerance: f64,
    pub steps: usize,
    /// Max deviation at the end point from the reference, relative to its size.
    pub error: f64,
}

/// Integrates at each tolerance and compares end states with a reference run.
pub fn tolerance_sweep(
    system: &RadialSystem,
    constraints: &ConstraintSet,
    start: f64,
    end: f64,
    initial: &[Complex64; REDUCED],
    tolerances: &[f64],
    reference_tolerance: f64,
) -> Result<Vec<SweepPoint>> {
    let reference = integrate(
        system,
        constraints,
        start,
        end,
        initial,
        &Tolerances::new(reference_tolerance),
    )?;
    let yr = reference.last().state;
    let scale = yr
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    tolerances
        .iter()
        .map(|&t| {
            let tr = integrate(
                system,
                constraints,
                start,
                end,
                initial,
                &Tolerances::new(t),
            )?;
            let err = tr
                .last()
                .state
                .iter()
                .zip(&yr)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / scale;
            Ok(SweepPoint {
                tolerance: t,
                steps: tr.accepted_steps(),
                error: err,
            })
        })
        .collect()
}
