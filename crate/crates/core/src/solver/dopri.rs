//! Dormand–Prince 5(4) with PI step-size control and continuous output.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::re;

const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Step-control settings; the error test uses `atol + rtol·max(|y₀|, |y₁|)` per component.
#[derive(Clone, Debug, Serialize)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub max_step: f64,
    pub initial_step: Option<f64>,
}

impl Options {
    pub fn new(tol: f64) -> Self {
        Options {
            rtol: tol,
            atol: tol,
            max_steps: 200_000,
            max_step: f64::INFINITY,
            initial_step: None,
        }
    }
}

/// An accepted step.
#[derive(Clone, Debug)]
pub struct Step {
    pub t: f64,
    pub y: Vec<Complex64>,
    /// Size of the step that produced this point (0 for the initial point).
    pub h: f64,
    /// Scaled local error estimate of that step (≤ 1 when accepted).
    pub err: f64,
}

/// Quartic interpolant over one accepted step.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    coeffs: [Vec<Complex64>; 5],
}

impl DenseSegment {
    pub fn contains(&self, t: f64) -> bool {
        let s = (t - self.t0) / self.h;
        (-1e-12..=1.0 + 1e-12).contains(&s)
    }

    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        (0..r1.len())
            .map(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub steps: Vec<Step>,
    pub segments: Vec<DenseSegment>,
    pub rejected: usize,
    pub evaluations: usize,
}

fn axpy(y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])], out: &mut [Complex64]) {
    for i in 0..y.len() {
        let mut acc = re(0.0);
        for (c, k) in terms {
            acc += *c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn scaled_norm(v: &[Complex64], y0: &[Complex64], y1: &[Complex64], opts: &Options) -> f64 {
    let n = v.len().max(1) as f64;
    let sum: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / sk).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y0: &[Complex64], opts: &Options) -> Result<Outcome>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }
    if opts.rtol <= 10.0 * f64::EPSILON {
        return Err(Error::Numerical(format!(
            "relative tolerance {:e} is below what double precision can deliver",
            opts.rtol
        )));
    }
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let hmax = opts.max_step.min(span);
    let mut out = Outcome {
        steps: vec![Step {
            t: t0,
            y: y0.to_vec(),
            h: 0.0,
            err: 0.0,
        }],
        segments: Vec::new(),
        rejected: 0,
        evaluations: 0,
    };
    if span == 0.0 {
        return Ok(out);
    }

    let mut k: Vec<Vec<Complex64>> = vec![vec![re(0.0); n]; 7];
    let mut ytmp = vec![re(0.0); n];
    let mut y1 = vec![re(0.0); n];
    let mut y = y0.to_vec();
    let mut t = t0;
    f(t, &y, &mut k[0]);
    out.evaluations += 1;
    if !finite(&k[0]) {
        return Err(Error::Singularity { omega: t });
    }

    let mut h = match opts.initial_step {
        Some(h) => h.abs().min(hmax),
        None => {
            let h = initial_step(&mut f, t, &y, &k[0], dir, hmax, opts);
            out.evaluations += 1;
            h
        }
    } * dir;

    let expo = 0.2 - BETA * 0.75;
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut accepted = 0usize;

    loop {
        if accepted + out.rejected >= opts.max_steps {
            return Err(Error::Numerical(format!(
                "step limit {} reached at omega = {t}",
                opts.max_steps
            )));
        }
        if 0.1 * h.abs() <= t.abs() * f64::EPSILON {
            return Err(Error::Singularity { omega: t });
        }
        let last = (t + 1.01 * h - t1) * dir >= 0.0;
        if last {
            h = t1 - t;
        }

        {
            let (k1, rest) = k.split_at_mut(1);
            axpy(&y, h, &[(A21, &k1[0])], &mut ytmp);
            f(t + C[0] * h, &ytmp, &mut rest[0]);
        }
        stage(&mut f, &mut k, &y, &mut ytmp, t, h, 2, &A3, C[1]);
        stage(&mut f, &mut k, &y, &mut ytmp, t, h, 3, &A4, C[2]);
        stage(&mut f, &mut k, &y, &mut ytmp, t, h, 4, &A5, C[3]);
        stage(&mut f, &mut k, &y, &mut ytmp, t, h, 5, &A6, C[4]);
        {
            let terms: Vec<(f64, &[Complex64])> =
                A7.iter().zip(&k).map(|(c, v)| (*c, v.as_slice())).collect();
            axpy(&y, h, &terms, &mut y1);
        }
        let t_new = t + h;
        {
            let (head, tail) = k.split_at_mut(6);
            let _ = head;
            f(t_new, &y1, &mut tail[0]);
        }
        out.evaluations += 6;

        let mut e = vec![re(0.0); n];
        for (i, ei) in e.iter_mut().enumerate() {
            let mut acc = re(0.0);
            for (c, kk) in E.iter().zip(&k) {
                acc += *c * kk[i];
            }
            *ei = h * acc;
        }
        let err = if finite(&y1) && finite(&k[6]) {
            scaled_norm(&e, &y, &y1, opts)
        } else {
            f64::INFINITY
        };

        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let fac =
                (fac11 / err_old.powf(BETA) / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
            let mut h_new = h / fac;
            err_old = err.max(1e-4);

            let ydiff: Vec<Complex64> = y1.iter().zip(&y).map(|(a, b)| a - b).collect();
            let bspl: Vec<Complex64> = (0..n).map(|i| h * k[0][i] - ydiff[i]).collect();
            let r4: Vec<Complex64> = (0..n).map(|i| ydiff[i] - h * k[6][i] - bspl[i]).collect();
            let r5: Vec<Complex64> = (0..n)
                .map(|i| {
                    let mut acc = re(0.0);
                    for (c, kk) in D.iter().zip(&k) {
                        acc += *c * kk[i];
                    }
                    h * acc
                })
                .collect();
            out.segments.push(DenseSegment {
                t0: t,
                h,
                coeffs: [y.clone(), ydiff, bspl, r4, r5],
            });

            let k7 = k[6].clone();
            k[0].copy_from_slice(&k7);
            y.copy_from_slice(&y1);
            t = if last { t1 } else { t_new };
            accepted += 1;
            out.steps.push(Step {
                t,
                y: y.clone(),
                h: h.abs(),
                err,
            });
            if last {
                return Ok(out);
            }
            if h_new.abs() > hmax {
                h_new = hmax * dir;
            }
            if last_rejected {
                h_new = dir * h_new.abs().min(h.abs());
            }
            last_rejected = false;
            h = h_new;
        } else {
            let shrink = if err.is_finite() {
                (fac11 / SAFETY).min(1.0 / MIN_FACTOR)
            } else {
                1.0 / MIN_FACTOR
            };
            h /= shrink;
            last_rejected = true;
            if accepted >= 1 {
                out.rejected += 1;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn stage<F>(
    f: &mut F,
    k: &mut [Vec<Complex64>],
    y: &[Complex64],
    ytmp: &mut [Complex64],
    t: f64,
    h: f64,
    idx: usize,
    a: &[f64],
    c: f64,
) where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let (done, rest) = k.split_at_mut(idx);
    let terms: Vec<(f64, &[Complex64])> = a
        .iter()
        .zip(done.iter())
        .map(|(c, v)| (*c, v.as_slice()))
        .collect();
    axpy(y, h, &terms, ytmp);
    f(t + c * h, ytmp, &mut rest[0]);
}

fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[Complex64],
    f0: &[Complex64],
    dir: f64,
    hmax: f64,
    opts: &Options,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let sk = |z: &Complex64| opts.atol + opts.rtol * z.norm();
    let dnf: f64 = f0
        .iter()
        .zip(y)
        .map(|(a, b)| (a.norm() / sk(b)).powi(2))
        .sum();
    let dny: f64 = y.iter().map(|b| (b.norm() / sk(b)).powi(2)).sum();
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(hmax);
    let y1: Vec<Complex64> = y.iter().zip(f0).map(|(a, b)| a + dir * h * b).collect();
    let mut f1 = vec![re(0.0); y.len()];
    f(t + dir * h, &y1, &mut f1);
    let der2: f64 = f1
        .iter()
        .zip(f0)
        .zip(y)
        .map(|((a, b), c)| ((a - b).norm() / sk(c)).powi(2))
        .sum::<f64>()
        .sqrt()
        / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if !der12.is_finite() {
        h * 1e-3
    } else if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(hmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(_t: f64, y: &[Complex64], out: &mut [Complex64]) {
        out[0] = Complex64::new(0.0, 1.0) * y[0];
        out[1] = -y[1];
    }

    #[test]
    fn exponential_and_oscillation() {
        let o = integrate(
            rotation,
            0.0,
            2.0,
            &[re(1.0), re(1.0)],
            &Options::new(1e-10),
        )
        .unwrap();
        let end = &o.steps.last().unwrap().y;
        assert!((end[0] - Complex64::from_polar(1.0, 2.0)).norm() < 1e-8);
        assert!((end[1] - re((-2.0f64).exp())).norm() < 1e-8);
        assert_eq!(o.steps.last().unwrap().t, 2.0);
        assert!(o.steps.iter().skip(1).all(|s| s.err <= 1.0));
    }

    #[test]
    fn backward_direction() {
        let o = integrate(
            rotation,
            2.0,
            0.5,
            &[re(1.0), re(1.0)],
            &Options::new(1e-10),
        )
        .unwrap();
        let end = &o.steps.last().unwrap().y;
        assert!((end[1] - re(1.5f64.exp())).norm() < 1e-8);
        assert!(o.steps.windows(2).all(|w| w[1].t < w[0].t));
    }

    #[test]
    fn dense_output_is_accurate() {
        let o = integrate(
            rotation,
            0.0,
            3.0,
            &[re(1.0), re(1.0)],
            &Options::new(1e-11),
        )
        .unwrap();
        for seg in &o.segments {
            for s in [0.25, 0.5, 0.8] {
                let t = seg.t0 + s * seg.h;
                assert!(seg.contains(t));
                let v = seg.eval(t);
                assert!((v[0] - Complex64::from_polar(1.0, t)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn order_five() {
        // fixed steps: the global error ratio for halved steps approaches 2^5
        let err = |h: f64| {
            let mut o = Options::new(1.0);
            o.initial_step = Some(h);
            o.max_step = h;
            let out = integrate(rotation, 0.0, 1.0, &[re(1.0), re(1.0)], &o).unwrap();
            (out.steps.last().unwrap().y[1] - re((-1.0f64).exp())).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 24.0 && ratio < 40.0, "{ratio}");
    }

    #[test]
    fn pole_reports_singularity() {
        let pole =
            |t: f64, y: &[Complex64], out: &mut [Complex64]| out[0] = y[0] * y[0] / (1.0 - t);
        let r = integrate(pole, 0.0, 1.0, &[re(1.0)], &Options::new(1e-8));
        assert!(matches!(
            r,
            Err(Error::Singularity { .. }) | Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn unreachable_tolerance() {
        assert!(matches!(
            integrate(
                rotation,
                0.0,
                1.0,
                &[re(1.0), re(0.0)],
                &Options::new(1e-17)
            ),
            Err(Error::Numerical(_))
        ));
    }
}
