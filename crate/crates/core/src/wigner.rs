//! Half-integer Wigner functions `D_σ(θ,φ) = e^{imφ} d^j_{-m,σ}(θ)` and the
//! raising/lowering relations that close the angular reduction.
//!
//! `d^j_{m'm}` follows the standard explicit sum
//! `Σ_k (-1)^{k-m+m'} √((j+m')!(j-m')!(j+m)!(j-m)!) / ((j+m-k)! k! (j-k-m')! (k-m+m')!)
//!  · cos^{2j-2k+m-m'}(θ/2) sin^{2k-m+m'}(θ/2)`.
//! With this convention all eight relations hold exactly as used by the ansatz.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::halfint::HalfInt;
use crate::report::CheckReport;
use crate::I;

const MAX_FACTORIAL: usize = 170;

fn factorial(n: i32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut v = vec![1.0; MAX_FACTORIAL + 1];
        for k in 1..=MAX_FACTORIAL {
            v[k] = v[k - 1] * k as f64;
        }
        v
    });
    t[n as usize]
}

/// Coefficients of the raising/lowering relations for a given `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngularCoefficients {
    pub j: HalfInt,
    /// `j + 1/2`.
    pub a: f64,
    /// `√((j-1/2)(j+3/2))`.
    pub b: f64,
    /// `√((j-3/2)(j+5/2))`, zero below `j = 5/2` where it multiplies `D_{±5/2} ≡ 0`.
    pub c: f64,
}

impl AngularCoefficients {
    pub fn new(j: HalfInt) -> Result<Self> {
        check_j(j)?;
        let jv = j.value();
        let c = if j.twice() >= 5 {
            ((jv - 1.5) * (jv + 2.5)).sqrt()
        } else {
            0.0
        };
        Ok(AngularCoefficients {
            j,
            a: jv + 0.5,
            b: ((jv - 0.5) * (jv + 1.5)).sqrt(),
            c,
        })
    }

    /// `√((j+σ)(j-σ+1))`, the coefficient linking `D_σ` to `D_{σ-1}`.
    pub fn lowering(&self, sigma: HalfInt) -> f64 {
        let (j, s) = (self.j.value(), sigma.value());
        let x = (j + s) * (j - s + 1.0);
        if x <= 0.0 {
            0.0
        } else {
            x.sqrt()
        }
    }
}

fn check_j(j: HalfInt) -> Result<()> {
    if !j.is_half_odd() || j.twice() < 1 {
        return domain(format!("j must be a positive odd multiple of 1/2, got {j}"));
    }
    if j.twice() > 81 {
        return domain(format!("j = {j} exceeds the supported range"));
    }
    Ok(())
}

/// Validated `(j, m, σ)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WignerLabel {
    pub j: HalfInt,
    pub m: HalfInt,
    pub sigma: HalfInt,
}

impl WignerLabel {
    pub fn new(j: HalfInt, m: HalfInt, sigma: HalfInt) -> Result<Self> {
        check_j(j)?;
        check_m(j, m)?;
        if !sigma.is_half_odd() || sigma.twice().abs() > 3 || sigma.twice().abs() > j.twice() {
            return domain(format!("sigma = {sigma} is not admissible for j = {j}"));
        }
        Ok(WignerLabel { j, m, sigma })
    }
}

fn check_m(j: HalfInt, m: HalfInt) -> Result<()> {
    if !m.is_half_odd() || m.twice().abs() > j.twice() {
        return domain(format!("m = {m} is not admissible for j = {j}"));
    }
    Ok(())
}

/// Small Wigner function `d^j_{m'm}(θ)` and its θ-derivative; zero outside the
/// admissible range. Arguments are twice the half-integer values.
pub fn small_d(j2: i32, mp2: i32, m2: i32, theta: f64) -> (f64, f64) {
    if mp2.abs() > j2 || m2.abs() > j2 || (j2 - mp2) % 2 != 0 || (j2 - m2) % 2 != 0 {
        return (0.0, 0.0);
    }
    // All factorial arguments are integers; work with doubled values halved exactly.
    let jpm = (j2 + mp2) / 2;
    let jmm = (j2 - mp2) / 2;
    let jp = (j2 + m2) / 2;
    let jm = (j2 - m2) / 2;
    let diff = (mp2 - m2) / 2;
    let pref = (factorial(jpm) * factorial(jmm) * factorial(jp) * factorial(jm)).sqrt();
    let (s, c) = (theta / 2.0).sin_cos();
    let (mut val, mut der) = (0.0, 0.0);
    for k in 0..=j2 {
        let (a1, a3, a4) = (jp - k, jmm - k, k + diff);
        if a1 < 0 || a3 < 0 || a4 < 0 {
            continue;
        }
        let sign = if (k + diff).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        let coef = sign * pref / (factorial(a1) * factorial(k) * factorial(a3) * factorial(a4));
        let p = j2 - 2 * k - diff;
        let q = 2 * k + diff;
        val += coef * c.powi(p) * s.powi(q);
        let mut d = 0.0;
        if p > 0 {
            d -= p as f64 * c.powi(p - 1) * s.powi(q + 1);
        }
        if q > 0 {
            d += q as f64 * c.powi(p + 1) * s.powi(q - 1);
        }
        der += coef * 0.5 * d;
    }
    (val, der)
}

/// A `D_σ` value together with its angular derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DValue {
    pub value: Complex64,
    pub d_theta: Complex64,
    pub d_phi: Complex64,
}

/// `D_σ` for `(j, m)` with derivatives; identically zero when `|σ| > j`.
pub fn d_function(j: HalfInt, m: HalfInt, sigma: HalfInt, theta: f64, phi: f64) -> DValue {
    let (v, d) = small_d(j.twice(), -m.twice(), sigma.twice(), theta);
    let e = Complex64::from_polar(1.0, m.value() * phi);
    DValue {
        value: e * v,
        d_theta: e * d,
        d_phi: I * m.value() * e * v,
    }
}

/// `D_σ(θ,φ) = e^{imφ} d^j_{-m,σ}(θ)`.
pub fn wigner_d(label: WignerLabel, theta: f64, phi: f64) -> Result<Complex64> {
    if !(0.0..=PI).contains(&theta) {
        return domain(format!("theta must lie in [0, pi], got {theta}"));
    }
    Ok(d_function(label.j, label.m, label.sigma, theta, phi).value)
}

/// Kind of raising/lowering relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// `∂_θ D_σ = ½(A D_{σ-1} - B D_{σ+1})`.
    Derivative,
    /// `(i∂_φ - σ cos θ)/sin θ · D_σ = ½(-A D_{σ-1} - B D_{σ+1})`.
    Mixed,
}

/// One of the eight relations for `σ ∈ {±1/2, ±3/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub sigma: HalfInt,
    pub kind: RelationKind,
}

impl Relation {
    pub fn all() -> [Relation; 8] {
        let mut out = [Relation {
            sigma: HalfInt::from_twice(1),
            kind: RelationKind::Derivative,
        }; 8];
        let mut n = 0;
        for s2 in [1, -1, 3, -3] {
            for kind in [RelationKind::Derivative, RelationKind::Mixed] {
                out[n] = Relation {
                    sigma: HalfInt::from_twice(s2),
                    kind,
                };
                n += 1;
            }
        }
        out
    }

    pub fn name(&self) -> String {
        let k = match self.kind {
            RelationKind::Derivative => "d_theta",
            RelationKind::Mixed => "mixed",
        };
        format!("{k} D[{}]", self.sigma)
    }

    /// Coefficient pair `(A, B)` of `D_{σ-1}` and `D_{σ+1}`.
    pub fn coefficients(&self, ac: &AngularCoefficients) -> (f64, f64) {
        match self.sigma.twice() {
            1 => (ac.a, ac.b),
            -1 => (ac.b, ac.a),
            3 => (ac.b, ac.c),
            _ => (ac.c, ac.b),
        }
    }

    /// Residual of the relation given values and derivatives of the needed D's,
    /// indexed by `(σ+5/2)` in steps of one.
    fn residual(
        &self,
        ac: &AngularCoefficients,
        d: &[DValue; 6],
        theta: f64,
        coeffs: (f64, f64),
    ) -> Complex64 {
        let idx = |s2: i32| ((s2 + 5) / 2) as usize;
        let s2 = self.sigma.twice();
        let (lo, hi) = (d[idx(s2 - 2)].value, d[idx(s2 + 2)].value);
        let here = d[idx(s2)];
        let (a, b) = coeffs;
        let _ = ac;
        match self.kind {
            RelationKind::Derivative => here.d_theta - 0.5 * (a * lo - b * hi),
            RelationKind::Mixed => {
                (I * here.d_phi - self.sigma.value() * theta.cos() * here.value) / theta.sin()
                    - 0.5 * (-a * lo - b * hi)
            }
        }
    }
}

/// Residuals of one relation over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceRow {
    pub relation: String,
    pub sigma: HalfInt,
    pub kind: RelationKind,
    /// Max residual with analytic derivatives.
    pub analytic: f64,
    /// Max residual with central-difference derivatives.
    pub finite_difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceTable {
    pub j: HalfInt,
    pub m: HalfInt,
    pub rows: Vec<RecurrenceRow>,
    /// Max gap between analytic and central-difference angular derivatives.
    pub derivative_agreement: f64,
}

impl RecurrenceTable {
    pub fn max_analytic(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.analytic))
    }
}

/// `n` interior points `(k + ½)π/n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| (k as f64 + 0.5) * PI / n as f64).collect()
}

/// Central-difference step for the derivative cross-check.
pub const FD_STEP: f64 = 1e-6;
const RECURRENCE_PHI: f64 = 0.7;

fn sample_six(j: HalfInt, m: HalfInt, theta: f64, phi: f64) -> [DValue; 6] {
    std::array::from_fn(|i| d_function(j, m, HalfInt::from_twice(2 * i as i32 - 5), theta, phi))
}

fn sample_six_fd(j: HalfInt, m: HalfInt, theta: f64, phi: f64) -> [DValue; 6] {
    let h = FD_STEP;
    std::array::from_fn(|i| {
        let s = HalfInt::from_twice(2 * i as i32 - 5);
        let at = |t: f64, p: f64| d_function(j, m, s, t, p).value;
        DValue {
            value: at(theta, phi),
            d_theta: (at(theta + h, phi) - at(theta - h, phi)) / (2.0 * h),
            d_phi: (at(theta, phi + h) - at(theta, phi - h)) / (2.0 * h),
        }
    })
}

/// Which coefficient to use where the mixed `σ = +3/2` relation is ambiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientReading {
    /// `c` multiplies `D_{+5/2}`, following the pattern of the other relations.
    Patterned,
    /// `b` multiplies `D_{+5/2}` as in the printed line.
    Printed,
}

fn relation_coefficients(
    rel: &Relation,
    ac: &AngularCoefficients,
    reading: CoefficientReading,
) -> (f64, f64) {
    let (a, b) = rel.coefficients(ac);
    if reading == CoefficientReading::Printed
        && rel.kind == RelationKind::Mixed
        && rel.sigma.twice() == 3
    {
        (a, ac.b)
    } else {
        (a, b)
    }
}

/// Residuals of all eight relations for `(j, m)` on an interior grid.
pub fn recurrence_residuals(j: HalfInt, m: HalfInt, grid: &[f64]) -> Result<RecurrenceTable> {
    recurrence_residuals_with(j, m, grid, CoefficientReading::Patterned)
}

pub fn recurrence_residuals_with(
    j: HalfInt,
    m: HalfInt,
    grid: &[f64],
    reading: CoefficientReading,
) -> Result<RecurrenceTable> {
    let ac = AngularCoefficients::new(j)?;
    check_m(j, m)?;
    if grid.iter().any(|&t| !(t > 0.0 && t < PI)) {
        return domain("theta grid must lie strictly inside (0, pi)");
    }
    let rels = Relation::all();
    let mut analytic = [0.0f64; 8];
    let mut fd = [0.0f64; 8];
    let mut agreement: f64 = 0.0;
    for &theta in grid {
        let exact = sample_six(j, m, theta, RECURRENCE_PHI);
        let approx = sample_six_fd(j, m, theta, RECURRENCE_PHI);
        for (e, a) in exact.iter().zip(&approx) {
            agreement = agreement
                .max((e.d_theta - a.d_theta).norm())
                .max((e.d_phi - a.d_phi).norm());
        }
        for (k, rel) in rels.iter().enumerate() {
            let co = relation_coefficients(rel, &ac, reading);
            analytic[k] = analytic[k].max(rel.residual(&ac, &exact, theta, co).norm());
            fd[k] = fd[k].max(rel.residual(&ac, &approx, theta, co).norm());
        }
    }
    let rows = rels
        .iter()
        .enumerate()
        .map(|(k, rel)| RecurrenceRow {
            relation: rel.name(),
            sigma: rel.sigma,
            kind: rel.kind,
            analytic: analytic[k],
            finite_difference: fd[k],
        })
        .collect();
    Ok(RecurrenceTable {
        j,
        m,
        rows,
        derivative_agreement: agreement,
    })
}

/// `∫₀^π d^{j}_{-m,σ} d^{j'}_{-m,σ} sin θ dθ` by composite Simpson quadrature.
pub fn overlap(j: HalfInt, jp: HalfInt, m: HalfInt, sigma: HalfInt, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = PI / n as f64;
    let f = |t: f64| {
        small_d(j.twice(), -m.twice(), sigma.twice(), t).0
            * small_d(jp.twice(), -m.twice(), sigma.twice(), t).0
            * t.sin()
    };
    let mut s = f(0.0) + f(PI);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

/// Recurrence checks for every admissible `m` of each `j` on an `n`-point grid.
pub fn verify_suite(js: &[HalfInt], points: usize) -> Result<CheckReport> {
    const TOL: f64 = 1e-9;
    let grid = theta_grid(points);
    let mut rep = CheckReport::new();
    for &j in js {
        for m2 in (-j.twice()..=j.twice()).step_by(2) {
            let m = HalfInt::from_twice(m2);
            let table = recurrence_residuals(j, m, &grid)?;
            for row in &table.rows {
                rep.push(format!("j={j} m={m} {}", row.relation), row.analytic, TOL);
            }
            rep.push(
                format!("j={j} m={m} angular derivative vs differences"),
                table.derivative_agreement,
                1e-6,
            );
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn coefficients() {
        let c = AngularCoefficients::new(h(1)).unwrap();
        assert_eq!((c.a, c.b, c.c), (1.0, 0.0, 0.0));
        let c = AngularCoefficients::new(h(5)).unwrap();
        assert_eq!(c.a, 3.0);
        assert!((c.b - (2.0f64 * 4.0).sqrt()).abs() < 1e-15);
        assert!((c.c - (1.0f64 * 5.0).sqrt()).abs() < 1e-15);
        assert!(AngularCoefficients::new(h(2)).is_err());
        assert!(AngularCoefficients::new(h(-1)).is_err());
    }

    #[test]
    fn label_validation() {
        assert!(WignerLabel::new(h(1), h(1), h(3)).is_err());
        assert!(WignerLabel::new(h(3), h(5), h(1)).is_err());
        assert!(WignerLabel::new(h(3), h(2), h(1)).is_err());
        assert!(WignerLabel::new(h(3), h(-3), h(3)).is_ok());
    }

    #[test]
    fn identity_at_zero_angle() {
        for j2 in [1, 3, 5] {
            for mp in (-j2..=j2).step_by(2) {
                for m in (-j2..=j2).step_by(2) {
                    let v = small_d(j2, mp, m, 0.0).0;
                    assert!((v - if mp == m { 1.0 } else { 0.0 }).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn spin_half_matches_spinor_rotation() {
        let t = 1.1;
        assert!((small_d(1, 1, 1, t).0 - (t / 2.0).cos()).abs() < 1e-15);
        let u2 = crate::algebra::spinor_rotation(t, 0.0);
        assert!((u2[(0, 0)].re - small_d(1, 1, 1, t).0).abs() < 1e-15);
    }

    #[test]
    fn rows_are_unit_vectors() {
        for j2 in [1, 3, 5, 7, 9] {
            for m in (-j2..=j2).step_by(2) {
                let t = 0.37 + 0.1 * j2 as f64;
                let s: f64 = (-j2..=j2)
                    .step_by(2)
                    .map(|sg| small_d(j2, -m, sg, t).0.powi(2))
                    .sum();
                assert!((s - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn spin_half_derivative_relation() {
        let t = recurrence_residuals(h(1), h(1), &theta_grid(100)).unwrap();
        assert!(t.rows[0].analytic < 1e-10);
        assert!(t.max_analytic() < 1e-10);
    }

    #[test]
    fn five_halves_all_relations() {
        let t = recurrence_residuals(h(5), h(1), &theta_grid(100)).unwrap();
        assert!(t.max_analytic() < 1e-9, "{:?}", t.rows);
        assert!(t.derivative_agreement < 1e-6);
    }

    #[test]
    fn printed_b_coefficient_fails_from_five_halves() {
        let t = recurrence_residuals_with(h(5), h(1), &theta_grid(50), CoefficientReading::Printed)
            .unwrap();
        let row = t
            .rows
            .iter()
            .find(|r| r.sigma.twice() == 3 && r.kind == RelationKind::Mixed)
            .unwrap();
        assert!(row.analytic > 1e-3);
        // the two readings agree when D_{5/2} vanishes
        let t = recurrence_residuals_with(h(3), h(1), &theta_grid(50), CoefficientReading::Printed)
            .unwrap();
        assert!(t.max_analytic() < 1e-12);
    }

    #[test]
    fn grid_touching_pole_rejected() {
        assert!(recurrence_residuals(h(1), h(1), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn orthogonality() {
        for ja in [1, 3, 5] {
            for jb in [1, 3, 5] {
                let v = overlap(h(ja), h(jb), h(1), h(1), 2000);
                let expect = if ja == jb {
                    2.0 / (ja as f64 + 1.0)
                } else {
                    0.0
                };
                assert!((v - expect).abs() < 1e-6 * expect.max(1.0), "{ja} {jb} {v}");
            }
        }
    }
}
