//! Local analysis at the regular singular points `ω = 0` and `ω = π/2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::matrix::ComplexMatrix;
use crate::profile::Endpoint;
use crate::radial::{project_onto_constraints, ConstraintForm, RadialSystem, REDUCED};
use crate::re;

/// First Richardson step away from the endpoint.
pub const RICHARDSON_START: f64 = 0.05;
pub const RICHARDSON_LEVELS: usize = 6;
/// Largest accepted disagreement between the last two extrapolants.
pub const EXTRAPOLATION_TOLERANCE: f64 = 1e-8;
/// Exponents closer than this are treated as one repeated exponent.
const CLUSTER: f64 = 1e-6;

/// One local exponent `λ` with its eigenvectors.
#[derive(Clone, Debug, Serialize)]
pub struct Exponent {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    /// Algebraic multiplicity.
    pub multiplicity: usize,
    /// Orthonormal eigenvectors (full system coordinates); fewer than
    /// `multiplicity` when the residue is defective there.
    #[serde(skip)]
    pub vectors: Vec<Vec<Complex64>>,
    /// `max ‖A₋₁v − λv‖` over the vectors.
    pub residual: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl Exponent {
    pub fn is_defective(&self) -> bool {
        self.vectors.len() < self.multiplicity
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IndicialData {
    pub endpoint: Endpoint,
    /// Extrapolated `lim (ω−ω₀) A(ω)`.
    pub residue: ComplexMatrix,
    /// Constant term of the Laurent expansion, read off the coefficient profiles.
    pub regular_part: ComplexMatrix,
    /// Sorted by real part, ties by imaginary part.
    pub exponents: Vec<Exponent>,
    pub extrapolation_error: f64,
    /// `max |extrapolated − analytic residue|`.
    pub analytic_mismatch: f64,
}

impl IndicialData {
    /// Eigenvectors with `Re λ ≥ 0`.
    pub fn regular_subspace(&self) -> Vec<(Complex64, Vec<Complex64>)> {
        self.exponents
            .iter()
            .filter(|e| e.value.re >= -1e-12)
            .flat_map(|e| e.vectors.iter().map(move |v| (e.value, v.clone())))
            .collect()
    }

    /// All exponents with multiplicity, sorted.
    pub fn exponent_values(&self) -> Vec<Complex64> {
        self.exponents
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect()
    }
}

/// Neville–Richardson extrapolation of `g(s)` to `s = 0` for a function smooth in `s`,
/// on `s = start / 2^k`. Returns the estimate and the last correction size.
pub fn richardson(
    g: impl Fn(f64) -> ComplexMatrix,
    start: f64,
    levels: usize,
) -> (ComplexMatrix, f64) {
    let mut table: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(levels);
    for i in 0..levels {
        let mut row = vec![g(start / 2f64.powi(i as i32))];
        for k in 1..=i {
            let factor = 2f64.powi(k as i32) - 1.0;
            let next = &row[k - 1] + &(&row[k - 1] - &table[i - 1][k - 1]).scale_re(1.0 / factor);
            row.push(next);
        }
        table.push(row);
    }
    let last = &table[levels - 1];
    let err = if levels > 1 {
        last[levels - 1].max_abs_diff(&last[levels - 2])
    } else {
        f64::INFINITY
    };
    (last[levels - 1].clone(), err)
}

/// Nullspace of `m` (columns returned as vectors), threshold relative to `scale`.
pub(crate) fn nullspace(m: &ComplexMatrix, threshold: f64) -> Vec<Vec<Complex64>> {
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut p = ComplexMatrix::zeros(n, n);
        for r in 0..m.nrows() {
            for c in 0..n {
                p[(r, c)] = m[(r, c)];
            }
        }
        p
    } else {
        m.clone()
    };
    let svd = padded.inner().clone().svd(false, true);
    let Some(v_t) = svd.v_t else {
        return Vec::new();
    };
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| (0..n).map(|j| v_t[(i, j)].conj()).collect())
        .collect()
}

fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.inner().clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("no eigenvalues from Schur form".into()))?;
    Ok(ev.iter().cloned().collect())
}

/// Residue, exponents and eigenvectors of `system` at `end`; only active coordinates
/// take part in the eigen-analysis.
pub fn frobenius(system: &RadialSystem, end: Endpoint) -> Result<IndicialData> {
    let e = end.location();
    let inward = end.inward();
    let g = |s: f64| -> ComplexMatrix {
        let w = e + inward * s;
        system.terms().value(w).scale_re(inward * s)
    };
    let (residue, extrapolation_error) = richardson(g, RICHARDSON_START, RICHARDSON_LEVELS);
    if !(extrapolation_error <= EXTRAPOLATION_TOLERANCE) {
        return Err(Error::Numerical(format!(
            "residue extrapolation did not converge ({extrapolation_error:e})"
        )));
    }
    let analytic = system.terms().residue(end);
    let analytic_mismatch = residue.max_abs_diff(&analytic);
    let regular_part = system.terms().regular_part(end);

    let act = system.active().to_vec();
    let r_act = residue.select(&act, &act);
    let mut values = eigenvalues(&r_act)?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let scale = r_act.max_abs().max(1.0);
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for v in values {
        match clusters
            .iter_mut()
            .find(|c| (c[0] - v).norm() < CLUSTER * scale)
        {
            Some(c) => c.push(v),
            None => clusters.push(vec![v]),
        }
    }
    let dim = system.dimension();
    let mut exponents = Vec::with_capacity(clusters.len());
    for c in clusters {
        let lambda = c.iter().sum::<Complex64>() / c.len() as f64;
        let lambda = snap(lambda);
        let shifted = &r_act - &ComplexMatrix::identity(act.len()).scale(lambda);
        let mut vecs = nullspace(&shifted, 1e-7 * scale);
        vecs.truncate(c.len());
        let mut residual: f64 = 0.0;
        let vectors: Vec<Vec<Complex64>> = vecs
            .into_iter()
            .map(|v| {
                let rv = r_act.apply_slice(&v);
                residual = residual.max(
                    rv.iter()
                        .zip(&v)
                        .map(|(a, b)| (a - lambda * b).norm())
                        .fold(0.0, f64::max),
                );
                let mut full = vec![re(0.0); dim];
                for (&k, x) in act.iter().zip(v) {
                    full[k] = x;
                }
                full
            })
            .collect();
        exponents.push(Exponent {
            value: lambda,
            multiplicity: c.len(),
            vectors,
            residual,
        });
    }
    Ok(IndicialData {
        endpoint: end,
        residue,
        regular_part,
        exponents,
        extrapolation_error,
        analytic_mismatch,
    })
}

/// Rounds components lying within `1e-9` of an integer.
fn snap(z: Complex64) -> Complex64 {
    let s = |x: f64| {
        if (x - x.round()).abs() < 1e-9 {
            x.round()
        } else {
            x
        }
    };
    Complex64::new(s(z.re), s(z.im))
}

/// Initial data near an endpoint.
#[derive(Clone, Debug, Serialize)]
pub struct Launch {
    pub omega: f64,
    #[serde(skip)]
    pub state: Vec<Complex64>,
    #[serde(serialize_with = "ser_complex")]
    pub exponent: Complex64,
    /// `λ + 1` is itself an exponent; the correction is a least-squares solution.
    pub resonant: bool,
    /// The leading vector was restricted to the kernel of the algebraic constraint rows
    /// and the truncated series was then projected onto the constraint surface.
    pub constraint_compatible: bool,
    /// Relative size of that projection; zero without `compatible`.
    pub projection_shift: f64,
}

/// Default distance of the launch point from the endpoint.
pub const DEFAULT_OFFSET: f64 = 1e-3;

/// `Y(ω₀) = |ω₀−e|^λ (v + (ω₀−e) w)` with `(A₋₁ − (λ+1)) w = −A₀ v`.
///
/// `index` selects an exponent in sorted order. With `compatible`, `v` is the unit
/// vector in that exponent's eigenspace annihilated by the algebraic constraint rows,
/// and the two-term series, which meets the constraints only to leading order, is
/// projected onto `ker C(ω₀)` so the constraint surface is exact at the start.
pub fn endpoint_launch(
    system: &RadialSystem,
    data: &IndicialData,
    index: usize,
    offset: f64,
    compatible: bool,
) -> Result<Launch> {
    let Some(exp) = data.exponents.get(index) else {
        return domain(format!(
            "exponent index {index} out of range (have {})",
            data.exponents.len()
        ));
    };
    if exp.value.re < -1e-12 {
        return domain(format!("exponent {} is not regular", exp.value));
    }
    if !(offset > 0.0 && offset < 0.5) {
        return domain(format!("launch offset must lie in (0, 0.5), got {offset}"));
    }
    if exp.vectors.is_empty() {
        return Err(Error::Numerical("exponent has no eigenvector".into()));
    }
    let lambda = exp.value;
    let v = if compatible {
        let set = system.constraints(ConstraintForm::Assembled)?;
        let interior = data.endpoint.location() + data.endpoint.inward() * 0.5;
        let rows = set.rows(interior)?;
        let n = system.dimension();
        let basis = ComplexMatrix::from_fn(n, exp.vectors.len(), |r, c| exp.vectors[c][r]);
        let alg = ComplexMatrix::from_fn(2, n, |r, c| rows[(r, c)]);
        let coef = nullspace(&(&alg * &basis), 1e-10);
        let Some(c) = coef.first() else {
            return domain(format!(
                "exponent {lambda} has no constraint-compatible eigenvector"
            ));
        };
        basis.apply_slice(c)
    } else {
        exp.vectors[0].clone()
    };

    let act = system.active().to_vec();
    let n_act = act.len();
    let r_act = data.residue.select(&act, &act);
    let a0 = data.regular_part.select(&act, &act);
    let v_act: Vec<Complex64> = act.iter().map(|&k| v[k]).collect();
    let lhs = &r_act - &ComplexMatrix::identity(n_act).scale(lambda + 1.0);
    let rhs: Vec<Complex64> = a0.apply_slice(&v_act).into_iter().map(|z| -z).collect();
    let resonant = data
        .exponents
        .iter()
        .any(|e| (e.value - (lambda + 1.0)).norm() < 1e-8);
    let w = if resonant {
        let svd = lhs.inner().clone().svd(true, true);
        let tol = 1e-10
            * svd
                .singular_values
                .iter()
                .cloned()
                .fold(0.0, f64::max)
                .max(1.0);
        let b = DMatrix::from_column_slice(n_act, 1, &rhs);
        let x = svd
            .solve(&b, tol)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        x.iter().cloned().collect::<Vec<_>>()
    } else {
        let inv = lhs
            .inverse()
            .ok_or_else(|| Error::Numerical("singular Frobenius correction system".into()))?;
        inv.apply_slice(&rhs)
    };
    let x = data.endpoint.inward() * offset;
    let amp = (lambda * offset.ln()).exp();
    let mut state = vec![re(0.0); system.dimension()];
    for (i, &k) in act.iter().enumerate() {
        state[k] = amp * (v_act[i] + x * w[i]);
    }
    let omega = data.endpoint.location() + x;
    let mut projection_shift = 0.0;
    if compatible {
        let set = system.constraints(ConstraintForm::Assembled)?;
        let y: [Complex64; REDUCED] = std::array::from_fn(|k| state[k]);
        let p = project_onto_constraints(&set, omega, &y)?;
        let norm =
            |v: &mut dyn Iterator<Item = Complex64>| v.map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = norm(&mut y.iter().copied()).max(f64::MIN_POSITIVE);
        projection_shift = norm(&mut y.iter().zip(&p).map(|(a, b)| a - b)) / scale;
        state = p.to_vec();
    }
    Ok(Launch {
        omega,
        state,
        exponent: lambda,
        resonant,
        constraint_compatible: compatible,
        projection_shift,
    })
}
