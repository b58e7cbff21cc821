//! Radial first-order systems in `ω` (`r = sin ω`): the full 16-equation system,
//! the parity-reduced 8-equation system, their constraint rows, and numerical
//! cross-checks against the angular reduction.
//!
//! Each equation is kept in the form
//! `ε/cos ω · x ± i x' + Σ c_k(ω) y_k = M z`
//! and rearranged to `x' = A(ω) X`. Reduced states are `Y = (f₀..f₃, g₀..g₃)`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::ansatz::{
    apply_separated_operator, assemble, divergence_derivative_rows, divergence_value_terms,
    is_active, slot, slot_functions, AnsatzState, Block, DivergenceForm, ModeLabel, RadialData,
    SLOTS,
};
use crate::error::{domain, Error, Result};
use crate::geometry::RadialPoint;
use crate::halfint::{HalfInt, Parity};
use crate::matrix::ComplexMatrix;
use crate::profile::{Endpoint, Profile, TermMatrix};
use crate::wigner::d_function;
use crate::{re, I};

/// Dimension of the reduced system.
pub const REDUCED: usize = 8;

fn f(l: usize) -> usize {
    slot(Block::F, l)
}
fn g(l: usize) -> usize {
    slot(Block::G, l)
}
fn h(l: usize) -> usize {
    slot(Block::H, l)
}
fn nu(l: usize) -> usize {
    slot(Block::Nu, l)
}

/// Sign in front of `i x'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Plus,
    Minus,
}

/// One radial equation `ε/cos ω · x ± i x' + Σ coef · profile · y = M z`.
struct Equation {
    target: usize,
    side: Side,
    couplings: Vec<(usize, Complex64, Profile)>,
    mass_partner: usize,
}

fn eq(
    target: usize,
    side: Side,
    couplings: Vec<(usize, Complex64, Profile)>,
    mass_partner: usize,
) -> Equation {
    Equation {
        target,
        side,
        couplings,
        mass_partner,
    }
}

/// Rearranges equations into `x' = Σ terms`; for `+`: `x' = iε/cos · x + i Σ c y - i M z`,
/// for `-`: `x' = -iε/cos · x - i Σ c y + i M z`.
fn to_terms(eqs: &[Equation], dim: usize, energy: Complex64, mass: f64) -> TermMatrix {
    let mut t = TermMatrix::new(dim, dim);
    for e in eqs {
        let s = match e.side {
            Side::Plus => I,
            Side::Minus => -I,
        };
        t.add(e.target, e.target, s * energy, Profile::Sec);
        for &(col, coef, prof) in &e.couplings {
            t.add(e.target, col, s * coef, prof);
        }
        t.add(e.target, e.mass_partner, -s * mass, Profile::One);
    }
    t
}

/// Which transcription of the two disputed couplings to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transcription {
    /// Couplings as produced by the angular reduction.
    Adopted,
    /// The `a/sin ω` term of the `f₀` equation couples to `g₃` (radius-form listing).
    F0PartnerG3,
    /// The `√2/tan ω` term of the `g₂` equation couples to `f₂` (ω-form listing).
    G2PartnerF2,
}

fn upper_equations(
    a: f64,
    b: f64,
    tr: Transcription,
    partner: &dyn Fn(usize) -> usize,
) -> Vec<Equation> {
    use Profile::*;
    use Side::*;
    let r2 = SQRT_2;
    let f0_partner = if tr == Transcription::F0PartnerG3 {
        g(3)
    } else {
        g(0)
    };
    let g2_partner = if tr == Transcription::G2PartnerF2 {
        f(2)
    } else {
        f(3)
    };
    vec![
        eq(
            f(0),
            Plus,
            vec![(f(2), I, Tan), (f0_partner, I * a, Csc)],
            partner(f(0)),
        ),
        eq(
            g(0),
            Minus,
            vec![(g(2), I, Tan), (f(0), -I * a, Csc)],
            partner(g(0)),
        ),
        eq(f(1), Plus, vec![(g(1), I * b, Csc)], partner(f(1))),
        eq(
            g(1),
            Minus,
            vec![(f(2), -I * r2, Cot), (f(1), -I * b, Csc)],
            partner(g(1)),
        ),
        eq(
            f(2),
            Plus,
            vec![(f(0), I, Tan), (g(1), I * r2, Cot), (g(2), I * a, Csc)],
            partner(f(2)),
        ),
        eq(
            g(2),
            Minus,
            vec![
                (g(0), I, Tan),
                (g2_partner, -I * r2, Cot),
                (f(2), -I * a, Csc),
            ],
            partner(g(2)),
        ),
        eq(
            f(3),
            Plus,
            vec![(g(2), I * r2, Cot), (g(3), I * b, Csc)],
            partner(f(3)),
        ),
        eq(g(3), Minus, vec![(f(3), -I * b, Csc)], partner(g(3))),
    ]
}

fn lower_equations(a: f64, b: f64) -> Vec<Equation> {
    use Profile::*;
    use Side::*;
    let r2 = SQRT_2;
    vec![
        eq(nu(0), Plus, vec![(nu(2), I, Tan), (h(0), I * a, Csc)], g(0)),
        eq(
            h(0),
            Minus,
            vec![(h(2), I, Tan), (nu(0), -I * a, Csc)],
            f(0),
        ),
        eq(nu(3), Plus, vec![(h(3), I * b, Csc)], g(3)),
        eq(
            h(3),
            Minus,
            vec![(nu(2), -I * r2, Cot), (nu(3), -I * b, Csc)],
            f(3),
        ),
        eq(
            nu(2),
            Plus,
            vec![(nu(0), I, Tan), (h(3), I * r2, Cot), (h(2), I * a, Csc)],
            g(2),
        ),
        eq(
            h(2),
            Minus,
            vec![(h(0), I, Tan), (nu(1), -I * r2, Cot), (nu(2), -I * a, Csc)],
            f(2),
        ),
        eq(
            nu(1),
            Plus,
            vec![(h(2), I * r2, Cot), (h(1), I * b, Csc)],
            g(1),
        ),
        eq(h(1), Minus, vec![(nu(1), -I * b, Csc)], f(1)),
    ]
}

fn active_16(j: HalfInt) -> Vec<usize> {
    (0..SLOTS).filter(|&k| is_active(j, k)).collect()
}

/// Active coordinates of the reduced state (`f₁, g₃` drop out at `j = 1/2`).
pub fn reduced_active(j: HalfInt) -> Vec<usize> {
    (0..REDUCED).filter(|&k| is_active(j, k)).collect()
}

/// Term list of the 16-equation system; rows and columns of slots absent at
/// `j = 1/2` are dropped.
pub fn a16_terms(mode: &ModeLabel, tr: Transcription) -> TermMatrix {
    let ac = mode.coefficients();
    let upper_partner = |k: usize| k + 8;
    let mut eqs = upper_equations(ac.a, ac.b, tr, &upper_partner);
    eqs.extend(lower_equations(ac.a, ac.b));
    let mut t = to_terms(&eqs, SLOTS, mode.energy, mode.mass);
    t.restrict(&active_16(mode.j));
    t
}

fn check_omega(w: f64) -> Result<()> {
    RadialPoint::from_omega(w).map(|_| ())
}

/// `A16(ω)` with `X' = A16 X`.
pub fn build_a16(mode: &ModeLabel, omega: f64) -> Result<ComplexMatrix> {
    build_a16_transcribed(mode, omega, Transcription::Adopted)
}

pub fn build_a16_transcribed(
    mode: &ModeLabel,
    omega: f64,
    tr: Transcription,
) -> Result<ComplexMatrix> {
    check_omega(omega)?;
    Ok(a16_terms(mode, tr).value(omega))
}

/// Embedding `P_δ`: `Y ↦ X` with `ν₀ = δf₀, ν₁ = δf₃, ν₂ = δf₂, ν₃ = δf₁,
/// h₀ = δg₀, h₁ = δg₃, h₂ = δg₂, h₃ = δg₁`.
pub fn parity_embed(parity: Parity) -> ComplexMatrix {
    let d = re(parity.sign());
    let mut p = ComplexMatrix::zeros(SLOTS, REDUCED);
    for k in 0..REDUCED {
        p[(k, k)] = re(1.0);
    }
    for (row, col) in [
        (nu(0), f(0)),
        (nu(1), f(3)),
        (nu(2), f(2)),
        (nu(3), f(1)),
        (h(0), g(0)),
        (h(1), g(3)),
        (h(2), g(2)),
        (h(3), g(1)),
    ] {
        p[(row, col)] = d;
    }
    p
}

/// Term list of the reduced system with effective mass `δM`.
pub fn a8_terms(mode: &ModeLabel, parity: Parity) -> TermMatrix {
    let ac = mode.coefficients();
    // the mass partner of each upper equation after the parity substitution
    let partner = |k: usize| match k {
        0 => g(0),
        1 => g(3),
        2 => g(2),
        3 => g(1),
        4 => f(0),
        5 => f(3),
        6 => f(2),
        _ => f(1),
    };
    let eqs = upper_equations(ac.a, ac.b, Transcription::Adopted, &partner);
    let mut t = to_terms(&eqs, REDUCED, mode.energy, parity.sign() * mode.mass);
    t.restrict(&reduced_active(mode.j));
    t
}

/// `A8(ω; δ)` with `Y' = A8 Y`.
pub fn build_a8(mode: &ModeLabel, parity: Parity, omega: f64) -> Result<ComplexMatrix> {
    check_omega(omega)?;
    Ok(a8_terms(mode, parity).value(omega))
}

/// `dA8/dω`.
pub fn build_a8_derivative(mode: &ModeLabel, parity: Parity, omega: f64) -> Result<ComplexMatrix> {
    check_omega(omega)?;
    Ok(a8_terms(mode, parity).derivative(omega))
}

/// Coefficient matrix re-derived from the covariant operator.
#[derive(Clone, Debug)]
pub struct AngularAssembly {
    pub matrix: ComplexMatrix,
    /// Largest relative projection leakage out of the `D_σ` slots.
    pub leakage: f64,
}

/// Sample angles for slot projection.
const PROJECTION_ANGLES: [(f64, f64); 6] = [
    (0.37, 0.2),
    (0.81, 1.3),
    (1.22, 2.9),
    (1.67, 4.1),
    (2.13, 5.3),
    (2.71, 0.7),
];

/// Leakage bound for the projection onto `D_σ` slots.
pub const LEAKAGE_TOLERANCE: f64 = 1e-9;

/// Applies the separated covariant operator to each unit amplitude and to each
/// unit derivative, projects the result back onto the `D_σ` slots and solves for
/// the derivatives: `A = -G⁻¹ B` on the active slots.
pub fn assemble_from_angular(mode: &ModeLabel, omega: f64) -> Result<AngularAssembly> {
    check_omega(omega)?;
    let active = active_16(mode.j);
    let funcs: Vec<_> = PROJECTION_ANGLES
        .iter()
        .map(|&(t, p)| slot_functions(mode, t, p))
        .collect();
    let mut b = ComplexMatrix::zeros(SLOTS, SLOTS);
    let mut gm = ComplexMatrix::zeros(SLOTS, SLOTS);
    let mut leakage: f64 = 0.0;
    for &k in &active {
        for (target, derivative) in [(&mut b, false), (&mut gm, true)] {
            let unit = AnsatzState::unit(k);
            let data = if derivative {
                RadialData {
                    values: AnsatzState::zeros(),
                    derivatives: unit,
                }
            } else {
                RadialData {
                    values: unit,
                    derivatives: AnsatzState::zeros(),
                }
            };
            let outs = PROJECTION_ANGLES
                .iter()
                .map(|&(t, p)| apply_separated_operator(mode, &data, omega, t, p))
                .collect::<Result<Vec<_>>>()?;
            let scale = outs.iter().flatten().fold(1.0f64, |m, z| m.max(z.norm()));
            for row in 0..SLOTS {
                let (mut num, mut den) = (re(0.0), 0.0);
                for (o, fs) in outs.iter().zip(&funcs) {
                    num += fs[row].value.conj() * o[row];
                    den += fs[row].value.norm_sqr();
                }
                let c = if den > 0.0 { num / den } else { re(0.0) };
                for (o, fs) in outs.iter().zip(&funcs) {
                    leakage = leakage.max((o[row] - c * fs[row].value).norm() / scale);
                }
                target[(row, k)] = c;
            }
        }
    }
    if leakage > LEAKAGE_TOLERANCE {
        return Err(Error::Consistency(format!(
            "angular projection leakage {leakage:e} exceeds {LEAKAGE_TOLERANCE:e}"
        )));
    }
    let g_act = gm.select(&active, &active);
    let b_act = b.select(&active, &active);
    let solved = g_act
        .inverse()
        .ok_or_else(|| Error::Consistency("derivative coefficient matrix is singular".into()))?;
    let a_act = (&solved * &b_act).scale_re(-1.0);
    let mut matrix = ComplexMatrix::zeros(SLOTS, SLOTS);
    for (i, &r) in active.iter().enumerate() {
        for (j, &c) in active.iter().enumerate() {
            matrix[(r, c)] = a_act[(i, j)];
        }
    }
    Ok(AngularAssembly { matrix, leakage })
}

/// Entries `(row, col)` where the two transcriptions differ.
pub fn disputed_entries() -> [(usize, usize); 4] {
    [(f(0), g(0)), (f(0), g(3)), (g(2), f(3)), (g(2), f(2))]
}

/// Which divergence rows feed the constraint set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintForm {
    /// Divergence rows from the term-by-term assembly.
    Assembled,
    /// Divergence rows exactly as printed.
    Printed,
}

impl From<ConstraintForm> for DivergenceForm {
    fn from(c: ConstraintForm) -> Self {
        match c {
            ConstraintForm::Assembled => DivergenceForm::Assembled,
            ConstraintForm::Printed => DivergenceForm::Printed,
        }
    }
}

/// Constraint rows of the reduced system: two algebraic trace relations and two
/// divergence relations with `f₂'`, `g₂'` eliminated through `A8`.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    pub mode: ModeLabel,
    pub parity: Parity,
    pub form: ConstraintForm,
    divergence: TermMatrix,
    system: TermMatrix,
    active: Vec<usize>,
}

impl ConstraintSet {
    pub fn new(mode: &ModeLabel, parity: Parity, form: ConstraintForm) -> Self {
        let full = divergence_value_terms(mode, form.into());
        let mut divergence = TermMatrix::new(2, REDUCED);
        for t in full.terms.iter().filter(|t| t.row < 2 && t.col < REDUCED) {
            divergence.add(t.row, t.col, t.coef, t.profile);
        }
        divergence.restrict_cols(&reduced_active(mode.j));
        ConstraintSet {
            mode: *mode,
            parity,
            form,
            divergence,
            system: a8_terms(mode, parity),
            active: reduced_active(mode.j),
        }
    }

    fn algebraic(&self) -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut c = ComplexMatrix::zeros(2, REDUCED);
        // g₁ − (f₂ + f₀)/√2
        c[(0, g(1))] = re(1.0);
        c[(0, f(2))] = re(-s);
        c[(0, f(0))] = re(-s);
        // f₃ − (g₂ − g₀)/√2
        c[(1, f(3))] = re(1.0);
        c[(1, g(2))] = re(-s);
        c[(1, g(0))] = re(s);
        c
    }

    fn stack(&self, alg: ComplexMatrix, diff: ComplexMatrix) -> ComplexMatrix {
        let mut c = ComplexMatrix::zeros(4, REDUCED);
        for col in 0..REDUCED {
            if !self.active.contains(&col) {
                continue;
            }
            for r in 0..2 {
                c[(r, col)] = alg[(r, col)];
                c[(r + 2, col)] = diff[(r, col)];
            }
        }
        c
    }

    fn derivative_selector() -> ComplexMatrix {
        let r1 = divergence_derivative_rows();
        ComplexMatrix::from_fn(2, REDUCED, |i, j| r1[(i, j)])
    }

    /// `C(ω)` (4×8).
    pub fn rows(&self, omega: f64) -> Result<ComplexMatrix> {
        check_omega(omega)?;
        let diff = &self.divergence.value(omega)
            + &(&Self::derivative_selector() * &self.system.value(omega));
        Ok(self.stack(self.algebraic(), diff))
    }

    /// `C'(ω)` by differentiating the closed-form rows.
    pub fn derivative(&self, omega: f64) -> Result<ComplexMatrix> {
        check_omega(omega)?;
        let diff = &self.divergence.derivative(omega)
            + &(&Self::derivative_selector() * &self.system.derivative(omega));
        Ok(self.stack(ComplexMatrix::zeros(2, REDUCED), diff))
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }
}

/// `C(ω)` with the assembled divergence rows.
pub fn constraint_matrix(mode: &ModeLabel, parity: Parity, omega: f64) -> Result<ComplexMatrix> {
    ConstraintSet::new(mode, parity, ConstraintForm::Assembled).rows(omega)
}

/// `|c_i · y| / (‖c_i‖ ‖y‖)` per row; zero rows or states give zero.
pub fn normalized_residuals(c: &ComplexMatrix, y: &[Complex64]) -> Vec<f64> {
    let ny = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (0..c.nrows())
        .map(|i| {
            let (mut dot, mut nc) = (re(0.0), 0.0);
            for (j, yj) in y.iter().enumerate() {
                dot += c[(i, j)] * yj;
                nc += c[(i, j)].norm_sqr();
            }
            let denom = nc.sqrt() * ny;
            if denom > 0.0 {
                dot.norm() / denom
            } else {
                0.0
            }
        })
        .collect()
}

/// Least-squares closure of the constraint flow at one `ω`.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencySample {
    pub omega: f64,
    /// `max|C' + C A8 − Λ C| / max(1, max|C' + C A8|)` for the best `Λ`.
    pub residual: f64,
    /// Numerical rank of `C(ω)`.
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub form: ConstraintForm,
    pub parity: Parity,
    pub samples: Vec<ConsistencySample>,
}

impl ConsistencyReport {
    pub fn max_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.residual))
    }
}

/// Pseudo-inverse based fit `M ≈ Λ C`; returns the residual matrix and rank of `C`.
fn left_fit(m: &ComplexMatrix, c: &ComplexMatrix) -> (ComplexMatrix, usize) {
    let ci = c.inner().clone();
    let svd = ci.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1e-300))
        .count();
    let pinv = svd
        .pseudo_inverse(1e-10 * smax.max(1e-300))
        .unwrap_or_else(|_| DMatrix::zeros(ci.ncols(), ci.nrows()));
    let lambda = m.inner() * &pinv;
    (ComplexMatrix::from_inner(m.inner() - lambda * &ci), rank)
}

/// Measures whether `C' + C A8` lies in the row space of `C` at each sample.
pub fn consistency_check(
    mode: &ModeLabel,
    parity: Parity,
    samples: &[f64],
    form: ConstraintForm,
) -> Result<ConsistencyReport> {
    let set = ConstraintSet::new(mode, parity, form);
    let act = set.active().to_vec();
    let rows: Vec<usize> = (0..4).collect();
    let mut out = Vec::with_capacity(samples.len());
    for &w in samples {
        let c = set.rows(w)?;
        let m = &set.derivative(w)? + &(&c * &build_a8(mode, parity, w)?);
        let (c, m) = (c.select(&rows, &act), m.select(&rows, &act));
        let (resid, rank) = left_fit(&m, &c);
        out.push(ConsistencySample {
            omega: w,
            residual: resid.max_abs() / m.max_abs().max(1.0),
            rank,
        });
    }
    Ok(ConsistencyReport {
        form,
        parity,
        samples: out,
    })
}

/// Eigenvalue of the full inversion (matrix part and `θ → π−θ, φ → φ+π`) on an
/// embedded reduced state, and the residual of the eigen-relation.
pub fn parity_eigenvalue(
    mode: &ModeLabel,
    parity: Parity,
    y: &[Complex64; REDUCED],
    theta: f64,
    phi: f64,
) -> Result<(Complex64, f64)> {
    if !(theta > 0.0 && theta < PI) {
        return domain(format!("theta must be interior, got {theta}"));
    }
    let x = parity_embed(parity).apply_slice(y);
    let state = AnsatzState::new(std::array::from_fn(|k| x[k]));
    let here = assemble(mode, &state, theta, phi)?;
    let there = assemble(mode, &state, PI - theta, phi + PI)?;
    let image = crate::algebra::parity_operators()
        .combined
        .apply_slice(&there);
    let num: Complex64 = here.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = here.iter().map(|a| a.norm_sqr()).sum();
    if den == 0.0 {
        return domain("state vanishes at the sample point");
    }
    let lambda = num / den;
    let resid = here
        .iter()
        .zip(&image)
        .fold(0.0f64, |m, (a, b)| m.max((b - lambda * a).norm()));
    Ok((lambda, resid))
}

/// Expected inversion eigenvalue `δ·e^{iπ(j+1)}`.
pub fn expected_parity_eigenvalue(j: HalfInt, parity: Parity) -> Complex64 {
    Complex64::from_polar(parity.sign(), PI * (j.value() + 1.0))
}

/// `D_σ` helper for callers projecting onto single slots.
pub fn slot_d(mode: &ModeLabel, sigma2: i32, theta: f64, phi: f64) -> Complex64 {
    d_function(mode.j, mode.m, HalfInt::from_twice(sigma2), theta, phi).value
}

/// Residue `lim (ω-ω₀) A8` and regular part read directly off the term list.
pub fn a8_laurent(
    mode: &ModeLabel,
    parity: Parity,
    end: Endpoint,
) -> (ComplexMatrix, ComplexMatrix) {
    let t = a8_terms(mode, parity);
    (t.residue(end), t.regular_part(end))
}

/// Singular points of every radial system.
pub const SINGULAR_POINTS: [Endpoint; 2] = [Endpoint::Origin, Endpoint::Horizon];

/// An immutable radial system `X' = A(ω) X`, either the full 16-dimensional one or
/// the parity-reduced 8-dimensional one.
#[derive(Clone, Debug)]
pub struct RadialSystem {
    pub mode: ModeLabel,
    /// `None` for the full system.
    pub parity: Option<Parity>,
    terms: TermMatrix,
    active: Vec<usize>,
}

impl RadialSystem {
    pub fn reduced(mode: &ModeLabel, parity: Parity) -> Self {
        RadialSystem {
            mode: *mode,
            parity: Some(parity),
            terms: a8_terms(mode, parity),
            active: reduced_active(mode.j),
        }
    }

    pub fn full(mode: &ModeLabel) -> Self {
        RadialSystem {
            mode: *mode,
            parity: None,
            terms: a16_terms(mode, Transcription::Adopted),
            active: active_16(mode.j),
        }
    }

    pub fn dimension(&self) -> usize {
        self.terms.rows
    }

    pub fn terms(&self) -> &TermMatrix {
        &self.terms
    }

    /// Coordinates that carry dynamics; the rest stay identically zero.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn matrix(&self, omega: f64) -> Result<ComplexMatrix> {
        check_omega(omega)?;
        Ok(self.terms.value(omega))
    }

    /// `out = A(ω) y` without building the matrix.
    pub fn apply_into(&self, omega: f64, y: &[Complex64], out: &mut [Complex64]) {
        let (s, c) = omega.sin_cos();
        let vals = [1.0, 1.0 / c, 1.0 / s, s / c, c / s];
        out.iter_mut().for_each(|o| *o = re(0.0));
        for t in &self.terms.terms {
            let p = match t.profile {
                Profile::One => vals[0],
                Profile::Sec => vals[1],
                Profile::Csc => vals[2],
                Profile::Tan => vals[3],
                Profile::Cot => vals[4],
            };
            out[t.row] += t.coef * p * y[t.col];
        }
    }

    /// Constraint rows for the reduced system.
    pub fn constraints(&self, form: ConstraintForm) -> Result<ConstraintSet> {
        match self.parity {
            Some(p) => Ok(ConstraintSet::new(&self.mode, p, form)),
            None => domain("constraint rows are defined for the reduced system only"),
        }
    }
}

/// Orthogonal projection of `y` onto `ker C(ω)` within the active coordinates.
pub fn project_onto_constraints(
    set: &ConstraintSet,
    omega: f64,
    y: &[Complex64; REDUCED],
) -> Result<[Complex64; REDUCED]> {
    let act = set.active().to_vec();
    let rows: Vec<usize> = (0..4).collect();
    let c = set.rows(omega)?.select(&rows, &act);
    let svd = c.inner().clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let ya: Vec<Complex64> = act.iter().map(|&k| y[k]).collect();
    let mut out = ya.clone();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv > 1e-12 * smax {
            let row: Vec<Complex64> = (0..act.len()).map(|j| v_t[(i, j)]).collect();
            let coef: Complex64 = row.iter().zip(&ya).map(|(r, v)| r * v).sum();
            for (o, r) in out.iter_mut().zip(&row) {
                *o -= coef * r.conj();
            }
        }
    }
    let mut full = [re(0.0); REDUCED];
    for (&k, v) in act.iter().zip(out) {
        full[k] = v;
    }
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mode(j2: i32, e: f64, m: f64) -> ModeLabel {
        ModeLabel::simple(HalfInt::from_twice(j2), e, m).unwrap()
    }

    #[test]
    fn f0_diagonal_entry() {
        let md = mode(3, 1.3, 0.7);
        let w = 0.5;
        let a = build_a16(&md, w).unwrap();
        assert!((a[(0, 0)] - I * 1.3 / w.cos()).norm() < 1e-15);
        assert!(build_a16(&md, 0.0).is_err());
    }

    #[test]
    fn massless_blocks_decouple() {
        let a = build_a16(&mode(5, 1.1, 0.0), 0.9).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                if (r < 8) != (c < 8) {
                    assert_eq!(a[(r, c)], re(0.0));
                }
            }
        }
    }

    #[test]
    fn spin_half_forbidden_slots_are_empty() {
        let a = build_a16(&mode(1, 1.3, 0.7), 0.6).unwrap();
        for k in [f(1), g(3), h(1), nu(3)] {
            for c in 0..16 {
                assert_eq!(a[(k, c)], re(0.0));
                assert_eq!(a[(c, k)], re(0.0));
            }
        }
    }

    #[test]
    fn embedding_columns() {
        let p = parity_embed(Parity::Plus);
        let out = p.apply_slice(&[
            re(1.0),
            re(0.0),
            re(0.0),
            re(0.0),
            re(0.0),
            re(0.0),
            re(0.0),
            re(0.0),
        ]);
        for (k, v) in out.iter().enumerate() {
            let expect = if k == f(0) || k == nu(0) { 1.0 } else { 0.0 };
            assert_eq!(*v, re(expect));
        }
        let gram = &p.adjoint() * &p;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(8).scale_re(2.0)) < 1e-15);
        let diff = &parity_embed(Parity::Plus) - &parity_embed(Parity::Minus);
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(diff[(r, c)], re(0.0));
            }
        }
    }

    #[test]
    fn embedded_states_are_parity_eigenvectors() {
        let pp = crate::algebra::parity_operators().combined;
        for parity in Parity::BOTH {
            let p = parity_embed(parity);
            for c in 0..8 {
                let col: Vec<Complex64> = (0..16).map(|r| p[(r, c)]).collect();
                let img = pp.apply_slice(&col);
                for (a, b) in img.iter().zip(&col) {
                    assert!((a + parity.sign() * b).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn reduction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for j2 in [1, 3, 5] {
            for _ in 0..20 {
                let w = rng.random_range(0.05..1.5);
                let md = mode(j2, rng.random_range(-3.0..3.0), rng.random_range(0.0..3.0));
                for parity in Parity::BOTH {
                    let p = parity_embed(parity);
                    let lhs = &build_a16(&md, w).unwrap() * &p;
                    let rhs = &p * &build_a8(&md, parity, w).unwrap();
                    assert!(lhs.max_abs_diff(&rhs) < 1e-13);
                }
                let neg = ModeLabel {
                    mass: -md.mass,
                    ..md
                };
                assert_eq!(
                    build_a8(&md, Parity::Minus, w).unwrap(),
                    build_a8(&neg, Parity::Plus, w).unwrap()
                );
            }
        }
    }

    #[test]
    fn angular_assembly_matches_on_undisputed_entries() {
        for j2 in [1, 3, 5] {
            let md = mode(j2, 1.3, 0.7);
            for &w in &[0.2, 0.6, 1.0, 1.3, 1.5] {
                let ang = assemble_from_angular(&md, w).unwrap();
                let hand = build_a16(&md, w).unwrap();
                assert!(ang.matrix.max_abs_diff(&hand) < 1e-10, "j2 {j2} w {w}");
                for tr in [Transcription::F0PartnerG3, Transcription::G2PartnerF2] {
                    let printed = build_a16_transcribed(&md, w, tr).unwrap();
                    let mut worst: f64 = 0.0;
                    for r in 0..16 {
                        for c in 0..16 {
                            let d = (printed[(r, c)] - ang.matrix[(r, c)]).norm();
                            if disputed_entries().contains(&(r, c)) {
                                worst = worst.max(d);
                            } else {
                                assert!(d < 1e-10);
                            }
                        }
                    }
                    // f₃, g₃ are absent at j = 1/2, so only the partner being dropped shows there
                    assert!(worst > 1e-3, "{tr:?} {j2}");
                }
            }
        }
    }

    #[test]
    fn spin_half_assembly_leaves_forbidden_slots_zero() {
        let ang = assemble_from_angular(&mode(1, 0.4, 1.2), 0.8).unwrap();
        for k in [f(1), g(3), h(1), nu(3)] {
            for c in 0..16 {
                assert_eq!(ang.matrix[(k, c)], re(0.0));
            }
        }
    }

    #[test]
    fn constraint_rows_basic() {
        let md = mode(3, 1.3, 0.7);
        let c = constraint_matrix(&md, Parity::Plus, 0.7).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut y = [re(0.0); 8];
        y[f(0)] = re(0.3);
        y[f(2)] = re(-0.8);
        y[g(1)] = (y[f(0)] + y[f(2)]) * s;
        assert!(c.apply_slice(&y)[0].norm() < 1e-15);
        assert!(c.apply_slice(&[re(0.0); 8]).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn differential_row_matches_substitution() {
        let md = mode(3, 1.3, 0.7);
        let w = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y: Vec<Complex64> = (0..8).map(|_| crate::ansatz::unit_disc(&mut rng)).collect();
        let c = constraint_matrix(&md, Parity::Plus, w).unwrap();
        let dy = build_a8(&md, Parity::Plus, w).unwrap().apply_slice(&y);
        let (r0, r1) = crate::ansatz::divergence_rows(&md, w, DivergenceForm::Assembled).unwrap();
        let x = parity_embed(Parity::Plus).apply_slice(&y);
        let dx = parity_embed(Parity::Plus).apply_slice(&dy);
        let direct = r0.apply_slice(&x)[0] + r1.apply_slice(&dx)[0];
        assert!((c.apply_slice(&y)[2] - direct).norm() < 1e-12);
    }

    #[test]
    fn constraint_derivative_matches_differences() {
        let set = ConstraintSet::new(&mode(3, 1.3, 0.7), Parity::Minus, ConstraintForm::Assembled);
        let (w, hh) = (0.9, 1e-6);
        let fd = (&set.rows(w + hh).unwrap() - &set.rows(w - hh).unwrap()).scale_re(0.5 / hh);
        assert!(fd.max_abs_diff(&set.derivative(w).unwrap()) < 1e-6);
    }

    #[test]
    fn assembled_constraints_are_preserved_by_the_flow() {
        for j2 in [1, 3] {
            for parity in Parity::BOTH {
                for (e, m) in [(1.3, 0.7), (2.0, 0.0), (0.5, 1.5)] {
                    let rep = consistency_check(
                        &mode(j2, e, m),
                        parity,
                        &[0.3, 0.7, 1.2],
                        ConstraintForm::Assembled,
                    )
                    .unwrap();
                    assert!(
                        rep.max_residual() < 1e-12,
                        "{j2} {parity} {e} {m}: {}",
                        rep.max_residual()
                    );
                }
            }
        }
    }

    #[test]
    fn printed_constraints_are_not_preserved() {
        let rep = consistency_check(
            &mode(1, 1.3, 0.7),
            Parity::Plus,
            &[0.3, 0.7, 1.2],
            ConstraintForm::Printed,
        )
        .unwrap();
        assert!(rep.max_residual() > 1e-3);
    }

    #[test]
    fn apply_into_matches_matrix() {
        let md = mode(3, 1.3, 0.7);
        let sys = RadialSystem::reduced(&md, Parity::Minus);
        let y: Vec<Complex64> = (0..8)
            .map(|k| Complex64::new(k as f64, 1.0 - k as f64))
            .collect();
        let mut out = vec![re(0.0); 8];
        sys.apply_into(0.6, &y, &mut out);
        let direct = sys.matrix(0.6).unwrap().apply_slice(&y);
        for (a, b) in out.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-13);
        }
        assert_eq!(RadialSystem::full(&md).dimension(), 16);
        assert!(RadialSystem::full(&md)
            .constraints(ConstraintForm::Assembled)
            .is_err());
    }

    #[test]
    fn projection_lands_in_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for j2 in [1, 3] {
            let md = mode(j2, 1.3, 0.7);
            let set = ConstraintSet::new(&md, Parity::Plus, ConstraintForm::Assembled);
            let mut y: [Complex64; 8] = std::array::from_fn(|_| crate::ansatz::unit_disc(&mut rng));
            for k in 0..8 {
                if !is_active(md.j, k) {
                    y[k] = re(0.0);
                }
            }
            let p = project_onto_constraints(&set, 0.3, &y).unwrap();
            let r = normalized_residuals(&set.rows(0.3).unwrap(), &p);
            assert!(r.iter().all(|&x| x < 1e-13), "{r:?}");
            let again = project_onto_constraints(&set, 0.3, &p).unwrap();
            assert!(p.iter().zip(&again).all(|(a, b)| (a - b).norm() < 1e-13));
        }
    }

    #[test]
    fn full_parity_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for j2 in [1, 3, 5] {
            for parity in Parity::BOTH {
                let md = mode(j2, 1.0, 1.0);
                let mut y: [Complex64; 8] =
                    std::array::from_fn(|_| crate::ansatz::unit_disc(&mut rng));
                for k in 0..8 {
                    if !is_active(md.j, k) {
                        y[k] = re(0.0);
                    }
                }
                let (lam, res) = parity_eigenvalue(&md, parity, &y, 0.8, 0.3).unwrap();
                assert!(res < 1e-13);
                assert!((lam - expected_parity_eigenvalue(md.j, parity)).norm() < 1e-13);
            }
        }
    }
}
