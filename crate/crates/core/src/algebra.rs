//! Constant matrices of the vector-bispinor: gamma matrices, Lorentz generators in
//! the bispinor and vector representations, the cyclic basis change, parity
//! operators, and the spherical gauge rotation.
//!
//! Conventions: metric `diag(+1,-1,-1,-1)`; Weyl-split gamma matrices with
//! `γ⁰ = [[0, I], [I, 0]]` and `γᵏ = [[0, -σₖ], [σₖ, 0]]`; bispinor generators
//! `σ^{ab} = ¼[γ^a, γ^b]`; vector generators `(j^{ab})_k^l = δ^a_k g^{bl} - δ^b_k g^{al}`
//! with `k` the row index.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::matrix::ComplexMatrix;
use crate::report::CheckReport;
use crate::{re, I};

/// Diagonal of the Minkowski metric.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Ordered pair of distinct Lorentz indices labelling a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LorentzIndexPair {
    a: usize,
    b: usize,
}

impl LorentzIndexPair {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a > 3 || b > 3 {
            return domain(format!("Lorentz index out of range in ({a},{b})"));
        }
        if a == b {
            return domain(format!("generator indices must differ, got ({a},{b})"));
        }
        Ok(LorentzIndexPair { a, b })
    }

    pub fn a(self) -> usize {
        self.a
    }

    pub fn b(self) -> usize {
        self.b
    }

    pub fn reversed(self) -> Self {
        LorentzIndexPair {
            a: self.b,
            b: self.a,
        }
    }

    /// All twelve ordered pairs.
    pub fn all() -> impl Iterator<Item = LorentzIndexPair> {
        (0..4).flat_map(|a| {
            (0..4)
                .filter(move |&b| b != a)
                .map(move |b| LorentzIndexPair { a, b })
        })
    }

    pub(crate) const fn fixed(a: usize, b: usize) -> Self {
        LorentzIndexPair { a, b }
    }
}

fn metric(a: usize, b: usize) -> f64 {
    if a == b {
        METRIC[a]
    } else {
        0.0
    }
}

/// Pauli matrix `σ_k`, `k ∈ {1,2,3}`.
pub fn pauli(k: usize) -> Result<ComplexMatrix> {
    let z = re(0.0);
    let o = re(1.0);
    Ok(match k {
        1 => ComplexMatrix::from_rows(&[&[z, o], &[o, z]]),
        2 => ComplexMatrix::from_rows(&[&[z, -I], &[I, z]]),
        3 => ComplexMatrix::from_rows(&[&[o, z], &[z, -o]]),
        _ => return domain(format!("Pauli index must be 1..3, got {k}")),
    })
}

fn pauli_or_identity(k: usize) -> ComplexMatrix {
    if k == 0 {
        ComplexMatrix::identity(2)
    } else {
        pauli(k).expect("index checked by caller")
    }
}

/// Gamma matrix `γ^a` in the Weyl-split representation.
pub fn gamma_matrix(a: usize) -> Result<ComplexMatrix> {
    if a > 3 {
        return domain(format!("gamma index must be 0..3, got {a}"));
    }
    let s = pauli_or_identity(a);
    let upper = if a == 0 { s.clone() } else { -s.clone() };
    let mut g = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            g[(i, j + 2)] = upper[(i, j)];
            g[(i + 2, j)] = s[(i, j)];
        }
    }
    Ok(g)
}

fn gammas() -> [ComplexMatrix; 4] {
    std::array::from_fn(|a| gamma_matrix(a).expect("valid index"))
}

/// Bispinor generator `σ^{ab} = ¼[γ^a, γ^b]`.
pub fn bispinor_generator(pair: LorentzIndexPair) -> ComplexMatrix {
    let ga = gamma_matrix(pair.a).expect("validated pair");
    let gb = gamma_matrix(pair.b).expect("validated pair");
    ga.commutator(&gb).scale_re(0.25)
}

/// Vector generator `(j^{ab})_k^l = δ^a_k g^{bl} - δ^b_k g^{al}` (row `k`, column `l`).
pub fn vector_generator(pair: LorentzIndexPair) -> ComplexMatrix {
    let (a, b) = (pair.a, pair.b);
    ComplexMatrix::from_fn(4, 4, |k, l| {
        let d = |x: usize| if x == k { 1.0 } else { 0.0 };
        re(d(a) * metric(b, l) - d(b) * metric(a, l))
    })
}

/// The cyclic basis change `Ψ̃ = U Ψ` on the vector index.
pub fn cyclic_transform() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    let z = re(0.0);
    ComplexMatrix::from_rows(&[
        &[re(1.0), z, z, z],
        &[z, re(-s), I * s, z],
        &[z, z, z, re(1.0)],
        &[z, re(s), I * s, z],
    ])
}

/// The inverse cyclic transform written out entrywise.
pub fn cyclic_transform_inverse() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    let z = re(0.0);
    ComplexMatrix::from_rows(&[
        &[re(1.0), z, z, z],
        &[z, re(-s), z, re(s)],
        &[z, -I * s, z, -I * s],
        &[z, z, re(1.0), z],
    ])
}

/// `U j^{ab} U⁻¹`.
pub fn tilde_generator(pair: LorentzIndexPair) -> ComplexMatrix {
    let u = cyclic_transform();
    &(&u * &vector_generator(pair)) * &cyclic_transform_inverse()
}

const SPIN_PAIRS: [(usize, usize); 3] = [(2, 3), (3, 1), (1, 2)];

fn spin_pair(k: usize) -> Result<LorentzIndexPair> {
    if !(1..=3).contains(&k) {
        return domain(format!("spin component must be 1..3, got {k}"));
    }
    let (a, b) = SPIN_PAIRS[k - 1];
    Ok(LorentzIndexPair::fixed(a, b))
}

/// Cartesian spin-1 block `T_k = i j^{lm}` with `(k,l,m)` cyclic.
pub fn vector_spin(k: usize) -> Result<ComplexMatrix> {
    Ok(vector_generator(spin_pair(k)?).scale(I))
}

/// Cyclic-basis spin block `T̃_k = i U j^{lm} U⁻¹`.
pub fn tilde_spin(k: usize) -> Result<ComplexMatrix> {
    Ok(tilde_generator(spin_pair(k)?).scale(I))
}

/// Total spin `S_k = ½ Σ_k ⊗ I + I ⊗ T_k` on the 16-dimensional vector-bispinor,
/// with `Σ_k = diag(σ_k, σ_k)`.
pub fn spin_matrix(k: usize) -> Result<ComplexMatrix> {
    let sigma = ComplexMatrix::identity(2).kron(&pauli(k)?);
    let i4 = ComplexMatrix::identity(4);
    Ok(&sigma.kron(&i4).scale_re(0.5) + &i4.kron(&vector_spin(k)?))
}

/// `S̃₃ = ½ σ₃ ⊗ I + I ⊗ T̃₃` on one 2-spinor half of the cyclic-basis field (8×8).
pub fn tilde_spin3_half() -> ComplexMatrix {
    let s3 = pauli(3).expect("valid");
    &s3.kron(&ComplexMatrix::identity(4)).scale_re(0.5)
        + &ComplexMatrix::identity(2).kron(&tilde_spin(3).expect("valid"))
}

/// Matrices as printed next to the cyclic generators, kept for comparison.
pub mod printed {
    use super::*;

    /// `T̃¹`.
    pub fn tilde_t1() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .scale_re(FRAC_1_SQRT_2)
    }

    /// `T̃²` with the garbled `(2,3)` slot read as the literal `0`.
    pub fn tilde_t2_literal() -> ComplexMatrix {
        let z = re(0.0);
        ComplexMatrix::from_rows(&[&[z, z, z, z], &[z, z, -I, z], &[z, I, z, z], &[z, z, I, z]])
            .scale_re(FRAC_1_SQRT_2)
    }

    /// `T̃²` with the garbled `(2,3)` slot read as `-i`.
    pub fn tilde_t2_resolved() -> ComplexMatrix {
        let mut m = tilde_t2_literal();
        m[(2, 3)] = -I * FRAC_1_SQRT_2;
        m
    }

    /// `T̃³`.
    pub fn tilde_t3() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[re(0.0), re(1.0), re(0.0), re(-1.0)])
    }

    /// The real matrix printed under the label `iJ̃⁰³`.
    pub fn labelled_tilde_j03() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 2)] = re(-1.0);
        m[(2, 0)] = re(-1.0);
        m
    }

    /// Cartesian spin `S₃` as printed.
    pub fn spin3() -> ComplexMatrix {
        let half =
            ComplexMatrix::from_diagonal(&[re(1.0), re(-1.0), re(1.0), re(-1.0)]).scale_re(0.5);
        let z = re(0.0);
        let t = ComplexMatrix::from_rows(&[
            &[z, z, z, z],
            &[z, z, -I, z],
            &[z, I, z, z],
            &[z, z, z, z],
        ]);
        &half.kron(&ComplexMatrix::identity(4)) + &ComplexMatrix::identity(4).kron(&t)
    }

    /// Cartesian vector parity as printed, with a zero time-time entry.
    pub fn cartesian_vector_parity() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[re(0.0), re(-1.0), re(-1.0), re(-1.0)])
    }
}

/// Cartesian vector parity with unit time-time entry.
pub fn cartesian_vector_parity() -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[re(1.0), re(-1.0), re(-1.0), re(-1.0)])
}

/// Parity operators in the spherical cyclic basis.
#[derive(Clone, Debug)]
pub struct ParityOperators {
    /// Bispinor part `Π`.
    pub bispinor: ComplexMatrix,
    /// Vector part `Π̃`.
    pub vector: ComplexMatrix,
    /// `Π ⊗ Π̃`.
    pub combined: ComplexMatrix,
}

pub fn parity_operators() -> ParityOperators {
    let mut bispinor = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        bispinor[(i, 3 - i)] = re(-1.0);
    }
    let vector = ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
    ]);
    let combined = bispinor.kron(&vector);
    ParityOperators {
        bispinor,
        vector,
        combined,
    }
}

/// Real rotation `O(θ,φ)` taking Cartesian to spherical frame axes `(θ, φ, r)`.
pub fn frame_rotation(theta: f64, phi: f64) -> ComplexMatrix {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    ComplexMatrix::from_real_rows(&[
        &[ct * cp, ct * sp, -st],
        &[-sp, cp, 0.0],
        &[st * cp, st * sp, ct],
    ])
}

/// Spinor rotation `U₂(θ,φ)`.
pub fn spinor_rotation(theta: f64, phi: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let ep = Complex64::from_polar(1.0, phi / 2.0);
    let em = ep.conj();
    ComplexMatrix::from_rows(&[&[ep * c, em * s], &[-ep * s, em * c]])
}

/// Gauge rotation from the Cartesian to the spherical tetrad.
#[derive(Clone, Debug)]
pub struct SchrodingerRotation {
    pub matrix: ComplexMatrix,
    /// Closed-form inverse `blockdiag(U₂†,U₂†) ⊗ blockdiag(1, Oᵀ)`.
    pub inverse: ComplexMatrix,
    /// Set when `θ` sits on a pole of the spherical frame.
    pub singular_frame: bool,
}

fn vector_rotation(theta: f64, phi: f64) -> ComplexMatrix {
    ComplexMatrix::block_diagonal(&[&ComplexMatrix::identity(1), &frame_rotation(theta, phi)])
}

pub fn schrodinger_rotation(theta: f64, phi: f64) -> Result<SchrodingerRotation> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) || !phi.is_finite() {
        return domain(format!(
            "rotation angles out of range: theta = {theta}, phi = {phi}"
        ));
    }
    let u2 = spinor_rotation(theta, phi);
    let spin = ComplexMatrix::block_diagonal(&[&u2, &u2]);
    let spin_inv = spin.adjoint();
    let vec = vector_rotation(theta, phi);
    let vec_inv = vec.transpose();
    let singular_frame = theta == 0.0 || theta == std::f64::consts::PI;
    Ok(SchrodingerRotation {
        matrix: spin.kron(&vec),
        inverse: spin_inv.kron(&vec_inv),
        singular_frame,
    })
}

/// Vector parity in the cyclic spherical basis induced by a Cartesian one:
/// `U V(θ,φ) Π V(π−θ, φ+π)⁻¹ U⁻¹` with `V = blockdiag(1, O)`.
pub fn induced_vector_parity(cartesian: &ComplexMatrix, theta: f64, phi: f64) -> ComplexMatrix {
    let here = vector_rotation(theta, phi);
    let there = vector_rotation(std::f64::consts::PI - theta, phi + std::f64::consts::PI);
    let u = cyclic_transform();
    let ui = cyclic_transform_inverse();
    &(&(&(&u * &here) * cartesian) * &there.transpose()) * &ui
}

/// Which placement of `sin φ` and `cos φ` to test in the conjugated momentum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentumForm {
    /// `J₁ = l₁ + S₃ cos φ / sin θ`, `J₂ = l₂ + S₃ sin φ / sin θ`.
    Derived,
    /// `J₁ = l₁ + S₃ sin φ / sin θ`, `J₂ = l₂ + S₃ cos φ / sin θ`.
    Printed,
}

/// Smooth 16-component test section used for the momentum conjugation check.
fn test_section(theta: f64, phi: f64) -> Vec<Complex64> {
    (0..16)
        .map(|k| {
            let kf = k as f64;
            Complex64::from_polar(1.0 + 0.1 * kf, (kf - 7.0) * phi * 0.5)
                * ((0.3 + 0.1 * kf) * theta).cos()
                + re((kf * 0.37 + theta * phi).sin())
        })
        .collect()
}

type Section<'a> = dyn Fn(f64, f64) -> Vec<Complex64> + 'a;

/// Orbital angular momentum `l_k = -i r × ∇` applied to a section by central differences.
fn orbital(k: usize, f: &Section<'_>, theta: f64, phi: f64, h: f64) -> Vec<Complex64> {
    let dth: Vec<Complex64> = f(theta + h, phi)
        .iter()
        .zip(f(theta - h, phi))
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    let dph: Vec<Complex64> = f(theta, phi + h)
        .iter()
        .zip(f(theta, phi - h))
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    let cot = theta.cos() / theta.sin();
    let (sp, cp) = phi.sin_cos();
    dth.iter()
        .zip(&dph)
        .map(|(&t, &p)| match k {
            1 => I * (t * sp + p * cot * cp),
            2 => I * (-t * cp + p * cot * sp),
            _ => -I * p,
        })
        .collect()
}

/// Max residual of `S (l_k + S_k) S⁻¹ F = (l_k + extra_k) F` on a smooth test
/// section at one point, for `k = 1, 2, 3`.
pub fn momentum_conjugation_residuals(
    theta: f64,
    phi: f64,
    form: MomentumForm,
) -> Result<[f64; 3]> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return domain(format!("theta must be interior, got {theta}"));
    }
    let h = 1e-5;
    let s3 = spin_matrix(3)?;
    let rot = schrodinger_rotation(theta, phi)?;
    let f = |t: f64, p: f64| test_section(t, p);
    let pulled = |t: f64, p: f64| {
        let r = schrodinger_rotation(t, p).expect("interior");
        r.inverse.apply_slice(&test_section(t, p))
    };
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let k = k + 1;
        let sk = spin_matrix(k)?;
        let mut inner = orbital(k, &pulled, theta, phi, h);
        let spin_part = sk.apply_slice(&pulled(theta, phi));
        for (a, b) in inner.iter_mut().zip(spin_part) {
            *a += b;
        }
        let lhs = rot.matrix.apply_slice(&inner);

        let (sp, cp) = phi.sin_cos();
        let st = theta.sin();
        let coeff = match (k, form) {
            (1, MomentumForm::Derived) | (2, MomentumForm::Printed) => cp / st,
            (2, MomentumForm::Derived) | (1, MomentumForm::Printed) => sp / st,
            _ => 0.0,
        };
        let mut rhs = orbital(k, &f, theta, phi, h);
        let extra = s3.scale_re(coeff).apply_slice(&f(theta, phi));
        for (a, b) in rhs.iter_mut().zip(extra) {
            *a += b;
        }
        *slot = lhs
            .iter()
            .zip(&rhs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    }
    Ok(out)
}

fn lorentz_residual(gen: &dyn Fn(LorentzIndexPair) -> ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for p in LorentzIndexPair::all() {
        for q in LorentzIndexPair::all() {
            let (a, b, c, d) = (p.a, p.b, q.a, q.b);
            let lhs = gen(p).commutator(&gen(q));
            let mut rhs = ComplexMatrix::zeros(lhs.nrows(), lhs.ncols());
            let mut add = |coef: f64, x: usize, y: usize| {
                if coef != 0.0 && x != y {
                    rhs += &gen(LorentzIndexPair::fixed(x, y)).scale_re(coef);
                }
            };
            add(metric(a, d), b, c);
            add(metric(b, c), a, d);
            add(-metric(a, c), b, d);
            add(-metric(b, d), a, c);
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
    }
    worst
}

/// Full algebra identity suite.
pub fn verify_suite() -> CheckReport {
    const EXACT: f64 = 1e-15;
    const PRODUCT: f64 = 1e-13;
    let mut rep = CheckReport::new();
    let g = gammas();
    let i4 = ComplexMatrix::identity(4);

    let mut clifford: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let target = i4.scale_re(2.0 * metric(a, b));
            clifford = clifford.max(g[a].anticommutator(&g[b]).max_abs_diff(&target));
        }
    }
    rep.push("clifford anticommutators", clifford, PRODUCT);

    let sig = |a, b| bispinor_generator(LorentzIndexPair::fixed(a, b));
    let id1 = &(&g[1] * &sig(3, 1)) + &(&g[2] * &sig(3, 2));
    rep.push(
        "gamma1 sigma31 + gamma2 sigma32 = gamma3",
        id1.max_abs_diff(&g[3]),
        PRODUCT,
    );
    let id2 = &g[0] * &sig(0, 3);
    rep.push(
        "gamma0 sigma03 = gamma3 / 2",
        id2.max_abs_diff(&g[3].scale_re(0.5)),
        PRODUCT,
    );

    rep.push(
        "lorentz algebra (bispinor)",
        lorentz_residual(&bispinor_generator),
        PRODUCT,
    );
    rep.push(
        "lorentz algebra (vector)",
        lorentz_residual(&vector_generator),
        PRODUCT,
    );
    rep.push(
        "lorentz algebra (cyclic vector)",
        lorentz_residual(&tilde_generator),
        PRODUCT,
    );

    let mut antisym: f64 = 0.0;
    for p in LorentzIndexPair::all() {
        antisym = antisym.max((&vector_generator(p) + &vector_generator(p.reversed())).max_abs());
        antisym =
            antisym.max((&bispinor_generator(p) + &bispinor_generator(p.reversed())).max_abs());
    }
    rep.push("generator antisymmetry", antisym, EXACT);

    let u = cyclic_transform();
    let ui = cyclic_transform_inverse();
    rep.push(
        "U U^dagger = I",
        (&u * &u.adjoint()).max_abs_diff(&i4),
        PRODUCT,
    );
    rep.push(
        "printed inverse equals U^dagger",
        ui.max_abs_diff(&u.adjoint()),
        EXACT,
    );
    rep.push("U^-1 U = I", (&ui * &u).max_abs_diff(&i4), PRODUCT);

    let t = |k| tilde_spin(k).expect("valid");
    rep.push(
        "cyclic T1 matches printed",
        t(1).max_abs_diff(&printed::tilde_t1()),
        PRODUCT,
    );
    rep.push(
        "cyclic T2 matches printed (resolved slot)",
        t(2).max_abs_diff(&printed::tilde_t2_resolved()),
        PRODUCT,
    );
    rep.push(
        "cyclic T3 matches printed",
        t(3).max_abs_diff(&printed::tilde_t3()),
        PRODUCT,
    );
    let j03 = tilde_generator(LorentzIndexPair::fixed(0, 3));
    rep.push(
        "cyclic j03 matches printed matrix",
        j03.max_abs_diff(&printed::labelled_tilde_j03()),
        PRODUCT,
    );
    rep.push(
        "Cartesian S3 matches printed",
        spin_matrix(3)
            .expect("valid")
            .max_abs_diff(&printed::spin3()),
        PRODUCT,
    );
    let s3t = tilde_spin3_half();
    let off_diag = ComplexMatrix::from_fn(8, 8, |i, j| if i == j { re(0.0) } else { s3t[(i, j)] });
    rep.push("cyclic S3 is diagonal", off_diag.max_abs(), EXACT);

    let par = parity_operators();
    rep.push(
        "parity involution",
        (&par.combined * &par.combined).max_abs_diff(&ComplexMatrix::identity(16)),
        EXACT,
    );
    let mut induced: f64 = 0.0;
    for &(th, ph) in &[(0.4, 0.3), (1.2, 2.0), (2.5, -1.0)] {
        induced = induced.max(
            induced_vector_parity(&cartesian_vector_parity(), th, ph).max_abs_diff(&par.vector),
        );
    }
    rep.push(
        "cyclic vector parity induced from Cartesian",
        induced,
        PRODUCT,
    );

    let mut rot: f64 = 0.0;
    for &(th, ph) in &[(0.3, 0.1), (1.1, 2.9), (2.8, -0.7)] {
        let o = frame_rotation(th, ph);
        rot = rot.max((&o * &o.transpose()).max_abs_diff(&ComplexMatrix::identity(3)));
        let s = schrodinger_rotation(th, ph).expect("interior");
        let numeric = s.matrix.inverse().expect("invertible");
        rot = rot.max(numeric.max_abs_diff(&s.inverse));
    }
    rep.push("gauge rotation orthogonality and inverse", rot, 1e-12);

    let mut conj: f64 = 0.0;
    for n in 0..20 {
        let th = 0.25 + 2.6 * (n as f64 + 0.5) / 20.0;
        let ph = -3.0 + 0.31 * n as f64;
        let r = momentum_conjugation_residuals(th, ph, MomentumForm::Derived).expect("interior");
        conj = conj.max(r.iter().cloned().fold(0.0, f64::max));
    }
    rep.push("conjugated total momentum", conj, 1e-6);
    rep
}
