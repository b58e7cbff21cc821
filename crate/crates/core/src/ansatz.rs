//! The 16-component spherical-wave substitution and pointwise checks of its
//! operator reductions.
//!
//! Slot `k = 4·b + l` holds the radial amplitude of block `b ∈ {f, g, h, ν}` and
//! cyclic vector index `l ∈ 0..4`. Blocks `f, g` are the two components of the
//! upper 2-spinor `ξ`, blocks `h, ν` those of the lower 2-spinor `η`, so the slot
//! index coincides with the bispinor ⊗ vector component index of `Φ̃`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{
    cyclic_transform_inverse, gamma_matrix, pauli, tilde_generator, tilde_spin, tilde_spin3_half,
    LorentzIndexPair, METRIC,
};
use crate::error::{domain, Result};
use crate::geometry::{connections, tetrad, tetrad_divergences, RadialPoint};
use crate::halfint::HalfInt;
use crate::matrix::ComplexMatrix;
use crate::profile::{Profile, TermMatrix};
use crate::report::CheckReport;
use crate::wigner::{d_function, AngularCoefficients, DValue};
use crate::{re, I};

/// Number of amplitude slots.
pub const SLOTS: usize = 16;

/// Amplitude block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Block {
    F = 0,
    G = 1,
    H = 2,
    Nu = 3,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::F, Block::G, Block::H, Block::Nu];

    pub fn letter(self) -> &'static str {
        match self {
            Block::F => "f",
            Block::G => "g",
            Block::H => "h",
            Block::Nu => "nu",
        }
    }
}

/// Slot index of amplitude `block_l`.
pub const fn slot(block: Block, l: usize) -> usize {
    4 * block as usize + l
}

/// Twice the `D_σ` label carried by each slot.
pub const SLOT_SIGMA2: [i32; SLOTS] = [-1, -3, -1, 1, 1, -1, 1, 3, -1, -3, -1, 1, 1, -1, 1, 3];

pub fn slot_name(k: usize) -> String {
    format!("{}{}", Block::ALL[k / 4].letter(), k % 4)
}

/// Slots whose `D_σ` exists for this `j` (all but `|σ| = 3/2` at `j = 1/2`).
pub fn is_active(j: HalfInt, k: usize) -> bool {
    SLOT_SIGMA2[k].abs() <= j.twice()
}

/// Quantum numbers of a mode without its parity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeLabel {
    pub j: HalfInt,
    pub m: HalfInt,
    /// Dimensionless energy; complex values are allowed for quasi-mode scans.
    pub energy: Complex64,
    /// Dimensionless mass.
    pub mass: f64,
}

impl ModeLabel {
    pub fn new(j: HalfInt, m: HalfInt, energy: Complex64, mass: f64) -> Result<Self> {
        AngularCoefficients::new(j)?;
        if !m.is_half_odd() || m.twice().abs() > j.twice() {
            return domain(format!("m = {m} is not admissible for j = {j}"));
        }
        if !energy.re.is_finite() || !energy.im.is_finite() || !mass.is_finite() {
            return domain("energy and mass must be finite");
        }
        Ok(ModeLabel { j, m, energy, mass })
    }

    /// Mode with `m = 1/2` and real energy.
    pub fn simple(j: HalfInt, energy: f64, mass: f64) -> Result<Self> {
        Self::new(j, HalfInt::from_twice(1), re(energy), mass)
    }

    pub fn coefficients(&self) -> AngularCoefficients {
        AngularCoefficients::new(self.j).expect("validated on construction")
    }

    pub fn active_slots(&self) -> Vec<usize> {
        (0..SLOTS).filter(|&k| is_active(self.j, k)).collect()
    }
}

/// Sixteen radial amplitudes at one `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnsatzState {
    pub amplitudes: [Complex64; SLOTS],
}

impl Default for AnsatzState {
    fn default() -> Self {
        Self::zeros()
    }
}

impl AnsatzState {
    pub fn zeros() -> Self {
        AnsatzState {
            amplitudes: [re(0.0); SLOTS],
        }
    }

    pub fn new(amplitudes: [Complex64; SLOTS]) -> Self {
        AnsatzState { amplitudes }
    }

    pub fn unit(k: usize) -> Self {
        let mut s = Self::zeros();
        s.amplitudes[k] = re(1.0);
        s
    }

    pub fn get(&self, block: Block, l: usize) -> Complex64 {
        self.amplitudes[slot(block, l)]
    }

    pub fn set(&mut self, block: Block, l: usize, v: Complex64) {
        self.amplitudes[slot(block, l)] = v;
    }

    /// Amplitudes drawn uniformly from the unit disc; inactive slots stay zero.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, j: HalfInt) -> Self {
        let mut s = Self::zeros();
        for k in 0..SLOTS {
            if is_active(j, k) {
                s.amplitudes[k] = unit_disc(rng);
            }
        }
        s
    }

    /// Rejects nonzero amplitudes in slots that do not exist for `j`.
    pub fn validate_for(&self, j: HalfInt) -> Result<()> {
        for k in 0..SLOTS {
            if !is_active(j, k) && self.amplitudes[k] != re(0.0) {
                return domain(format!(
                    "amplitude {} must vanish for j = {j}",
                    slot_name(k)
                ));
            }
        }
        if self
            .amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return domain("amplitudes must be finite");
        }
        Ok(())
    }
}

/// Uniform sample from the closed unit disc.
pub fn unit_disc<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r: f64 = rng.random::<f64>().sqrt();
    let a: f64 = rng.random_range(0.0..2.0 * PI);
    Complex64::from_polar(r, a)
}

/// Radial amplitudes and their `ω`-derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialData {
    pub values: AnsatzState,
    pub derivatives: AnsatzState,
}

impl RadialData {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, j: HalfInt) -> Self {
        RadialData {
            values: AnsatzState::random(rng, j),
            derivatives: AnsatzState::random(rng, j),
        }
    }
}

/// `D_σ` values and derivatives for every slot.
pub fn slot_functions(mode: &ModeLabel, theta: f64, phi: f64) -> [DValue; SLOTS] {
    std::array::from_fn(|k| {
        d_function(
            mode.j,
            mode.m,
            HalfInt::from_twice(SLOT_SIGMA2[k]),
            theta,
            phi,
        )
    })
}

fn d_at(mode: &ModeLabel, sigma2: i32, theta: f64, phi: f64) -> Complex64 {
    d_function(mode.j, mode.m, HalfInt::from_twice(sigma2), theta, phi).value
}

fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) || !phi.is_finite() {
        return domain(format!(
            "angles must satisfy 0 < theta < pi, got theta = {theta}, phi = {phi}"
        ));
    }
    Ok(())
}

/// `Φ̃` at `(θ, φ)`: slot `k` carries `amplitude_k · D_{σ_k}`.
pub fn assemble(
    mode: &ModeLabel,
    state: &AnsatzState,
    theta: f64,
    phi: f64,
) -> Result<[Complex64; SLOTS]> {
    check_angles(theta, phi)?;
    state.validate_for(mode.j)?;
    let d = slot_functions(mode, theta, phi);
    Ok(std::array::from_fn(|k| state.amplitudes[k] * d[k].value))
}

/// Measured and printed-form residuals of one reduction identity.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionResidual {
    pub equation: String,
    /// Max deviation of the direct operator application from the adopted right side.
    pub residual: f64,
    /// Same against the right side exactly as printed.
    pub printed_residual: f64,
}

/// An 8-component upper 2-spinor `ξ` with entries `(spinor s, vector l)` at `4s + l`.
type Xi = [Complex64; 8];

fn xi_block(phi16: &[Complex64; SLOTS]) -> Xi {
    std::array::from_fn(|i| phi16[i])
}

fn xi_of(entries: &[(usize, usize, Complex64)]) -> Xi {
    let mut v = [re(0.0); 8];
    for &(s, l, c) in entries {
        v[4 * s + l] += c;
    }
    v
}

fn scaled(v: Xi, c: Complex64) -> Xi {
    v.map(|z| z * c)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

fn apply8(m: &ComplexMatrix, v: &Xi) -> Xi {
    let out = m.apply_slice(v);
    std::array::from_fn(|i| out[i])
}

/// Checks the actions of `σ₁ ⊗ T̃₂`, `-σ₂ ⊗ T̃₁` and their sum on `ξ`.
pub fn verify_t_action(
    mode: &ModeLabel,
    state: &AnsatzState,
    theta: f64,
    phi: f64,
) -> Result<Vec<ReductionResidual>> {
    let xi = xi_block(&assemble(mode, state, theta, phi)?);
    let d = |s2| d_at(mode, s2, theta, phi);
    let (f, g) = (|l| state.get(Block::F, l), |l| state.get(Block::G, l));
    let s1t2 = pauli(1)?.kron(&tilde_spin(2)?);
    let s2t1 = pauli(2)?.kron(&tilde_spin(1)?);

    let r25 = scaled(
        xi_of(&[
            (0, 2, g(1) * d(-1)),
            (0, 3, g(2) * d(1)),
            (0, 1, -g(2) * d(1)),
            (0, 2, -g(3) * d(3)),
            (1, 2, f(1) * d(-3)),
            (1, 3, f(2) * d(-1)),
            (1, 1, -f(2) * d(-1)),
            (1, 2, -f(3) * d(1)),
        ]),
        I * FRAC_1_SQRT_2,
    );
    let lhs25 = apply8(&s1t2, &xi);

    let r26 = scaled(
        xi_of(&[
            (0, 2, g(1) * d(-1)),
            (0, 3, g(2) * d(1)),
            (0, 1, g(2) * d(1)),
            (0, 2, g(3) * d(3)),
            (1, 2, -f(1) * d(-3)),
            (1, 3, -f(2) * d(-1)),
            (1, 1, -f(2) * d(-1)),
            (1, 2, -f(3) * d(1)),
        ]),
        I * FRAC_1_SQRT_2,
    );
    let lhs26 = apply8(&s2t1.scale_re(-1.0), &xi);

    let upper27 = [
        (0, 2, g(1) * d(-1)),
        (0, 3, g(2) * d(1)),
        (1, 1, -f(2) * d(-1)),
    ];
    let mut adopted = upper27.to_vec();
    adopted.push((1, 2, -f(3) * d(1)));
    let mut printed = upper27.to_vec();
    printed.push((1, 2, -g(3) * d(1)));
    let c27 = I * SQRT_2;
    let lhs27 = apply8(&(&s1t2 - &s2t1), &xi);

    Ok(vec![
        ReductionResidual {
            equation: "sigma1 x T2".into(),
            residual: max_diff(&lhs25, &r25),
            printed_residual: max_diff(&lhs25, &r25),
        },
        ReductionResidual {
            equation: "-sigma2 x T1".into(),
            residual: max_diff(&lhs26, &r26),
            printed_residual: max_diff(&lhs26, &r26),
        },
        ReductionResidual {
            equation: "sigma1 x T2 - sigma2 x T1".into(),
            residual: max_diff(&lhs27, &scaled(xi_of(&adopted), c27)),
            printed_residual: max_diff(&lhs27, &scaled(xi_of(&printed), c27)),
        },
    ])
}

/// Checks the action of the cyclic `j̃⁰³` on `ξ`.
pub fn verify_j03_action(
    mode: &ModeLabel,
    state: &AnsatzState,
    theta: f64,
    phi: f64,
) -> Result<ReductionResidual> {
    let xi = xi_block(&assemble(mode, state, theta, phi)?);
    let d = |s2| d_at(mode, s2, theta, phi);
    let (f, g) = (|l| state.get(Block::F, l), |l| state.get(Block::G, l));
    let j03 = ComplexMatrix::identity(2).kron(&tilde_generator(LorentzIndexPair::fixed(0, 3)));
    let lhs = apply8(&j03, &xi);
    let printed = xi_of(&[
        (0, 2, f(0) * d(-1)),
        (0, 0, f(2) * d(-1)),
        (1, 2, g(0) * d(1)),
        (1, 0, g(2) * d(1)),
    ]);
    Ok(ReductionResidual {
        equation: "j03".into(),
        residual: max_diff(&lhs, &scaled(printed, re(-1.0))),
        printed_residual: max_diff(&lhs, &printed),
    })
}

/// Checks the angular operator `Σ̃ = iσ₁∂_θ + σ₂(i∂_φ + S̃₃ cos θ)/sin θ` on `ξ`.
pub fn verify_angular_operator(
    mode: &ModeLabel,
    state: &AnsatzState,
    theta: f64,
    phi: f64,
) -> Result<ReductionResidual> {
    check_angles(theta, phi)?;
    state.validate_for(mode.j)?;
    let dv = slot_functions(mode, theta, phi);
    let xi: Xi = std::array::from_fn(|k| state.amplitudes[k] * dv[k].value);
    let xi_t: Xi = std::array::from_fn(|k| state.amplitudes[k] * dv[k].d_theta);
    let xi_p: Xi = std::array::from_fn(|k| state.amplitudes[k] * dv[k].d_phi);
    let i4 = ComplexMatrix::identity(4);
    let s1 = pauli(1)?.kron(&i4);
    let s2 = pauli(2)?.kron(&i4);
    let s3 = tilde_spin3_half();
    let (st, ct) = theta.sin_cos();
    let a1 = apply8(&s1, &xi_t);
    let spin = apply8(&s3, &xi);
    let inner: Xi = std::array::from_fn(|k| (I * xi_p[k] + ct * spin[k]) / st);
    let a2 = apply8(&s2, &inner);
    let lhs: Xi = std::array::from_fn(|k| I * a1[k] + a2[k]);

    let ac = mode.coefficients();
    let (a, b) = (ac.a, ac.b);
    let d = |s2| d_at(mode, s2, theta, phi);
    let (f, g) = (|l| state.get(Block::F, l), |l| state.get(Block::G, l));
    let common = [
        (0, 0, g(0) * a * d(-1)),
        (0, 1, g(1) * b * d(-3)),
        (0, 2, g(2) * a * d(-1)),
        (0, 3, g(3) * b * d(1)),
        (1, 0, -f(0) * a * d(1)),
        (1, 1, -f(1) * b * d(-1)),
        (1, 3, -f(3) * b * d(3)),
    ];
    let mut adopted = common.to_vec();
    adopted.push((1, 2, -f(2) * a * d(1)));
    let mut printed = common.to_vec();
    printed.push((1, 2, f(2) * a * d(1)));
    Ok(ReductionResidual {
        equation: "angular operator".into(),
        residual: max_diff(&lhs, &scaled(xi_of(&adopted), I)),
        printed_residual: max_diff(&lhs, &scaled(xi_of(&printed), I)),
    })
}

/// Checks `iσ₃ ∂ξ` given amplitude derivatives.
pub fn verify_radial_derivative(
    mode: &ModeLabel,
    derivatives: &AnsatzState,
    theta: f64,
    phi: f64,
) -> Result<ReductionResidual> {
    let dxi = xi_block(&assemble(mode, derivatives, theta, phi)?);
    let lhs = apply8(&pauli(3)?.kron(&ComplexMatrix::identity(4)), &dxi);
    let lhs = lhs.map(|z| I * z);
    let d = |s2| d_at(mode, s2, theta, phi);
    let mut entries = Vec::new();
    for l in 0..4 {
        entries.push((0, l, derivatives.get(Block::F, l) * d(SLOT_SIGMA2[l])));
        entries.push((1, l, -derivatives.get(Block::G, l) * d(SLOT_SIGMA2[4 + l])));
    }
    let rhs = scaled(xi_of(&entries), I);
    let r = max_diff(&lhs, &rhs);
    Ok(ReductionResidual {
        equation: "i sigma3 radial derivative".into(),
        residual: r,
        printed_residual: r,
    })
}

/// Result of the `γ`-trace constraint reduction.
#[derive(Clone, Debug, Serialize)]
pub struct TraceConstraint {
    /// `γ^l Ψ_l` as a bispinor, divided by the separation factor.
    pub gamma_trace: [Complex64; 4],
    /// `f₀ - √2 g₁ + f₂`, `g₀ + √2 f₃ - g₂`, `h₀ + √2 ν₁ - h₂`, `ν₀ - √2 h₃ + ν₂`.
    pub relations: [Complex64; 4],
    /// Max deviation of `γ^l Ψ_l` from the relations times their `D_{∓1/2}`.
    pub residual: f64,
}

impl TraceConstraint {
    pub fn trace_norm(&self) -> f64 {
        self.gamma_trace.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Bispinor field `Ψ_l = Σ_k (U⁻¹)_{lk} Φ̃_k`, returned as `[l][bispinor]`.
fn vector_components(phi16: &[Complex64; SLOTS]) -> [[Complex64; 4]; 4] {
    let ui = cyclic_transform_inverse();
    std::array::from_fn(|l| {
        std::array::from_fn(|b| (0..4).map(|k| ui[(l, k)] * phi16[4 * b + k]).sum())
    })
}

pub fn trace_relations(state: &AnsatzState) -> [Complex64; 4] {
    let (f, g) = (|l| state.get(Block::F, l), |l| state.get(Block::G, l));
    let (h, n) = (|l| state.get(Block::H, l), |l| state.get(Block::Nu, l));
    [
        f(0) - SQRT_2 * g(1) + f(2),
        g(0) + SQRT_2 * f(3) - g(2),
        h(0) + SQRT_2 * n(1) - h(2),
        n(0) - SQRT_2 * h(3) + n(2),
    ]
}

pub fn verify_trace_constraint(
    mode: &ModeLabel,
    state: &AnsatzState,
    theta: f64,
    phi: f64,
) -> Result<TraceConstraint> {
    let phi16 = assemble(mode, state, theta, phi)?;
    let psi = vector_components(&phi16);
    let mut trace = [re(0.0); 4];
    for (l, comp) in psi.iter().enumerate() {
        let out = gamma_matrix(l)?.apply_slice(comp);
        for b in 0..4 {
            trace[b] += out[b];
        }
    }
    let rel = trace_relations(state);
    let d = |s2| d_at(mode, s2, theta, phi);
    let expected = [rel[2] * d(-1), rel[3] * d(1), rel[0] * d(-1), rel[1] * d(1)];
    Ok(TraceConstraint {
        gamma_trace: trace,
        relations: rel,
        residual: max_diff(&trace, &expected),
    })
}

/// Separation of the angular dependence from `Φ̃` and its coordinate derivatives.
struct Separated {
    value: [Complex64; SLOTS],
    /// `∂_t, ∂_r, ∂_θ, ∂_φ` of the field divided by the separation factor
    /// `e^{-iεt}/(r φ^{1/4})`.
    derivs: [[Complex64; SLOTS]; 4],
}

fn separate(
    mode: &ModeLabel,
    data: &RadialData,
    point: &RadialPoint,
    theta: f64,
    phi: f64,
) -> Separated {
    let dv = slot_functions(mode, theta, phi);
    let x = &data.values.amplitudes;
    let dx = &data.derivatives.amplitudes;
    let value: [Complex64; SLOTS] = std::array::from_fn(|k| x[k] * dv[k].value);
    let factor_log_deriv = -1.0 / point.r - point.phi_prime / (4.0 * point.phi_metric);
    let dr_dw = point.sqrt_phi();
    Separated {
        value,
        derivs: [
            std::array::from_fn(|k| -I * mode.energy * value[k]),
            std::array::from_fn(|k| dx[k] / dr_dw * dv[k].value + factor_log_deriv * value[k]),
            std::array::from_fn(|k| x[k] * dv[k].d_theta),
            std::array::from_fn(|k| x[k] * dv[k].d_phi),
        ],
    }
}

/// The covariant wave operator `iγ^α(x)(∂_α + Γ_α ⊗ I + I ⊗ L̃_α) - M` applied to the
/// separated field at `(ω, θ, φ)`, divided by the separation factor.
pub fn apply_separated_operator(
    mode: &ModeLabel,
    data: &RadialData,
    omega: f64,
    theta: f64,
    phi: f64,
) -> Result<[Complex64; SLOTS]> {
    check_angles(theta, phi)?;
    let point = RadialPoint::from_omega(omega)?;
    let sep = separate(mode, data, &point, theta, phi);
    let conn = connections(&point, theta)?;
    let e = tetrad(&point, theta)?;
    let i4 = ComplexMatrix::identity(4);
    let mut out: Vec<Complex64> = sep.value.iter().map(|v| -mode.mass * v).collect();
    for alpha in 0..4 {
        let mut gamma = ComplexMatrix::zeros(4, 4);
        for a in 0..4 {
            if e[(a, alpha)] != 0.0 {
                gamma += &gamma_matrix(a)?.scale_re(e[(a, alpha)]);
            }
        }
        let gamma = gamma.kron(&i4).scale(I);
        let cov = conn.combined_cyclic(alpha).apply_slice(&sep.value);
        let inner: Vec<Complex64> = sep.derivs[alpha]
            .iter()
            .zip(&cov)
            .map(|(a, b)| a + b)
            .collect();
        for (o, v) in out.iter_mut().zip(gamma.apply_slice(&inner)) {
            *o += v;
        }
    }
    Ok(std::array::from_fn(|k| out[k]))
}

/// `(∇_α + Γ_α)(e^{(l)α} Ψ_l)` assembled term by term, divided by the separation
/// factor; a bispinor.
pub fn divergence_density(
    mode: &ModeLabel,
    data: &RadialData,
    omega: f64,
    theta: f64,
    phi: f64,
) -> Result<[Complex64; 4]> {
    check_angles(theta, phi)?;
    let point = RadialPoint::from_omega(omega)?;
    let sep = separate(mode, data, &point, theta, phi);
    let conn = connections(&point, theta)?;
    let e = tetrad(&point, theta)?;
    let div = tetrad_divergences(&point, theta)?;
    let psi = vector_components(&sep.value);
    let dpsi: [[[Complex64; 4]; 4]; 4] = std::array::from_fn(|a| vector_components(&sep.derivs[a]));
    let mut out = [re(0.0); 4];
    for l in 0..4 {
        for b in 0..4 {
            out[b] += div[l] * psi[l][b];
        }
        for alpha in 0..4 {
            let up = METRIC[l] * e[(l, alpha)];
            if up == 0.0 {
                continue;
            }
            let gp = conn.spinor[alpha].apply_slice(&psi[l]);
            for b in 0..4 {
                out[b] += up * (dpsi[alpha][l][b] + gp[b]);
            }
        }
    }
    Ok(out)
}

/// Reading of the divergence-constraint rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceForm {
    /// The four relations as printed (with `cos ω` in the energy term).
    Printed,
    /// The printed relations plus the `-(cot ω - ½ tan ω)` term on the index-2
    /// amplitude that the term-by-term assembly produces.
    Assembled,
}

/// Value part `R₀(ω)` of the divergence rows as a term list (4×16).
pub fn divergence_value_terms(mode: &ModeLabel, form: DivergenceForm) -> TermMatrix {
    let ac = mode.coefficients();
    let (a, b) = (ac.a, ac.b);
    let mut r0 = TermMatrix::new(4, SLOTS);
    // (own block, sign of the tan ω term, coupled block, coupled index,
    //  coefficient on own index 1, coefficient on own index 3)
    let rows = [
        (Block::F, 1.0, Block::G, 1, b, a),
        (Block::G, -1.0, Block::F, 3, a, b),
        (Block::H, -1.0, Block::Nu, 1, b, a),
        (Block::Nu, 1.0, Block::H, 3, a, b),
    ];
    for (i, &(own, sgn, other, oi, c1, c3)) in rows.iter().enumerate() {
        r0.add(i, slot(own, 0), -I * mode.energy, Profile::Sec);
        r0.add(i, slot(own, 0), re(-sgn / 2.0), Profile::Tan);
        r0.add(i, slot(other, oi), re(-FRAC_1_SQRT_2), Profile::Cot);
        r0.add(i, slot(own, 1), re(-c1 * FRAC_1_SQRT_2), Profile::Csc);
        r0.add(i, slot(own, 3), re(-c3 * FRAC_1_SQRT_2), Profile::Csc);
        if form == DivergenceForm::Assembled {
            r0.add(i, slot(own, 2), re(-1.0), Profile::Cot);
            r0.add(i, slot(own, 2), re(0.5), Profile::Tan);
        }
    }
    r0
}

/// Constant derivative part `R₁`: each row carries `-X'` of its own index-2 amplitude.
pub fn divergence_derivative_rows() -> ComplexMatrix {
    let mut r1 = ComplexMatrix::zeros(4, SLOTS);
    for (i, own) in Block::ALL.iter().enumerate() {
        r1[(i, slot(*own, 2))] = re(-1.0);
    }
    r1
}

/// Rows `(R₀, R₁)` (4×16 each) such that the divergence coefficient of `D_{∓1/2}`
/// in bispinor row `i` is `R₀ X + R₁ X'` with `X' = dX/dω`.
pub fn divergence_rows(
    mode: &ModeLabel,
    omega: f64,
    form: DivergenceForm,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    RadialPoint::from_omega(omega)?;
    Ok((
        divergence_value_terms(mode, form).value(omega),
        divergence_derivative_rows(),
    ))
}

/// Pointwise divergence-constraint check.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceCheck {
    pub density: [Complex64; 4],
    /// Residual against the assembled rows.
    pub residual: f64,
    /// Residual against the rows as printed.
    pub printed_residual: f64,
}

pub fn verify_divergence_constraint(
    mode: &ModeLabel,
    data: &RadialData,
    omega: f64,
    theta: f64,
    phi: f64,
) -> Result<DivergenceCheck> {
    data.values.validate_for(mode.j)?;
    data.derivatives.validate_for(mode.j)?;
    let density = divergence_density(mode, data, omega, theta, phi)?;
    let d = [d_at(mode, -1, theta, phi), d_at(mode, 1, theta, phi)];
    let predict = |form| -> Result<[Complex64; 4]> {
        let (r0, r1) = divergence_rows(mode, omega, form)?;
        let c0 = r0.apply_slice(&data.values.amplitudes);
        let c1 = r1.apply_slice(&data.derivatives.amplitudes);
        Ok(std::array::from_fn(|i| (c0[i] + c1[i]) * d[i % 2]))
    };
    Ok(DivergenceCheck {
        density,
        residual: max_diff(&density, &predict(DivergenceForm::Assembled)?),
        printed_residual: max_diff(&density, &predict(DivergenceForm::Printed)?),
    })
}

/// Pointwise reduction checks on random states and angles. The divergence check
/// runs against the assembled rows.
pub fn verify_suite<R: Rng + ?Sized>(
    rng: &mut R,
    j: HalfInt,
    states: usize,
    angles: usize,
) -> Result<CheckReport> {
    const POINTWISE: f64 = 1e-9;
    const CONSTRAINT: f64 = 1e-8;
    let mode = ModeLabel::new(j, HalfInt::from_twice(1), re(1.3), 0.7)?;
    let mut worst: Vec<(String, f64)> = Vec::new();
    let mut note = |name: String, r: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(e) => e.1 = e.1.max(r),
        None => worst.push((name, r)),
    };
    for _ in 0..states {
        let state = AnsatzState::random(rng, j);
        let derivs = AnsatzState::random(rng, j);
        let data = RadialData::random(rng, j);
        for _ in 0..angles {
            let theta = rng.random_range(0.05..PI - 0.05);
            let phi = rng.random_range(0.0..2.0 * PI);
            let mut rows = verify_t_action(&mode, &state, theta, phi)?;
            rows.push(verify_j03_action(&mode, &state, theta, phi)?);
            rows.push(verify_angular_operator(&mode, &state, theta, phi)?);
            rows.push(verify_radial_derivative(&mode, &derivs, theta, phi)?);
            for r in rows {
                note(r.equation, r.residual);
            }
            note(
                "trace constraint".into(),
                verify_trace_constraint(&mode, &state, theta, phi)?.residual,
            );
            let omega = rng.random_range(0.05..1.5);
            note(
                "divergence constraint".into(),
                verify_divergence_constraint(&mode, &data, omega, theta, phi)?.residual,
            );
        }
    }
    let mut rep = CheckReport::new();
    for (name, r) in worst {
        let tol = if name.ends_with("constraint") {
            CONSTRAINT
        } else {
            POINTWISE
        };
        rep.push(format!("j={j} {name}"), r, tol);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mode(j2: i32) -> ModeLabel {
        ModeLabel::new(
            HalfInt::from_twice(j2),
            HalfInt::from_twice(1),
            re(1.3),
            0.7,
        )
        .unwrap()
    }

    #[test]
    fn slot_layout() {
        assert_eq!(slot(Block::Nu, 3), 15);
        assert_eq!(slot_name(13), "nu1");
        let m = mode(1);
        assert_eq!(
            m.active_slots(),
            vec![0, 2, 3, 4, 5, 6, 8, 10, 11, 12, 13, 14]
        );
    }

    #[test]
    fn mode_validation() {
        let j = HalfInt::from_twice(1);
        assert!(ModeLabel::new(j, HalfInt::from_twice(3), re(1.0), 0.0).is_err());
        assert!(ModeLabel::new(HalfInt::from_twice(2), j, re(1.0), 0.0).is_err());
        assert!(ModeLabel::new(j, j, re(f64::NAN), 0.0).is_err());
    }

    #[test]
    fn assemble_basics() {
        let m = mode(3);
        let z = assemble(&m, &AnsatzState::zeros(), 1.0, 0.2).unwrap();
        assert!(z.iter().all(|v| *v == re(0.0)));
        let one = assemble(&m, &AnsatzState::unit(0), 1.0, 0.2).unwrap();
        assert_eq!(one.iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert!((one[0] - d_at(&m, -1, 1.0, 0.2)).norm() < 1e-15);
        assert!(assemble(&mode(1), &AnsatzState::unit(slot(Block::F, 1)), 1.0, 0.2).is_err());
        assert!(assemble(&m, &AnsatzState::unit(0), 0.0, 0.2).is_err());
    }

    #[test]
    fn random_state_respects_zero_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = AnsatzState::random(&mut rng, HalfInt::from_twice(1));
        assert!(s.validate_for(HalfInt::from_twice(1)).is_ok());
        assert!(s.amplitudes.iter().all(|z| z.norm() <= 1.0));
    }

    #[test]
    fn reductions_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for j2 in [1, 3, 5] {
            let m = mode(j2);
            for _ in 0..5 {
                let s = AnsatzState::random(&mut rng, m.j);
                let (th, ph) = (rng.random_range(0.1..3.0), rng.random_range(0.0..6.0));
                for r in verify_t_action(&m, &s, th, ph).unwrap() {
                    assert!(r.residual < 1e-12, "{} {}", r.equation, r.residual);
                }
                assert!(verify_j03_action(&m, &s, th, ph).unwrap().residual < 1e-12);
                assert!(verify_angular_operator(&m, &s, th, ph).unwrap().residual < 1e-9);
                assert!(verify_radial_derivative(&m, &s, th, ph).unwrap().residual < 1e-12);
            }
        }
    }

    #[test]
    fn g2_only_lands_in_third_slot() {
        let m = mode(3);
        let s = AnsatzState::unit(slot(Block::G, 2));
        let xi = xi_block(&assemble(&m, &s, 0.9, 0.1).unwrap());
        let s1t2 = pauli(1).unwrap().kron(&tilde_spin(2).unwrap());
        let s2t1 = pauli(2).unwrap().kron(&tilde_spin(1).unwrap());
        let out = apply8(&(&s1t2 - &s2t1), &xi);
        for (k, v) in out.iter().enumerate() {
            if k == 3 {
                assert!((v - I * SQRT_2 * d_at(&m, 1, 0.9, 0.1)).norm() < 1e-14);
            } else {
                assert!(v.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn j03_on_single_amplitudes() {
        let m = mode(3);
        let j03 = ComplexMatrix::identity(2).kron(&tilde_generator(LorentzIndexPair::fixed(0, 3)));
        let xi = xi_block(&assemble(&m, &AnsatzState::unit(slot(Block::F, 1)), 0.9, 0.1).unwrap());
        assert!(apply8(&j03, &xi).iter().all(|z| z.norm() < 1e-15));
        let xi = xi_block(&assemble(&m, &AnsatzState::unit(0), 0.9, 0.1).unwrap());
        let out = apply8(&j03, &xi);
        assert!(
            out[2].norm() > 0.1
                && out
                    .iter()
                    .enumerate()
                    .all(|(k, z)| k == 2 || z.norm() < 1e-15)
        );
    }

    #[test]
    fn angular_operator_spin_half_g0() {
        let m = mode(1);
        let s = AnsatzState::unit(slot(Block::G, 0));
        let r = verify_angular_operator(&m, &s, 1.1, 0.4).unwrap();
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn trace_constraint_relations() {
        let m = mode(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = AnsatzState::random(&mut rng, m.j);
        let t = verify_trace_constraint(&m, &s, 1.2, 0.5).unwrap();
        assert!(t.residual < 1e-13);
        assert!(t.trace_norm() > 1e-3);
        // impose f0 = √2 g1 − f2, g0 = g2 − √2 f3 and the lower-spinor images
        s.set(
            Block::F,
            0,
            SQRT_2 * s.get(Block::G, 1) - s.get(Block::F, 2),
        );
        s.set(
            Block::G,
            0,
            s.get(Block::G, 2) - SQRT_2 * s.get(Block::F, 3),
        );
        s.set(
            Block::H,
            0,
            s.get(Block::H, 2) - SQRT_2 * s.get(Block::Nu, 1),
        );
        s.set(
            Block::Nu,
            0,
            SQRT_2 * s.get(Block::H, 3) - s.get(Block::Nu, 2),
        );
        let t = verify_trace_constraint(&m, &s, 1.2, 0.5).unwrap();
        assert!(t.trace_norm() < 1e-13);
    }

    #[test]
    fn divergence_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for j2 in [1, 3, 5] {
            let m = mode(j2);
            let data = RadialData::random(&mut rng, m.j);
            let c = verify_divergence_constraint(&m, &data, 0.6, 1.0, 0.3).unwrap();
            assert!(c.residual < 1e-8, "{}", c.residual);
            let zero = RadialData {
                values: AnsatzState::zeros(),
                derivatives: AnsatzState::zeros(),
            };
            let z = verify_divergence_constraint(&m, &zero, 0.6, 1.0, 0.3).unwrap();
            assert_eq!(z.residual, 0.0);
        }
    }

    #[test]
    fn divergence_printed_rows_miss_a_term() {
        let m = mode(3);
        let mut data = RadialData {
            values: AnsatzState::zeros(),
            derivatives: AnsatzState::zeros(),
        };
        data.values.set(Block::F, 2, re(1.0));
        let c = verify_divergence_constraint(&m, &data, 0.6, 1.0, 0.3).unwrap();
        assert!(c.residual < 1e-10);
        assert!(c.printed_residual > 0.1);
    }

    #[test]
    fn printed_rows_hold_for_unseparated_amplitudes() {
        // Z = r φ^{1/4} X = sin ω cos^{1/2} ω · X
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = mode(3);
        let data = RadialData::random(&mut rng, m.j);
        let (w, th, ph) = (0.7f64, 1.1, 0.4);
        let s = w.sin() * w.cos().sqrt();
        let ds = s * (w.cos() / w.sin() - 0.5 * w.tan());
        let z: Vec<Complex64> = data.values.amplitudes.iter().map(|x| x * s).collect();
        let dz: Vec<Complex64> = data
            .values
            .amplitudes
            .iter()
            .zip(&data.derivatives.amplitudes)
            .map(|(x, dx)| x * ds + dx * s)
            .collect();
        let (r0, r1) = divergence_rows(&m, w, DivergenceForm::Printed).unwrap();
        let (c0, c1) = (r0.apply_slice(&z), r1.apply_slice(&dz));
        let density = divergence_density(&m, &data, w, th, ph).unwrap();
        let d = [d_at(&m, -1, th, ph), d_at(&m, 1, th, ph)];
        for i in 0..4 {
            assert!(((c0[i] + c1[i]) * d[i % 2] - s * density[i]).norm() < 1e-12);
        }
    }
}
