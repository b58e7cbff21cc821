//! Static de Sitter metric in units of the curvature radius, the diagonal
//! spherical tetrad and its spin and vector connections.
//!
//! Coordinates are ordered `(t, r, θ, φ)`; the metric is
//! `diag(φ, -1/φ, -r², -r² sin²θ)` with `φ = 1 - r²`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix4;
use rand::Rng;

use crate::algebra::{
    bispinor_generator, cyclic_transform, cyclic_transform_inverse, vector_generator,
    LorentzIndexPair,
};
use crate::error::{domain, Result};
use crate::matrix::ComplexMatrix;
use crate::report::CheckReport;

/// A radius in `(0, 1)` with its angular form `r = sin ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialPoint {
    pub r: f64,
    pub omega: f64,
    /// `1 - r²`.
    pub phi_metric: f64,
    /// `d(1 - r²)/dr = -2r`.
    pub phi_prime: f64,
}

impl RadialPoint {
    pub fn from_radius(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return domain(format!("radius must lie in (0, 1), got {r}"));
        }
        Ok(RadialPoint {
            r,
            omega: r.asin(),
            phi_metric: 1.0 - r * r,
            phi_prime: -2.0 * r,
        })
    }

    pub fn from_omega(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < FRAC_PI_2) {
            return domain(format!("omega must lie in (0, pi/2), got {omega}"));
        }
        let r = omega.sin();
        let c = omega.cos();
        Ok(RadialPoint {
            r,
            omega,
            phi_metric: c * c,
            phi_prime: -2.0 * r,
        })
    }

    /// `√φ = cos ω`.
    pub fn sqrt_phi(&self) -> f64 {
        self.omega.cos()
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return domain(format!("theta must lie in (0, pi), got {theta}"));
    }
    Ok(())
}

/// Covariant metric components.
pub fn metric(point: &RadialPoint, theta: f64) -> Result<Matrix4<f64>> {
    check_theta(theta)?;
    Ok(metric_closed(point.r, theta))
}

fn metric_closed(r: f64, theta: f64) -> Matrix4<f64> {
    let f = 1.0 - r * r;
    let rs = r * theta.sin();
    Matrix4::from_diagonal(&nalgebra::Vector4::new(f, -1.0 / f, -r * r, -rs * rs))
}

/// Tetrad components `e^α_(a)`: row `a` (frame), column `α` (coordinate).
pub fn tetrad(point: &RadialPoint, theta: f64) -> Result<Matrix4<f64>> {
    check_theta(theta)?;
    Ok(tetrad_closed(point.r, theta))
}

fn tetrad_closed(r: f64, theta: f64) -> Matrix4<f64> {
    let f = 1.0 - r * r;
    let mut e = Matrix4::zeros();
    e[(0, 0)] = f.powf(-0.5);
    e[(3, 1)] = f.sqrt();
    e[(1, 2)] = 1.0 / r;
    e[(2, 3)] = 1.0 / (r * theta.sin());
    e
}

/// Max deviation of `g_{αβ} e^α_(a) e^β_(b)` from the Minkowski metric.
pub fn tetrad_orthonormality_residual(point: &RadialPoint, theta: f64) -> Result<f64> {
    let e = tetrad(point, theta)?;
    let g = metric(point, theta)?;
    let eta = Matrix4::from_diagonal(&nalgebra::Vector4::from(crate::algebra::METRIC));
    Ok((e * g * e.transpose() - eta).amax())
}

/// Spin connection `Γ_α` and vector connection `L_α` for `α = t, r, θ, φ`.
#[derive(Clone, Debug)]
pub struct Connections {
    pub spinor: [ComplexMatrix; 4],
    pub vector: [ComplexMatrix; 4],
}

impl Connections {
    /// `Γ_α ⊗ I + I ⊗ L_α` on the vector-bispinor.
    pub fn combined(&self, alpha: usize) -> ComplexMatrix {
        let i4 = ComplexMatrix::identity(4);
        &self.spinor[alpha].kron(&i4) + &i4.kron(&self.vector[alpha])
    }

    /// Same with the vector part carried to the cyclic basis.
    pub fn combined_cyclic(&self, alpha: usize) -> ComplexMatrix {
        let i4 = ComplexMatrix::identity(4);
        let l = &(&cyclic_transform() * &self.vector[alpha]) * &cyclic_transform_inverse();
        &self.spinor[alpha].kron(&i4) + &i4.kron(&l)
    }

    pub fn max_abs_diff(&self, other: &Connections) -> f64 {
        self.spinor
            .iter()
            .zip(&other.spinor)
            .chain(self.vector.iter().zip(&other.vector))
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

/// Closed-form connections of the diagonal tetrad.
pub fn connections(point: &RadialPoint, theta: f64) -> Result<Connections> {
    check_theta(theta)?;
    let p = LorentzIndexPair::fixed;
    let sf = point.sqrt_phi();
    let half_fp = 0.5 * point.phi_prime;
    let (st, ct) = theta.sin_cos();
    let build = |g: &dyn Fn(LorentzIndexPair) -> ComplexMatrix| -> [ComplexMatrix; 4] {
        [
            g(p(0, 3)).scale_re(half_fp),
            ComplexMatrix::zeros(4, 4),
            g(p(3, 1)).scale_re(sf),
            &g(p(3, 2)).scale_re(sf * st) + &g(p(1, 2)).scale_re(ct),
        ]
    };
    Ok(Connections {
        spinor: build(&bispinor_generator),
        vector: build(&vector_generator),
    })
}

/// Covariant divergences `e^{(l)α}_{;α}` of the upper-index tetrad vectors.
pub fn tetrad_divergences(point: &RadialPoint, theta: f64) -> Result<[f64; 4]> {
    check_theta(theta)?;
    let r = point.r;
    let f = point.phi_metric;
    Ok([
        0.0,
        -theta.cos() / theta.sin() / r,
        0.0,
        -point.sqrt_phi() * (2.0 / r + point.phi_prime / (2.0 * f)),
    ])
}

/// Finite-difference covariant-derivative oracle built only from the metric
/// and tetrad component functions.
pub mod oracle {
    use super::*;

    /// Default central-difference step.
    pub const STEP: f64 = 1e-5;

    pub type Coordinates = [f64; 4];

    fn shifted(x: &Coordinates, mu: usize, h: f64) -> Coordinates {
        let mut y = *x;
        y[mu] += h;
        y
    }

    fn metric_at(x: &Coordinates) -> Matrix4<f64> {
        metric_closed(x[1], x[2])
    }

    /// Covector components `e_(b)β = e^α_(b) g_αβ`, row `b`.
    fn frame_covectors(x: &Coordinates) -> Matrix4<f64> {
        tetrad_closed(x[1], x[2]) * metric_at(x)
    }

    /// Christoffel symbols `Γ^λ_{μν}` indexed `[λ][μ][ν]`.
    pub fn christoffel(x: &Coordinates, h: f64) -> [[[f64; 4]; 4]; 4] {
        let gi = metric_at(x).try_inverse().expect("nondegenerate metric");
        let dg: Vec<Matrix4<f64>> = (0..4)
            .map(|m| (metric_at(&shifted(x, m, h)) - metric_at(&shifted(x, m, -h))) / (2.0 * h))
            .collect();
        let mut out = [[[0.0; 4]; 4]; 4];
        for (l, row) in out.iter_mut().enumerate() {
            for (a, col) in row.iter_mut().enumerate() {
                for (b, v) in col.iter_mut().enumerate() {
                    *v = 0.5
                        * (0..4)
                            .map(|s| gi[(l, s)] * (dg[a][(s, b)] + dg[b][(s, a)] - dg[s][(a, b)]))
                            .sum::<f64>();
                }
            }
        }
        out
    }

    /// Connections from `½ G^{ab} e^β_(a) ∇_α e_(b)β` with `G = σ` or `j`.
    pub fn connections_fd(x: &Coordinates, h: f64) -> Connections {
        let chr = christoffel(x, h);
        let e_up = tetrad_closed(x[1], x[2]);
        let cov = frame_covectors(x);
        let mut spinor: Vec<ComplexMatrix> = Vec::with_capacity(4);
        let mut vector: Vec<ComplexMatrix> = Vec::with_capacity(4);
        for alpha in 0..4 {
            let d = (frame_covectors(&shifted(x, alpha, h))
                - frame_covectors(&shifted(x, alpha, -h)))
                / (2.0 * h);
            // ∇_α e_(b)β = ∂_α e_(b)β − Γ^γ_{αβ} e_(b)γ
            let mut nabla = d;
            for b in 0..4 {
                for beta in 0..4 {
                    nabla[(b, beta)] -= (0..4)
                        .map(|g| chr[g][alpha][beta] * cov[(b, g)])
                        .sum::<f64>();
                }
            }
            // ω_ab = e^β_(a) ∇_α e_(b)β
            let omega = e_up * nabla.transpose();
            let mut gs = ComplexMatrix::zeros(4, 4);
            let mut gv = ComplexMatrix::zeros(4, 4);
            for p in LorentzIndexPair::all() {
                let w = 0.5 * omega[(p.a(), p.b())];
                gs += &bispinor_generator(p).scale_re(w);
                gv += &vector_generator(p).scale_re(w);
            }
            spinor.push(gs);
            vector.push(gv);
        }
        Connections {
            spinor: spinor.try_into().expect("four entries"),
            vector: vector.try_into().expect("four entries"),
        }
    }

    /// `(1/√|g|) ∂_α(√|g| e^{(l)α})` by central differences.
    pub fn divergences_fd(x: &Coordinates, h: f64) -> [f64; 4] {
        let density = |y: &Coordinates| -> Matrix4<f64> {
            let sq = metric_at(y).determinant().abs().sqrt();
            let eta = Matrix4::from_diagonal(&nalgebra::Vector4::from(crate::algebra::METRIC));
            eta * tetrad_closed(y[1], y[2]) * sq
        };
        let sq = metric_at(x).determinant().abs().sqrt();
        let mut out = [0.0; 4];
        for (l, o) in out.iter_mut().enumerate() {
            *o = (0..4)
                .map(|a| {
                    (density(&shifted(x, a, h))[(l, a)] - density(&shifted(x, a, -h))[(l, a)])
                        / (2.0 * h)
                })
                .sum::<f64>()
                / sq;
        }
        out
    }
}

/// Random interior sample `(t, r, θ, φ)`.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R) -> oracle::Coordinates {
    [
        rng.random_range(-1.0..1.0),
        rng.random_range(0.05..0.95),
        rng.random_range(0.1..PI - 0.1),
        rng.random_range(0.0..2.0 * PI),
    ]
}

/// Orthonormality, connection and divergence checks at random interior points.
pub fn verify_suite<R: Rng + ?Sized>(rng: &mut R, points: usize) -> CheckReport {
    let mut ortho: f64 = 0.0;
    for _ in 0..50 {
        let x = sample_point(rng);
        let p = RadialPoint::from_radius(x[1]).expect("interior");
        ortho = ortho.max(tetrad_orthonormality_residual(&p, x[2]).expect("interior"));
    }
    let (mut gam, mut lvec, mut div): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..points {
        let x = sample_point(rng);
        let p = RadialPoint::from_radius(x[1]).expect("interior");
        let closed = connections(&p, x[2]).expect("interior");
        let fd = oracle::connections_fd(&x, oracle::STEP);
        for a in 0..4 {
            gam = gam.max(closed.spinor[a].max_abs_diff(&fd.spinor[a]));
            lvec = lvec.max(closed.vector[a].max_abs_diff(&fd.vector[a]));
        }
        let dc = tetrad_divergences(&p, x[2]).expect("interior");
        let df = oracle::divergences_fd(&x, oracle::STEP);
        div = div.max(
            dc.iter()
                .zip(df)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        );
    }
    let mut rep = CheckReport::new();
    rep.push("tetrad orthonormality", ortho, 1e-12);
    rep.push("spin connection vs covariant-derivative oracle", gam, 1e-6);
    rep.push(
        "vector connection vs covariant-derivative oracle",
        lvec,
        1e-6,
    );
    rep.push(
        "tetrad divergences vs finite-difference divergence",
        div,
        1e-6,
    );
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_domain() {
        assert!(RadialPoint::from_radius(0.0).is_err());
        assert!(RadialPoint::from_radius(1.0).is_err());
        assert!(RadialPoint::from_omega(FRAC_PI_2).is_err());
        let p = RadialPoint::from_omega(0.6).unwrap();
        assert!((p.r - 0.6f64.sin()).abs() < 1e-15);
        assert!((p.phi_metric.sqrt() - 0.6f64.cos()).abs() < 1e-14);
        let q = RadialPoint::from_radius(p.r).unwrap();
        assert!((q.omega - 0.6).abs() < 1e-14);
    }

    #[test]
    fn gtt_at_quarter_turn() {
        let p = RadialPoint::from_radius((PI / 4.0).sin()).unwrap();
        let g = metric(&p, 1.0).unwrap();
        assert!((g[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn determinant_closed_form() {
        for &(r, th) in &[(0.2, 0.5), (0.7, 2.0), (0.9, 1.4)] {
            let p = RadialPoint::from_radius(r).unwrap();
            let det = metric(&p, th).unwrap().determinant();
            let expect = -r.powi(4) * th.sin().powi(2);
            assert!((det - expect).abs() < 1e-13 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn radial_connection_vanishes_and_theta_term() {
        let w = 0.4;
        let p = RadialPoint::from_omega(w).unwrap();
        let c = connections(&p, 1.1).unwrap();
        assert_eq!(c.spinor[1].max_abs(), 0.0);
        assert_eq!(c.vector[1].max_abs(), 0.0);
        let expect = vector_generator(LorentzIndexPair::fixed(3, 1)).scale_re(w.cos());
        assert!(c.vector[2].max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn divergence_zero_components_and_fd() {
        let p = RadialPoint::from_omega(PI / 4.0).unwrap();
        let d = tetrad_divergences(&p, 0.9).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[2], 0.0);
        let fd = oracle::divergences_fd(&[0.0, p.r, 0.9, 0.3], oracle::STEP);
        assert!((fd[3] - d[3]).abs() < 1e-6);
        assert!(tetrad_divergences(&p, 0.0).is_err());
    }

    #[test]
    fn suite_passes() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rep = verify_suite(&mut rng, 20);
        for c in &rep.checks {
            assert!(c.passed, "{} residual {:e}", c.name, c.residual);
        }
    }
}
