//! Sparse coefficient matrices whose entries are constants times one of a few
//! elementary functions of `ω`. Values, `ω`-derivatives and the Laurent data at
//! both singular endpoints all come from the same term list.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::matrix::ComplexMatrix;
use crate::re;

/// Elementary `ω`-dependence of a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    One,
    /// `1/cos ω`
    Sec,
    /// `1/sin ω`
    Csc,
    Tan,
    Cot,
}

/// Singular endpoint of `(0, π/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Origin,
    Horizon,
}

impl Endpoint {
    pub fn location(self) -> f64 {
        match self {
            Endpoint::Origin => 0.0,
            Endpoint::Horizon => FRAC_PI_2,
        }
    }

    /// Direction pointing into the interval.
    pub fn inward(self) -> f64 {
        match self {
            Endpoint::Origin => 1.0,
            Endpoint::Horizon => -1.0,
        }
    }
}

impl Profile {
    pub fn value(self, w: f64) -> f64 {
        let (s, c) = w.sin_cos();
        match self {
            Profile::One => 1.0,
            Profile::Sec => 1.0 / c,
            Profile::Csc => 1.0 / s,
            Profile::Tan => s / c,
            Profile::Cot => c / s,
        }
    }

    pub fn derivative(self, w: f64) -> f64 {
        let (s, c) = w.sin_cos();
        match self {
            Profile::One => 0.0,
            Profile::Sec => s / (c * c),
            Profile::Csc => -c / (s * s),
            Profile::Tan => 1.0 / (c * c),
            Profile::Cot => -1.0 / (s * s),
        }
    }

    /// `(residue, regular value)` of the expansion `res/(ω-ω₀) + reg + O(ω-ω₀)`.
    pub fn laurent(self, end: Endpoint) -> (f64, f64) {
        match (end, self) {
            (_, Profile::One) => (0.0, 1.0),
            (Endpoint::Origin, Profile::Sec) => (0.0, 1.0),
            (Endpoint::Origin, Profile::Csc | Profile::Cot) => (1.0, 0.0),
            (Endpoint::Origin, Profile::Tan) => (0.0, 0.0),
            (Endpoint::Horizon, Profile::Sec | Profile::Tan) => (-1.0, 0.0),
            (Endpoint::Horizon, Profile::Csc) => (0.0, 1.0),
            (Endpoint::Horizon, Profile::Cot) => (0.0, 0.0),
        }
    }
}

/// Entry `(row, col) += coef · profile(ω)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    pub row: usize,
    pub col: usize,
    pub coef: Complex64,
    pub profile: Profile,
}

/// A matrix-valued function of `ω` given as a sum of terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermMatrix {
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<Term>,
}

impl TermMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        TermMatrix {
            rows,
            cols,
            terms: Vec::new(),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, coef: Complex64, profile: Profile) {
        if coef != re(0.0) {
            self.terms.push(Term {
                row,
                col,
                coef,
                profile,
            });
        }
    }

    fn fold(&self, f: impl Fn(&Term) -> Complex64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for t in &self.terms {
            m[(t.row, t.col)] += f(t);
        }
        m
    }

    pub fn value(&self, w: f64) -> ComplexMatrix {
        self.fold(|t| t.coef * t.profile.value(w))
    }

    pub fn derivative(&self, w: f64) -> ComplexMatrix {
        self.fold(|t| t.coef * t.profile.derivative(w))
    }

    pub fn residue(&self, end: Endpoint) -> ComplexMatrix {
        self.fold(|t| t.coef * t.profile.laurent(end).0)
    }

    pub fn regular_part(&self, end: Endpoint) -> ComplexMatrix {
        self.fold(|t| t.coef * t.profile.laurent(end).1)
    }

    /// Drops every term touching a row or column outside `keep`.
    pub fn restrict(&mut self, keep: &[usize]) {
        self.terms
            .retain(|t| keep.contains(&t.row) && keep.contains(&t.col));
    }

    /// Drops terms in columns outside `keep`.
    pub fn restrict_cols(&mut self, keep: &[usize]) {
        self.terms.retain(|t| keep.contains(&t.col));
    }
}
