//! Dense univariate polynomials over exact rationals, plus the
//! characteristic polynomial of a tridiagonal matrix.
//!
//! Coefficients are stored in ascending order of degree and kept canonical:
//! no trailing zeros, with the zero polynomial represented by an empty
//! coefficient list.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exact::Rational;
use crate::matrices::TridiagonalMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    /// Builds from ascending coefficients, trimming trailing zeros.
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    /// `prod (x - r)` over the given roots. Empty input yields 1.
    pub fn from_roots(roots: &[Rational]) -> Self {
        let mut p = Self::one();
        for r in roots {
            p = p.mul(&Self::new(vec![-r, Rational::one()]));
        }
        p
    }

    /// Ascending coefficients; empty for the zero polynomial.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_some_and(|c| *c == Rational::one())
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Self::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(coeffs)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let lead = first;
            if lead {
                first = false;
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            // the leading term keeps its sign; later terms moved it into
            // the separator
            let mag = if lead { c.clone() } else { c.abs() };
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != Rational::one() {
                        write!(f, "{mag}*")?;
                    }
                    if k == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Monic characteristic polynomial `det(xI - T)` via the three-term
/// recurrence over leading principal minors:
/// `p_0 = 1`, `p_1 = x - d_0`,
/// `p_i = (x - d_{i-1}) p_{i-1} - sub_{i-2} super_{i-2} p_{i-2}`.
pub fn charpoly_tridiagonal(t: &TridiagonalMatrix) -> Polynomial {
    let mut prev = Polynomial::one();
    let mut cur = Polynomial::x().sub(&Polynomial::constant(t.diag()[0].clone()));
    for i in 1..t.order() {
        let shifted = Polynomial::x()
            .sub(&Polynomial::constant(t.diag()[i].clone()))
            .mul(&cur);
        let corner = &t.subdiag()[i - 1] * &t.superdiag()[i - 1];
        let next = shifted.sub(&prev.scale(&corner));
        prev = cur;
        cur = next;
    }
    cur
}
