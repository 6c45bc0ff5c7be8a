//! The three tridiagonal matrix families of the model.
//!
//! - [`build_generator`]: the master-equation generator `M(n, alpha, beta)`,
//! - [`build_sylvester_kac`]: zero diagonal, superdiagonal `1..n`,
//!   subdiagonal `n..1` (optionally scaled),
//! - [`build_krawtchouk`]: the tridiagonal Krawtchouk matrix `K(p, n)`,
//!   which equals the transpose of `M(n, p, 1-p)`.
//!
//! Band storage is row-indexed: `subdiag[i]` sits at `(i+1, i)` and
//! `superdiag[i]` at `(i, i+1)`. JSON serialization uses the schema
//! `{order, diag[], sub[], super[]}` with rationals as `"num/den"` strings.

use serde::{Deserialize, Serialize};

use crate::exact::Rational;
use crate::Error;

/// Model parameters: `n` cells, fill rate `alpha` per empty cell, empty rate
/// `beta` per filled cell. Requires `n >= 1`, `alpha > 0`, `beta >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams", into = "RawModelParams")]
pub struct ModelParams {
    n: usize,
    alpha: Rational,
    beta: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawModelParams {
    n: usize,
    alpha: Rational,
    beta: Rational,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawModelParams) -> Result<Self, Error> {
        ModelParams::new(raw.n, raw.alpha, raw.beta)
    }
}

impl From<ModelParams> for RawModelParams {
    fn from(p: ModelParams) -> Self {
        RawModelParams {
            n: p.n,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl ModelParams {
    pub fn new(n: usize, alpha: Rational, beta: Rational) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be >= 1".into()));
        }
        if !alpha.is_positive() {
            return Err(Error::InvalidParams("alpha must be > 0".into()));
        }
        if beta.is_negative() {
            return Err(Error::InvalidParams("beta must be >= 0".into()));
        }
        Ok(Self { n, alpha, beta })
    }

    /// Convenience constructor from small integer rates.
    pub fn from_ints(n: usize, alpha: i64, beta: i64) -> Result<Self, Error> {
        Self::new(n, Rational::from_int(alpha), Rational::from_int(beta))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    /// Rate ratio `eta = beta / alpha`. Well defined since `alpha > 0`.
    pub fn eta(&self) -> Rational {
        &self.beta / &self.alpha
    }

    /// Equilibrium fill probability per cell, `alpha / (alpha + beta)`,
    /// always in `(0, 1]`.
    pub fn p_eq(&self) -> Rational {
        &self.alpha / (&self.alpha + &self.beta)
    }

    /// Matrix order `n + 1` of the occupancy-count generator.
    pub fn order(&self) -> usize {
        self.n + 1
    }
}

/// A tridiagonal matrix over exact rationals. Only the three bands are
/// representable; every other entry is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTridiagonal", into = "RawTridiagonal")]
pub struct TridiagonalMatrix {
    order: usize,
    diag: Vec<Rational>,
    subdiag: Vec<Rational>,
    superdiag: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawTridiagonal {
    order: usize,
    diag: Vec<Rational>,
    sub: Vec<Rational>,
    #[serde(rename = "super")]
    superdiag: Vec<Rational>,
}

impl TryFrom<RawTridiagonal> for TridiagonalMatrix {
    type Error = Error;
    fn try_from(raw: RawTridiagonal) -> Result<Self, Error> {
        let t = TridiagonalMatrix::new(raw.diag, raw.sub, raw.superdiag)?;
        if t.order != raw.order {
            return Err(Error::DimensionMismatch(format!(
                "declared order {} but diagonal has length {}",
                raw.order, t.order
            )));
        }
        Ok(t)
    }
}

impl From<TridiagonalMatrix> for RawTridiagonal {
    fn from(t: TridiagonalMatrix) -> Self {
        RawTridiagonal {
            order: t.order,
            diag: t.diag,
            sub: t.subdiag,
            superdiag: t.superdiag,
        }
    }
}

impl TridiagonalMatrix {
    /// Builds an order-`m` matrix from its bands. `diag` has length `m >= 1`,
    /// the off-diagonal bands length `m - 1`.
    pub fn new(
        diag: Vec<Rational>,
        subdiag: Vec<Rational>,
        superdiag: Vec<Rational>,
    ) -> Result<Self, Error> {
        let order = diag.len();
        if order == 0 {
            return Err(Error::InvalidParams("matrix order must be >= 1".into()));
        }
        if subdiag.len() != order - 1 || superdiag.len() != order - 1 {
            return Err(Error::DimensionMismatch(format!(
                "order {} needs {} off-diagonal entries, got sub {} / super {}",
                order,
                order - 1,
                subdiag.len(),
                superdiag.len()
            )));
        }
        Ok(Self {
            order,
            diag,
            subdiag,
            superdiag,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn diag(&self) -> &[Rational] {
        &self.diag
    }

    /// Entries below the diagonal; `subdiag()[i]` sits at `(i+1, i)`.
    pub fn subdiag(&self) -> &[Rational] {
        &self.subdiag
    }

    /// Entries above the diagonal; `superdiag()[i]` sits at `(i, i+1)`.
    pub fn superdiag(&self) -> &[Rational] {
        &self.superdiag
    }

    /// Entry at `(row, col)`, zero off the three bands.
    pub fn get(&self, row: usize, col: usize) -> Rational {
        assert!(row < self.order && col < self.order, "index out of range");
        if row == col {
            self.diag[row].clone()
        } else if row == col + 1 {
            self.subdiag[col].clone()
        } else if col == row + 1 {
            self.superdiag[row].clone()
        } else {
            Rational::zero()
        }
    }

    /// Exact banded product `T v`.
    pub fn matvec(&self, v: &[Rational]) -> Result<Vec<Rational>, Error> {
        if v.len() != self.order {
            return Err(Error::DimensionMismatch(format!(
                "matrix order {} vs vector length {}",
                self.order,
                v.len()
            )));
        }
        let m = self.order;
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let mut acc = &self.diag[i] * &v[i];
            if i > 0 {
                acc += &self.subdiag[i - 1] * &v[i - 1];
            }
            if i + 1 < m {
                acc += &self.superdiag[i] * &v[i + 1];
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Exact banded product `v^T T`, returned as a plain vector.
    pub fn matvec_left(&self, v: &[Rational]) -> Result<Vec<Rational>, Error> {
        self.transpose().matvec(v)
    }

    /// Swaps the sub- and superdiagonal bands; the diagonal is unchanged.
    pub fn transpose(&self) -> Self {
        Self {
            order: self.order,
            diag: self.diag.clone(),
            subdiag: self.superdiag.clone(),
            superdiag: self.subdiag.clone(),
        }
    }
}

/// The occupancy-count generator `M` of order `n + 1`:
/// `diag[i] = -((n-i) alpha + i beta)`, entry `(i+1, i) = (n-i) alpha`,
/// entry `(i, i+1) = (i+1) beta`. Every column sums to zero.
pub fn build_generator(params: &ModelParams) -> TridiagonalMatrix {
    let n = params.n() as i64;
    let alpha = params.alpha();
    let beta = params.beta();
    let diag = (0..=n)
        .map(|i| -(Rational::from_int(n - i) * alpha + Rational::from_int(i) * beta))
        .collect();
    let subdiag = (0..n).map(|i| Rational::from_int(n - i) * alpha).collect();
    let superdiag = (0..n).map(|i| Rational::from_int(i + 1) * beta).collect();
    TridiagonalMatrix::new(diag, subdiag, superdiag).expect("bands constructed consistently")
}

/// The Sylvester-Kac matrix of order `n + 1` (optionally scaled): zero main
/// diagonal, superdiagonal `scale * (1, 2, ..., n)`, subdiagonal
/// `scale * (n, ..., 2, 1)`.
pub fn build_sylvester_kac(n: usize, scale: &Rational) -> Result<TridiagonalMatrix, Error> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    let n = n as i64;
    let diag = vec![Rational::zero(); n as usize + 1];
    let superdiag = (1..=n).map(|i| Rational::from_int(i) * scale).collect();
    let subdiag = (0..n).map(|i| Rational::from_int(n - i) * scale).collect();
    TridiagonalMatrix::new(diag, subdiag, superdiag)
}

/// The tridiagonal Krawtchouk matrix `K(p, n)` of order `n + 1` for
/// `0 < p < 1`: `diag[l] = -p n - l (1 - 2p)`, entry `(l+1, l) = (l+1)(1-p)`,
/// entry `(l, l+1) = p (n - l)`. Equals `transpose(M(n, p, 1-p))` entrywise.
pub fn build_krawtchouk(p: &Rational, n: usize) -> Result<TridiagonalMatrix, Error> {
    if !p.is_positive() || *p >= Rational::one() {
        return Err(Error::InvalidParams("p must satisfy 0 < p < 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    let n = n as i64;
    let one_minus_2p = Rational::one() - Rational::from_int(2) * p;
    let one_minus_p = Rational::one() - p;
    let pn = Rational::from_int(n) * p;
    let diag = (0..=n)
        .map(|l| -&pn - Rational::from_int(l) * &one_minus_2p)
        .collect();
    let subdiag = (0..n)
        .map(|l| Rational::from_int(l + 1) * &one_minus_p)
        .collect();
    let superdiag = (0..n).map(|l| p * Rational::from_int(n - l)).collect();
    TridiagonalMatrix::new(diag, subdiag, superdiag)
}
