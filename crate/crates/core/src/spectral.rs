//! Closed-form eigenpairs of the model matrices, each paired with an exact
//! verifier that re-derives the claim along an independent route.
//!
//! The generator `M(n, alpha, beta)` has eigenvalues `-k(alpha+beta)` for
//! `k = 0..n` with explicit rational eigenvectors `u_k` built from binomial
//! sums in `eta = beta/alpha`. The verifiers never reuse the construction
//! they check: eigenvalues are confirmed by evaluating the characteristic
//! polynomial, eigenvectors by exact residuals `M u - lambda u`, and row
//! identities by direct substitution.

use std::fmt;

use num::bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::exact::{binom, Rational};
use crate::matrices::{build_generator, build_sylvester_kac, ModelParams, TridiagonalMatrix};
use crate::poly::{charpoly_tridiagonal, Polynomial};
use crate::Error;

/// Where a decomposition came from. The closed form is the default; `Oracle`
/// marks decompositions reconstructed by an independent route (for
/// cross-checks and external data).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralSource {
    ClosedForm,
    Oracle,
}

/// Full eigendecomposition of a generator: eigenvalue `eigenvalues[k]` pairs
/// with the unnormalized column `vectors[k]`.
///
/// JSON schema: `{n, alpha, beta, eigenvalues, vectors, source}` with every
/// scalar in `"num/den"` form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecomposition", into = "RawDecomposition")]
pub struct SpectralDecomposition {
    params: ModelParams,
    eigenvalues: Vec<Rational>,
    vectors: Vec<Vec<Rational>>,
    source: SpectralSource,
}

#[derive(Serialize, Deserialize)]
struct RawDecomposition {
    n: usize,
    alpha: Rational,
    beta: Rational,
    eigenvalues: Vec<Rational>,
    vectors: Vec<Vec<Rational>>,
    source: SpectralSource,
}

impl TryFrom<RawDecomposition> for SpectralDecomposition {
    type Error = Error;
    fn try_from(raw: RawDecomposition) -> Result<Self, Error> {
        let params = ModelParams::new(raw.n, raw.alpha, raw.beta)?;
        let order = params.order();
        if raw.eigenvalues.len() != order || raw.vectors.len() != order {
            return Err(Error::DimensionMismatch(format!(
                "expected {} eigenpairs, got {} eigenvalues and {} vectors",
                order,
                raw.eigenvalues.len(),
                raw.vectors.len()
            )));
        }
        if let Some(bad) = raw.vectors.iter().find(|v| v.len() != order) {
            return Err(Error::DimensionMismatch(format!(
                "eigenvector length {} does not match order {}",
                bad.len(),
                order
            )));
        }
        Ok(Self {
            params,
            eigenvalues: raw.eigenvalues,
            vectors: raw.vectors,
            source: raw.source,
        })
    }
}

impl From<SpectralDecomposition> for RawDecomposition {
    fn from(d: SpectralDecomposition) -> Self {
        RawDecomposition {
            n: d.params.n(),
            alpha: d.params.alpha().clone(),
            beta: d.params.beta().clone(),
            eigenvalues: d.eigenvalues,
            vectors: d.vectors,
            source: d.source,
        }
    }
}

impl SpectralDecomposition {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn order(&self) -> usize {
        self.params.order()
    }

    pub fn eigenvalues(&self) -> &[Rational] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> &Rational {
        &self.eigenvalues[k]
    }

    /// Unnormalized eigenvector `u_k` as a column.
    pub fn vector(&self, k: usize) -> &[Rational] {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.vectors
    }

    pub fn source(&self) -> SpectralSource {
        self.source
    }

    /// Exact residual `M u_k - lambda_k u_k` of pair `k`.
    pub fn residual(&self, k: usize) -> Result<Vec<Rational>, Error> {
        if k >= self.order() {
            return Err(Error::IndexOutOfRange(format!(
                "k = {}, order = {}",
                k,
                self.order()
            )));
        }
        let m = build_generator(&self.params);
        eigen_residual(&m, &self.eigenvalues[k], &self.vectors[k])
    }

    /// True iff every stored pair satisfies its eigen equation exactly.
    pub fn verify_residuals(&self) -> bool {
        (0..self.order()).all(|k| {
            self.residual(k)
                .map(|r| r.iter().all(Rational::is_zero))
                .unwrap_or(false)
        })
    }
}

/// Eigenvalues `-k(alpha+beta)` for `k = 0..n`, strictly decreasing.
pub fn eigenvalues_generator(params: &ModelParams) -> Vec<Rational> {
    let rate = params.alpha() + params.beta();
    (0..=params.n() as i64)
        .map(|k| Rational::from_int(-k) * &rate)
        .collect()
}

/// Unnormalized eigenvector for eigenvalue `-k(alpha+beta)`:
///
/// `u_{k,l} = sum_j (-1)^(k+l+j) eta^(n-k-j) C(k, l-j) C(n-k, j)`
///
/// where `eta = beta/alpha`, `j` ranges over `max(0, l-k) ..= min(n-k, l)`
/// (the terms the vanishing-binomial convention keeps), and `0^0 = 1` so the
/// `eta = 0` case keeps its `j = n-k` term.
pub fn eigenvector_generator(params: &ModelParams, k: usize) -> Result<Vec<Rational>, Error> {
    let n = params.n();
    if k > n {
        return Err(Error::IndexOutOfRange(format!("k = {k}, n = {n}")));
    }
    let eta = params.eta();
    let nk = n - k;
    let eta_pow: Vec<Rational> = (0..=nk).map(|e| eta.pow(e as i64)).collect();
    let row_k: Vec<BigInt> = (0..=k).map(|i| binom(k as u64, i as i64)).collect();
    let row_nk: Vec<BigInt> = (0..=nk).map(|j| binom(nk as u64, j as i64)).collect();

    let mut u = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut acc = Rational::zero();
        for j in l.saturating_sub(k)..=nk.min(l) {
            let term = Rational::from_bigint(&row_k[l - j] * &row_nk[j]) * &eta_pow[nk - j];
            if (k + l + j).is_multiple_of(2) {
                acc += term;
            } else {
                acc -= term;
            }
        }
        u.push(acc);
    }
    Ok(u)
}

/// All `n + 1` closed-form eigenpairs of the generator.
pub fn decompose_generator(params: &ModelParams) -> SpectralDecomposition {
    let eigenvalues = eigenvalues_generator(params);
    let vectors = (0..=params.n())
        .map(|k| eigenvector_generator(params, k).expect("k <= n by construction"))
        .collect();
    SpectralDecomposition {
        params: params.clone(),
        eigenvalues,
        vectors,
        source: SpectralSource::ClosedForm,
    }
}

/// Exact residual `T v - lambda v`.
pub fn eigen_residual(
    t: &TridiagonalMatrix,
    lambda: &Rational,
    v: &[Rational],
) -> Result<Vec<Rational>, Error> {
    let tv = t.matvec(v)?;
    Ok(tv
        .into_iter()
        .zip(v)
        .map(|(tv_i, v_i)| tv_i - lambda * v_i)
        .collect())
}

/// Sum of absolute values, an exact vector norm.
pub fn l1_norm(v: &[Rational]) -> Rational {
    v.iter().map(Rational::abs).sum()
}

/// Row `l` of the eigenvalue equation for pair `k`, reduced by `alpha` to a
/// polynomial in `eta` and evaluated exactly. Interior rows:
///
/// `(n-l+1) u_{l-1} + (k+l-n + (k-l) eta) u_l + (l+1) eta u_{l+1}`
///
/// boundary rows `l = 0`: `(-n+k+k eta) u_0 + eta u_1`, and `l = n`:
/// `u_{n-1} + (k + (k-n) eta) u_n`. Each must vanish identically.
pub fn verify_row_equation(params: &ModelParams, k: usize, l: usize) -> Result<Rational, Error> {
    let n = params.n();
    if k > n || l > n {
        return Err(Error::IndexOutOfRange(format!("k = {k}, l = {l}, n = {n}")));
    }
    let u = eigenvector_generator(params, k)?;
    let eta = params.eta();
    let (ki, li, ni) = (k as i64, l as i64, n as i64);
    let res = if l == 0 {
        (Rational::from_int(ki - ni) + Rational::from_int(ki) * &eta) * &u[0] + &eta * &u[1]
    } else if l == n {
        u[n - 1].clone() + (Rational::from_int(ki) + Rational::from_int(ki - ni) * &eta) * &u[n]
    } else {
        Rational::from_int(ni - li + 1) * &u[l - 1]
            + (Rational::from_int(ki + li - ni) + Rational::from_int(ki - li) * &eta) * &u[l]
            + Rational::from_int(li + 1) * &eta * &u[l + 1]
    };
    Ok(res)
}

/// Spectrum `scale * (2k - n)` for `k = 0..n` of the (scaled) Sylvester-Kac
/// matrix, in ascending order for positive `scale`.
pub fn sylvester_kac_spectrum(n: usize, scale: &Rational) -> Result<Vec<Rational>, Error> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    let n = n as i64;
    Ok((0..=n)
        .map(|k| Rational::from_int(2 * k - n) * scale)
        .collect())
}

/// Checks the determinant factorization for the progression `a_k = k c`:
/// with `P_m(lambda)` the determinant of the order-`m` matrix carrying
/// `lambda` on the diagonal, `a_1..a_{m-1}` above and reversed below,
///
/// `P_{n+1}(lambda) = (lambda^2 - a_n^2) P_{n-1}(lambda)`
///
/// as an exact polynomial identity. Both sides are computed through the
/// minor recurrence: a zero-diagonal tridiagonal `S` is diagonally similar
/// to `-S`, so `det(lambda I + S) = det(lambda I - S) = charpoly(S)`.
pub fn mazza_factorization_check(n: usize, c: &Rational) -> Result<bool, Error> {
    if n < 2 {
        return Err(Error::InvalidParams("n must be >= 2".into()));
    }
    let big = charpoly_tridiagonal(&build_sylvester_kac(n, c)?);
    let small = if n == 2 {
        // order-1 analog: determinant of the 1x1 matrix (lambda)
        Polynomial::x()
    } else {
        charpoly_tridiagonal(&build_sylvester_kac(n - 2, c)?)
    };
    let a_n = Rational::from_int(n as i64) * c;
    let factor = Polynomial::new(vec![-(&a_n * &a_n), Rational::zero(), Rational::one()]);
    Ok(big == factor.mul(&small))
}

/// Krawtchouk spectrum `0, -1, ..., -n`, independent of `p`.
pub fn krawtchouk_eigenvalues(n: usize) -> Result<Vec<Rational>, Error> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    Ok((0..=n as i64).map(|k| Rational::from_int(-k)).collect())
}

/// The monic polynomial `prod_{k=0}^{n} (x + k)` that `charpoly(K(p, n))`
/// must equal. Comparing monic forms absorbs the sign difference between
/// the `det(K - xI)` and `det(xI - K)` conventions at odd orders.
pub fn krawtchouk_charpoly_product(n: usize) -> Polynomial {
    let roots: Vec<Rational> = (0..=n as i64).map(Rational::from_int).collect();
    Polynomial::from_roots(&roots.iter().map(|r| -r).collect::<Vec<_>>())
}

/// Direct evaluation of the claimed Krawtchouk eigenvector components
///
/// `u_{k,l} = sum_{j=0}^{min(l,k)} (-1)^(l-j) C(l,j) C(n-j, k-j) p^(-j)`
///
/// exactly as printed. No eigenvector property is asserted here: desk checks
/// at `n = 1` contradict the claimed eigenvalue pairing, so callers must ask
/// [`classify_eigvec_claim`] what the vector actually is.
pub fn krawtchouk_eigenvector_thm1(
    p: &Rational,
    n: usize,
    k: usize,
) -> Result<Vec<Rational>, Error> {
    if !p.is_positive() || *p >= Rational::one() {
        return Err(Error::InvalidParams("p must satisfy 0 < p < 1".into()));
    }
    if k > n {
        return Err(Error::IndexOutOfRange(format!("k = {k}, n = {n}")));
    }
    let p_inv_pow: Vec<Rational> = (0..=k as i64).map(|j| p.pow(-j)).collect();
    let mut u = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut acc = Rational::zero();
        for (j, p_inv) in p_inv_pow.iter().enumerate().take(l.min(k) + 1) {
            let mag = binom(l as u64, j as i64) * binom((n - j) as u64, (k - j) as i64);
            let term = Rational::from_bigint(mag) * p_inv;
            if (l - j).is_multiple_of(2) {
                acc += term;
            } else {
                acc -= term;
            }
        }
        u.push(acc);
    }
    Ok(u)
}

/// Classification of one candidate eigenvalue for a given vector.
#[derive(Debug, Clone, Serialize)]
pub struct EigvecClassification {
    pub eigenvalue: Rational,
    /// `l1_norm(T v - lambda v)`; zero iff `v` is a right eigenvector.
    pub right_residual_l1: Rational,
    /// `l1_norm(T^T v - lambda v)`; zero iff `v` is a left eigenvector.
    pub left_residual_l1: Rational,
}

impl EigvecClassification {
    pub fn is_right(&self) -> bool {
        self.right_residual_l1.is_zero()
    }

    pub fn is_left(&self) -> bool {
        self.left_residual_l1.is_zero()
    }

    pub fn verdict(&self) -> &'static str {
        match (self.is_right(), self.is_left()) {
            (true, true) => "right and left eigenvector",
            (true, false) => "right eigenvector",
            (false, true) => "left eigenvector",
            (false, false) => "neither",
        }
    }
}

/// Per-eigenvalue report produced by [`classify_eigvec_claim`].
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub entries: Vec<EigvecClassification>,
}

impl ClassificationReport {
    pub fn right_eigenvalues(&self) -> Vec<&Rational> {
        self.entries
            .iter()
            .filter(|e| e.is_right())
            .map(|e| &e.eigenvalue)
            .collect()
    }

    pub fn left_eigenvalues(&self) -> Vec<&Rational> {
        self.entries
            .iter()
            .filter(|e| e.is_left())
            .map(|e| &e.eigenvalue)
            .collect()
    }

    /// True iff the vector is not a right eigenvector for any candidate.
    pub fn no_right_eigenvalue(&self) -> bool {
        self.entries.iter().all(|e| !e.is_right())
    }

    pub fn entry_for(&self, lambda: &Rational) -> Option<&EigvecClassification> {
        self.entries.iter().find(|e| e.eigenvalue == *lambda)
    }
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "lambda = {}: {} (|Tv - lv|_1 = {}, |T'v - lv|_1 = {})",
                e.eigenvalue,
                e.verdict(),
                e.right_residual_l1,
                e.left_residual_l1
            )?;
        }
        Ok(())
    }
}

/// Tests a nonzero vector against every candidate eigenvalue of `t`,
/// reporting exact residual norms for the right and left eigen equations.
/// The candidate set is the closed-form spectrum supplied by the caller;
/// root-finding for arbitrary matrices is out of scope.
pub fn classify_eigvec_claim(
    t: &TridiagonalMatrix,
    v: &[Rational],
    candidates: &[Rational],
) -> Result<ClassificationReport, Error> {
    if v.iter().all(Rational::is_zero) {
        return Err(Error::InvalidParams(
            "cannot classify the zero vector".into(),
        ));
    }
    let tv = t.matvec(v)?;
    let ttv = t.matvec_left(v)?;
    let entries = candidates
        .iter()
        .map(|lambda| {
            let right: Vec<Rational> = tv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
            let left: Vec<Rational> = ttv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
            EigvecClassification {
                eigenvalue: lambda.clone(),
                right_residual_l1: l1_norm(&right),
                left_residual_l1: l1_norm(&left),
            }
        })
        .collect();
    Ok(ClassificationReport { entries })
}

/// Left eigenvectors of `K(p, n)` obtained through the transposition
/// identity `K(p, n) = M(n, p, 1-p)^T`: the right eigenvector of `M` for
/// eigenvalue `-k(p + (1-p)) = -k` is a left eigenvector of `K`.
pub fn krawtchouk_left_eigenvectors_via_transposition(
    p: &Rational,
    n: usize,
    k: usize,
) -> Result<Vec<Rational>, Error> {
    if !p.is_positive() || *p >= Rational::one() {
        return Err(Error::InvalidParams("p must satisfy 0 < p < 1".into()));
    }
    let params = ModelParams::new(n, p.clone(), Rational::one() - p)?;
    eigenvector_generator(&params, k)
}
