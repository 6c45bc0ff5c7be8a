//! Equilibrium distribution and time evolution of the occupancy
//! probabilities `Q_k(t)`.
//!
//! The master equation `dQ/dt = M Q` is solved by spectral expansion
//! `Q(t) = sum_k c_k u_k exp(lambda_k t)`. Expansion coefficients and
//! eigenvectors stay exact; floating point enters only through the
//! exponentials, so `t = 0` and `t = infinity` have fully exact paths.
//! A fixed-step Runge-Kutta integrator provides an independent oracle
//! that shares no code with the spectral route.

use serde::{Deserialize, Serialize};

use crate::exact::{binom_rational, Rational};
use crate::matrices::{build_generator, ModelParams};
use crate::spectral::{decompose_generator, SpectralDecomposition};
use crate::Error;

/// Tolerance for float-mode probability vectors: entries may undershoot
/// zero and the total may drift from one by at most this much before
/// construction fails. Exact mode tolerates nothing.
pub const FLOAT_TOL: f64 = 1e-10;

/// A distribution over occupancy counts `0..=n`, carrying either exact
/// rational entries or floating-point entries produced by a numerical path.
///
/// JSON schema: `{"precision": "exact"|"float", "entries": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProbability", into = "RawProbability")]
pub enum ProbabilityVector {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "precision", content = "entries", rename_all = "lowercase")]
enum RawProbability {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl TryFrom<RawProbability> for ProbabilityVector {
    type Error = Error;
    fn try_from(raw: RawProbability) -> Result<Self, Error> {
        match raw {
            RawProbability::Exact(v) => ProbabilityVector::exact(v),
            RawProbability::Float(v) => ProbabilityVector::float(v),
        }
    }
}

impl From<ProbabilityVector> for RawProbability {
    fn from(p: ProbabilityVector) -> Self {
        match p {
            ProbabilityVector::Exact(v) => RawProbability::Exact(v),
            ProbabilityVector::Float(v) => RawProbability::Float(v),
        }
    }
}

impl ProbabilityVector {
    /// Exact distribution: entries nonnegative, summing to exactly one.
    pub fn exact(entries: Vec<Rational>) -> Result<Self, Error> {
        if entries.is_empty() {
            return Err(Error::InvalidParams("empty probability vector".into()));
        }
        if entries.iter().any(Rational::is_negative) {
            return Err(Error::InvalidParams("negative probability entry".into()));
        }
        let sum: Rational = entries.iter().cloned().sum();
        if sum != Rational::one() {
            return Err(Error::InvalidParams(format!(
                "exact probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(Self::Exact(entries))
    }

    /// Float distribution: entries within `FLOAT_TOL` of nonnegative (tiny
    /// undershoots are clamped to zero), total within `FLOAT_TOL` of one.
    pub fn float(entries: Vec<f64>) -> Result<Self, Error> {
        if entries.is_empty() {
            return Err(Error::InvalidParams("empty probability vector".into()));
        }
        let mut clamped = Vec::with_capacity(entries.len());
        for x in entries {
            if !x.is_finite() || x < -FLOAT_TOL {
                return Err(Error::InvalidParams(format!(
                    "invalid probability entry {x}"
                )));
            }
            clamped.push(x.max(0.0));
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > FLOAT_TOL {
            return Err(Error::InvalidParams(format!(
                "float probabilities must sum to 1 within {FLOAT_TOL}, got {sum}"
            )));
        }
        Ok(Self::Float(clamped))
    }

    /// Exact point mass at occupancy `at`.
    pub fn point_mass(order: usize, at: usize) -> Result<Self, Error> {
        if at >= order {
            return Err(Error::IndexOutOfRange(format!(
                "point mass at {at} in a vector of length {order}"
            )));
        }
        let mut entries = vec![Rational::zero(); order];
        entries[at] = Rational::one();
        Ok(Self::Exact(entries))
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Exact(v) => v.len(),
            Self::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&[Rational]> {
        match self {
            Self::Exact(v) => Some(v),
            Self::Float(_) => None,
        }
    }

    /// Entries lowered to `f64` (identity in float mode).
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match self {
            Self::Exact(v) => v.iter().map(Rational::to_f64).collect(),
            Self::Float(v) => v.clone(),
        }
    }

    /// Entries lifted to exact rationals. Lossless in both modes: a finite
    /// float is itself a rational.
    pub fn to_exact_vec(&self) -> Vec<Rational> {
        match self {
            Self::Exact(v) => v.clone(),
            Self::Float(v) => v
                .iter()
                .map(|&x| Rational::from_f64_exact(x).expect("entries validated finite"))
                .collect(),
        }
    }

    pub fn sum_f64(&self) -> f64 {
        self.to_f64_vec().iter().sum()
    }

    /// Mean occupancy `sum_k k Q_k` in floating point.
    pub fn coverage_f64(&self) -> f64 {
        self.to_f64_vec()
            .iter()
            .enumerate()
            .map(|(k, q)| k as f64 * q)
            .sum()
    }

    /// Mean occupancy, exact when the vector is exact.
    pub fn coverage_exact(&self) -> Option<Rational> {
        self.as_exact().map(|v| {
            v.iter()
                .enumerate()
                .map(|(k, q)| Rational::from_int(k as i64) * q)
                .sum()
        })
    }
}

/// Unnormalized equilibrium weights anchored at `Q_0 = 1`:
/// `Q_k = eta^(-k) C(n, k)`. Requires `eta > 0`; the `eta = 0` limit only
/// exists for the normalized form.
pub fn equilibrium_unnormalized(n: usize, eta: &Rational) -> Result<Vec<Rational>, Error> {
    if !eta.is_positive() {
        return Err(Error::InvalidParams("eta must be > 0".into()));
    }
    Ok((0..=n as i64)
        .map(|k| eta.pow(-k) * binom_rational(n as u64, k))
        .collect())
}

/// Normalized equilibrium `Q'_k = eta^(n-k) C(n, k) / (1 + eta)^n`, the
/// Binomial(n, 1/(1+eta)) distribution. `eta = 0` gives the point mass at
/// full occupancy.
pub fn equilibrium(n: usize, eta: &Rational) -> Result<ProbabilityVector, Error> {
    if eta.is_negative() {
        return Err(Error::InvalidParams("eta must be >= 0".into()));
    }
    let norm = (Rational::one() + eta).pow(n as i64);
    let entries = (0..=n as i64)
        .map(|k| eta.pow(n as i64 - k) * binom_rational(n as u64, k) / &norm)
        .collect();
    ProbabilityVector::exact(entries)
}

/// Equilibrium of the model, `Binomial(n, alpha/(alpha+beta))`.
pub fn equilibrium_for(params: &ModelParams) -> ProbabilityVector {
    equilibrium(params.n(), &params.eta()).expect("eta >= 0 for valid params")
}

/// The normalization constant `((1 + eta) / eta)^n` that divides the
/// unnormalized weights. Requires `eta > 0`.
pub fn normalization_sum(n: usize, eta: &Rational) -> Result<Rational, Error> {
    if !eta.is_positive() {
        return Err(Error::InvalidParams("eta must be > 0".into()));
    }
    Ok(((Rational::one() + eta) / eta).pow(n as i64))
}

/// Mean equilibrium occupancy `n alpha / (alpha + beta)`.
pub fn average_coverage(params: &ModelParams) -> Rational {
    Rational::from_int(params.n() as i64) * params.alpha() / (params.alpha() + params.beta())
}

/// Exact coefficients `c` of the expansion `Q(t) = sum_k c_k u_k
/// exp(lambda_k t)`. Whenever the initial vector sums to one,
/// `c_0 = 1/(1+eta)^n` because only mode 0 has a nonzero entry sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpansionCoefficients {
    coeffs: Vec<Rational>,
}

impl ExpansionCoefficients {
    pub fn as_slice(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn c0(&self) -> &Rational {
        &self.coeffs[0]
    }
}

/// Solves `U c = Q0` exactly by rational Gaussian elimination, where column
/// `k` of `U` is the eigenvector `u_k`. `U` is invertible for valid rates
/// (the eigenvalues are distinct); a singular system is reported rather
/// than silently misdecomposed.
pub fn expansion_coefficients(
    decomp: &SpectralDecomposition,
    q0: &ProbabilityVector,
) -> Result<ExpansionCoefficients, Error> {
    let m = decomp.order();
    if q0.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "initial vector length {} vs order {}",
            q0.len(),
            m
        )));
    }
    let mut a: Vec<Vec<Rational>> = (0..m)
        .map(|i| (0..m).map(|k| decomp.vector(k)[i].clone()).collect())
        .collect();
    let mut b = q0.to_exact_vec();

    // forward elimination with first-nonzero pivoting; exact arithmetic
    // needs no magnitude-based pivot selection
    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::SingularSystem)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..m {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] / &a[col][col];
            // rows col < row, so the split keeps both borrows disjoint
            let (upper, lower) = a.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= &factor * src;
            }
            let sub = &factor * &b[col];
            b[row] -= sub;
        }
    }
    // back substitution
    let mut c = vec![Rational::zero(); m];
    for row in (0..m).rev() {
        let mut acc = b[row].clone();
        for j in row + 1..m {
            acc -= &a[row][j] * &c[j];
        }
        c[row] = acc / &a[row][row];
    }
    Ok(ExpansionCoefficients { coeffs: c })
}

/// Precomputed spectral propagator for one initial condition.
///
/// Everything that can be exact is computed exactly once at construction;
/// evaluation at a finite positive time lowers the products `c_k u_{k,l}`
/// to `f64` and applies the exponentials.
pub struct Propagator {
    q0: ProbabilityVector,
    decomp: SpectralDecomposition,
    coeffs: ExpansionCoefficients,
    /// `terms[k][l] = c_k u_{k,l}` lowered to f64
    terms: Vec<Vec<f64>>,
    lambdas: Vec<f64>,
}

impl Propagator {
    pub fn new(params: &ModelParams, q0: &ProbabilityVector) -> Result<Self, Error> {
        let decomp = decompose_generator(params);
        let coeffs = expansion_coefficients(&decomp, q0)?;
        let terms = (0..decomp.order())
            .map(|k| {
                decomp
                    .vector(k)
                    .iter()
                    .map(|u| (coeffs.get(k) * u).to_f64())
                    .collect()
            })
            .collect();
        let lambdas = decomp.eigenvalues().iter().map(Rational::to_f64).collect();
        Ok(Self {
            q0: q0.clone(),
            decomp,
            coeffs,
            terms,
            lambdas,
        })
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    pub fn coefficients(&self) -> &ExpansionCoefficients {
        &self.coeffs
    }

    /// The exact `t -> infinity` limit `c_0 u_0`.
    pub fn equilibrium_limit(&self) -> ProbabilityVector {
        let entries: Vec<Rational> = self
            .decomp
            .vector(0)
            .iter()
            .map(|u| self.coeffs.c0() * u)
            .collect();
        ProbabilityVector::Exact(entries)
    }

    /// `Q(t)`. Exact at `t = 0` (the initial vector) and `t = infinity`
    /// (the equilibrium limit); floating point in between.
    pub fn at(&self, t: f64) -> Result<ProbabilityVector, Error> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidParams(format!("time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(self.q0.clone());
        }
        if t.is_infinite() {
            return Ok(self.equilibrium_limit());
        }
        let m = self.decomp.order();
        let mut q = vec![0.0; m];
        for (k, row) in self.terms.iter().enumerate() {
            let w = (self.lambdas[k] * t).exp();
            for (l, term) in row.iter().enumerate() {
                q[l] += term * w;
            }
        }
        ProbabilityVector::float(q)
    }
}

/// One-shot spectral propagation `Q(t) = sum_k c_k u_k exp(lambda_k t)`.
pub fn propagate(
    params: &ModelParams,
    q0: &ProbabilityVector,
    t: f64,
) -> Result<ProbabilityVector, Error> {
    Propagator::new(params, q0)?.at(t)
}

/// Classical fixed-step fourth-order Runge-Kutta integration of
/// `dQ/dt = M Q`, entirely in floating point. Independent of the spectral
/// route; global error `O(step^4)`.
pub fn rk4_oracle(
    params: &ModelParams,
    q0: &ProbabilityVector,
    t: f64,
    step: f64,
) -> Result<ProbabilityVector, Error> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "step must be > 0, got {step}"
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParams(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let m = build_generator(params);
    let diag: Vec<f64> = m.diag().iter().map(Rational::to_f64).collect();
    let sub: Vec<f64> = m.subdiag().iter().map(Rational::to_f64).collect();
    let sup: Vec<f64> = m.superdiag().iter().map(Rational::to_f64).collect();
    let order = m.order();

    let deriv = |q: &[f64]| -> Vec<f64> {
        (0..order)
            .map(|i| {
                let mut d = diag[i] * q[i];
                if i > 0 {
                    d += sub[i - 1] * q[i - 1];
                }
                if i + 1 < order {
                    d += sup[i] * q[i + 1];
                }
                d
            })
            .collect()
    };
    let axpy = |q: &[f64], h: f64, k: &[f64]| -> Vec<f64> {
        q.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };

    let mut q = q0.to_f64_vec();
    let mut remaining = t;
    while remaining > 0.0 {
        let h = step.min(remaining);
        let k1 = deriv(&q);
        let k2 = deriv(&axpy(&q, h / 2.0, &k1));
        let k3 = deriv(&axpy(&q, h / 2.0, &k2));
        let k4 = deriv(&axpy(&q, h, &k3));
        for i in 0..order {
            q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        remaining -= h;
    }
    ProbabilityVector::float(q)
}

fn fmt_prob(x: f64) -> String {
    format!("{x:.15}")
}

/// Time-series CSV with header `t,Q0..Qn,sum,coverage`, one row per grid
/// time. A leading comment line flags the precision: `exact` when every
/// requested time hits an exact path (`0` or `inf`), else `float`. Values
/// are decimal strings either way. With `oracle_step` set, columns
/// `dQ0..dQn` append the absolute per-entry disagreement with the
/// Runge-Kutta oracle (infinite times compare against the exact limit of
/// the propagator itself and report zeros).
pub fn time_series_csv(
    params: &ModelParams,
    q0: &ProbabilityVector,
    times: &[f64],
    oracle_step: Option<f64>,
) -> Result<String, Error> {
    let prop = Propagator::new(params, q0)?;
    let order = params.order();
    let all_exact = times.iter().all(|&t| t == 0.0 || t.is_infinite());

    let mut out = String::new();
    out.push_str(if all_exact {
        "# precision: exact\n"
    } else {
        "# precision: float\n"
    });
    out.push('t');
    for k in 0..order {
        out.push_str(&format!(",Q{k}"));
    }
    out.push_str(",sum,coverage");
    if oracle_step.is_some() {
        for k in 0..order {
            out.push_str(&format!(",dQ{k}"));
        }
    }
    out.push('\n');

    for &t in times {
        let q = prop.at(t)?;
        let values = q.to_f64_vec();
        out.push_str(&format!("{t}"));
        for v in &values {
            out.push(',');
            out.push_str(&fmt_prob(*v));
        }
        out.push(',');
        out.push_str(&fmt_prob(q.sum_f64()));
        out.push(',');
        out.push_str(&fmt_prob(q.coverage_f64()));
        if let Some(step) = oracle_step {
            let reference = if t.is_infinite() {
                prop.equilibrium_limit()
            } else {
                rk4_oracle(params, q0, t, step)?
            };
            for (a, b) in values.iter().zip(reference.to_f64_vec()) {
                out.push_str(&format!(",{:.3e}", (a - b).abs()));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::TridiagonalMatrix;
    use crate::spectral::eigenvector_generator;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn rationals(values: &[(i64, i64)]) -> Vec<Rational> {
        values.iter().map(|&(n, d)| r(n, d)).collect()
    }

    fn params(n: usize, a: i64, b: i64) -> ModelParams {
        ModelParams::from_ints(n, a, b).unwrap()
    }

    fn assert_zero_vec(v: &[Rational]) {
        assert!(v.iter().all(Rational::is_zero), "expected zero, got {v:?}");
    }

    fn exact_matvec_zero(m: &TridiagonalMatrix, v: &[Rational]) {
        assert_zero_vec(&m.matvec(v).unwrap());
    }

    #[test]
    fn unnormalized_examples() {
        assert_eq!(
            equilibrium_unnormalized(2, &Rational::from_int(2)).unwrap(),
            rationals(&[(1, 1), (1, 1), (1, 4)])
        );
        assert_eq!(
            equilibrium_unnormalized(2, &Rational::one()).unwrap(),
            rationals(&[(1, 1), (2, 1), (1, 1)])
        );
        assert!(equilibrium_unnormalized(2, &Rational::zero()).is_err());
    }

    #[test]
    fn unnormalized_weights_are_stationary() {
        // the generator rows ARE the stationarity recursion; both rate
        // scalings of the same eta must annihilate the weights
        for (a, b) in [(1, 2), (3, 6), (5, 2)] {
            let p = params(6, a, b);
            let q = equilibrium_unnormalized(6, &p.eta()).unwrap();
            exact_matvec_zero(&build_generator(&p), &q);
        }
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(
            equilibrium(2, &Rational::from_int(2))
                .unwrap()
                .as_exact()
                .unwrap(),
            rationals(&[(4, 9), (4, 9), (1, 9)]).as_slice()
        );
        assert_eq!(
            equilibrium(2, &Rational::one())
                .unwrap()
                .as_exact()
                .unwrap(),
            rationals(&[(1, 4), (1, 2), (1, 4)]).as_slice()
        );
        assert_eq!(
            equilibrium(3, &Rational::zero())
                .unwrap()
                .as_exact()
                .unwrap(),
            rationals(&[(0, 1), (0, 1), (0, 1), (1, 1)]).as_slice()
        );
        assert!(equilibrium(3, &r(-1, 2)).is_err());
    }

    #[test]
    fn equilibrium_is_binomial() {
        for (n, eta) in [(5usize, r(2, 1)), (8, r(3, 7)), (4, r(1, 1))] {
            let q = equilibrium(n, &eta).unwrap();
            let p = (Rational::one() + &eta).recip();
            let one_minus_p = Rational::one() - &p;
            for (k, entry) in q.as_exact().unwrap().iter().enumerate() {
                let expected = binom_rational(n as u64, k as i64)
                    * p.pow(k as i64)
                    * one_minus_p.pow((n - k) as i64);
                assert_eq!(*entry, expected, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(
            normalization_sum(2, &Rational::from_int(2)).unwrap(),
            r(9, 4)
        );
        assert_eq!(normalization_sum(1, &Rational::one()).unwrap(), r(2, 1));
        let eta = r(3, 2);
        let direct: Rational = equilibrium_unnormalized(5, &eta).unwrap().into_iter().sum();
        assert_eq!(normalization_sum(5, &eta).unwrap(), direct);
        assert!(normalization_sum(2, &Rational::zero()).is_err());
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(average_coverage(&params(10, 1, 2)), r(10, 3));
        assert_eq!(average_coverage(&params(7, 3, 3)), r(7, 2));
        assert_eq!(average_coverage(&params(4, 2, 0)), r(4, 1));
        // direct mean against the closed form
        for (n, a, b) in [(6usize, 1, 2), (9, 3, 5), (11, 7, 2)] {
            let p = params(n, a, b);
            let mean = equilibrium_for(&p).coverage_exact().unwrap();
            assert_eq!(mean, average_coverage(&p));
        }
    }

    #[test]
    fn worked_expansion_example() {
        let p = params(2, 1, 2);
        let decomp = decompose_generator(&p);
        let q0 = ProbabilityVector::point_mass(3, 0).unwrap();
        let c = expansion_coefficients(&decomp, &q0).unwrap();
        assert_eq!(
            c.as_slice(),
            rationals(&[(1, 9), (-2, 9), (1, 9)]).as_slice()
        );

        // back-substitution: sum_k c_k u_k must reproduce Q0
        let mut recon = vec![Rational::zero(); 3];
        for k in 0..3 {
            for (l, u) in decomp.vector(k).iter().enumerate() {
                recon[l] += c.get(k) * u;
            }
        }
        assert_eq!(recon, q0.to_exact_vec());
    }

    #[test]
    fn equilibrium_excites_only_mode_zero() {
        let p = params(5, 3, 2);
        let decomp = decompose_generator(&p);
        let c = expansion_coefficients(&decomp, &equilibrium_for(&p)).unwrap();
        let norm = (Rational::one() + p.eta()).pow(5);
        assert_eq!(*c.c0(), norm.recip());
        for k in 1..=5 {
            assert!(c.get(k).is_zero(), "k={k}");
        }
    }

    #[test]
    fn mode_zero_is_scaled_equilibrium() {
        for (n, a, b) in [(4usize, 1, 2), (7, 3, 5), (5, 7, 2)] {
            let p = params(n, a, b);
            let u0 = eigenvector_generator(&p, 0).unwrap();
            let q = equilibrium_for(&p);
            let norm = (Rational::one() + p.eta()).pow(n as i64);
            for (u, e) in u0.iter().zip(q.as_exact().unwrap()) {
                assert_eq!(*u, &norm * e);
            }
        }
    }

    #[test]
    fn mode_sums() {
        for (n, a, b) in [(6usize, 1, 2), (9, 3, 5)] {
            let p = params(n, a, b);
            let norm = (Rational::one() + p.eta()).pow(n as i64);
            for k in 0..=n {
                let total: Rational = eigenvector_generator(&p, k).unwrap().into_iter().sum();
                if k == 0 {
                    assert_eq!(total, norm);
                } else {
                    assert!(total.is_zero(), "k={k}");
                }
            }
        }
    }

    #[test]
    fn propagate_exact_endpoints() {
        let p = params(2, 1, 2);
        let q0 = ProbabilityVector::point_mass(3, 0).unwrap();
        let prop = Propagator::new(&p, &q0).unwrap();

        assert_eq!(prop.at(0.0).unwrap(), q0);
        let limit = prop.at(f64::INFINITY).unwrap();
        assert_eq!(
            limit.as_exact().unwrap(),
            rationals(&[(4, 9), (4, 9), (1, 9)]).as_slice()
        );
        assert!(prop.at(-1.0).is_err());
        assert!(prop.at(f64::NAN).is_err());
    }

    #[test]
    fn propagate_conserves_probability() {
        let p = params(8, 3, 5);
        let q0 = ProbabilityVector::point_mass(9, 2).unwrap();
        let prop = Propagator::new(&p, &q0).unwrap();
        for t in [0.01, 0.1, 0.7, 2.5, 30.0] {
            let q = prop.at(t).unwrap();
            assert!((q.sum_f64() - 1.0).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn propagate_matches_rk4() {
        let p = params(5, 1, 2);
        let q0 = ProbabilityVector::point_mass(6, 0).unwrap();
        for t in [0.25, 1.0] {
            let spectral = propagate(&p, &q0, t).unwrap().to_f64_vec();
            let rk4 = rk4_oracle(&p, &q0, t, 1e-3).unwrap().to_f64_vec();
            for (a, b) in spectral.iter().zip(&rk4) {
                assert!((a - b).abs() < 1e-9, "t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rk4_basics() {
        let p = params(4, 1, 2);
        let q0 = ProbabilityVector::point_mass(5, 0).unwrap();
        assert_eq!(
            rk4_oracle(&p, &q0, 0.0, 1e-3).unwrap().to_f64_vec(),
            q0.to_f64_vec()
        );
        let q = rk4_oracle(&p, &q0, 10.0, 1e-3).unwrap();
        assert!((q.sum_f64() - 1.0).abs() < 1e-10);
        assert!(rk4_oracle(&p, &q0, 1.0, 0.0).is_err());
        assert!(rk4_oracle(&p, &q0, -1.0, 1e-3).is_err());
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::exact(rationals(&[(1, 2), (1, 2)])).is_ok());
        assert!(ProbabilityVector::exact(rationals(&[(1, 2), (1, 3)])).is_err());
        assert!(ProbabilityVector::exact(rationals(&[(3, 2), (-1, 2)])).is_err());
        assert!(ProbabilityVector::exact(vec![]).is_err());

        let f = ProbabilityVector::float(vec![0.5, 0.5 - 1e-13, -1e-13]).unwrap();
        assert_eq!(f.to_f64_vec()[2], 0.0);
        assert!(ProbabilityVector::float(vec![0.5, 0.4]).is_err());
        assert!(ProbabilityVector::float(vec![1.5, -0.5]).is_err());

        let pm = ProbabilityVector::point_mass(4, 3).unwrap();
        assert_eq!(pm.coverage_exact().unwrap(), r(3, 1));
        assert!(ProbabilityVector::point_mass(4, 4).is_err());
    }

    #[test]
    fn probability_vector_serde() {
        let q = ProbabilityVector::exact(rationals(&[(1, 3), (2, 3)])).unwrap();
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"{"precision":"exact","entries":["1/3","2/3"]}"#);
        assert_eq!(serde_json::from_str::<ProbabilityVector>(&json).unwrap(), q);

        // invalid distributions must not deserialize
        let bad = r#"{"precision":"exact","entries":["1/3","1/3"]}"#;
        assert!(serde_json::from_str::<ProbabilityVector>(bad).is_err());
    }

    #[test]
    fn csv_shape_and_precision_flag() {
        let p = params(2, 1, 2);
        let q0 = ProbabilityVector::point_mass(3, 0).unwrap();

        let exact = time_series_csv(&p, &q0, &[0.0, f64::INFINITY], None).unwrap();
        let mut lines = exact.lines();
        assert_eq!(lines.next().unwrap(), "# precision: exact");
        assert_eq!(lines.next().unwrap(), "t,Q0,Q1,Q2,sum,coverage");
        let row0 = lines.next().unwrap();
        assert!(row0.starts_with("0,1.000000000000000,0.000000000000000"));
        let row_inf = lines.next().unwrap();
        assert!(row_inf.starts_with("inf,0.444444444444444"), "{row_inf}");

        let float = time_series_csv(&p, &q0, &[0.5], Some(1e-3)).unwrap();
        let mut lines = float.lines();
        assert_eq!(lines.next().unwrap(), "# precision: float");
        assert_eq!(lines.next().unwrap(), "t,Q0,Q1,Q2,sum,coverage,dQ0,dQ1,dQ2");
        assert_eq!(lines.next().unwrap().split(',').count(), 9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn c0_is_normalization_reciprocal(
            n in 1usize..10,
            weights in proptest::collection::vec(0u32..100, 2..11),
        ) {
            // any exactly normalized initial vector excites mode 0 with
            // coefficient 1/(1+eta)^n
            let p = params(n, 1, 2);
            let mut w: Vec<Rational> = (0..=n)
                .map(|i| Rational::from_int(*weights.get(i).unwrap_or(&1) as i64 + 1))
                .collect();
            let total: Rational = w.iter().cloned().sum();
            for x in &mut w {
                *x = &*x / &total;
            }
            let q0 = ProbabilityVector::exact(w).unwrap();
            let c = expansion_coefficients(&decompose_generator(&p), &q0).unwrap();
            let expected = (Rational::one() + p.eta()).pow(n as i64).recip();
            prop_assert_eq!(c.c0(), &expected);
        }

        #[test]
        fn equilibrium_sums_to_one(n in 1usize..30, en in 0i64..20, ed in 1i64..9) {
            let eta = Rational::new(en, ed).unwrap();
            let q = equilibrium(n, &eta).unwrap();
            let total: Rational = q.to_exact_vec().into_iter().sum();
            prop_assert_eq!(total, Rational::one());
            let m = build_generator(
                &ModelParams::new(n, Rational::one(), eta).unwrap());
            for entry in m.matvec(q.as_exact().unwrap()).unwrap() {
                prop_assert!(entry.is_zero());
            }
        }
    }
}
