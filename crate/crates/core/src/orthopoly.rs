//! Normalized Gegenbauer and adjacent Jacobi polynomials.
//!
//! Every polynomial family here is normalized to take the value 1 at `t = 1`.
//! `P_i^{(n)}` is the Gegenbauer polynomial orthogonal with respect to the
//! probability measure `dmu_n(t) = gamma_n (1 - t^2)^{(n-3)/2} dt` on `[-1, 1]`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest polynomial degree accepted anywhere in the crate.
pub const MAX_POLY_DEGREE: usize = 64;

/// A real polynomial in the power basis, `c_0 + c_1 t + ... + c_d t^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MonomialPoly {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MonomialPoly {
    type Error = Error;

    fn try_from(coeffs: Vec<f64>) -> Result<Self> {
        MonomialPoly::new(coeffs)
    }
}

impl From<MonomialPoly> for Vec<f64> {
    fn from(p: MonomialPoly) -> Self {
        p.coeffs
    }
}

impl MonomialPoly {
    /// Builds a polynomial, dropping exact trailing zeros.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        if coeffs.len() - 1 > MAX_POLY_DEGREE {
            return Err(Error::DegreeTooLarge(coeffs.len() - 1, MAX_POLY_DEGREE));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite polynomial coefficient".into()));
        }
        Ok(MonomialPoly { coeffs })
    }

    pub fn constant(c: f64) -> Self {
        MonomialPoly { coeffs: vec![c] }
    }

    /// `prod (t - r)` over `roots`.
    pub fn from_roots(roots: &[f64]) -> Result<Self> {
        let mut p = MonomialPoly::constant(1.0);
        for &r in roots {
            p = p.mul_linear(r);
        }
        MonomialPoly::new(p.coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> MonomialPoly {
        if self.coeffs.len() == 1 {
            return MonomialPoly::constant(0.0);
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
        MonomialPoly { coeffs }
    }

    /// Multiplies by `(t - r)`.
    pub fn mul_linear(&self, r: f64) -> MonomialPoly {
        let mut out = vec![0.0; self.coeffs.len() + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= r * c;
        }
        MonomialPoly { coeffs: out }
    }

    /// Synthetic division by `(t - r)`; returns quotient and remainder.
    pub fn div_linear(&self, r: f64) -> (MonomialPoly, f64) {
        let d = self.degree();
        if d == 0 {
            return (MonomialPoly::constant(0.0), self.coeffs[0]);
        }
        let mut q = vec![0.0; d];
        let mut carry = 0.0;
        for i in (0..=d).rev() {
            let v = self.coeffs[i] + carry * r;
            if i == 0 {
                return (MonomialPoly { coeffs: q }, v);
            }
            q[i - 1] = v;
            carry = v;
        }
        unreachable!()
    }

    pub fn mul(&self, other: &MonomialPoly) -> MonomialPoly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        MonomialPoly { coeffs: out }
    }

    pub fn add(&self, other: &MonomialPoly) -> MonomialPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0.0) + other.coeffs.get(i).copied().unwrap_or(0.0))
            .collect();
        trimmed(coeffs)
    }

    pub fn scale(&self, c: f64) -> MonomialPoly {
        trimmed(self.coeffs.iter().map(|&x| x * c).collect())
    }
}

fn trimmed(mut coeffs: Vec<f64>) -> MonomialPoly {
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
        coeffs.pop();
    }
    MonomialPoly { coeffs }
}

/// A polynomial expanded in the normalized Gegenbauer basis `P_i^{(n)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GegenbauerSeries {
    n: usize,
    coeffs: Vec<f64>,
}

impl GegenbauerSeries {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dimension(n)?;
        if coeffs.is_empty() {
            return Ok(GegenbauerSeries { n, coeffs: vec![0.0] });
        }
        if coeffs.len() - 1 > MAX_POLY_DEGREE {
            return Err(Error::DegreeTooLarge(coeffs.len() - 1, MAX_POLY_DEGREE));
        }
        Ok(GegenbauerSeries { n, coeffs })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `P_i`, zero past the stored length.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let vals = gegenbauer_values(self.n, self.degree(), t);
        self.coeffs.iter().zip(vals).map(|(c, p)| c * p).sum()
    }

    /// Value at `t = 1`, the plain coefficient sum.
    pub fn at_one(&self) -> f64 {
        self.coeffs.iter().sum()
    }
}

/// Jacobi polynomial `P_k^{(a + (n-3)/2, b + (n-3)/2)}`, normalized to 1 at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiSpec {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub k: usize,
}

impl JacobiSpec {
    pub fn new(a: f64, b: f64, n: usize, k: usize) -> Self {
        JacobiSpec { a, b, n, k }
    }

    pub fn alpha(&self) -> f64 {
        self.a + (self.n as f64 - 3.0) / 2.0
    }

    pub fn beta(&self) -> f64 {
        self.b + (self.n as f64 - 3.0) / 2.0
    }

    fn validate(&self) -> Result<()> {
        check_dimension(self.n)?;
        if !(self.alpha() > -1.0 && self.beta() > -1.0) {
            return Err(Error::Domain(format!(
                "Jacobi exponents ({}, {}) must both exceed -1",
                self.alpha(),
                self.beta()
            )));
        }
        Ok(())
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2 (got {n})")));
    }
    Ok(())
}

/// `P_0^{(n)}(t), ..., P_max^{(n)}(t)` by the forward three-term recurrence
/// `(i+n-2) P_{i+1} = (2i+n-2) t P_i - i P_{i-1}`.
pub fn gegenbauer_values(n: usize, max_degree: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_degree + 1);
    out.push(1.0);
    if max_degree == 0 {
        return out;
    }
    out.push(t);
    let nf = n as f64;
    for i in 1..max_degree {
        let fi = i as f64;
        let next = ((2.0 * fi + nf - 2.0) * t * out[i] - fi * out[i - 1]) / (fi + nf - 2.0);
        out.push(next);
    }
    out
}

pub fn gegenbauer_eval(n: usize, i: usize, t: f64) -> Result<f64> {
    check_dimension(n)?;
    Ok(gegenbauer_values(n, i, t)[i])
}

/// `P_i^{(n)}` in the power basis.
pub fn gegenbauer_monomial(n: usize, i: usize) -> MonomialPoly {
    let nf = n as f64;
    let mut prev = vec![1.0];
    if i == 0 {
        return MonomialPoly { coeffs: prev };
    }
    let mut cur = vec![0.0, 1.0];
    for j in 1..i {
        let fj = j as f64;
        let mut next = vec![0.0; j + 2];
        for (d, &c) in cur.iter().enumerate() {
            next[d + 1] += (2.0 * fj + nf - 2.0) * c;
        }
        for (d, &c) in prev.iter().enumerate() {
            next[d] -= fj * c;
        }
        for c in next.iter_mut() {
            *c /= fj + nf - 2.0;
        }
        prev = cur;
        cur = next;
    }
    MonomialPoly { coeffs: cur }
}

/// Unnormalized Jacobi polynomial `P_k^{(alpha, beta)}(t)`.
pub(crate) fn jacobi_raw(alpha: f64, beta: f64, k: usize, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ab = alpha + beta;
    let mut prev = 1.0;
    let mut cur = (alpha + 1.0) + (ab + 2.0) * (t - 1.0) / 2.0;
    for j in 1..k {
        let j = j as f64;
        let c = 2.0 * j + ab;
        let a1 = 2.0 * (j + 1.0) * (j + ab + 1.0) * c;
        let a2 = (c + 1.0) * (alpha * alpha - beta * beta);
        let a3 = c * (c + 1.0) * (c + 2.0);
        let a4 = 2.0 * (j + alpha) * (j + beta) * (c + 2.0);
        let next = ((a2 + a3 * t) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_k^{(alpha,beta)}(1) = (alpha+1)_k / k!`.
fn jacobi_raw_at_one(alpha: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (j as f64 + alpha) / j as f64)
}

pub fn jacobi_eval(spec: JacobiSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    let (alpha, beta) = (spec.alpha(), spec.beta());
    Ok(jacobi_raw(alpha, beta, spec.k, t) / jacobi_raw_at_one(alpha, spec.k))
}

/// Derivative of the normalized Jacobi polynomial.
fn jacobi_eval_derivative(alpha: f64, beta: f64, k: usize, t: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    (kf + alpha + beta + 1.0) / 2.0 * jacobi_raw(alpha + 1.0, beta + 1.0, k - 1, t)
        / jacobi_raw_at_one(alpha, k)
}

/// Diagonal and off-diagonal of the symmetric Jacobi matrix for the monic
/// Jacobi recurrence with exponents `(alpha, beta)`, size `k`.
fn jacobi_matrix(alpha: f64, beta: f64, k: usize) -> DMatrix<f64> {
    let ab = alpha + beta;
    let mut m = DMatrix::zeros(k, k);
    for j in 0..k {
        let jf = j as f64;
        let diag = if j == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
        m[(j, j)] = diag;
        if j + 1 < k {
            let i = jf + 1.0;
            let c = 2.0 * i + ab;
            let b2 = if j == 0 {
                // (i + ab) cancels against (c - 1) at i = 1
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
            } else {
                4.0 * i * (i + alpha) * (i + beta) * (i + ab) / (c * c * (c + 1.0) * (c - 1.0))
            };
            m[(j, j + 1)] = b2.sqrt();
            m[(j + 1, j)] = b2.sqrt();
        }
    }
    m
}

/// Largest zero of the Jacobi polynomial described by `spec`.
///
/// `k = 0` is only meaningful for `a = b = 1`, where the convention `-1` is
/// returned. The zero is bracketed from the largest eigenvalue of the Jacobi
/// matrix and refined by safeguarded Newton/bisection to 1e-13.
pub fn jacobi_largest_zero(spec: JacobiSpec) -> Result<f64> {
    spec.validate()?;
    if spec.k == 0 {
        if spec.a == 1.0 && spec.b == 1.0 {
            return Ok(-1.0);
        }
        return Err(Error::Domain(
            "degree-0 Jacobi polynomial has no zero (only t_0^{1,1} = -1 is defined)".into(),
        ));
    }
    let (alpha, beta, k) = (spec.alpha(), spec.beta(), spec.k);
    if k == 1 {
        return Ok((beta - alpha) / (alpha + beta + 2.0));
    }
    let eig = SymmetricEigen::new(jacobi_matrix(alpha, beta, k)).eigenvalues;
    let guess = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f = |t: f64| jacobi_raw(alpha, beta, k, t);
    let df = |t: f64| jacobi_eval_derivative(alpha, beta, k, t) * jacobi_raw_at_one(alpha, k);

    // Widen symmetrically until the sign changes; P(1) > 0 and the polynomial
    // is positive right of its largest zero.
    let mut delta = 1e-10;
    let (mut lo, mut hi) = loop {
        let lo = (guess - delta).max(-1.0);
        let hi = (guess + delta).min(1.0);
        if f(lo) <= 0.0 && f(hi) >= 0.0 {
            break (lo, hi);
        }
        delta *= 4.0;
        if delta > 1.0 {
            return Err(Error::RootFinding(format!(
                "no sign change around eigenvalue {guess} for Jacobi({alpha}, {beta}, {k})"
            )));
        }
    };
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        if d != 0.0 && (fx / d).abs() < 1e-16 * x.abs().max(1.0) {
            return Ok(x);
        }
        let newton = x - fx / d;
        x = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(x)
}

/// `int t^j dmu_n(t)`: zero for odd `j`, `(2p-1)!! / (n (n+2) ... (n+2p-2))`
/// for `j = 2p`.
pub fn measure_moment(n: usize, j: usize) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    let nf = n as f64;
    (0..j / 2).fold(1.0, |acc, q| {
        let q = q as f64;
        acc * (2.0 * q + 1.0) / (nf + 2.0 * q)
    })
}

/// `int p dmu_n`, the zeroth Gegenbauer coefficient of `p`.
pub fn integrate(p: &MonomialPoly, n: usize) -> f64 {
    p.coeffs().iter().enumerate().map(|(j, &c)| c * measure_moment(n, j)).sum()
}

/// Power basis to Gegenbauer basis via Horner's scheme carried out in the
/// Gegenbauer basis, using `t P_j = ((j+n-2) P_{j+1} + j P_{j-1}) / (2j+n-2)`.
pub fn to_gegenbauer(p: &MonomialPoly, n: usize) -> Result<GegenbauerSeries> {
    check_dimension(n)?;
    let nf = n as f64;
    let d = p.degree();
    let mut acc = vec![0.0; d + 1];
    acc[0] = p.coeffs()[d];
    for i in (0..d).rev() {
        // acc <- t * acc + c_i, acc currently of degree d - 1 - i
        let deg = d - 1 - i;
        let mut next = vec![0.0; d + 1];
        for j in 0..=deg {
            let c = acc[j];
            if c == 0.0 {
                continue;
            }
            if j == 0 {
                next[1] += c;
            } else {
                let jf = j as f64;
                let den = 2.0 * jf + nf - 2.0;
                next[j + 1] += c * (jf + nf - 2.0) / den;
                next[j - 1] += c * jf / den;
            }
        }
        next[0] += p.coeffs()[i];
        acc = next;
    }
    GegenbauerSeries::new(n, acc)
}

pub fn from_gegenbauer(g: &GegenbauerSeries) -> MonomialPoly {
    let mut out = vec![0.0; g.coeffs().len()];
    for (i, &c) in g.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (d, &m) in gegenbauer_monomial(g.dimension(), i).coeffs().iter().enumerate() {
            out[d] += c * m;
        }
    }
    trimmed(out)
}

/// Gauss quadrature for `mu_n` with `points` nodes (Golub-Welsch); exact for
/// polynomials of degree `2 * points - 1`. Weights sum to 1.
pub fn gauss_gegenbauer(n: usize, points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dimension(n)?;
    if points == 0 {
        return Err(Error::Domain("need at least one quadrature point".into()));
    }
    let ab = (n as f64 - 3.0) / 2.0;
    let eig = SymmetricEigen::new(jacobi_matrix(ab, ab, points));
    let mut pairs: Vec<(f64, f64)> =
        (0..points).map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}
