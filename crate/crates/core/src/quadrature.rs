//! Levenshtein-type `1/N` quadrature rules.
//!
//! For a capacity `N` in `(D(n,m), D(n,m+1)]` there is a unique rule
//! `f_0 = f(1)/N + sum rho_i f(alpha_i)`, exact for every polynomial of degree
//! at most `m`, whose largest node `s` solves `L_m(n, s) = N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orthopoly::{
    gegenbauer_monomial, gegenbauer_values, integrate, jacobi_largest_zero, to_gegenbauer, GegenbauerSeries,
    JacobiSpec, MonomialPoly,
};
use crate::roots::{brent, real_roots};

/// Largest degree `m` the quadrature pipeline accepts.
pub const MAX_DEGREE: usize = 25;

const NODE_TOL: f64 = 1e-9;
const EXACTNESS_TOL: f64 = 1e-9;

/// `m = 2k - 1 + eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Degree {
    pub m: usize,
    pub k: usize,
    pub eps: usize,
}

impl Degree {
    pub fn new(m: usize) -> Self {
        let k = m.div_ceil(2);
        Degree { m, k, eps: m + 1 - 2 * k }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub eps: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub capacity: f64,
    pub s: f64,
}

impl QuadratureRule {
    /// `1/capacity + sum rho_i f(alpha_i)`, the rule applied to `f` with the
    /// `f(1)` term scaled out.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        f(1.0) / self.capacity + self.nodes.iter().zip(&self.weights).map(|(&a, &r)| r * f(a)).sum::<f64>()
    }

    /// `sum rho_i h(alpha_i)`.
    pub fn weighted_sum<F: Fn(f64) -> f64>(&self, h: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&a, &r)| r * h(a)).sum()
    }

    /// Largest deviation from exactness on `P_0, ..., P_degree`.
    pub fn exactness_residual(&self, degree: usize) -> f64 {
        let mut worst = 0.0f64;
        let mut acc = vec![1.0 / self.capacity; degree + 1];
        for (&a, &r) in self.nodes.iter().zip(&self.weights) {
            for (j, p) in gegenbauer_values(self.n, degree, a).into_iter().enumerate() {
                acc[j] += r * p;
            }
        }
        for (j, v) in acc.into_iter().enumerate() {
            let target = if j == 0 { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevenshteinPolynomial {
    pub n: usize,
    pub m: usize,
    pub s: f64,
    pub monomial: MonomialPoly,
    pub gegenbauer: GegenbauerSeries,
    /// Distinct roots, ascending; the last one is `s`.
    pub roots: Vec<f64>,
    /// `f(1) / f_0 = L_m(n, s)`.
    pub n1: f64,
    /// False when `s` lies outside the validity interval of `m`.
    pub within_validity: bool,
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2 (got {n})")));
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(m, MAX_DEGREE));
    }
    if m == 0 {
        return Err(Error::Domain("degree must be at least 1".into()));
    }
    Ok(())
}

/// Delsarte-Goethals-Seidel number `D(n, m)`. `D(n, 0) = 1`.
pub fn dgs_bound(n: usize, m: usize) -> u128 {
    let d = Degree::new(m);
    let (n, k, e) = (n as u64, d.k as u64, d.eps as u64);
    // m = 0 reads as k = 0, eps = 1: C(n-1, n-1) + 0
    binomial(n + k + e - 2, n - 1) + if k == 0 { 0 } else { binomial(n + k - 2, n - 1) }
}

/// The `m` with `D(n, m) < N <= D(n, m+1)`.
///
/// Capacities in `(1, 2]` give `m = 0`, which has no quadrature rule.
pub fn select_degree_from_capacity(n: usize, capacity: f64) -> Result<Degree> {
    check_n(n)?;
    if !(capacity > 1.0) || !capacity.is_finite() {
        return Err(Error::Domain(format!("capacity must exceed 1 (got {capacity})")));
    }
    let mut m = 0;
    while capacity > dgs_bound(n, m + 1) as f64 {
        m += 1;
        if m > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(m, MAX_DEGREE));
        }
    }
    Ok(Degree::new(m))
}

/// Validity interval `[t_{k-1+eps}^{1,1-eps}, t_k^{1,eps}]` of `L_m(n, .)`.
pub fn validity_interval(n: usize, m: usize) -> Result<(f64, f64)> {
    check_n(n)?;
    check_m(m)?;
    let d = Degree::new(m);
    let eps = d.eps as f64;
    let lo = jacobi_largest_zero(JacobiSpec::new(1.0, 1.0 - eps, n, d.k - 1 + d.eps))?;
    let hi = jacobi_largest_zero(JacobiSpec::new(1.0, eps, n, d.k))?;
    Ok((lo, hi))
}

/// The `m` whose validity interval contains `s`; shared endpoints go to the
/// smaller `m`.
pub fn select_degree_from_s(n: usize, s: f64) -> Result<Degree> {
    check_n(n)?;
    if !(-1.0..1.0).contains(&s) {
        return Err(Error::Domain(format!("s must lie in [-1, 1) (got {s})")));
    }
    for m in 1..=MAX_DEGREE {
        let (_, hi) = validity_interval(n, m)?;
        if s <= hi {
            return Ok(Degree::new(m));
        }
    }
    Err(Error::DegreeTooLarge(MAX_DEGREE + 1, MAX_DEGREE))
}

struct Constants {
    b: f64,
    a: f64,
}

fn constants(n: usize, d: Degree) -> Constants {
    let (nf, kf, ef) = (n as f64, d.k as f64, d.eps as f64);
    Constants {
        b: binomial((d.k + n + d.eps - 3) as u64, (n - 2) as u64) as f64,
        a: (2.0 * kf + nf - 3.0 + 2.0 * ef) / (nf - 1.0),
    }
}

fn levenshtein_unchecked(n: usize, d: Degree, s: f64) -> f64 {
    let c = constants(n, d);
    let p = gegenbauer_values(n, d.k + d.eps, s);
    let e = d.eps as f64;
    let num = (1.0 + s).powi(d.eps as i32) * (p[d.k - 1 + d.eps] - p[d.k + d.eps]);
    let den = (1.0 - s) * (e * p[d.k] + p[d.k + d.eps]);
    c.b * (c.a - num / den)
}

fn validate_s(n: usize, m: usize, s: f64, allow_outside: bool) -> Result<bool> {
    let (lo, hi) = validity_interval(n, m)?;
    let slack = 1e-12;
    let inside = s >= lo - slack && s <= hi + slack;
    if !inside && !allow_outside {
        return Err(Error::Validity { m, s, lo, hi });
    }
    Ok(inside)
}

/// Levenshtein function `L_m(n, s)`.
///
/// Outside the validity interval this is an error unless `allow_outside`.
pub fn levenshtein_function(n: usize, m: usize, s: f64, allow_outside: bool) -> Result<f64> {
    check_n(n)?;
    check_m(m)?;
    if !(-1.0..1.0).contains(&s) {
        return Err(Error::Domain(format!("s must lie in [-1, 1) (got {s})")));
    }
    validate_s(n, m, s, allow_outside)?;
    Ok(levenshtein_unchecked(n, Degree::new(m), s))
}

/// `L_m(n, x) = N` with denominators cleared:
/// `(BA - N)(1-x)(eps P_k + P_{k+eps}) - B (1+x)^eps (P_{k-1+eps} - P_{k+eps})`.
/// Always vanishes at `x = 1`, and at `x = -1` when `eps = 1`.
fn cleared_polynomial(n: usize, d: Degree, capacity: f64) -> MonomialPoly {
    let c = constants(n, d);
    let e = d.eps as f64;
    let den = gegenbauer_monomial(n, d.k)
        .scale(e)
        .add(&gegenbauer_monomial(n, d.k + d.eps))
        .mul_linear(1.0)
        .scale(-(c.b * c.a - capacity));
    let mut num =
        gegenbauer_monomial(n, d.k - 1 + d.eps).add(&gegenbauer_monomial(n, d.k + d.eps).scale(-1.0));
    if d.eps == 1 {
        num = num.mul_linear(-1.0);
    }
    den.add(&num.scale(-c.b))
}

/// All nodes of the rule of degree `m` whose largest node is `s`, with
/// capacity `L_m(n, s)` passed in as `capacity`.
fn nodes_for(n: usize, d: Degree, s: f64, capacity: f64) -> Result<Vec<f64>> {
    let mut p = cleared_polynomial(n, d, capacity);
    let (q, _) = p.div_linear(1.0);
    p = q;
    if d.eps == 1 {
        let (q, _) = p.div_linear(-1.0);
        p = q;
    }
    let mut nodes = real_roots(&p, 1e-7)?;
    if nodes.len() != d.k {
        return Err(Error::Quadrature(format!(
            "expected {} real nodes for m = {}, found {}",
            d.k,
            d.m,
            nodes.len()
        )));
    }
    if d.eps == 1 {
        nodes.insert(0, -1.0);
    }
    let top = nodes[nodes.len() - 1];
    if (top - s).abs() > NODE_TOL {
        return Err(Error::Quadrature(format!("largest node {top} differs from s = {s}")));
    }
    *nodes.last_mut().unwrap() = s;
    for w in nodes.windows(2) {
        if w[1] - w[0] <= NODE_TOL {
            return Err(Error::Quadrature(format!("repeated node near {}", w[0])));
        }
    }
    if nodes[0] < -1.0 - NODE_TOL || top >= 1.0 {
        return Err(Error::Quadrature(format!("node outside [-1, 1): {nodes:?}")));
    }
    // an odd rule at the left end of its validity interval degenerates and
    // its smallest node reaches -1
    nodes[0] = nodes[0].max(-1.0);
    Ok(nodes)
}

/// Weights `rho_i = [(l_i)_0 - l_i(1)/capacity] / l_i(alpha_i)` for the
/// Lagrange basis `l_i` of `nodes`, with exactness verified up to degree
/// `2 len - 1 - [alpha_0 = -1]`.
pub fn compute_weights(n: usize, nodes: &[f64], capacity: f64) -> Result<Vec<f64>> {
    check_n(n)?;
    if nodes.is_empty() {
        return Err(Error::Quadrature("no nodes".into()));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Quadrature("nodes must be distinct and ascending".into()));
    }
    if nodes[0] < -1.0 || nodes[nodes.len() - 1] >= 1.0 {
        return Err(Error::Quadrature("nodes must lie in [-1, 1)".into()));
    }
    let mut weights = Vec::with_capacity(nodes.len());
    for (i, &a) in nodes.iter().enumerate() {
        let others: Vec<f64> = nodes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &b)| b).collect();
        let l = MonomialPoly::from_roots(&others)?;
        let rho = (integrate(&l, n) - l.eval(1.0) / capacity) / l.eval(a);
        if !(rho > 0.0) {
            return Err(Error::Quadrature(format!("weight {i} is not positive ({rho})")));
        }
        weights.push(rho);
    }
    let eps = usize::from(nodes[0] == -1.0);
    let degree = 2 * nodes.len() - 1 - eps;
    let d = Degree::new(degree);
    let rule = QuadratureRule {
        n,
        m: degree,
        k: d.k,
        eps,
        nodes: nodes.to_vec(),
        weights: weights.clone(),
        capacity,
        s: nodes[nodes.len() - 1],
    };
    let residual = rule.exactness_residual(degree);
    if residual > EXACTNESS_TOL {
        return Err(Error::Quadrature(format!(
            "rule is not exact to degree {degree} (residual {residual:e})"
        )));
    }
    Ok(weights)
}

/// Rule of degree `m` with largest node `s` and capacity `L_m(n, s)`.
pub fn rule_from_s(n: usize, m: usize, s: f64, allow_outside: bool) -> Result<QuadratureRule> {
    let capacity = levenshtein_function(n, m, s, allow_outside)?;
    build_rule(n, Degree::new(m), s, capacity)
}

fn build_rule(n: usize, d: Degree, s: f64, capacity: f64) -> Result<QuadratureRule> {
    let nodes = nodes_for(n, d, s, capacity)?;
    let weights = compute_weights(n, &nodes, capacity)?;
    Ok(QuadratureRule { n, m: d.m, k: d.k, eps: d.eps, nodes, weights, capacity, s })
}

/// Rule of degree `m` for a capacity in `(D(n,m), D(n,m+1)]`.
pub fn rule_for_degree(n: usize, m: usize, capacity: f64) -> Result<QuadratureRule> {
    check_n(n)?;
    check_m(m)?;
    let (lo_d, hi_d) = (dgs_bound(n, m) as f64, dgs_bound(n, m + 1) as f64);
    if !(capacity > lo_d && capacity <= hi_d) {
        return Err(Error::Hypothesis(format!(
            "capacity {capacity} is outside (D({n},{m}), D({n},{})] = ({lo_d}, {hi_d}]",
            m + 1
        )));
    }
    let d = Degree::new(m);
    let (lo, hi) = validity_interval(n, m)?;
    let f = |s: f64| levenshtein_unchecked(n, d, s) - capacity;
    let s = if f(hi).abs() <= 1e-12 * capacity { hi } else { brent(f, lo, hi, 1e-13)? };
    build_rule(n, d, s, capacity)
}

/// The ULB quadrature rule for capacity `N_W > 2`.
pub fn solve_ulb_rule(n: usize, capacity: f64) -> Result<QuadratureRule> {
    check_n(n)?;
    if !(capacity > 2.0) || !capacity.is_finite() {
        return Err(Error::Capacity(capacity));
    }
    let d = select_degree_from_capacity(n, capacity)?;
    rule_for_degree(n, d.m, capacity)
}

/// Levenshtein polynomial `(t - s) K(t)^2` (odd `m`) or
/// `(t + 1)(t - s) K(t)^2` (even `m`), monic, where `K` vanishes at the
/// interior nodes of the rule with largest node `s`.
pub fn levenshtein_polynomial(
    n: usize,
    m: usize,
    s: f64,
    allow_outside: bool,
) -> Result<LevenshteinPolynomial> {
    check_n(n)?;
    check_m(m)?;
    let within_validity = validate_s(n, m, s, allow_outside)?;
    let rule = rule_from_s(n, m, s, true)?;
    levenshtein_polynomial_from_rule(&rule, within_validity, allow_outside)
}

pub(crate) fn levenshtein_polynomial_from_rule(
    rule: &QuadratureRule,
    within_validity: bool,
    allow_outside: bool,
) -> Result<LevenshteinPolynomial> {
    let interior = &rule.nodes[rule.eps..rule.nodes.len() - 1];
    let kpoly = MonomialPoly::from_roots(interior)?;
    let mut f = kpoly.mul(&kpoly).mul_linear(rule.s);
    if rule.eps == 1 {
        f = f.mul_linear(-1.0);
    }
    let g = to_gegenbauer(&f, rule.n)?;
    if !allow_outside || within_validity {
        if let Some(i) = (0..=rule.m).find(|&i| !(g.coeff(i) > 0.0)) {
            return Err(Error::Quadrature(format!(
                "Levenshtein polynomial coefficient f_{i} = {} is not positive",
                g.coeff(i)
            )));
        }
    }
    let n1 = f.eval(1.0) / g.coeff(0);
    Ok(LevenshteinPolynomial {
        n: rule.n,
        m: rule.m,
        s: rule.s,
        monomial: f,
        gegenbauer: g,
        roots: rule.nodes.clone(),
        n1,
        within_validity,
    })
}
