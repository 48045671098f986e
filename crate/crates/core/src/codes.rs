//! Weighted spherical codes and their energies, moments and design checks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::{gegenbauer_values, integrate, MonomialPoly};
use crate::par::{compensated_sum, map_range, Execution};
use crate::potentials::Potential;

const NORM_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;
const MIN_DISTANCE: f64 = 1e-9;
/// Default threshold below which a weighted moment counts as zero.
pub const MOMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCode")]
pub struct WeightedCode {
    n: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCode {
    n: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawCode> for WeightedCode {
    type Error = Error;

    fn try_from(raw: RawCode) -> Result<Self> {
        WeightedCode::new(raw.n, raw.points, raw.weights)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl WeightedCode {
    /// Validates unit norms, distinctness and positive weights summing to 1.
    pub fn new(n: usize, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Code(format!("dimension must be at least 2 (got {n})")));
        }
        if points.is_empty() {
            return Err(Error::Code("no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::Code(format!("{} points but {} weights", points.len(), weights.len())));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(Error::Code(format!("point {i} has {} coordinates, expected {n}", p.len())));
            }
            let norm = dot(p, p).sqrt();
            if !((norm - 1.0).abs() <= NORM_TOL) {
                return Err(Error::Code(format!("point {i} has norm {norm}, not 1")));
            }
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Code(format!("weights must be positive (got {w})")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Code(format!("weights sum to {total}, not 1")));
        }
        for i in 0..points.len() {
            for j in 0..i {
                let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2.sqrt() <= MIN_DISTANCE {
                    return Err(Error::Code(format!("points {j} and {i} coincide")));
                }
            }
        }
        Ok(WeightedCode { n, points, weights })
    }

    /// Equal weights `1/N`.
    pub fn equal_weights(n: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        WeightedCode::new(n, points, weights)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `S_W = sum w_i^2`.
    pub fn s_w(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// `N_W = 1 / S_W`.
    pub fn n_w(&self) -> f64 {
        1.0 / self.s_w()
    }

    /// `S_W / N - 1 / N^2`.
    pub fn variance(&self) -> f64 {
        let nf = self.len() as f64;
        self.s_w() / nf - 1.0 / (nf * nf)
    }

    /// Largest inner product between distinct points; `-1` for one point.
    pub fn max_inner_product(&self) -> f64 {
        let mut s = -1.0f64;
        for i in 0..self.len() {
            for j in 0..i {
                s = s.max(dot(&self.points[i], &self.points[j]));
            }
        }
        s.min(1.0)
    }

    fn inner(&self, i: usize, j: usize) -> f64 {
        dot(&self.points[i], &self.points[j]).clamp(-1.0, 1.0)
    }
}

/// `sum_{i != j} w_i w_j f(x_i . x_j)`, compensated per row and across rows.
pub fn pair_sum<F>(code: &WeightedCode, f: F, exec: Execution) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let w = &code.weights;
    let mut rows = map_range(code.len(), exec, |i| {
        let mut terms: Vec<f64> =
            (0..code.len()).filter(|&j| j != i).map(|j| w[i] * w[j] * f(code.inner(i, j))).collect();
        compensated_sum(&mut terms)
    });
    compensated_sum(&mut rows)
}

/// Weighted `h`-energy `sum_{i != j} w_i w_j h(x_i . x_j)`.
pub fn energy(code: &WeightedCode, h: &Potential, exec: Execution) -> Result<f64> {
    let s = code.max_inner_product();
    if s >= 1.0 {
        return Err(Error::Domain("coincident points: h(1) would be needed".into()));
    }
    Ok(pair_sum(code, |t| h.eval_unchecked(t), exec))
}

/// Weighted moments `M_1, ..., M_max_ell`, diagonal included.
pub fn weighted_moments(code: &WeightedCode, max_ell: usize, exec: Execution) -> Vec<f64> {
    let n = code.n;
    let w = &code.weights;
    let rows = map_range(code.len(), exec, |i| {
        let mut acc = vec![Vec::with_capacity(code.len()); max_ell + 1];
        for j in 0..code.len() {
            let vals = gegenbauer_values(n, max_ell, code.inner(i, j));
            for (ell, v) in vals.into_iter().enumerate() {
                acc[ell].push(w[i] * w[j] * v);
            }
        }
        acc.into_iter().map(|mut t| compensated_sum(&mut t)).collect::<Vec<f64>>()
    });
    (1..=max_ell)
        .map(|ell| {
            let mut col: Vec<f64> = rows.iter().map(|r| r[ell]).collect();
            compensated_sum(&mut col)
        })
        .collect()
}

/// `M_ell = sum_{i,j} w_i w_j P_ell(x_i . x_j)`.
pub fn weighted_moment(code: &WeightedCode, ell: usize, exec: Execution) -> Result<f64> {
    if ell == 0 {
        return Err(Error::Domain("moment order must be at least 1".into()));
    }
    Ok(weighted_moments(code, ell, exec)[ell - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignCheckReport {
    /// Largest `tau` with `|M_1|, ..., |M_tau| <= tol`.
    pub strength: usize,
    /// `M_1, ..., M_tau_max`.
    pub moments: Vec<f64>,
    pub tol: f64,
    /// All moments are `>= -1e-12`.
    pub nonnegative: bool,
}

impl DesignCheckReport {
    /// `M_{strength+1}` when it was computed.
    pub fn next_moment(&self) -> Option<f64> {
        self.moments.get(self.strength).copied()
    }
}

pub fn design_strength(code: &WeightedCode, tau_max: usize, tol: f64) -> Result<DesignCheckReport> {
    if tau_max == 0 {
        return Err(Error::Domain("tau_max must be at least 1".into()));
    }
    let moments = weighted_moments(code, tau_max, Execution::default());
    let strength = moments.iter().take_while(|m| m.abs() <= tol).count();
    let nonnegative = moments.iter().all(|&m| m >= -1e-12);
    Ok(DesignCheckReport { strength, moments, tol, nonnegative })
}

fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn random_poly<R: Rng + ?Sized>(degree: usize, rng: &mut R) -> MonomialPoly {
    let c: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
    MonomialPoly::new(c).expect("finite coefficients of bounded degree")
}

/// `max |sum_j w_j f(x . x_j) - f_0|` over random `f` of degree `tau` and
/// random unit `x`. Vanishes for weighted `tau`-designs.
pub fn design_point_identity_check<R: Rng + ?Sized>(
    code: &WeightedCode,
    tau: usize,
    trials: usize,
    rng: &mut R,
) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = random_poly(tau, rng);
        let x = random_unit(code.n, rng);
        worst = worst.max(point_identity_residual(code, &f, &x));
    }
    worst
}

/// `|sum_j w_j f(x . x_j) - f_0|` for one polynomial and point.
pub fn point_identity_residual(code: &WeightedCode, f: &MonomialPoly, x: &[f64]) -> f64 {
    let mut terms: Vec<f64> =
        code.points.iter().zip(&code.weights).map(|(p, w)| w * f.eval(dot(x, p).clamp(-1.0, 1.0))).collect();
    (compensated_sum(&mut terms) - integrate(f, code.n)).abs()
}

/// Surface average of `x^alpha` over the unit sphere in `R^n`:
/// `prod (alpha_i - 1)!! / (n (n+2) ... (n + |alpha| - 2))` when every
/// exponent is even, else 0.
pub fn monomial_sphere_average(exps: &[usize]) -> f64 {
    if exps.iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    let n = exps.len() as f64;
    let mut num = 1.0;
    for &e in exps {
        let mut k = 1;
        while k < e {
            num *= k as f64;
            k += 2;
        }
    }
    let total: usize = exps.iter().sum();
    let den: f64 = (0..total / 2).map(|j| n + 2.0 * j as f64).product();
    num / den
}

/// `|sum_i w_i x_i^alpha - average of x^alpha|`.
pub fn monomial_quadrature_residual(code: &WeightedCode, exps: &[usize]) -> Result<f64> {
    if exps.len() != code.n {
        return Err(Error::Domain(format!("{} exponents for dimension {}", exps.len(), code.n)));
    }
    let mut terms: Vec<f64> = code
        .points
        .iter()
        .zip(&code.weights)
        .map(|(p, w)| w * p.iter().zip(exps).map(|(x, &e)| x.powi(e as i32)).product::<f64>())
        .collect();
    Ok((compensated_sum(&mut terms) - monomial_sphere_average(exps)).abs())
}

/// Random `n`-variate polynomials of total degree at most `tau` (eight
/// monomials each), integrated by the code and exactly.
pub fn sphere_quadrature_check<R: Rng + ?Sized>(
    code: &WeightedCode,
    tau: usize,
    trials: usize,
    rng: &mut R,
) -> f64 {
    let n = code.n;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut cubature = 0.0;
        let mut exact = 0.0;
        for _ in 0..8 {
            let degree = rng.random_range(0..=tau);
            let mut exps = vec![0usize; n];
            for _ in 0..degree {
                exps[rng.random_range(0..n)] += 1;
            }
            let c: f64 = rng.random_range(-1.0..1.0);
            exact += c * monomial_sphere_average(&exps);
            cubature += c * code
                .points
                .iter()
                .zip(&code.weights)
                .map(|(p, w)| w * p.iter().zip(&exps).map(|(x, &e)| x.powi(e as i32)).product::<f64>())
                .sum::<f64>();
        }
        worst = worst.max((cubature - exact).abs());
    }
    worst
}

/// Built-in configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigName {
    /// Icosahedron (weight 5/168) plus dual dodecahedron (weight 9/280).
    PentakisDodecahedron,
    /// Cross-polytope plus dual cube with the weights making a 5-design.
    CubeCrossPolytope(usize),
    RegularNgon(usize),
    Icosahedron,
    Dodecahedron,
    Cube(usize),
    CrossPolytope(usize),
    TwentyFourCell,
}

impl fmt::Display for ConfigName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigName::PentakisDodecahedron => write!(f, "pentakis"),
            ConfigName::CubeCrossPolytope(n) => write!(f, "cube-cross:{n}"),
            ConfigName::RegularNgon(m) => write!(f, "ngon:{m}"),
            ConfigName::Icosahedron => write!(f, "icosahedron"),
            ConfigName::Dodecahedron => write!(f, "dodecahedron"),
            ConfigName::Cube(n) => write!(f, "cube:{n}"),
            ConfigName::CrossPolytope(n) => write!(f, "cross:{n}"),
            ConfigName::TwentyFourCell => write!(f, "24-cell"),
        }
    }
}

impl FromStr for ConfigName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown configuration `{s}`"));
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a.parse::<usize>().map_err(|_| bad())?)),
            None => (s, None),
        };
        Ok(match (kind, arg) {
            ("pentakis" | "pentakis-dodecahedron", None) => ConfigName::PentakisDodecahedron,
            ("cube-cross", Some(n)) => ConfigName::CubeCrossPolytope(n),
            ("ngon", Some(m)) => ConfigName::RegularNgon(m),
            ("icosahedron", None) => ConfigName::Icosahedron,
            ("dodecahedron", None) => ConfigName::Dodecahedron,
            ("cube", Some(n)) => ConfigName::Cube(n),
            ("cross", Some(n)) => ConfigName::CrossPolytope(n),
            ("24-cell", None) => ConfigName::TwentyFourCell,
            _ => return Err(bad()),
        })
    }
}

impl ConfigName {
    pub fn dimension(&self) -> usize {
        match *self {
            ConfigName::PentakisDodecahedron | ConfigName::Icosahedron | ConfigName::Dodecahedron => 3,
            ConfigName::CubeCrossPolytope(n) | ConfigName::Cube(n) | ConfigName::CrossPolytope(n) => n,
            ConfigName::RegularNgon(_) => 2,
            ConfigName::TwentyFourCell => 4,
        }
    }
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let norm = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Cyclic permutations of `(0, ±p, ±q)`.
fn cyclic_signed(p: f64, q: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for sp in [1.0, -1.0] {
        for sq in [1.0, -1.0] {
            let v = [0.0, sp * p, sq * q];
            for r in 0..3 {
                out.push(normalized(vec![v[r % 3], v[(r + 1) % 3], v[(r + 2) % 3]]));
            }
        }
    }
    out
}

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn icosahedron_points() -> Vec<Vec<f64>> {
    cyclic_signed(1.0, golden())
}

/// The dodecahedron dual to [`icosahedron_points`].
fn dodecahedron_points() -> Vec<Vec<f64>> {
    let mut pts = cube_points(3);
    pts.extend(cyclic_signed(golden(), 1.0 / golden()));
    pts
}

fn cube_points(n: usize) -> Vec<Vec<f64>> {
    let c = 1.0 / (n as f64).sqrt();
    (0..1usize << n).map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -c } else { c }).collect()).collect()
}

fn cross_points(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = sign;
            out.push(v);
        }
    }
    out
}

fn twenty_four_cell_points() -> Vec<Vec<f64>> {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(24);
    for i in 0..4 {
        for j in i + 1..4 {
            for si in [c, -c] {
                for sj in [c, -c] {
                    let mut v = vec![0.0; 4];
                    v[i] = si;
                    v[j] = sj;
                    out.push(v);
                }
            }
        }
    }
    out
}

/// `(w_p, w_c)` for the cube and cross-polytope union in dimension `n`.
fn cube_cross_weights(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let wp = 1.0 / (2.0 * nf + nf * nf);
    (wp, nf * nf / (2f64.powi(n as i32) * (2.0 * nf + nf * nf)))
}

const MAX_CUBE_DIMENSION: usize = 16;

pub fn build_config(name: ConfigName) -> Result<WeightedCode> {
    let need = |ok: bool, msg: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{name}: {msg}")))
        }
    };
    match name {
        ConfigName::PentakisDodecahedron => {
            let mut points = icosahedron_points();
            points.extend(dodecahedron_points());
            let mut weights = vec![5.0 / 168.0; 12];
            weights.extend(vec![9.0 / 280.0; 20]);
            WeightedCode::new(3, points, weights)
        }
        ConfigName::CubeCrossPolytope(n) => {
            need((2..=MAX_CUBE_DIMENSION).contains(&n), "dimension must be between 2 and 16")?;
            let (wp, wc) = cube_cross_weights(n);
            let mut points = cross_points(n);
            points.extend(cube_points(n));
            let mut weights = vec![wp; 2 * n];
            weights.extend(vec![wc; 1 << n]);
            WeightedCode::new(n, points, weights)
        }
        ConfigName::RegularNgon(m) => {
            need(m >= 2, "needs at least 2 points")?;
            let points = (0..m)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / m as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            WeightedCode::equal_weights(2, points)
        }
        ConfigName::Icosahedron => WeightedCode::equal_weights(3, icosahedron_points()),
        ConfigName::Dodecahedron => WeightedCode::equal_weights(3, dodecahedron_points()),
        ConfigName::Cube(n) => {
            need((2..=MAX_CUBE_DIMENSION).contains(&n), "dimension must be between 2 and 16")?;
            WeightedCode::equal_weights(n, cube_points(n))
        }
        ConfigName::CrossPolytope(n) => {
            need(n >= 2, "dimension must be at least 2")?;
            WeightedCode::equal_weights(n, cross_points(n))
        }
        ConfigName::TwentyFourCell => WeightedCode::equal_weights(4, twenty_four_cell_points()),
    }
}

/// Energy from the closed-form pair counts of the two union configurations.
pub fn closed_form_energy(name: ConfigName, h: &Potential) -> Result<f64> {
    let hv = |t: f64| h.eval(t);
    match name {
        ConfigName::PentakisDodecahedron => {
            let (wi, wd) = (5.0 / 168.0, 9.0 / 280.0);
            let r5 = 1.0 / 5f64.sqrt();
            let a = (1.0 - 2.0 / 5f64.sqrt()).sqrt() / 3f64.sqrt();
            let b = (1.0 + 2.0 / 5f64.sqrt()).sqrt() / 3f64.sqrt();
            let s5 = 5f64.sqrt() / 3.0;
            Ok(12.0 * wi * wi * (hv(-1.0)? + 5.0 * hv(-r5)? + 5.0 * hv(r5)?)
                + 120.0 * wi * wd * (hv(a)? + hv(-a)? + hv(b)? + hv(-b)?)
                + 20.0
                    * wd
                    * wd
                    * (hv(-1.0)?
                        + 6.0 * hv(-1.0 / 3.0)?
                        + 6.0 * hv(1.0 / 3.0)?
                        + 3.0 * hv(-s5)?
                        + 3.0 * hv(s5)?))
        }
        ConfigName::CubeCrossPolytope(n) => {
            if !(2..=MAX_CUBE_DIMENSION).contains(&n) {
                return Err(Error::Domain(format!("{name}: dimension must be between 2 and 16")));
            }
            let nf = n as f64;
            let (wp, wc) = cube_cross_weights(n);
            let r = 1.0 / nf.sqrt();
            let mut cube = 0.0;
            let mut binom = 1.0;
            for k in 0..n {
                cube += binom * hv(-1.0 + 2.0 * k as f64 / nf)?;
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
            Ok(2.0 * nf * wp * wp * (hv(-1.0)? + (2.0 * nf - 2.0) * hv(0.0)?)
                + 2f64.powi(n as i32 + 1) * nf * wp * wc * (hv(r)? + hv(-r)?)
                + 2f64.powi(n as i32) * wc * wc * cube)
        }
        _ => Err(Error::Domain(format!("no closed-form energy for {name}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_averages() {
        assert_eq!(monomial_sphere_average(&[0, 0, 0]), 1.0);
        assert!((monomial_sphere_average(&[2, 0, 0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((monomial_sphere_average(&[4, 0, 0]) - 3.0 / 15.0).abs() < 1e-15);
        assert!((monomial_sphere_average(&[2, 2, 0]) - 1.0 / 15.0).abs() < 1e-15);
        assert_eq!(monomial_sphere_average(&[1, 2, 0]), 0.0);
    }

    #[test]
    fn validation() {
        assert!(WeightedCode::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.5]).is_ok());
        assert!(WeightedCode::new(2, vec![vec![1.0, 0.1], vec![0.0, 1.0]], vec![0.5, 0.5]).is_err());
        assert!(WeightedCode::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.6]).is_err());
        assert!(WeightedCode::new(2, vec![vec![1.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.5]).is_err());
        assert!(WeightedCode::new(2, vec![vec![1.0, 0.0, 0.0]], vec![1.0]).is_err());
        assert!(WeightedCode::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn config_names_round_trip() {
        for s in [
            "pentakis",
            "cube-cross:5",
            "ngon:8",
            "icosahedron",
            "dodecahedron",
            "cube:3",
            "cross:4",
            "24-cell",
        ] {
            let c: ConfigName = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
            assert_eq!(build_config(c).unwrap().dimension(), c.dimension());
        }
        assert!("cube".parse::<ConfigName>().is_err());
        assert!("cube-cross:x".parse::<ConfigName>().is_err());
        assert!(build_config(ConfigName::CubeCrossPolytope(1)).is_err());
        assert!(build_config(ConfigName::RegularNgon(1)).is_err());
    }
}
