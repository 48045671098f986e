//! Hermite interpolation on node multisets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orthopoly::{to_gegenbauer, GegenbauerSeries, MonomialPoly};
use crate::potentials::Potential;
use crate::quadrature::QuadratureRule;

/// Grid size used by [`verify_dominance`].
pub const DOMINANCE_GRID: usize = 4001;
/// Allowed violation of a dominance inequality, relative to `max(1, |h|)`.
pub const DOMINANCE_SLACK: f64 = 1e-9;

/// Interpolation nodes with multiplicities 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMultiset {
    entries: Vec<(f64, u8)>,
}

impl NodeMultiset {
    /// Nodes must be strictly ascending and below 1. A simple node is only
    /// allowed at `-1` or as the last entry.
    pub fn new(entries: Vec<(f64, u8)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Nodes("empty multiset".into()));
        }
        for w in entries.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Nodes(format!("nodes not ascending at {}", w[1].0)));
            }
        }
        let last = entries.len() - 1;
        for (i, &(x, mult)) in entries.iter().enumerate() {
            if !(-1.0..1.0).contains(&x) {
                return Err(Error::Nodes(format!("node {x} outside [-1, 1)")));
            }
            match mult {
                2 => {}
                1 if x == -1.0 || i == last => {}
                1 => return Err(Error::Nodes(format!("simple node {x} must be -1 or the largest node"))),
                _ => return Err(Error::Nodes(format!("multiplicity {mult} not supported"))),
            }
        }
        Ok(NodeMultiset { entries })
    }

    /// ULB multiset: every node doubled except `alpha_0 = -1` of an even rule.
    pub fn for_ulb(rule: &QuadratureRule) -> Result<Self> {
        NodeMultiset::new(
            rule.nodes
                .iter()
                .enumerate()
                .map(|(i, &a)| (a, if i == 0 && rule.eps == 1 { 1 } else { 2 }))
                .collect(),
        )
    }

    /// UUB multiset: as [`NodeMultiset::for_ulb`] but with `s` simple.
    pub fn for_uub(rule: &QuadratureRule) -> Result<Self> {
        let last = rule.nodes.len() - 1;
        NodeMultiset::new(
            rule.nodes
                .iter()
                .enumerate()
                .map(|(i, &a)| (a, if (i == 0 && rule.eps == 1) || i == last { 1 } else { 2 }))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(f64, u8)] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.1 as usize).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    fn expanded(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|&(x, m)| std::iter::repeat_n(x, m as usize)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolantReport {
    pub poly: MonomialPoly,
    pub gegenbauer: GegenbauerSeries,
    /// Largest relative miss of the interpolation conditions.
    pub interpolation_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `f <= h`.
    Below,
    /// `f >= h`.
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    pub ok: bool,
    /// Largest violation of the required inequality (0 when none).
    pub max_violation: f64,
    pub worst_t: f64,
}

/// Newton-form Hermite interpolation of `f` (with derivative `df`) on the
/// expanded node list `z`, where equal neighbours mean a derivative condition.
fn newton_hermite<F, D>(f: &F, df: &D, z: &[f64]) -> Vec<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let len = z.len();
    let mut table: Vec<f64> = z.iter().map(|&x| f(x)).collect();
    let mut coeffs = vec![table[0]];
    for order in 1..len {
        for i in (order..len).rev() {
            let span = z[i] - z[i - order];
            table[i] = if span == 0.0 {
                // only order 1 can be confluent: multiplicities are at most 2
                df(z[i])
            } else {
                (table[i] - table[i - 1]) / span
            };
        }
        coeffs.push(table[order]);
    }
    coeffs
}

fn newton_to_monomial(coeffs: &[f64], z: &[f64]) -> Result<MonomialPoly> {
    let mut p = MonomialPoly::constant(coeffs[coeffs.len() - 1]);
    for j in (0..coeffs.len() - 1).rev() {
        p = p.mul_linear(z[j]).add(&MonomialPoly::constant(coeffs[j]));
    }
    MonomialPoly::new(p.coeffs().to_vec())
}

/// Hermite interpolant of an arbitrary function, given its derivative.
pub fn hermite_from_fn<F, D>(f: F, df: D, nodes: &NodeMultiset, n: usize) -> Result<InterpolantReport>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let z = nodes.expanded();
    let poly = newton_to_monomial(&newton_hermite(&f, &df, &z), &z)?;
    let dpoly = poly.derivative();
    let mut residual = 0.0f64;
    for &(x, mult) in nodes.entries() {
        let v = f(x);
        residual = residual.max((poly.eval(x) - v).abs() / v.abs().max(1.0));
        if mult == 2 {
            let d = df(x);
            residual = residual.max((dpoly.eval(x) - d).abs() / d.abs().max(1.0));
        }
    }
    let gegenbauer = to_gegenbauer(&poly, n)?;
    Ok(InterpolantReport { poly, gegenbauer, interpolation_residual: residual })
}

/// Hermite interpolant of `h`: values at every node, first derivatives at
/// doubled nodes.
pub fn hermite_interpolant(h: &Potential, nodes: &NodeMultiset, n: usize) -> Result<InterpolantReport> {
    hermite_from_fn(|t| h.eval_unchecked(t), |t| h.derivative_unchecked(t), nodes, n)
}

/// Samples `h - f` on a uniform grid over `[lo, hi]` plus geometric
/// refinement around `nodes`.
pub fn verify_dominance(
    poly: &MonomialPoly,
    h: &Potential,
    interval: (f64, f64),
    direction: Direction,
    nodes: &[f64],
) -> Result<Dominance> {
    let (lo, hi) = interval;
    if !(lo >= -1.0 && hi < 1.0 && lo <= hi) {
        return Err(Error::Domain(format!("dominance interval [{lo}, {hi}] not inside [-1, 1)")));
    }
    let mut ts: Vec<f64> =
        (0..DOMINANCE_GRID).map(|i| lo + (hi - lo) * i as f64 / (DOMINANCE_GRID - 1) as f64).collect();
    for &x in nodes {
        let mut d = 1e-2;
        while d > 1e-8 {
            ts.extend([x - d, x + d].into_iter().filter(|t| (lo..=hi).contains(t)));
            d /= 4.0;
        }
    }
    let mut out = Dominance { ok: true, max_violation: 0.0, worst_t: lo };
    for t in ts {
        let hv = h.eval_unchecked(t);
        let gap = match direction {
            Direction::Below => hv - poly.eval(t),
            Direction::Above => poly.eval(t) - hv,
        };
        let violation = (-gap / hv.abs().max(1.0)).max(0.0);
        if violation > out.max_violation {
            out.max_violation = violation;
            out.worst_t = t;
        }
    }
    out.ok = out.max_violation <= DOMINANCE_SLACK;
    Ok(out)
}
