//! Universal lower and upper bounds on weighted energy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{hermite_interpolant, verify_dominance, Direction, NodeMultiset};
use crate::orthopoly::{gegenbauer_values, GegenbauerSeries, MonomialPoly};
use crate::par::{map_collect, Execution};
use crate::potentials::Potential;
use crate::quadrature::{
    dgs_bound, levenshtein_polynomial_from_rule, rule_for_degree, rule_from_s, select_degree_from_s,
    solve_ulb_rule, validity_interval, QuadratureRule,
};

/// Tolerance on Gegenbauer coefficient signs of certificates.
pub const COEFF_TOL: f64 = 1e-9;
/// Coefficients of `g_T` above this count as positive when forming `lambda*`.
pub const LAMBDA_THRESHOLD: f64 = 1e-12;
/// Right end of the grid on which ULB dominance `f <= h` is sampled.
pub const ULB_GRID_END: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Ulb,
    Uub,
    DesignUlb,
    DesignUub,
}

/// One named certificate or hypothesis check. Only `gating` checks decide
/// feasibility; the rest are informational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub gating: bool,
    pub detail: String,
}

impl Check {
    fn gating(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, gating: true, detail }
    }

    fn info(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, gating: false, detail }
    }
}

/// Summary of a weight vector: `S_W = sum w_i^2`, `N_W = 1/S_W` and the
/// variance `S_W/N - 1/N^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightStats {
    pub count: usize,
    pub s_w: f64,
    pub n_w: f64,
    pub variance: f64,
}

impl WeightStats {
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Code("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Code(format!("weights must be positive (got {w})")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Code(format!("weights sum to {total}, not 1")));
        }
        let count = weights.len();
        let s_w: f64 = weights.iter().map(|w| w * w).sum();
        let nf = count as f64;
        Ok(WeightStats { count, s_w, n_w: 1.0 / s_w, variance: s_w / nf - 1.0 / (nf * nf) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub n: usize,
    pub m: usize,
    /// `N_W`.
    pub capacity: f64,
    pub s: Option<f64>,
    pub potential: Potential,
    pub rule: QuadratureRule,
    pub value: f64,
    pub certificate: GegenbauerSeries,
    pub certificate_poly: MonomialPoly,
    pub lambda_star: Option<f64>,
    pub n1: Option<f64>,
    pub feasible: bool,
    pub diagnostics: Vec<Check>,
    pub weights: Option<WeightStats>,
}

impl BoundReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.diagnostics.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QSign {
    Zero,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunctionValue {
    pub j: usize,
    pub value: f64,
    pub sign: QSign,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionReport {
    pub n: usize,
    pub m: usize,
    pub rule: QuadratureRule,
    pub values: Vec<TestFunctionValue>,
    /// Largest `|Q_j|` over `1 <= j <= min(m, j_max)`.
    pub max_vanishing_residual: f64,
    /// Indices with `Q_j < -1e-9`: the ULB can be improved with degree `j`.
    pub improvable_at: Vec<usize>,
}

fn feasible(diagnostics: &[Check]) -> bool {
    diagnostics.iter().filter(|c| c.gating).all(|c| c.passed)
}

fn require_potential(h: &Potential, order: usize, what: &str) -> Result<()> {
    if !h.class().derivative_nonneg(order) {
        return Err(Error::Hypothesis(format!(
            "{what} needs h^({order}) >= 0, which is not certified for {h}"
        )));
    }
    Ok(())
}

fn sum_rho_h(rule: &QuadratureRule, h: &Potential) -> f64 {
    rule.weighted_sum(|t| h.eval_unchecked(t))
}

fn nonconstant_signs(g: &GegenbauerSeries, m: usize, want_nonneg: bool) -> (bool, String) {
    let mut worst = (0usize, 0.0f64);
    for i in 1..=m {
        let c = g.coeff(i);
        let bad = if want_nonneg { -c } else { c };
        if bad > worst.1 {
            worst = (i, bad);
        }
    }
    (worst.1 <= COEFF_TOL, format!("worst index {} off by {:e}", worst.0, worst.1))
}

/// Test functions `Q_j = 1/N + sum rho_i P_j(alpha_i)` of a rule.
pub fn test_functions_for_rule(rule: &QuadratureRule, j_max: usize) -> Result<TestFunctionReport> {
    if j_max == 0 {
        return Err(Error::Domain("j_max must be at least 1".into()));
    }
    let mut acc = vec![1.0 / rule.capacity; j_max + 1];
    for (&a, &r) in rule.nodes.iter().zip(&rule.weights) {
        for (j, p) in gegenbauer_values(rule.n, j_max, a).into_iter().enumerate() {
            acc[j] += r * p;
        }
    }
    let mut values = Vec::with_capacity(j_max);
    let mut max_vanishing_residual = 0.0f64;
    let mut improvable_at = Vec::new();
    for (j, &q) in acc.iter().enumerate().skip(1) {
        let sign = if q.abs() <= COEFF_TOL {
            QSign::Zero
        } else if q > 0.0 {
            QSign::Positive
        } else {
            QSign::Negative
        };
        if j <= rule.m {
            max_vanishing_residual = max_vanishing_residual.max(q.abs());
        } else if sign == QSign::Negative {
            improvable_at.push(j);
        }
        values.push(TestFunctionValue { j, value: q, sign });
    }
    Ok(TestFunctionReport {
        n: rule.n,
        m: rule.m,
        rule: rule.clone(),
        values,
        max_vanishing_residual,
        improvable_at,
    })
}

/// Test functions against the ULB rule for `(n, N_W)`.
pub fn test_functions(n: usize, capacity: f64, j_max: usize) -> Result<TestFunctionReport> {
    test_functions_for_rule(&solve_ulb_rule(n, capacity)?, j_max)
}

/// Lower-bound report shared by [`ulb`] and [`design_ulb`].
fn lower_bound(kind: BoundKind, rule: QuadratureRule, h: &Potential) -> Result<BoundReport> {
    let n = rule.n;
    let value = sum_rho_h(&rule, h);
    let t = NodeMultiset::for_ulb(&rule)?;
    let interp = hermite_interpolant(h, &t, n)?;
    let f = &interp.gegenbauer;
    let mut diagnostics = vec![Check::gating(
        "interpolation",
        interp.interpolation_residual <= 1e-10,
        format!("residual {:e}", interp.interpolation_residual),
    )];

    let hi = ULB_GRID_END.max(0.5 * (1.0 + rule.s));
    let nodes: Vec<f64> = t.nodes().collect();
    let dom = verify_dominance(&interp.poly, h, (-1.0, hi), Direction::Below, &nodes)?;
    diagnostics.push(Check::gating(
        "dominance_below",
        dom.ok,
        format!("max violation {:e} at t = {}", dom.max_violation, dom.worst_t),
    ));

    let (pd, detail) = nonconstant_signs(f, f.degree(), true);
    diagnostics.push(match kind {
        BoundKind::Ulb => Check::gating("positive_definite", pd, detail),
        _ => Check::info("positive_definite", true, format!("not required for designs; {detail}")),
    });

    let objective = f.coeff(0) - interp.poly.eval(1.0) / rule.capacity;
    let gap = (objective - value).abs();
    diagnostics.push(Check::gating(
        "certificate_value",
        gap <= 1e-10 * value.abs().max(1.0),
        format!("f_0 - f(1)/N_W = {objective}, differs by {gap:e}"),
    ));

    let j_max = 3 * rule.m;
    let q = test_functions_for_rule(&rule, j_max)?;
    diagnostics.push(Check::info(
        "test_functions_nonnegative",
        q.improvable_at.is_empty(),
        if q.improvable_at.is_empty() {
            format!("Q_j >= 0 for m < j <= {j_max}; optimality beyond {j_max} not certified")
        } else {
            format!("Q_j < 0 at j = {:?}: bound improvable", q.improvable_at)
        },
    ));

    Ok(BoundReport {
        kind,
        n,
        m: rule.m,
        capacity: rule.capacity,
        s: None,
        potential: h.clone(),
        value,
        certificate: interp.gegenbauer.clone(),
        certificate_poly: interp.poly,
        lambda_star: None,
        n1: None,
        feasible: feasible(&diagnostics),
        diagnostics,
        weights: None,
        rule,
    })
}

/// Universal lower bound for weighted codes with `N_W = capacity`.
pub fn ulb(n: usize, capacity: f64, h: &Potential) -> Result<BoundReport> {
    if !h.class().shift_absolutely_monotone {
        return Err(Error::Hypothesis(format!(
            "ULB needs an absolutely monotone potential up to a shift; {h} is not"
        )));
    }
    lower_bound(BoundKind::Ulb, solve_ulb_rule(n, capacity)?, h)
}

/// [`ulb`] with `N_W` computed from a weight vector.
pub fn ulb_for_weights(weights: &[f64], n: usize, h: &Potential) -> Result<BoundReport> {
    let stats = WeightStats::from_weights(weights)?;
    let mut report = ulb(n, stats.n_w, h)?;
    report.weights = Some(stats);
    Ok(report)
}

/// ULB for spherical `tau`-designs; `N_W` must lie in `(D(n,tau), D(n,tau+1)]`.
pub fn design_ulb(n: usize, capacity: f64, tau: usize, h: &Potential) -> Result<BoundReport> {
    require_potential(h, tau + 1, "design ULB")?;
    lower_bound(BoundKind::DesignUlb, rule_for_degree(n, tau, capacity)?, h)
}

fn n1_hypothesis(n: usize, m: usize, n1: f64) -> Check {
    let (lo, hi) = (dgs_bound(n, m) as f64, dgs_bound(n, m + 1) as f64);
    let ok = n1 > lo && n1 <= hi * (1.0 + 1e-12);
    Check::info(
        "n1_interval",
        ok,
        format!(
            "N_1 = {n1} {} (D({n},{m}), D({n},{})] = ({lo}, {hi}]",
            if ok { "in" } else { "outside" },
            m + 1
        ),
    )
}

fn validity_check(n: usize, m: usize, s: f64) -> Result<Check> {
    let (lo, hi) = validity_interval(n, m)?;
    let ok = s >= lo - 1e-12 && s <= hi + 1e-12;
    Ok(Check::info("s_in_validity_interval", ok, format!("s = {s}, interval [{lo}, {hi}] for m = {m}")))
}

/// Universal upper bound for weighted codes with maximal inner product `s`.
///
/// `m_override` replaces the degree chosen from `s`; the N_1 hypothesis is
/// then only reported.
pub fn uub(n: usize, capacity: f64, s: f64, h: &Potential, m_override: Option<usize>) -> Result<BoundReport> {
    if !(capacity > 1.0) {
        return Err(Error::Capacity(capacity));
    }
    let m = match m_override {
        Some(m) => m,
        None => select_degree_from_s(n, s)?.m,
    };
    require_potential(h, m, "UUB")?;
    let validity = validity_check(n, m, s)?;
    let rule = rule_from_s(n, m, s, m_override.is_some())?;
    let n1 = rule.capacity;
    let f = levenshtein_polynomial_from_rule(&rule, validity.passed, m_override.is_some())?;
    let t = NodeMultiset::for_uub(&rule)?;
    let gt = hermite_interpolant(h, &t, n)?;
    let gtc = &gt.gegenbauer;
    let fc = &f.gegenbauer;

    let mut lambda = 0.0f64;
    for i in 1..=m {
        if gtc.coeff(i) > LAMBDA_THRESHOLD {
            lambda = lambda.max(gtc.coeff(i) / fc.coeff(i));
        }
    }
    let mut diagnostics = vec![validity, n1_hypothesis(n, m, n1)];
    if h.class().absolutely_monotone {
        let shortcut = (1..m).map(|i| gtc.coeff(i) / fc.coeff(i)).fold(0.0f64, f64::max);
        diagnostics.push(Check::info(
            "lambda_shortcut",
            (shortcut - lambda).abs() <= 1e-9 * lambda.abs().max(1.0),
            format!("max over 1..m-1 of (g_T)_i/f_i = {shortcut}"),
        ));
        let (pd, detail) = nonconstant_signs(gtc, m - 1, true);
        diagnostics.push(Check::info("g_t_positive_definite", pd, detail));
    }

    let g = gt.poly.add(&f.monomial.scale(-lambda));
    let gg = gtc.coeffs().iter().enumerate().map(|(i, &c)| c - lambda * fc.coeff(i));
    let gg: Vec<f64> = gg.chain((gtc.coeffs().len()..=m).map(|i| -lambda * fc.coeff(i))).collect();
    let certificate = GegenbauerSeries::new(n, gg)?;

    let value = -lambda * fc.coeff(0) * (1.0 - n1 / capacity) + gtc.coeff(0) - gt.poly.eval(1.0) / capacity;
    let rewritten =
        (-lambda * fc.coeff(0) + gt.poly.eval(1.0) / n1) * (1.0 - n1 / capacity) + sum_rho_h(&rule, h);
    diagnostics.push(Check::gating(
        "rewritten_formula",
        (value - rewritten).abs() <= 1e-9 * value.abs().max(1.0),
        format!("quadrature form gives {rewritten}"),
    ));
    let (neg, detail) = nonconstant_signs(&certificate, m, false);
    diagnostics.push(Check::gating("coefficients_nonpositive", neg, detail));
    let nodes: Vec<f64> = t.nodes().collect();
    let dom = verify_dominance(&g, h, (-1.0, s), Direction::Above, &nodes)?;
    diagnostics.push(Check::gating(
        "dominance_above",
        dom.ok,
        format!("max violation {:e} at t = {}", dom.max_violation, dom.worst_t),
    ));
    let interp = rule
        .nodes
        .iter()
        .map(|&a| (g.eval(a) - h.eval_unchecked(a)).abs() / h.eval_unchecked(a).abs().max(1.0))
        .fold(0.0f64, f64::max);
    diagnostics.push(Check::gating("interpolation", interp <= 1e-9, format!("residual {interp:e}")));

    Ok(BoundReport {
        kind: BoundKind::Uub,
        n,
        m,
        capacity,
        s: Some(s),
        potential: h.clone(),
        rule,
        value,
        certificate,
        certificate_poly: g,
        lambda_star: Some(lambda),
        n1: Some(n1),
        feasible: feasible(&diagnostics),
        diagnostics,
        weights: None,
    })
}

/// Upper bound for weighted `tau`-designs, using `g_T` itself (`lambda = 0`).
pub fn design_uub(n: usize, capacity: f64, s: f64, tau: usize, h: &Potential) -> Result<BoundReport> {
    if !(capacity > 1.0) {
        return Err(Error::Capacity(capacity));
    }
    require_potential(h, tau, "design UUB")?;
    let m = tau;
    let validity = validity_check(n, m, s)?;
    let rule = rule_from_s(n, m, s, true)?;
    let n1 = rule.capacity;
    let t = NodeMultiset::for_uub(&rule)?;
    let gt = hermite_interpolant(h, &t, n)?;
    let value = (capacity - n1) * gt.poly.eval(1.0) / (capacity * n1) + sum_rho_h(&rule, h);
    let mut diagnostics = vec![
        validity,
        n1_hypothesis(n, m, n1),
        Check::gating(
            "interpolation",
            gt.interpolation_residual <= 1e-10,
            format!("residual {:e}", gt.interpolation_residual),
        ),
    ];
    let nodes: Vec<f64> = t.nodes().collect();
    let dom = verify_dominance(&gt.poly, h, (-1.0, s), Direction::Above, &nodes)?;
    diagnostics.push(Check::gating(
        "dominance_above",
        dom.ok,
        format!("max violation {:e} at t = {}", dom.max_violation, dom.worst_t),
    ));
    Ok(BoundReport {
        kind: BoundKind::DesignUub,
        n,
        m,
        capacity,
        s: Some(s),
        potential: h.clone(),
        rule,
        value,
        certificate: gt.gegenbauer,
        certificate_poly: gt.poly,
        lambda_star: Some(0.0),
        n1: Some(n1),
        feasible: feasible(&diagnostics),
        diagnostics,
        weights: None,
    })
}

/// ULB values over many capacities, in input order.
pub fn ulb_sweep(n: usize, capacities: &[f64], h: &Potential, exec: Execution) -> Vec<Result<BoundReport>> {
    map_collect(capacities, exec, |&c| ulb(n, c, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_and_two_ulb() {
        let h = Potential::riesz(1.0).unwrap();
        let r = ulb(3, 3.5, &h).unwrap();
        let a0 = -1.0 / 2.5;
        assert!((r.value - (2.5 / 3.5) * h.eval(a0).unwrap()).abs() < 1e-13);
        assert!(r.feasible);
    }

    #[test]
    fn degree_two_uub_closed_form() {
        let h = Potential::riesz(1.0).unwrap();
        let (n, s, cap) = (3usize, -0.1, 4.2);
        let r = uub(n, cap, s, &h, None).unwrap();
        assert_eq!(r.m, 2);
        let (hs, hm) = (h.eval(s).unwrap(), h.eval(-1.0).unwrap());
        let nf = n as f64;
        let closed = ((nf - 1.0) * hs + (1.0 - nf * s * s) * hm) / (nf * (1.0 - s * s)) - hm / cap;
        assert!((r.value - closed).abs() < 1e-12);
        assert!((r.lambda_star.unwrap() - (hs - hm) / (1.0 - s * s)).abs() < 1e-12);
        assert!(r.feasible);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let pot = Potential::shifted(Potential::FejesToth, 1.0);
        assert!(ulb(3, 10.0, &pot).is_ok());
        assert!(matches!(design_ulb(3, 10.0, 9, &Potential::riesz(1.0).unwrap()), Err(Error::Hypothesis(_))));
        assert!(matches!(ulb(3, 1.5, &Potential::Logarithmic), Err(Error::Capacity(_))));
        assert!(test_functions(3, 10.0, 0).is_err());
        assert!(WeightStats::from_weights(&[0.5, 0.6]).is_err());
        assert!(WeightStats::from_weights(&[0.5, -0.5, 1.0]).is_err());
    }

    #[test]
    fn sweep_modes_agree() {
        let h = Potential::riesz(1.0).unwrap();
        let caps: Vec<f64> = (0..40).map(|i| 3.0 + 2.5 * i as f64).collect();
        let a = ulb_sweep(3, &caps, &h, Execution::Sequential);
        let b = ulb_sweep(3, &caps, &h, Execution::Parallel);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap().value, y.as_ref().unwrap().value);
        }
    }
}
