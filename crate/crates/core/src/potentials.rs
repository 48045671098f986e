//! Potential functions of the inner product `t = x . y` on the sphere.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A potential `h(t)`, finite on `[-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `(2(1-t))^{-alpha/2}`, `alpha > 0`.
    Riesz { alpha: f64 },
    /// `(2(1-t))^{1-n/2}`, the Riesz potential with `alpha = n - 2`.
    Newton { n: usize },
    /// `exp(-alpha (1-t))`, `alpha > 0`.
    Gaussian { alpha: f64 },
    /// `-log(2(1-t))`.
    Logarithmic,
    /// `-sqrt(2(1-t))`; `2 + h` is absolutely monotone.
    FejesToth,
    /// `base(t) + c`.
    Shifted { base: Box<Potential>, c: f64 },
}

/// Which derivative-sign hypotheses a potential satisfies on `[-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonotonicityClass {
    pub absolutely_monotone: bool,
    pub strictly_absolutely_monotone: bool,
    /// `h + c` is absolutely monotone for some constant `c`.
    pub shift_absolutely_monotone: bool,
    /// Smallest `r` with `h^{(i)} >= 0` for every `i >= r`.
    pub min_nonneg_derivative_order: Option<usize>,
}

impl MonotonicityClass {
    /// True when `h^{(order)} >= 0` on `[-1, 1)` is certified.
    pub fn derivative_nonneg(&self, order: usize) -> bool {
        self.min_nonneg_derivative_order.is_some_and(|r| order >= r)
    }
}

/// Result of [`classify`]: closed-form flags plus the outcome of the sampled
/// finite-difference consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub class: MonotonicityClass,
    pub sampling_consistent: bool,
}

impl Potential {
    pub fn riesz(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("Riesz exponent must be positive (got {alpha})")));
        }
        Ok(Potential::Riesz { alpha })
    }

    pub fn newton(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("Newton potential needs n >= 2 (got {n})")));
        }
        Ok(Potential::Newton { n })
    }

    pub fn gaussian(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("Gaussian parameter must be positive (got {alpha})")));
        }
        Ok(Potential::Gaussian { alpha })
    }

    pub fn shifted(base: Potential, c: f64) -> Self {
        Potential::Shifted { base: Box::new(base), c }
    }

    /// Exponent `alpha` such that the potential is `(2(1-t))^{-alpha/2}`, for
    /// the power-law kinds. Newton with `n = 2` gives `alpha = 0` (constant 1).
    fn power_exponent(&self) -> Option<f64> {
        match self {
            Potential::Riesz { alpha } => Some(*alpha),
            Potential::Newton { n } => Some(*n as f64 - 2.0),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        Ok(self.derivative_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let u = 2.0 * (1.0 - t);
        match self {
            Potential::Riesz { .. } | Potential::Newton { .. } => {
                let alpha = self.power_exponent().unwrap();
                if alpha == 0.0 {
                    1.0
                } else {
                    u.powf(-alpha / 2.0)
                }
            }
            Potential::Gaussian { alpha } => (-alpha * (1.0 - t)).exp(),
            Potential::Logarithmic => -u.ln(),
            Potential::FejesToth => -u.sqrt(),
            Potential::Shifted { base, c } => base.eval_unchecked(t) + c,
        }
    }

    pub(crate) fn derivative_unchecked(&self, t: f64) -> f64 {
        let u = 2.0 * (1.0 - t);
        match self {
            Potential::Riesz { .. } | Potential::Newton { .. } => {
                let alpha = self.power_exponent().unwrap();
                if alpha == 0.0 {
                    0.0
                } else {
                    alpha * u.powf(-alpha / 2.0 - 1.0)
                }
            }
            Potential::Gaussian { alpha } => alpha * (-alpha * (1.0 - t)).exp(),
            Potential::Logarithmic => 1.0 / (1.0 - t),
            Potential::FejesToth => 1.0 / u.sqrt(),
            Potential::Shifted { base, .. } => base.derivative_unchecked(t),
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Potential::Shifted { base, .. } => base.is_constant(),
            _ => self.power_exponent() == Some(0.0),
        }
    }

    /// Constant `c` such that `h + c` is nonnegative with all derivatives
    /// nonnegative, when one is known in closed form.
    pub fn monotone_shift(&self) -> Option<f64> {
        match self {
            Potential::FejesToth => Some(2.0),
            // -log(2(1-t)) >= -log 4 on [-1, 1)
            Potential::Logarithmic => Some(4f64.ln()),
            Potential::Shifted { base, c } => base.monotone_shift().map(|s| s - c),
            _ if self.class().absolutely_monotone => Some(0.0),
            _ => None,
        }
    }

    /// Monotonicity flags from closed-form knowledge of each kind.
    pub fn class(&self) -> MonotonicityClass {
        match self {
            Potential::Riesz { .. }
            | Potential::Newton { .. }
            | Potential::Gaussian { .. }
            | Potential::Logarithmic => {
                // Newton in the plane is the constant 1: a polynomial, so
                // absolutely monotone without being strictly so. The log
                // potential is negative for t < 1/2; it is listed here because
                // only derivatives of order >= 1 enter the bounds.
                MonotonicityClass {
                    absolutely_monotone: true,
                    strictly_absolutely_monotone: !self.is_constant(),
                    shift_absolutely_monotone: true,
                    min_nonneg_derivative_order: Some(0),
                }
            }
            // h = -sqrt(2(1-t)) < 0, but every derivative of order >= 1 is
            // positive and 2 + h >= 0 on [-1, 1].
            Potential::FejesToth => MonotonicityClass {
                absolutely_monotone: false,
                strictly_absolutely_monotone: false,
                shift_absolutely_monotone: true,
                min_nonneg_derivative_order: Some(1),
            },
            Potential::Shifted { base, c } => {
                let b = base.class();
                // base + s is absolutely monotone, so base + c is too when c >= s
                let absolutely =
                    (b.absolutely_monotone && *c >= 0.0) || base.monotone_shift().is_some_and(|s| *c >= s);
                MonotonicityClass {
                    absolutely_monotone: absolutely,
                    strictly_absolutely_monotone: absolutely && !base.is_constant(),
                    shift_absolutely_monotone: b.shift_absolutely_monotone,
                    min_nonneg_derivative_order: if absolutely {
                        Some(0)
                    } else {
                        b.min_nonneg_derivative_order.map(|r| r.max(1))
                    },
                }
            }
        }
    }
}

fn check_arg(t: f64) -> Result<()> {
    if t.is_nan() || t >= 1.0 {
        return Err(Error::Domain(format!("potential evaluated at t = {t} (must be < 1)")));
    }
    if t < -1.0 - 1e-12 {
        return Err(Error::Domain(format!("potential evaluated at t = {t} < -1")));
    }
    Ok(())
}

/// Closed-form classification, cross-checked by sampling forward differences
/// of orders `0..=max_order` on `grid`.
///
/// Forward differences of an absolutely monotone function are nonnegative
/// (`Delta^r h = delta^r h^{(r)}(xi)`), so a negative difference beyond
/// rounding contradicts the claimed class.
pub fn classify(h: &Potential, max_order: usize, grid: &[f64]) -> Classification {
    let class = h.class();
    let offset = h.monotone_shift().unwrap_or(0.0);
    let step = 1e-2;
    let mut consistent = true;
    for &t0 in grid {
        if !(-1.0..1.0).contains(&t0) {
            continue;
        }
        for order in 0..=max_order {
            if !class.derivative_nonneg(order) && !(order == 0 && class.shift_absolutely_monotone) {
                continue;
            }
            if t0 + order as f64 * step >= 1.0 - 1e-9 {
                continue;
            }
            let f = |t: f64| h.eval_unchecked(t) + if order == 0 { offset } else { 0.0 };
            let mut diff = 0.0;
            let mut binom = 1.0;
            let mut scale = 0.0;
            for j in 0..=order {
                let sign = if (order - j) % 2 == 0 { 1.0 } else { -1.0 };
                let v = f(t0 + j as f64 * step);
                diff += sign * binom * v;
                scale += binom * v.abs();
                binom = binom * (order - j) as f64 / (j + 1) as f64;
            }
            if diff < -1e-12 * scale.max(1.0) {
                consistent = false;
            }
        }
    }
    Classification { class, sampling_consistent: consistent }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Riesz { alpha } => write!(f, "riesz:{alpha}"),
            Potential::Newton { n } => write!(f, "newton:{n}"),
            Potential::Gaussian { alpha } => write!(f, "gaussian:{alpha}"),
            Potential::Logarithmic => write!(f, "log"),
            Potential::FejesToth => write!(f, "fejes-toth"),
            Potential::Shifted { base, c } => write!(f, "shift:{c}:{base}"),
        }
    }
}

impl Serialize for Potential {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parses `riesz:1.0`, `newton:3`, `gaussian:2.5`, `log`, `fejes-toth`,
/// `shift:2.0:fejes-toth`. A bare `newton` needs a dimension; see
/// [`Potential::parse_with_dimension`].
impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Potential::parse_with_dimension(s, None)
    }
}

impl Potential {
    pub fn parse_with_dimension(s: &str, n: Option<usize>) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::Parse(format!("potential `{s}`: {msg}"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad("expected a number"));
        if let Some(rest) = s.strip_prefix("shift:") {
            let (c, base) = rest.split_once(':').ok_or_else(|| bad("expected shift:<c>:<potential>"))?;
            return Ok(Potential::shifted(Potential::parse_with_dimension(base, n)?, num(c)?));
        }
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("riesz", Some(a)) => Potential::riesz(num(a)?),
            ("riesz", None) => Potential::riesz(1.0),
            ("coulomb", None) => Potential::riesz(1.0),
            ("newton", Some(a)) => {
                Potential::newton(a.parse().map_err(|_| bad("expected an integer dimension"))?)
            }
            ("newton", None) => match n {
                Some(n) => Potential::newton(n),
                None => Err(bad("newton needs a dimension (newton:<n> or --n)")),
            },
            ("gaussian", Some(a)) => Potential::gaussian(num(a)?),
            ("log", None) | ("logarithmic", None) => Ok(Potential::Logarithmic),
            ("fejes-toth", None) => Ok(Potential::FejesToth),
            _ => Err(bad("unknown potential")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<Potential> {
        vec![
            Potential::riesz(1.0).unwrap(),
            Potential::riesz(3.5).unwrap(),
            Potential::newton(5).unwrap(),
            Potential::gaussian(2.5).unwrap(),
            Potential::Logarithmic,
            Potential::FejesToth,
            Potential::shifted(Potential::FejesToth, 2.0),
        ]
    }

    #[test]
    fn closed_form_values() {
        let r1 = Potential::riesz(1.0).unwrap();
        assert!((r1.eval(-1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((Potential::Logarithmic.eval(0.0).unwrap() + 2f64.ln()).abs() < 1e-15);
        let newton3 = Potential::newton(3).unwrap();
        for &t in &[-1.0, -0.3, 0.4, 0.99] {
            assert_eq!(newton3.eval(t).unwrap(), r1.eval(t).unwrap());
        }
        assert!((Potential::FejesToth.eval(-1.0).unwrap() + 2.0).abs() < 1e-15);
        assert_eq!(Potential::newton(2).unwrap().eval(0.7).unwrap(), 1.0);
    }

    #[test]
    fn singular_at_one() {
        for h in builtins() {
            assert!(h.eval(1.0).is_err());
            assert!(h.derivative(1.0).is_err());
        }
    }

    #[test]
    fn derivative_examples() {
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let h = Potential::riesz(alpha).unwrap();
            let expect = alpha * 2f64.powf(-alpha / 2.0 - 1.0);
            assert!((h.derivative(0.0).unwrap() - expect).abs() < 1e-15);
        }
        let g = Potential::gaussian(1.7).unwrap();
        assert!((g.derivative(1.0 - 1e-15).unwrap() - 1.7).abs() < 1e-12);
        assert!((Potential::FejesToth.derivative(-1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for h in builtins() {
            for _ in 0..50 {
                let t: f64 = rng.random_range(-0.99..0.9);
                let d = 1e-6;
                let fd = (h.eval(t + d).unwrap() - h.eval(t - d).unwrap()) / (2.0 * d);
                let exact = h.derivative(t).unwrap();
                assert!((exact - fd).abs() < 1e-6 * (1.0 + exact.abs()), "{h} at {t}");
            }
        }
    }

    #[test]
    fn shift_is_exact() {
        for h in builtins() {
            let s = Potential::shifted(h.clone(), 0.75);
            for &t in &[-1.0, -0.5, 0.0, 0.6] {
                assert_eq!(s.eval(t).unwrap(), h.eval(t).unwrap() + 0.75);
                assert_eq!(s.derivative(t).unwrap(), h.derivative(t).unwrap());
            }
        }
    }

    #[test]
    fn absolutely_monotone_kinds_increase() {
        for h in builtins().into_iter().filter(|h| h.class().absolutely_monotone) {
            let grid: Vec<f64> = (0..1000).map(|i| -1.0 + 1.999 * i as f64 / 999.0).collect();
            for w in grid.windows(2) {
                assert!(h.eval(w[0]).unwrap() <= h.eval(w[1]).unwrap(), "{h}");
            }
        }
    }

    #[test]
    fn classification() {
        let grid: Vec<f64> = (0..40).map(|i| -1.0 + i as f64 * 0.045).collect();
        let r = classify(&Potential::riesz(1.0).unwrap(), 6, &grid);
        assert!(r.class.absolutely_monotone && r.class.strictly_absolutely_monotone);
        assert!(r.sampling_consistent);

        let ft = classify(&Potential::FejesToth, 6, &grid);
        assert!(!ft.class.absolutely_monotone);
        assert!(ft.class.shift_absolutely_monotone);
        assert_eq!(ft.class.min_nonneg_derivative_order, Some(1));
        assert_eq!(Potential::FejesToth.monotone_shift(), Some(2.0));
        assert!(ft.sampling_consistent);

        let shifted = classify(&Potential::shifted(Potential::FejesToth, 2.0), 6, &grid);
        assert!(shifted.class.absolutely_monotone);
        assert!(shifted.sampling_consistent);

        let partial = Potential::shifted(Potential::FejesToth, 1.0).class();
        assert!(!partial.absolutely_monotone && partial.shift_absolutely_monotone);

        let plane = Potential::newton(2).unwrap().class();
        assert!(plane.absolutely_monotone && !plane.strictly_absolutely_monotone);

        for h in builtins() {
            let c = classify(&h, 5, &grid);
            assert!(c.sampling_consistent, "{h}");
            let cl = c.class;
            assert!(!cl.strictly_absolutely_monotone || cl.absolutely_monotone);
            assert!(!cl.absolutely_monotone || cl.shift_absolutely_monotone);
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["riesz:1.5", "gaussian:2.5", "log", "fejes-toth", "shift:2:fejes-toth", "newton:4"] {
            let p: Potential = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<Potential>().unwrap(), p);
        }
        assert_eq!(Potential::parse_with_dimension("newton", Some(3)).unwrap(), Potential::Newton { n: 3 });
        assert!("newton".parse::<Potential>().is_err());
        assert!("riesz:-1".parse::<Potential>().is_err());
        assert!("cubic".parse::<Potential>().is_err());
        assert_eq!("riesz:1.0".parse::<Potential>().unwrap(), Potential::Riesz { alpha: 1.0 });
    }
}
