//! Real roots of polynomials and scalar functions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::orthopoly::MonomialPoly;

/// Real roots of `p`, ascending.
///
/// Eigenvalues of the companion matrix with imaginary part below `imag_tol`
/// (relative to `1 + |z|`) are kept and polished by Newton steps on `p`.
pub fn real_roots(p: &MonomialPoly, imag_tol: f64) -> Result<Vec<f64>> {
    let d = p.degree();
    if d == 0 {
        return Ok(Vec::new());
    }
    let c = p.coeffs();
    let lead = p.leading();
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -c[i] / lead;
    }
    let eig = comp.complex_eigenvalues();
    let dp = p.derivative();
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= imag_tol * (1.0 + z.norm()))
        .map(|z| polish(p, &dp, z.re))
        .collect();
    if roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::RootFinding("non-finite companion eigenvalue".into()));
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

fn polish(p: &MonomialPoly, dp: &MonomialPoly, mut x: f64) -> f64 {
    let mut best = (p.eval(x).abs(), x);
    for _ in 0..50 {
        let d = dp.eval(x);
        if d == 0.0 {
            break;
        }
        let step = p.eval(x) / d;
        let next = x - step;
        let r = p.eval(next).abs();
        if r < best.0 {
            best = (r, next);
        }
        // a Newton step that does not reduce the residual means we are at the
        // rounding floor (or near a multiple root); keep the best iterate.
        if r >= best.0 && step.abs() < 1e-10 * (1.0 + x.abs()) {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    best.1
}

/// Brent's method on `[a, b]`; `f(a)` and `f(b)` must differ in sign.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::RootFinding(format!("no sign change on [{a}, {b}] (f = {fa}, {fb})")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::RootFinding("Brent iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_roots() {
        let rs = [-0.9, -0.31, 0.0, 0.25, 0.77];
        let p = MonomialPoly::from_roots(&rs).unwrap().scale(3.5);
        let got = real_roots(&p, 1e-8).unwrap();
        assert_eq!(got.len(), rs.len());
        for (g, r) in got.iter().zip(rs) {
            assert!((g - r).abs() < 1e-13);
        }
    }

    #[test]
    fn drops_complex_pairs() {
        // (t^2 + 1)(t - 0.5)
        let p = MonomialPoly::new(vec![-0.5, 1.0, -0.5, 1.0]).unwrap();
        let got = real_roots(&p, 1e-8).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0] - 0.5).abs() < 1e-15);
        assert!(real_roots(&MonomialPoly::constant(2.0), 1e-8).unwrap().is_empty());
    }

    #[test]
    fn brent_finds_cosine_fixed_point() {
        let x = brent(|x| x.cos() - x, 0.0, 1.0, 1e-15).unwrap();
        assert!((x - 0.739_085_133_215_160_6).abs() < 1e-14);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
        assert_eq!(brent(|x| x, 0.0, 1.0, 1e-12).unwrap(), 0.0);
    }
}
