use crate::error::{Error, Result};

/// Bracketed root finder: bisection safeguarded secant steps (Illinois-style
/// false position falls back to bisection whenever the secant step leaves the
/// bracket or fails to shrink it).
pub fn find_root_bracketed<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad root bracket [{lo}, {hi}] tol {tol}")));
    }
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::Bracketing { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    for _ in 0..500 {
        let width = b - a;
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        // accept the secant point only when it sits well inside the bracket
        let x = if secant.is_finite() && secant > a + 0.05 * width && secant < b - 0.05 * width {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if fx.abs() <= tol || width <= tol || fx == 0.0 {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        // force a bisection when the secant barely moved one end
        if b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm.abs() <= tol || fm == 0.0 {
                return Ok(m);
            }
            if fa * fm < 0.0 {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
        }
        if b - a <= tol {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bessel_jn;

    #[test]
    fn sqrt_two() {
        let r = find_root_bracketed(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn identity_root() {
        let r = find_root_bracketed(|x| x, -1.0, 1.0, 1e-14).unwrap();
        assert!(r.abs() < 1e-14);
    }

    #[test]
    fn bessel_crossing_matches_scan() {
        let f = |b: f64| bessel_jn(0, b).unwrap() - bessel_jn(1, b).unwrap();
        // dense scan oracle for the sign change
        let mut scan = 0.0;
        let mut prev = f(1.0);
        for i in 1..=100_000 {
            let x = 1.0 + i as f64 * 1e-5;
            let v = f(x);
            if prev * v <= 0.0 {
                scan = x;
                break;
            }
            prev = v;
        }
        let r = find_root_bracketed(f, 1.0, 2.0, 1e-13).unwrap();
        assert!((r - scan).abs() < 1e-5);
        assert!((r - 1.4347).abs() < 1e-4);
    }

    #[test]
    fn missing_sign_change() {
        let r = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::Bracketing { .. })));
    }
}
