use crate::error::{Error, Result};

/// Largest |x| evaluated with the ascending series; beyond it Miller's
/// backward recurrence is used.
const SERIES_LIMIT: f64 = 10.0;

/// Bessel function of the first kind `J_n(x)` for integer order.
///
/// Small and moderate arguments (the regime of frequency-modulation indices)
/// use the ascending series, which stays within ~3e-13 absolute for
/// |x| <= 10.
pub fn bessel_jn(order: i32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("bessel argument must be finite, got {x}")));
    }
    let n = order.unsigned_abs();
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    let mut sign = 1.0;
    if order < 0 && n % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && n % 2 == 1 {
        sign = -sign;
    }
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(n, ax) } else { miller(n, ax) };
    Ok(sign * v)
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading term (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
        if k > 300 {
            break;
        }
    }
    sum
}

/// Backward recurrence normalised with J0 + 2 sum J_2k = 1.
fn miller(n: u32, x: f64) -> f64 {
    let start = {
        let m = (x as u32).max(n) + 40 + (x.sqrt() * 10.0) as u32;
        m + (m % 2)
    };
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    let mut want = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        let idx = k - 1;
        if idx == n {
            want = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
    }
    norm += j_cur;
    want / norm
}
