//! Bessel functions of the first kind for integer order.
//!
//! Ascending power series for `|x| <= 8`, where the largest series term stays
//! below ~1e2 and cancellation costs at most two digits. Between 8 and the
//! domain limit the series loses too many digits, so Miller's backward
//! recurrence normalized by `J0 + 2 Σ J_2k = 1` takes over.

use crate::error::{Error, Result};

/// Largest `|x|` accepted by [`bessel_j`].
pub const DOMAIN_LIMIT: f64 = 30.0;

/// First positive zero of `J0`, to the precision used for tuning the drive.
pub const J0_FIRST_ROOT: f64 = 2.4048;

const SERIES_LIMIT: f64 = 8.0;

/// `J_m(x)` for `m >= 0`, `|x| <= 30`, absolute error below 1e-12.
pub fn bessel_j(m: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > DOMAIN_LIMIT {
        return Err(Error::Domain { x, limit: DOMAIN_LIMIT });
    }
    Ok(eval(m, x))
}

/// `J_m(x)` for signed order, using `J_{-m} = (-1)^m J_m`.
pub fn bessel_j_signed(m: i32, x: f64) -> Result<f64> {
    let v = bessel_j(m.unsigned_abs(), x)?;
    Ok(if m < 0 && m % 2 != 0 { -v } else { v })
}

/// `J0(x)` without the domain check; accurate wherever [`bessel_j`] is.
pub fn bessel_j0(x: f64) -> f64 {
    eval(0, x)
}

fn eval(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let value = if x.abs() <= SERIES_LIMIT { series(m, x.abs()) } else { miller(m, x.abs()) };
    if x < 0.0 && m % 2 == 1 {
        -value
    } else {
        value
    }
}

fn series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=m).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    let q = half * half;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= -q / (k as f64 * (k + m) as f64);
        sum += term;
        if k as f64 > half && term.abs() <= 1e-16 * sum.abs().max(1e-300) {
            break;
        }
        if term == 0.0 || k > 500 {
            break;
        }
    }
    sum
}

fn miller(m: u32, x: f64) -> f64 {
    let start = {
        let n = (m.max(x as u32) as usize) + 40 + (x.sqrt() * 10.0) as usize;
        n + n % 2
    };
    let mut next = 0.0; // J_{k+1}
    let mut current = 1e-30; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        // current holds the unnormalized J_k
        if k as u32 == m {
            wanted = current;
        }
        if k % 2 == 0 {
            norm += 2.0 * current;
        }
        let prev = 2.0 * k as f64 / x * current - next;
        next = current;
        current = prev;
        if current.abs() > 1e250 {
            current *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    // current is now J_0
    norm += current;
    if m == 0 {
        wanted = current;
    }
    wanted / norm
}
