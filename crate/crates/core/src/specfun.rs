//! Special functions backing the closed-form expressions elsewhere in the
//! crate: the Gauss hypergeometric series, Laguerre and Legendre polynomials,
//! and stable log-factorials.

use std::sync::OnceLock;

use crate::error::{CoreError, Result};

/// Truncation control for series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesTolerance {
    /// Relative size below which a term counts as negligible.
    pub rel_eps: f64,
    /// Hard cap on the number of summed terms.
    pub max_terms: usize,
}

impl SeriesTolerance {
    pub fn new(rel_eps: f64, max_terms: usize) -> Result<Self> {
        if !(rel_eps > 0.0 && rel_eps < 1e-6) {
            return Err(CoreError::Domain(format!(
                "rel_eps must lie in (0, 1e-6), got {rel_eps}"
            )));
        }
        if max_terms < 100 {
            return Err(CoreError::Domain(format!(
                "max_terms must be at least 100, got {max_terms}"
            )));
        }
        Ok(Self { rel_eps, max_terms })
    }
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        // Arguments near 1 converge slowly, so the term budget is generous.
        Self {
            rel_eps: 1e-14,
            max_terms: 100_000,
        }
    }
}

/// Gauss hypergeometric function 2F1(a, b; c; z) for real parameters and
/// 0 <= z < 1, by direct series summation with the default tolerance.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_with(a, b, c, z, &SeriesTolerance::default())
}

/// As [`hyp2f1`] with an explicit tolerance.
pub fn hyp2f1_with(a: f64, b: f64, c: f64, z: f64, tol: &SeriesTolerance) -> Result<f64> {
    if c <= 0.0 && c == c.floor() {
        return Err(CoreError::Domain(format!(
            "2F1 parameter c must not be zero or a negative integer, got {c}"
        )));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(CoreError::Domain(format!(
            "2F1 argument must lie in [0, 1), got {z}"
        )));
    }
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    // Stop only after three consecutive negligible terms so that an
    // accidental zero term cannot end the summation early.
    let mut quiet = 0u8;
    for n in 0..tol.max_terms {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term.abs() < tol.rel_eps * sum.abs() {
            quiet += 1;
            if quiet >= 3 {
                // The remaining terms are close to geometric with the last
                // ratio; folding that tail in keeps the truncation error
                // well below rel_eps even for arguments near 1.
                if ratio > 0.0 && ratio < 1.0 {
                    sum += term * ratio / (1.0 - ratio);
                }
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(CoreError::SeriesDivergence {
        partial_sum: sum,
        terms: tol.max_terms,
    })
}

/// Laguerre polynomial L_n(x) by the three-term recurrence.
pub fn laguerre(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0_f64;
    let mut cur = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Legendre polynomial P_n(x) by the Bonnet recurrence. The argument is not
/// restricted to [-1, 1]; the fidelity formulas evaluate P_n beyond 1.
pub fn legendre(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0_f64;
    let mut cur = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

const LOG_FACTORIAL_TABLE_LEN: usize = 1024;

fn log_factorial_table() -> &'static [f64; LOG_FACTORIAL_TABLE_LEN] {
    static TABLE: OnceLock<[f64; LOG_FACTORIAL_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0_f64; LOG_FACTORIAL_TABLE_LEN];
        for n in 2..LOG_FACTORIAL_TABLE_LEN {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// ln(n!) from a cumulative table of logarithms.
pub fn log_factorial(n: usize) -> f64 {
    let table = log_factorial_table();
    if n < LOG_FACTORIAL_TABLE_LEN {
        table[n]
    } else {
        let mut acc = table[LOG_FACTORIAL_TABLE_LEN - 1];
        for k in LOG_FACTORIAL_TABLE_LEN..=n {
            acc += (k as f64).ln();
        }
        acc
    }
}
