//! Jacobi and generalized Laguerre polynomials with first and second
//! derivatives, evaluated by three-term recurrence in the degree.
//!
//! Derivatives use the parameter-shift identities
//! `d/dg P_n^{(a,b)} = (n+a+b+1)/2 * P_{n-1}^{(a+1,b+1)}` and
//! `d/dg L_n^{(a)} = -L_{n-1}^{(a+1)}`, applied repeatedly, rather than a
//! differentiated recurrence.

use crate::{Error, Result};

/// Value and first two derivatives of a polynomial at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Evaluate the Jacobi polynomial `P_n^{(a,b)}(g)` by the standard
/// three-term recurrence in `n`.
///
/// Requires `a, b > -1`.
pub(crate) fn jacobi_value(n: usize, a: f64, b: f64, g: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 0.5 * ((a + b + 2.0) * g + (a - b));
    for m in 1..n {
        let mf = m as f64;
        let s = 2.0 * mf + a + b;
        let num = (s + 1.0) * ((s * (s + 2.0)) * g + a * a - b * b) * cur
            - 2.0 * (mf + a) * (mf + b) * (s + 2.0) * prev;
        let den = 2.0 * (mf + 1.0) * (mf + a + b + 1.0) * s;
        prev = cur;
        cur = num / den;
    }
    cur
}

/// Evaluate the generalized Laguerre polynomial `L_n^{(a)}(g)`.
pub(crate) fn laguerre_value(n: usize, a: f64, g: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - g;
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + a + 1.0 - g) * cur - (mf + a) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn check_jacobi_params(a: f64, b: f64) -> Result<()> {
    if !(a > -1.0) || !(b > -1.0) {
        return Err(Error::PolynomialParameter(format!(
            "Jacobi polynomial needs a, b > -1 (got a = {a}, b = {b})"
        )));
    }
    Ok(())
}

/// Derivatives `d^j/dg^j P_n^{(a,b)}(g)` for `j = 0..=orders`.
pub(crate) fn jacobi_derivs(n: usize, a: f64, b: f64, g: f64, orders: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(orders + 1);
    let mut factor = 1.0;
    for j in 0..=orders {
        if n < j {
            out.push(0.0);
        } else {
            out.push(factor * jacobi_value(n - j, a + j as f64, b + j as f64, g));
        }
        factor *= 0.5 * (n as f64 + a + b + 1.0 + j as f64);
    }
    out
}

/// Derivatives `d^j/dg^j L_n^{(a)}(g)` for `j = 0..=orders`.
pub(crate) fn laguerre_derivs(n: usize, a: f64, g: f64, orders: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(orders + 1);
    let mut sign = 1.0;
    for j in 0..=orders {
        if n < j {
            out.push(0.0);
        } else {
            out.push(sign * laguerre_value(n - j, a + j as f64, g));
        }
        sign = -sign;
    }
    out
}

/// `P_n^{(a,b)}(g)` with its first two `g`-derivatives.
pub fn jacobi_eval(n: usize, a: f64, b: f64, g: f64) -> Result<PolyEval> {
    check_jacobi_params(a, b)?;
    let d = jacobi_derivs(n, a, b, g, 2);
    Ok(PolyEval {
        value: d[0],
        d1: d[1],
        d2: d[2],
    })
}

/// `L_n^{(a)}(g)` with its first two `g`-derivatives.
pub fn laguerre_eval(n: usize, a: f64, g: f64) -> Result<PolyEval> {
    if !(a > -1.0) {
        return Err(Error::PolynomialParameter(format!(
            "Laguerre polynomial needs a > -1 (got a = {a})"
        )));
    }
    let d = laguerre_derivs(n, a, g, 2);
    Ok(PolyEval {
        value: d[0],
        d1: d[1],
        d2: d[2],
    })
}
