//! Solver for the degree-`k` polynomial solutions of the
//! nonhypergeometric-type equation
//!
//! ```text
//! g^3 F'' + a (g^2 - xi^2) F' + (b g + c) F = 0,     b = -k (a + k - 1),
//! ```
//!
//! which admits `k + 1` polynomial solutions `F_n` with `k + 1` distinct
//! constants `c_n`. Inserting `F = sum_j f_j g^j` and collecting powers of
//! `g` gives, for row `m = 0..k`,
//!
//! ```text
//! [(m-1)(m-2+a) + b] f_{m-1} - a xi^2 (m+1) f_{m+1} + c f_m = 0,
//! ```
//!
//! while the `m = k+1` row closes identically by the choice of `b`. The
//! admissible `c` are therefore the eigenvalues of a real tridiagonal
//! matrix with zero diagonal.
//!
//! In the physically admissible range the two off-diagonal bands have
//! entrywise products `> 0`, so a diagonal similarity maps the matrix to a
//! symmetric tridiagonal one and the spectrum is provably real; the solver
//! then uses Sturm bisection. Outside that range it falls back to root
//! finding on the characteristic polynomial and reports complex or
//! repeated values as an error.

use crate::numerics::tridiag_all_eigenvalues;
use crate::{Error, Result};
use serde::Serialize;

/// One solved level: the constant `c` and the polynomial coefficients of
/// `F` (ascending powers, leading coefficient 1).
#[derive(Debug, Clone, Serialize)]
pub struct QesLevel {
    pub c: f64,
    pub coeffs: Vec<f64>,
}

/// The `k+1` constants `c_n` and polynomials `F_n` for one parameter set.
/// `b = -k(a+k-1)` is implied, never stored.
#[derive(Debug, Clone, Serialize)]
pub struct QesSolution {
    pub k: u32,
    pub a: f64,
    pub xi: f64,
    /// Sorted ascending in `c`.
    pub levels: Vec<QesLevel>,
}

impl QesSolution {
    pub fn b(&self) -> f64 {
        implied_b(self.k, self.a)
    }
}

pub fn implied_b(k: u32, a: f64) -> f64 {
    let kf = k as f64;
    -kf * (a + kf - 1.0)
}

fn check_params(k: u32, a: f64, xi: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::InadmissibleFamily(
            "QES polynomial degree k must be >= 1".into(),
        ));
    }
    if a == 0.0 || !a.is_finite() {
        return Err(Error::QesDegenerate);
    }
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InadmissibleFamily(format!(
            "QES scale xi must be positive (got {xi})"
        )));
    }
    Ok(())
}

/// The `(k+1) x (k+1)` real tridiagonal matrix whose eigenvalues are the
/// admissible `c` values (row-major dense form).
pub fn qes_matrix(k: u32, a: f64, xi: f64) -> Result<Vec<Vec<f64>>> {
    check_params(k, a, xi)?;
    let n = k as usize + 1;
    let b = implied_b(k, a);
    let mut mat = vec![vec![0.0; n]; n];
    for m in 0..n {
        let mf = m as f64;
        if m > 0 {
            mat[m][m - 1] = -((mf - 1.0) * (mf - 2.0 + a) + b);
        }
        if m + 1 < n {
            mat[m][m + 1] = a * xi * xi * (mf + 1.0);
        }
    }
    Ok(mat)
}

/// Monic characteristic polynomial of a tridiagonal matrix with zero
/// diagonal, via the continuant recurrence
/// `chi_{m+1} = lambda chi_m - pi_m chi_{m-1}` where `pi_m` is the product
/// of the off-diagonal pair between rows `m` and `m+1`.
fn char_poly(products: &[f64]) -> Vec<f64> {
    let mut prev = vec![1.0]; // chi_0
    let mut cur = vec![0.0, 1.0]; // chi_1 = lambda
    for &pi in products {
        let mut next = vec![0.0; cur.len() + 1];
        for (j, &cj) in cur.iter().enumerate() {
            next[j + 1] += cj;
        }
        for (j, &pj) in prev.iter().enumerate() {
            next[j] -= pi * pj;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// All complex roots of a monic real polynomial by Durand-Kerner iteration.
/// Returns (re, im) pairs. Degrees here never exceed ~13.
fn durand_kerner(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut v = (0.0, 0.0);
        for &c in coeffs.iter().rev() {
            v = (v.0 * z.0 - v.1 * z.1 + c, v.0 * z.1 + v.1 * z.0);
        }
        v
    };
    let radius = 1.0 + coeffs[..deg].iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    let mut z: Vec<(f64, f64)> = (0..deg)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / deg as f64 + 0.4;
            (radius * th.cos(), radius * th.sin())
        })
        .collect();
    for _ in 0..400 {
        let mut moved: f64 = 0.0;
        for j in 0..deg {
            let mut den = (1.0, 0.0);
            for l in 0..deg {
                if l != j {
                    let d = (z[j].0 - z[l].0, z[j].1 - z[l].1);
                    den = (den.0 * d.0 - den.1 * d.1, den.0 * d.1 + den.1 * d.0);
                }
            }
            let num = eval(z[j]);
            let d2 = den.0 * den.0 + den.1 * den.1;
            if d2 == 0.0 {
                continue;
            }
            let step = (
                (num.0 * den.0 + num.1 * den.1) / d2,
                (num.1 * den.0 - num.0 * den.1) / d2,
            );
            z[j] = (z[j].0 - step.0, z[j].1 - step.1);
            moved = moved.max(step.0.hypot(step.1));
        }
        if moved < 1e-15 * radius {
            break;
        }
    }
    z
}

/// Eigenvector of the coefficient matrix for a given `c`, by the upward
/// recurrence `f_{m+1} = (c f_m - sub_m f_{m-1}) / sup_m`, `f_0 = 1`.
fn coefficient_vector(mat: &[Vec<f64>], c: f64) -> Vec<f64> {
    let n = mat.len();
    let mut f = vec![0.0; n];
    f[0] = 1.0;
    if n > 1 {
        f[1] = c * f[0] / mat[0][1];
    }
    for m in 1..n - 1 {
        f[m + 1] = (c * f[m] - mat[m][m - 1] * f[m - 1]) / mat[m][m + 1];
    }
    f
}

/// Relative residual of `g^3 F'' + a(g^2 - xi^2) F' + (b g + c) F` at `g`.
pub fn ode_residual(a: f64, xi: f64, b: f64, c: f64, coeffs: &[f64], g: f64) -> f64 {
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for (j, &cj) in coeffs.iter().enumerate() {
        let jf = j as f64;
        let p = g.powi(j as i32);
        v += cj * p;
        if j >= 1 {
            d1 += cj * jf * g.powi(j as i32 - 1);
        }
        if j >= 2 {
            d2 += cj * jf * (jf - 1.0) * g.powi(j as i32 - 2);
        }
    }
    let t1 = g * g * g * d2;
    let t2 = a * (g * g - xi * xi) * d1;
    let t3 = (b * g + c) * v;
    let scale =
        t1.abs() + a.abs() * (g * g + xi * xi) * d1.abs() + (b.abs() * g.abs() + c.abs()) * v.abs();
    (t1 + t2 + t3).abs() / scale.max(1e-300)
}

/// Solve for the `k+1` constants and coefficient vectors, sorted by `c`
/// ascending with leading coefficient 1.
pub fn qes_solve(k: u32, a: f64, xi: f64) -> Result<QesSolution> {
    let mat = qes_matrix(k, a, xi)?;
    let n = mat.len();
    let products: Vec<f64> = (0..n - 1).map(|i| mat[i][i + 1] * mat[i + 1][i]).collect();

    let mut cs: Vec<f64> = if products.iter().all(|&p| p > 0.0) {
        // Diagonal similarity to a symmetric tridiagonal matrix: spectrum
        // is exactly real, solve by Sturm bisection.
        let off: Vec<f64> = products.iter().map(|&p| p.sqrt()).collect();
        tridiag_all_eigenvalues(&vec![0.0; n], &off)?
    } else {
        let poly = char_poly(&products);
        let roots = durand_kerner(&poly);
        let radius = roots.iter().fold(0.0f64, |m, r| m.max(r.0.hypot(r.1)));
        let im_tol = 1e-9 * radius.max(1e-300);
        for &(re, im) in &roots {
            if im.abs() > im_tol {
                return Err(Error::QesSpectrumNotReal(format!(
                    "complex pair c = {re} ± {}i at k = {k}, a = {a}, xi = {xi}",
                    im.abs()
                )));
            }
        }
        let mut rs: Vec<f64> = roots.iter().map(|r| r.0).collect();
        rs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        rs
    };
    cs.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let c_scale = cs.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    for w in cs.windows(2) {
        if (w[1] - w[0]).abs() < 1e-9 * c_scale.max(1e-300) {
            return Err(Error::QesSpectrumNotReal(format!(
                "repeated constants c ≈ {} at k = {k}, a = {a}, xi = {xi}",
                w[0]
            )));
        }
    }

    let b = implied_b(k, a);
    let mut levels = Vec::with_capacity(n);
    for &c in &cs {
        let mut coeffs = coefficient_vector(&mat, c);
        let lead = coeffs[n - 1];
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::QesSpectrumNotReal(format!(
                "degenerate leading coefficient for c = {c}"
            )));
        }
        for f in coeffs.iter_mut() {
            *f /= lead;
        }
        // Consistency: the solved polynomial must satisfy the defining
        // equation along a sample of the half-line.
        for i in 1..=16 {
            let g = 10.0 * i as f64 / 16.0;
            let r = ode_residual(a, xi, b, c, &coeffs, g);
            if !(r <= 1e-9) {
                return Err(Error::QesSpectrumNotReal(format!(
                    "solution residual {r} at g = {g} for c = {c}"
                )));
            }
        }
        levels.push(QesLevel { c, coeffs });
    }

    Ok(QesSolution { k, a, xi, levels })
}
