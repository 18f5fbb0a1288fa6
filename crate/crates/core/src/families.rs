//! The three catalogs of solvable families on PDEM backgrounds, exposed as
//! self-describing objects: mass profile, effective potential, initial
//! potential for any von Roos ordering, closed-form energies, and
//! wavefunctions with analytic derivatives.
//!
//! * `JacobiEs`: `g = tanh(qx)`, `M = sech^2(qx)`, `F_n = P_n^{(a,b)}`,
//!   admissible for `a, b > -1/2`.
//! * `LaguerreEs`: `g = e^{-qx}`, `M = e^{-qx}`, `F_n = L_n^{(a)}`,
//!   admissible for `a > -1/2`.
//! * `Qes`: `g = e^{qx}`, `M = e^{-qx}`, `F_n` the degree-`k`
//!   nonhypergeometric polynomials, `k + 1` known levels, admissible for
//!   `a < -2k + 3/2`.

use crate::orthopoly::{jacobi_derivs, laguerre_derivs, laguerre_value};
use crate::pct_core::{
    ambiguity_shift, boundary_decay_ok, log_cosh, softplus, AmbiguityParams, BoundaryProbe, Domain,
    MassProfile, PctData,
};
use crate::qes_solver::{implied_b, qes_solve, QesSolution};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    JacobiEs,
    LaguerreEs,
    Qes,
}

/// Parameter descriptor of one solvable family. `b` is Jacobi-only,
/// `xi`/`k` are QES-only; `v0` is a plain energy offset defaulting to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(rename = "family")]
    pub kind: FamilyKind,
    pub q: f64,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default)]
    pub v0: f64,
}

impl FamilySpec {
    pub fn jacobi(q: f64, a: f64, b: f64) -> Self {
        FamilySpec {
            kind: FamilyKind::JacobiEs,
            q,
            a,
            b: Some(b),
            xi: None,
            k: None,
            v0: 0.0,
        }
    }

    pub fn laguerre(q: f64, a: f64) -> Self {
        FamilySpec {
            kind: FamilyKind::LaguerreEs,
            q,
            a,
            b: None,
            xi: None,
            k: None,
            v0: 0.0,
        }
    }

    pub fn qes(q: f64, a: f64, xi: f64, k: u32) -> Self {
        FamilySpec {
            kind: FamilyKind::Qes,
            q,
            a,
            b: None,
            xi: Some(xi),
            k: Some(k),
            v0: 0.0,
        }
    }

    pub fn with_v0(mut self, v0: f64) -> Self {
        self.v0 = v0;
        self
    }
}

/// A validated family: spec plus, for the QES kind, the attached polynomial
/// solution.
#[derive(Debug, Clone)]
pub struct Family {
    spec: FamilySpec,
    qes: Option<QesSolution>,
}

/// Structural checks shared by the validated and relaxed constructors:
/// parameters for which the closed forms are meaningful at all.
fn check_structural(spec: &FamilySpec) -> Result<()> {
    if !(spec.q > 0.0) || !spec.q.is_finite() {
        return Err(Error::InadmissibleFamily(format!(
            "inverse-length scale q must be positive (got {})",
            spec.q
        )));
    }
    if !spec.a.is_finite() || !spec.v0.is_finite() {
        return Err(Error::InadmissibleFamily("a and v0 must be finite".into()));
    }
    match spec.kind {
        FamilyKind::JacobiEs => {
            let b = spec.b.ok_or_else(|| {
                Error::InadmissibleFamily("Jacobi family requires parameter b".into())
            })?;
            if spec.xi.is_some() || spec.k.is_some() {
                return Err(Error::InadmissibleFamily(
                    "xi and k apply only to the QES family".into(),
                ));
            }
            if !(spec.a > -1.0) || !(b > -1.0) {
                return Err(Error::InadmissibleFamily(format!(
                    "Jacobi polynomial parameters need a, b > -1 (got a = {}, b = {b})",
                    spec.a
                )));
            }
        }
        FamilyKind::LaguerreEs => {
            if spec.b.is_some() || spec.xi.is_some() || spec.k.is_some() {
                return Err(Error::InadmissibleFamily(
                    "Laguerre family takes only q, a, v0".into(),
                ));
            }
            if !(spec.a > -1.0) {
                return Err(Error::InadmissibleFamily(format!(
                    "Laguerre polynomial parameter needs a > -1 (got a = {})",
                    spec.a
                )));
            }
        }
        FamilyKind::Qes => {
            if spec.b.is_some() {
                return Err(Error::InadmissibleFamily(
                    "b applies only to the Jacobi family".into(),
                ));
            }
            let xi = spec.xi.ok_or_else(|| {
                Error::InadmissibleFamily("QES family requires parameter xi".into())
            })?;
            let k = spec.k.ok_or_else(|| {
                Error::InadmissibleFamily("QES family requires parameter k".into())
            })?;
            if !(xi > 0.0) {
                return Err(Error::InadmissibleFamily(format!(
                    "QES scale xi must be positive (got {xi})"
                )));
            }
            if k == 0 {
                return Err(Error::InadmissibleFamily(
                    "QES degree k must be >= 1".into(),
                ));
            }
            if spec.a == 0.0 {
                return Err(Error::QesDegenerate);
            }
        }
    }
    Ok(())
}

/// Bound-state admissibility: the parameter windows required by the PDEM
/// boundary condition `|psi|^2 / sqrt(M) -> 0`.
fn check_admissible(spec: &FamilySpec) -> Result<()> {
    match spec.kind {
        FamilyKind::JacobiEs => {
            let b = spec.b.unwrap_or(f64::NAN);
            if !(spec.a > -0.5) || !(b > -0.5) {
                return Err(Error::InadmissibleFamily(format!(
                    "Jacobi family requires a > -1/2 and b > -1/2 (got a = {}, b = {b})",
                    spec.a
                )));
            }
        }
        FamilyKind::LaguerreEs => {
            if !(spec.a > -0.5) {
                return Err(Error::InadmissibleFamily(format!(
                    "Laguerre family requires a > -1/2 (got a = {})",
                    spec.a
                )));
            }
        }
        FamilyKind::Qes => {
            let k = spec.k.unwrap_or(0) as f64;
            if !(spec.a < -2.0 * k + 1.5) {
                return Err(Error::InadmissibleFamily(format!(
                    "QES family requires a < -2k + 3/2 (got a = {}, k = {k})",
                    spec.a
                )));
            }
        }
    }
    Ok(())
}

/// Build a family, enforcing both structural validity and the bound-state
/// admissibility windows.
pub fn make_family(spec: FamilySpec) -> Result<Family> {
    check_structural(&spec)?;
    check_admissible(&spec)?;
    attach(spec)
}

/// Build a family enforcing only structural validity, for probing
/// parameters outside the admissible windows (e.g. boundary-condition
/// scans). Wavefunction evaluation is still well defined; the PDEM decay
/// condition may simply fail.
pub fn make_family_unchecked(spec: FamilySpec) -> Result<Family> {
    check_structural(&spec)?;
    attach(spec)
}

fn attach(spec: FamilySpec) -> Result<Family> {
    let qes = match spec.kind {
        FamilyKind::Qes => Some(qes_solve(spec.k.unwrap(), spec.a, spec.xi.unwrap())?),
        _ => None,
    };
    Ok(Family { spec, qes })
}

impl Family {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn kind(&self) -> FamilyKind {
        self.spec.kind
    }

    /// Scale factor between `M` and the derivative of `g`:
    /// `M = lambda g'` for the ES kinds, `M = lambda / g'` for QES.
    pub fn lambda(&self) -> f64 {
        match self.spec.kind {
            FamilyKind::JacobiEs => 1.0 / self.spec.q,
            FamilyKind::LaguerreEs => -1.0 / self.spec.q,
            FamilyKind::Qes => self.spec.q,
        }
    }

    pub fn qes_solution(&self) -> Option<&QesSolution> {
        self.qes.as_ref()
    }

    /// Number of closed-form levels: `None` for the (infinite) ES ladders,
    /// `k + 1` for QES.
    pub fn level_count(&self) -> Option<usize> {
        self.spec.k.map(|k| k as usize + 1)
    }

    pub fn domain(&self) -> Domain {
        Domain::REAL_LINE
    }

    pub fn mass_profile(&self) -> MassProfile {
        let q = self.spec.q;
        match self.spec.kind {
            FamilyKind::JacobiEs => {
                let m = move |x: f64| {
                    let c = (q * x).cosh();
                    1.0 / (c * c)
                };
                MassProfile::new(
                    Domain::REAL_LINE,
                    m,
                    move |x| -2.0 * q * m(x) * (q * x).tanh(),
                    move |x| {
                        let mm = m(x);
                        q * q * (4.0 * mm - 6.0 * mm * mm)
                    },
                )
            }
            FamilyKind::LaguerreEs | FamilyKind::Qes => MassProfile::new(
                Domain::REAL_LINE,
                move |x| (-q * x).exp(),
                move |x| -q * (-q * x).exp(),
                move |x| q * q * (-q * x).exp(),
            ),
        }
    }

    /// Closed-form effective potential.
    pub fn veff_at(&self, x: f64) -> f64 {
        let q = self.spec.q;
        let q2 = q * q;
        let a = self.spec.a;
        match self.spec.kind {
            FamilyKind::JacobiEs => {
                let b = self.spec.b.unwrap();
                0.25 * q2
                    * ((a * a - 1.0) * (2.0 * q * x).exp()
                        + (b * b - 1.0) * (-2.0 * q * x).exp()
                        + a * a
                        + b * b
                        - 2.0)
                    + self.spec.v0
            }
            FamilyKind::LaguerreEs => {
                0.25 * q2 * ((a * a - 1.0) * (q * x).exp() + (-q * x).exp()) + self.spec.v0
            }
            FamilyKind::Qes => {
                let xi = self.spec.xi.unwrap();
                let k = self.spec.k.unwrap() as f64;
                let xi2 = xi * xi;
                q2 * (0.25 * (2.0 * k + a - 2.0) * (2.0 * k + a) * (q * x).exp()
                    - 0.5 * a * (a - 3.0) * xi2 * (-q * x).exp()
                    + 0.25 * a * a * xi2 * xi2 * (-3.0 * q * x).exp())
                    + self.spec.v0
            }
        }
    }

    /// Closed-form eigenvalue of level `n`.
    pub fn energy(&self, n: usize) -> Result<f64> {
        let q2 = self.spec.q * self.spec.q;
        let a = self.spec.a;
        let nf = n as f64;
        match self.spec.kind {
            FamilyKind::JacobiEs => {
                let b = self.spec.b.unwrap();
                Ok(q2 * (nf + 0.5 * (a + b)) * (nf + 0.5 * (a + b + 2.0)) + self.spec.v0)
            }
            FamilyKind::LaguerreEs => Ok(q2 * (nf + 0.5 * (a + 1.0)) + self.spec.v0),
            FamilyKind::Qes => {
                let qes = self.qes.as_ref().unwrap();
                let k = self.spec.k.unwrap() as usize;
                if n > k {
                    return Err(Error::LevelOutsideQesWindow { n, k });
                }
                Ok(q2 * qes.levels[n].c + self.spec.v0)
            }
        }
    }

    /// Initial potential `V(x) = V_eff(x) - shift` for the given ordering,
    /// computed from the generic mass-term expression.
    pub fn initial_potential_at(&self, amb: &AmbiguityParams, x: f64) -> f64 {
        let shift = ambiguity_shift(&self.mass_profile(), amb, x)
            .expect("catalog domain is the whole real line");
        self.veff_at(x) - shift
    }

    /// Transformation data (change of variable and target-equation
    /// coefficients) for level `n`.
    pub fn pct_data(&self, n: usize) -> Result<PctData> {
        let q = self.spec.q;
        let a = self.spec.a;
        match self.spec.kind {
            FamilyKind::JacobiEs => {
                let b = self.spec.b.unwrap();
                let nf = n as f64;
                // 1 - t^2 here, not the stable 1/cosh^2: the Q, Q-dot and R
                // closures below see only g and must form 1 - g^2 themselves,
                // and the identity pct_rhs + V_eff = E holds to machine
                // precision only when every factor shares one rounding of
                // that quantity.
                Ok(PctData::new(
                    move |x| (q * x).tanh(),
                    move |x| {
                        let t = (q * x).tanh();
                        q * (1.0 - t * t)
                    },
                    move |x| {
                        let t = (q * x).tanh();
                        -2.0 * q * q * t * (1.0 - t * t)
                    },
                    move |x| {
                        let t = (q * x).tanh();
                        -2.0 * q * q * q * (1.0 - t * t) * (1.0 - 3.0 * t * t)
                    },
                    move |g| (b - a - (a + b + 2.0) * g) / (1.0 - g * g),
                    move |g| {
                        let d = 1.0 - g * g;
                        (-(a + b + 2.0) + 2.0 * (b - a) * g - (a + b + 2.0) * g * g) / (d * d)
                    },
                    move |g| nf * (nf + a + b + 1.0) / (1.0 - g * g),
                ))
            }
            FamilyKind::LaguerreEs => {
                let nf = n as f64;
                Ok(PctData::new(
                    move |x| (-q * x).exp(),
                    move |x| -q * (-q * x).exp(),
                    move |x| q * q * (-q * x).exp(),
                    move |x| -q * q * q * (-q * x).exp(),
                    move |g| (a + 1.0 - g) / g,
                    move |g| -(a + 1.0) / (g * g),
                    move |g| nf / g,
                ))
            }
            FamilyKind::Qes => {
                let qes = self.qes.as_ref().unwrap();
                let k = self.spec.k.unwrap();
                if n > k as usize {
                    return Err(Error::LevelOutsideQesWindow { n, k: k as usize });
                }
                let xi = self.spec.xi.unwrap();
                let xi2 = xi * xi;
                let b = implied_b(k, a);
                let c = qes.levels[n].c;
                Ok(PctData::new(
                    move |x| (q * x).exp(),
                    move |x| q * (q * x).exp(),
                    move |x| q * q * (q * x).exp(),
                    move |x| q * q * q * (q * x).exp(),
                    move |g| a * (g * g - xi2) / (g * g * g),
                    move |g| {
                        let g2 = g * g;
                        a * (-1.0 / g2 + 3.0 * xi2 / (g2 * g2))
                    },
                    move |g| (b * g + c) / (g * g * g),
                ))
            }
        }
    }

    /// `log(|psi_n(x)|^2 / sqrt(M(x)))` with the natural closed-form
    /// normalization, evaluated stably far into the tails.
    pub fn log_weighted_density(&self, n: usize, x: f64) -> f64 {
        let q = self.spec.q;
        let a = self.spec.a;
        let z = q * x;
        match self.spec.kind {
            FamilyKind::JacobiEs => {
                let b = self.spec.b.unwrap();
                let t = z.tanh();
                let log_1mt = LN_2 - softplus(2.0 * z);
                let log_1pt = LN_2 - softplus(-2.0 * z);
                let p = crate::orthopoly::jacobi_value(n, a, b, t);
                (a + 1.0) * log_1mt + (b + 1.0) * log_1pt + 2.0 * p.abs().ln() + log_cosh(z)
            }
            FamilyKind::LaguerreEs => {
                // 2 log psi = -(a+1) z - u + 2 log|L_n(u)|, u = e^{-z};
                // -log sqrt(M) = z/2.
                let log_u = -z;
                let u = log_u.exp();
                let log_poly = if log_u > 46.0 {
                    let mut log_fact = 0.0;
                    for j in 2..=n {
                        log_fact += (j as f64).ln();
                    }
                    n as f64 * log_u - log_fact
                } else {
                    laguerre_value(n, a, u).abs().ln()
                };
                -(a + 1.0) * z - u + 2.0 * log_poly + 0.5 * z
            }
            FamilyKind::Qes => {
                let xi = self.spec.xi.unwrap();
                let coeffs = &self.qes.as_ref().unwrap().levels[n].coeffs;
                let w = (-2.0 * z).exp();
                let log_poly = if z > 46.0 {
                    // leading coefficient is 1
                    (coeffs.len() - 1) as f64 * z
                } else {
                    let g = z.exp();
                    let mut v = 0.0;
                    for &cj in coeffs.iter().rev() {
                        v = v * g + cj;
                    }
                    v.abs().ln()
                };
                (a - 2.0) * z + 0.5 * a * xi * xi * w + 2.0 * log_poly + 0.5 * z
            }
        }
    }

    /// Asymptotic tail exponent of the bound states: `log psi` with the
    /// polynomial factor reduced to its leading growth. All levels of a
    /// family share this form up to corrections that vanish at the ends.
    fn log_tail(&self, x: f64) -> f64 {
        let q = self.spec.q;
        let a = self.spec.a;
        let z = q * x;
        match self.spec.kind {
            FamilyKind::JacobiEs => {
                let b = self.spec.b.unwrap();
                0.5 * (a + 1.0) * (LN_2 - softplus(2.0 * z))
                    + 0.5 * (b + 1.0) * (LN_2 - softplus(-2.0 * z))
            }
            FamilyKind::LaguerreEs => -0.5 * ((a + 1.0) * z + (-z).exp()),
            FamilyKind::Qes => {
                let xi = self.spec.xi.unwrap();
                let k = self.spec.k.unwrap() as f64;
                0.5 * (a - 2.0) * z + 0.25 * a * xi * xi * (-2.0 * z).exp() + k * z
            }
        }
    }

    /// `log(psi(x_to) / psi(x_from))` per the asymptotic tail form; used to
    /// continue the wavefunction past a truncated verification window.
    pub fn tail_log_ratio(&self, x_from: f64, x_to: f64) -> f64 {
        self.log_tail(x_to) - self.log_tail(x_from)
    }

    pub fn default_probe(&self) -> BoundaryProbe {
        BoundaryProbe::default_for(self.spec.q)
    }

    /// PDEM boundary condition check for level `n`: the weighted density
    /// must decrease monotonically below the probe threshold toward both
    /// ends. Returns `false` for levels outside the known range.
    pub fn boundary_ok(&self, n: usize, probe: &BoundaryProbe) -> bool {
        if let Some(count) = self.level_count() {
            if n >= count {
                return false;
            }
        }
        boundary_decay_ok(probe, |x| self.log_weighted_density(n, x))
    }

    /// Assemble level `n`: energy, analytic wavefunction evaluators, and
    /// the numerically computed L2 norm.
    pub fn level(&self, n: usize) -> Result<LevelFunction> {
        let energy = self.energy(n)?;
        let eval = match self.spec.kind {
            FamilyKind::JacobiEs => LevelEval::Jacobi {
                q: self.spec.q,
                a: self.spec.a,
                b: self.spec.b.unwrap(),
                n,
            },
            FamilyKind::LaguerreEs => LevelEval::Laguerre {
                q: self.spec.q,
                a: self.spec.a,
                n,
            },
            FamilyKind::Qes => LevelEval::Qes {
                q: self.spec.q,
                a: self.spec.a,
                xi: self.spec.xi.unwrap(),
                coeffs: self.qes.as_ref().unwrap().levels[n].coeffs.clone(),
            },
        };
        // Support windows from the density drop relative to its peak:
        // ~1e-18 for quadrature, ~1e-12 for residual grids.
        let density = |x: f64| self.log_weighted_density(n, x) - log_cosh_correction(self, x);
        let (s_lo, s_hi, _) =
            drop_window(&density, self.spec.q, 18.0 * std::f64::consts::LN_10 + 6.0);
        let support = (s_lo, s_hi);
        let (mut r_lo, mut r_hi, peak) =
            drop_window(&density, self.spec.q, 12.0 * std::f64::consts::LN_10 + 3.0);
        // Residual evaluation divides a rounding-limited bracket by M, so
        // points where psi/(peak * M) is huge cannot certify anything below
        // the residual tolerances; clip them off.
        let mass = self.mass_profile();
        let noisy = |x: f64| 0.5 * (density(x) - peak) - mass.value_at(x).ln() > 14.0;
        let step = 0.25 / self.spec.q;
        while noisy(r_hi) && r_hi > step {
            r_hi -= step;
        }
        while noisy(r_lo) && r_lo < -step {
            r_lo += step;
        }
        let residual_window = (r_lo, r_hi);
        let norm_sq = crate::numerics::adaptive_simpson(
            |x| {
                let p = eval.derivs(x).0;
                p * p
            },
            support.0,
            support.1,
            1e-10,
        );
        Ok(LevelFunction {
            n,
            energy,
            norm: norm_sq.sqrt(),
            support,
            residual_support: residual_window,
            eval,
        })
    }
}

/// `log_weighted_density` carries a `-log sqrt(M)` weight; remove it so the
/// window search sees `log |psi|^2` itself.
fn log_cosh_correction(family: &Family, x: f64) -> f64 {
    let z = family.spec().q * x;
    match family.kind() {
        FamilyKind::JacobiEs => log_cosh(z),
        _ => 0.5 * z,
    }
}

/// Find the window where `log_density` stays within `drop` nats of its
/// peak, scanning outward; dips at wavefunction nodes are skipped by
/// requiring a run of consecutive below-target samples. Returns
/// `(lo, hi, peak value)`.
fn drop_window(log_density: &dyn Fn(f64) -> f64, q: f64, drop: f64) -> (f64, f64, f64) {
    let step = 0.25 / q;
    let mut best_x = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in -160..=160 {
        let x = i as f64 * step;
        let v = log_density(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let target = best - drop;
    let cap = 4000.0 / q;
    let mut edges = [best_x, best_x];
    for (side, dir) in [(0usize, -1.0), (1usize, 1.0)] {
        let mut x = best_x;
        let mut below = 0;
        while below < 12 && x.abs() < cap {
            x += dir * step;
            if log_density(x) <= target {
                below += 1;
            } else {
                below = 0;
            }
        }
        // The confirmation run overshoots the crossing; pull back to just
        // past it (the overshoot region multiplies rounding noise by the
        // exponentially growing 1/M).
        if below == 12 {
            x -= dir * step * 10.0;
        }
        edges[side] = x;
    }
    (edges[0], edges[1], best)
}

/// One bound level: closed-form energy and analytic wavefunction with
/// first three derivatives (unnormalized; `norm` holds the L2 norm).
#[derive(Debug, Clone)]
pub struct LevelFunction {
    pub n: usize,
    pub energy: f64,
    pub norm: f64,
    support: (f64, f64),
    residual_support: (f64, f64),
    eval: LevelEval,
}

#[derive(Debug, Clone)]
enum LevelEval {
    Jacobi {
        q: f64,
        a: f64,
        b: f64,
        n: usize,
    },
    Laguerre {
        q: f64,
        a: f64,
        n: usize,
    },
    Qes {
        q: f64,
        a: f64,
        xi: f64,
        coeffs: Vec<f64>,
    },
}

struct Pieces {
    f: f64,
    ell: f64,
    ell1: f64,
    ell2: f64,
    e: [f64; 4],
    g1: f64,
    g2: f64,
    g3: f64,
}

impl LevelEval {
    fn pieces(&self, x: f64) -> Option<Pieces> {
        match self {
            LevelEval::Jacobi { q, a, b, n } => {
                let z = q * x;
                let t = z.tanh();
                // 1/cosh^2, not 1 - tanh^2: the subtraction loses all
                // precision in the tails and the loss is amplified by the
                // cosh^2 factors of the Hamiltonian.
                let s = 1.0 / z.cosh();
                let sech2 = s * s;
                let log_f = 0.5 * (a + 1.0) * (LN_2 - softplus(2.0 * z))
                    + 0.5 * (b + 1.0) * (LN_2 - softplus(-2.0 * z));
                let d = jacobi_derivs(*n, *a, *b, t, 3);
                Some(Pieces {
                    f: log_f.exp(),
                    ell: 0.5 * q * ((b - a) - (a + b + 2.0) * t),
                    ell1: -0.5 * q * q * (a + b + 2.0) * sech2,
                    ell2: q * q * q * (a + b + 2.0) * t * sech2,
                    e: [d[0], d[1], d[2], d[3]],
                    g1: q * sech2,
                    g2: -2.0 * q * q * t * sech2,
                    g3: -2.0 * q * q * q * sech2 * (1.0 - 3.0 * t * t),
                })
            }
            LevelEval::Laguerre { q, a, n } => {
                let u = (-q * x).exp();
                if u > 1e100 {
                    return None;
                }
                let d = laguerre_derivs(*n, *a, u, 3);
                Some(Pieces {
                    f: (-0.5 * ((a + 1.0) * q * x + u)).exp(),
                    ell: 0.5 * q * (u - (a + 1.0)),
                    ell1: -0.5 * q * q * u,
                    ell2: 0.5 * q * q * q * u,
                    e: [d[0], d[1], d[2], d[3]],
                    g1: -q * u,
                    g2: q * q * u,
                    g3: -q * q * q * u,
                })
            }
            LevelEval::Qes { q, a, xi, coeffs } => {
                let w = (-2.0 * q * x).exp();
                if w > 1e100 {
                    return None;
                }
                let g = (q * x).exp();
                let mut e = [0.0; 4];
                for (j, &cj) in coeffs.iter().enumerate() {
                    let jf = j as f64;
                    e[0] += cj * g.powi(j as i32);
                    if j >= 1 {
                        e[1] += cj * jf * g.powi(j as i32 - 1);
                    }
                    if j >= 2 {
                        e[2] += cj * jf * (jf - 1.0) * g.powi(j as i32 - 2);
                    }
                    if j >= 3 {
                        e[3] += cj * jf * (jf - 1.0) * (jf - 2.0) * g.powi(j as i32 - 3);
                    }
                }
                let xi2 = xi * xi;
                Some(Pieces {
                    f: (0.5 * (a - 2.0) * q * x + 0.25 * a * xi2 * w).exp(),
                    ell: 0.5 * q * (a - 2.0) - 0.5 * q * a * xi2 * w,
                    ell1: q * q * a * xi2 * w,
                    ell2: -2.0 * q * q * q * a * xi2 * w,
                    e,
                    g1: q * g,
                    g2: q * q * g,
                    g3: q * q * q * g,
                })
            }
        }
    }

    /// `(psi, psi', psi'')` assembled by the product/chain rule.
    fn derivs(&self, x: f64) -> (f64, f64, f64) {
        match self.pieces(x) {
            None => (0.0, 0.0, 0.0),
            Some(p) => {
                let psi = p.f * p.e[0];
                let d1 = p.f * (p.ell * p.e[0] + p.e[1] * p.g1);
                let d2 = p.f
                    * ((p.ell * p.ell + p.ell1) * p.e[0]
                        + 2.0 * p.ell * p.g1 * p.e[1]
                        + p.g1 * p.g1 * p.e[2]
                        + p.g2 * p.e[1]);
                (psi, d1, d2)
            }
        }
    }

    fn deriv3(&self, x: f64) -> f64 {
        match self.pieces(x) {
            None => 0.0,
            Some(p) => {
                p.f * ((p.ell * p.ell * p.ell + 3.0 * p.ell * p.ell1 + p.ell2) * p.e[0]
                    + 3.0 * (p.ell * p.ell + p.ell1) * p.g1 * p.e[1]
                    + 3.0 * p.ell * (p.g1 * p.g1 * p.e[2] + p.g2 * p.e[1])
                    + p.g1 * p.g1 * p.g1 * p.e[3]
                    + 3.0 * p.g1 * p.g2 * p.e[2]
                    + p.g3 * p.e[1])
            }
        }
    }
}

impl LevelFunction {
    pub fn psi_at(&self, x: f64) -> f64 {
        self.eval.derivs(x).0
    }

    pub fn psi_d1_at(&self, x: f64) -> f64 {
        self.eval.derivs(x).1
    }

    pub fn psi_d2_at(&self, x: f64) -> f64 {
        self.eval.derivs(x).2
    }

    pub fn psi_d3_at(&self, x: f64) -> f64 {
        self.eval.deriv3(x)
    }

    /// `(psi, psi', psi'')` in one evaluation.
    pub fn psi_derivs(&self, x: f64) -> (f64, f64, f64) {
        self.eval.derivs(x)
    }

    /// Window outside which `|psi|^2` is below ~1e-18 of its peak;
    /// quadrature support.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Tighter window (~1e-12 density) used for residual grids.
    pub fn residual_window(&self) -> (f64, f64) {
        self.residual_support
    }
}
