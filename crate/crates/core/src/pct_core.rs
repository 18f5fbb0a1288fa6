//! General point-canonical-transformation machinery for the PDEM
//! Schrödinger equation `[-d/dx (1/M) d/dx + V_eff] psi = E psi`.
//!
//! A transformation `psi = f(x) F(g(x))`, with `F` solving
//! `F'' + Q(g) F' + R(g) F = 0`, fixes the prefactor up to a constant,
//! `f ∝ (M/g')^{1/2} exp(1/2 ∫^g Q)`, and turns the eigenvalue problem into
//!
//! ```text
//! E - V_eff = g'''/(2 M g') - (3/4M)(g''/g')^2
//!           + (g'^2/M)(R - Q̇/2 - Q^2/4) - M''/(2M^2) + 3 M'^2/(4 M^3).
//! ```
//!
//! Everything here is generic over the supplied `M`, `g`, `Q`, `R` data;
//! the concrete catalogs live in `families`.

use crate::{Error, Result};

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Open interval of the real line (endpoints may be infinite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi && x.is_finite()
    }
}

/// von Roos ordering parameters with `alpha + beta + gamma = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbiguityParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl AmbiguityParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        AmbiguityParams {
            alpha,
            beta,
            gamma: -1.0 - alpha - beta,
        }
    }

    /// BenDaniel-Duke ordering `(alpha, beta) = (0, -1)`: no shift at all.
    pub fn ben_daniel_duke() -> Self {
        Self::new(0.0, -1.0)
    }

    /// Zhu-Kroemer ordering `(alpha, beta) = (-1/2, 0)`.
    pub fn zhu_kroemer() -> Self {
        Self::new(-0.5, 0.0)
    }
}

/// Dimensionless mass profile `M(x)` with analytic first and second
/// derivatives. Derivatives are supplied in closed form by the caller,
/// never finite-differenced here.
pub struct MassProfile {
    domain: Domain,
    m: ScalarFn,
    m_d1: ScalarFn,
    m_d2: ScalarFn,
}

impl MassProfile {
    pub fn new(
        domain: Domain,
        m: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m_d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m_d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MassProfile {
            domain,
            m: Box::new(m),
            m_d1: Box::new(m_d1),
            m_d2: Box::new(m_d2),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x })
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        (self.m)(x)
    }

    pub fn d1_at(&self, x: f64) -> f64 {
        (self.m_d1)(x)
    }

    pub fn d2_at(&self, x: f64) -> f64 {
        (self.m_d2)(x)
    }
}

/// Change of variable `g(x)` (with three derivatives) plus the coefficient
/// functions `Q(g)`, `Q̇(g)`, `R(g)` of the target polynomial equation.
///
/// `R` already belongs to one fixed level, so one `PctData` describes one
/// eigenfunction's transformation. `nu` is the integration constant of `g`;
/// the catalogs all fix it to 0.
pub struct PctData {
    pub nu: f64,
    g: ScalarFn,
    g_d1: ScalarFn,
    g_d2: ScalarFn,
    g_d3: ScalarFn,
    q: ScalarFn,
    q_dot: ScalarFn,
    r: ScalarFn,
}

impl PctData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
        q: impl Fn(f64) -> f64 + Send + Sync + 'static,
        q_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PctData {
            nu: 0.0,
            g: Box::new(g),
            g_d1: Box::new(g_d1),
            g_d2: Box::new(g_d2),
            g_d3: Box::new(g_d3),
            q: Box::new(q),
            q_dot: Box::new(q_dot),
            r: Box::new(r),
        }
    }

    pub fn g_at(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    pub fn g_d1_at(&self, x: f64) -> f64 {
        (self.g_d1)(x)
    }

    pub fn g_d2_at(&self, x: f64) -> f64 {
        (self.g_d2)(x)
    }

    pub fn g_d3_at(&self, x: f64) -> f64 {
        (self.g_d3)(x)
    }

    pub fn q_at(&self, g: f64) -> f64 {
        (self.q)(g)
    }

    pub fn q_dot_at(&self, g: f64) -> f64 {
        (self.q_dot)(g)
    }

    pub fn r_at(&self, g: f64) -> f64 {
        (self.r)(g)
    }
}

fn check_point(pct: &PctData, mass: &MassProfile, x: f64) -> Result<(f64, f64)> {
    mass.check_domain(x)?;
    let g1 = pct.g_d1_at(x);
    if g1 == 0.0 || !g1.is_finite() {
        return Err(Error::DegenerateChangeOfVariable { x });
    }
    let m = mass.value_at(x);
    if !(m > 0.0) {
        return Err(Error::MassNotPositive { x });
    }
    Ok((g1, m))
}

/// Logarithmic derivative `f'(x)/f(x)` of the transformation prefactor,
///
/// ```text
/// f'/f = (M'/M - g''/g') / 2 + Q(g(x)) g'(x) / 2.
/// ```
///
/// The prefactor itself is defined only up to a constant, so only the
/// log-derivative is exposed.
pub fn prefactor_log_derivative(pct: &PctData, mass: &MassProfile, x: f64) -> Result<f64> {
    let (g1, m) = check_point(pct, mass, x)?;
    let term_mass = mass.d1_at(x) / m - pct.g_d2_at(x) / g1;
    let term_q = pct.q_at(pct.g_at(x)) * g1;
    Ok(0.5 * (term_mass + term_q))
}

/// Derivative of `prefactor_log_derivative` with respect to `x`.
pub fn prefactor_log_derivative_d1(pct: &PctData, mass: &MassProfile, x: f64) -> Result<f64> {
    let (g1, m) = check_point(pct, mass, x)?;
    let m1 = mass.d1_at(x);
    let m2 = mass.d2_at(x);
    let g2 = pct.g_d2_at(x);
    let g3 = pct.g_d3_at(x);
    let g = pct.g_at(x);
    let term_mass = m2 / m - (m1 / m) * (m1 / m) - g3 / g1 + (g2 / g1) * (g2 / g1);
    let term_q = pct.q_dot_at(g) * g1 * g1 + pct.q_at(g) * g2;
    Ok(0.5 * (term_mass + term_q))
}

/// Right-hand side of the transformed-potential relation; equals
/// `E - V_eff(x)` when `R` belongs to the level with energy `E`.
pub fn pct_rhs(pct: &PctData, mass: &MassProfile, x: f64) -> Result<f64> {
    let (g1, m) = check_point(pct, mass, x)?;
    let m1 = mass.d1_at(x);
    let m2 = mass.d2_at(x);
    let g2 = pct.g_d2_at(x);
    let g3 = pct.g_d3_at(x);
    let g = pct.g_at(x);
    let q = pct.q_at(g);
    let combo = pct.r_at(g) - 0.5 * pct.q_dot_at(g) - 0.25 * q * q;
    Ok(
        g3 / (2.0 * m * g1) - 0.75 / m * (g2 / g1) * (g2 / g1) + g1 * g1 / m * combo
            - m2 / (2.0 * m * m)
            + 0.75 * m1 * m1 / (m * m * m),
    )
}

/// Ordering-induced shift `V_eff(x) - V(x)` coming from the mass terms:
///
/// ```text
/// (beta+1)/2 * M''/M^2 - [alpha(alpha+beta+1) + beta + 1] * M'^2/M^3.
/// ```
pub fn ambiguity_shift(mass: &MassProfile, amb: &AmbiguityParams, x: f64) -> Result<f64> {
    mass.check_domain(x)?;
    let m = mass.value_at(x);
    if !(m > 0.0) {
        return Err(Error::MassNotPositive { x });
    }
    let m1 = mass.d1_at(x);
    let m2 = mass.d2_at(x);
    let c1 = 0.5 * (amb.beta + 1.0);
    let c2 = amb.alpha * (amb.alpha + amb.beta + 1.0) + amb.beta + 1.0;
    Ok(c1 * m2 / (m * m) - c2 * m1 * m1 / (m * m * m))
}

/// Coefficients `(f, g)` of the catalog closed forms for the shift between
/// the initial and effective potentials:
/// `V - V_eff = q^2 [f cosh^2(qx) - g]` on the `sech^2` mass and
/// `V - V_eff = (q^2/4) f e^{qx}` on the exponential mass, with
/// `f = (2a+1)(2a+2b+2) - 2a` and `g = (2a+1)^2 + b(4a+1)` in
/// `(a, b) = (alpha, beta)`.
pub fn ordering_shift_coefficients(amb: &AmbiguityParams) -> (f64, f64) {
    let (al, be) = (amb.alpha, amb.beta);
    let f = (2.0 * al + 1.0) * (2.0 * al + 2.0 * be + 2.0) - 2.0 * al;
    let g = (2.0 * al + 1.0) * (2.0 * al + 1.0) + be * (4.0 * al + 1.0);
    (f, g)
}

/// Probe for the PDEM boundary condition `|psi|^2 / sqrt(M) -> 0`:
/// a geometric sequence of distances from the origin, checked on both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProbe {
    /// Positive offsets |x| at which the weighted density is sampled,
    /// ordered outward.
    pub offsets: Vec<f64>,
    /// The last probed value must fall below this.
    pub threshold: f64,
}

impl BoundaryProbe {
    /// Default probe for inverse-length scale `q`: 8 points per end,
    /// geometric ratio 2, starting at `|x| = 5/q`, threshold `1e-8`.
    pub fn default_for(q: f64) -> Self {
        let mut offsets = Vec::with_capacity(8);
        let mut x = 5.0 / q;
        for _ in 0..8 {
            offsets.push(x);
            x *= 2.0;
        }
        BoundaryProbe {
            offsets,
            threshold: 1e-8,
        }
    }
}

/// Check decay of the weighted density toward both ends of the real line.
///
/// `log_density` returns `log(|psi(x)|^2 / sqrt(M(x)))` (any constant offset
/// from wavefunction normalization is the caller's convention; the default
/// catalogs use the natural closed-form constants). Returns `true` iff on
/// each side the probed sequence is non-increasing, free of NaN/overflow,
/// and ends below `log(threshold)`.
pub fn boundary_decay_ok(probe: &BoundaryProbe, log_density: impl Fn(f64) -> f64) -> bool {
    if probe.offsets.is_empty() {
        return false;
    }
    let log_threshold = probe.threshold.ln();
    for side in [1.0, -1.0] {
        let mut prev = f64::INFINITY;
        let mut last = f64::INFINITY;
        for &off in &probe.offsets {
            let v = log_density(side * off);
            if v.is_nan() || v == f64::INFINITY {
                return false;
            }
            if v > prev {
                return false;
            }
            prev = v;
            last = v;
        }
        if !(last < log_threshold) {
            return false;
        }
    }
    true
}

/// Numerically stable `log(1 + e^z)`.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Numerically stable `log(cosh(z))`.
pub(crate) fn log_cosh(z: f64) -> f64 {
    let az = z.abs();
    az + (-2.0 * az).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_mass() -> MassProfile {
        MassProfile::new(Domain::REAL_LINE, |_| 1.0, |_| 0.0, |_| 0.0)
    }

    /// sech^2(qx) mass on the real line.
    fn sech2_mass(q: f64) -> MassProfile {
        let m = move |x: f64| {
            let c = (q * x).cosh();
            1.0 / (c * c)
        };
        MassProfile::new(
            Domain::REAL_LINE,
            m,
            move |x| {
                let t = (q * x).tanh();
                -2.0 * q * m(x) * t
            },
            move |x| {
                let mm = m(x);
                q * q * (4.0 * mm - 6.0 * mm * mm)
            },
        )
    }

    fn exp_mass(q: f64) -> MassProfile {
        MassProfile::new(
            Domain::REAL_LINE,
            move |x| (-q * x).exp(),
            move |x| -q * (-q * x).exp(),
            move |x| q * q * (-q * x).exp(),
        )
    }

    #[test]
    fn gamma_is_enforced() {
        let amb = AmbiguityParams::new(0.25, -0.75);
        assert_eq!(amb.gamma, -1.0 - 0.25 + 0.75);
        let bdd = AmbiguityParams::ben_daniel_duke();
        assert_eq!((bdd.alpha, bdd.beta, bdd.gamma), (0.0, -1.0, 0.0));
        let zk = AmbiguityParams::zhu_kroemer();
        assert_eq!((zk.alpha, zk.beta, zk.gamma), (-0.5, 0.0, -0.5));
    }

    #[test]
    fn shift_vanishes_for_ben_daniel_duke_and_constant_mass() {
        let bdd = AmbiguityParams::ben_daniel_duke();
        for mass in [sech2_mass(1.3), exp_mass(0.7), unit_mass()] {
            for x in [-2.0, -0.3, 0.0, 1.1, 4.0] {
                let s = ambiguity_shift(&mass, &bdd, x).unwrap();
                assert!(s.abs() < 1e-14, "shift {s} at x={x}");
            }
        }
        let mass = unit_mass();
        for (al, be) in [(0.3, 0.4), (-0.5, 0.0), (1.0, -2.0)] {
            let amb = AmbiguityParams::new(al, be);
            assert_eq!(ambiguity_shift(&mass, &amb, 0.37).unwrap(), 0.0);
        }
    }

    #[test]
    fn shift_matches_closed_form_on_catalog_masses() {
        // V - V_eff = q^2 [f cosh^2(qx) - g]  =>  shift = -(that).
        let q = 1.0;
        let mass = sech2_mass(q);
        let zk = AmbiguityParams::zhu_kroemer();
        let (cf, cg) = ordering_shift_coefficients(&zk);
        assert!((cf - 1.0).abs() < 1e-15);
        assert!(cg.abs() < 1e-15);
        let s = ambiguity_shift(&mass, &zk, 0.0).unwrap();
        assert!((s - (-1.0)).abs() < 1e-14, "got {s}");

        for (al, be) in [(0.0, 0.0), (0.5, -0.5), (-0.25, 0.75), (1.0, 1.0)] {
            let amb = AmbiguityParams::new(al, be);
            let (cf, cg) = ordering_shift_coefficients(&amb);
            for x in [-1.5, -0.4, 0.0, 0.8, 2.0] {
                let c = (q * x).cosh();
                let want = -(q * q) * (cf * c * c - cg);
                let got = ambiguity_shift(&mass, &amb, x).unwrap();
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "sech2: ({al},{be}) x={x}: {got} vs {want}"
                );
            }
            let emass = exp_mass(q);
            for x in [-1.5, 0.0, 2.0] {
                let want = -0.25 * q * q * cf * (q * x).exp();
                let got = ambiguity_shift(&emass, &amb, x).unwrap();
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "exp: ({al},{be}) x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn domain_violations_are_reported() {
        let mass = MassProfile::new(Domain { lo: -1.0, hi: 1.0 }, |_| 1.0, |_| 0.0, |_| 0.0);
        let amb = AmbiguityParams::zhu_kroemer();
        assert!(matches!(
            ambiguity_shift(&mass, &amb, 2.0),
            Err(Error::OutsideDomain { .. })
        ));
        // g' = 0 at x = 0 for g = x^3.
        let pct = PctData::new(
            |x| x * x * x,
            |x| 3.0 * x * x,
            |x| 6.0 * x,
            |_| 6.0,
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
        );
        assert!(matches!(
            prefactor_log_derivative(&pct, &mass, 0.0),
            Err(Error::DegenerateChangeOfVariable { .. })
        ));
        assert!(pct_rhs(&pct, &mass, 0.5).is_ok());
    }

    #[test]
    fn boundary_decay_detects_growth() {
        let probe = BoundaryProbe::default_for(1.0);
        // decaying density
        assert!(boundary_decay_ok(&probe, |x| -x.abs()));
        // growing on the right end
        assert!(!boundary_decay_ok(&probe, |x| x));
        // ends above threshold
        assert!(!boundary_decay_ok(&probe, |x| -1e-12 * x.abs()));
        // NaN at a probe point
        assert!(!boundary_decay_ok(&probe, |x| if x > 300.0 {
            f64::NAN
        } else {
            -x.abs()
        }));
        // -inf tails are acceptable
        assert!(boundary_decay_ok(&probe, |x| if x.abs() > 300.0 {
            f64::NEG_INFINITY
        } else {
            -x.abs()
        }));
    }

    #[test]
    fn stable_log_helpers() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0).abs() < 1e-300);
        assert!((log_cosh(0.0)).abs() < 1e-15);
        let z = 700.0;
        assert!((log_cosh(z) - (z - std::f64::consts::LN_2)).abs() < 1e-12);
    }
}
