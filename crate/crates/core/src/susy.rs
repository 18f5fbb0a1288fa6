//! First-order SUSY intertwining for the PDEM catalogs.
//!
//! The intertwiner `eta = A d/dx + B` with `A = M^{-1/2}` relates the
//! catalog Hamiltonian `H` to a partner `H_1` with the same kinetic term,
//! `eta H = H_1 eta`, provided
//!
//! ```text
//! V_eff   = eps + B^2 - (B / sqrt(M))',
//! V_1,eff = V_eff + 2 B'/sqrt(M) + M''/(2 M^2) - 3 M'^2/(4 M^3),
//! ```
//!
//! and `B = -psi_0'/(sqrt(M) psi_0)`, `eps = E_0` makes `eta` annihilate
//! the ground state. Partner eigenvalues are `E_{1,n} = E_{n+1}` with
//! wavefunctions `psi_{1,n} ∝ eta psi_{n+1}`.
//!
//! `B` is evaluated from the per-family closed forms (the definitional
//! `-psi_0'/(sqrt(M) psi_0)` is kept as a test oracle): the ES partners are
//! shape invariant, the QES partners are rational functions of `e^{qx}`.

use crate::families::{Family, FamilyKind, FamilySpec, LevelFunction};
use crate::{Error, Result};
use serde::Serialize;

/// Which closed form (if any) describes the partner potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartnerKind {
    ShapeInvariantJacobi,
    ShapeInvariantLaguerre,
    QesRationalK1,
    QesRationalK2,
    GenericNumeric,
}

/// First-order intertwiner for one source family.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    family: Family,
    epsilon: f64,
    b: BEval,
}

#[derive(Debug, Clone)]
enum BEval {
    Jacobi {
        q: f64,
        a: f64,
        b: f64,
    },
    Laguerre {
        q: f64,
        a: f64,
    },
    Qes {
        q: f64,
        a: f64,
        xi: f64,
        f0: Vec<f64>,
    },
}

impl BEval {
    /// `(B, B', B'')` from the closed forms.
    fn derivs(&self, x: f64) -> (f64, f64, f64) {
        match self {
            BEval::Jacobi { q, a, b } => {
                let (sh, ch) = ((q * x).sinh(), (q * x).cosh());
                let v = 0.5 * q * ((a - b) * ch + (a + b + 2.0) * sh);
                let d1 = 0.5 * q * q * ((a - b) * sh + (a + b + 2.0) * ch);
                (v, d1, q * q * v)
            }
            BEval::Laguerre { q, a } => {
                let p = (0.5 * q * x).exp();
                let v = 0.5 * q * ((a + 1.0) * p - 1.0 / p);
                let d1 = 0.25 * q * q * ((a + 1.0) * p + 1.0 / p);
                (v, d1, 0.25 * q * q * v)
            }
            BEval::Qes { q, a, xi, f0 } => {
                // W = F0'/F0 and its two g-derivatives.
                let g = (q * x).exp();
                let (mut f, mut f1, mut f2, mut f3) = (0.0, 0.0, 0.0, 0.0);
                for (j, &cj) in f0.iter().enumerate() {
                    let jf = j as f64;
                    f += cj * g.powi(j as i32);
                    if j >= 1 {
                        f1 += cj * jf * g.powi(j as i32 - 1);
                    }
                    if j >= 2 {
                        f2 += cj * jf * (jf - 1.0) * g.powi(j as i32 - 2);
                    }
                    if j >= 3 {
                        f3 += cj * jf * (jf - 1.0) * (jf - 2.0) * g.powi(j as i32 - 3);
                    }
                }
                let w = f1 / f;
                let w1 = f2 / f - w * w;
                let w2 = f3 / f - 3.0 * w * (f2 / f) + 2.0 * w * w * w;
                let xi2 = xi * xi;
                let (g12, g32) = (g.sqrt(), g.powf(1.5));
                let gm32 = 1.0 / g32;
                let v = q * (-0.5 * (a - 2.0) * g12 + 0.5 * a * xi2 * gm32 - g32 * w);
                let d1 = q
                    * q
                    * (-0.25 * (a - 2.0) * g12 - 0.75 * a * xi2 * gm32 - g32 * (1.5 * w + g * w1));
                let d2 = q
                    * q
                    * q
                    * (-0.125 * (a - 2.0) * g12 + 1.125 * a * xi2 * gm32
                        - g32 * (2.25 * w + 4.0 * g * w1 + g * g * w2));
                (v, d1, d2)
            }
        }
    }
}

/// Build the intertwiner that annihilates the family's ground state:
/// closed-form `B`, factorization energy `eps = E_0`.
pub fn build_intertwiner(family: &Family) -> Intertwiner {
    let spec = family.spec();
    let b = match family.kind() {
        FamilyKind::JacobiEs => BEval::Jacobi {
            q: spec.q,
            a: spec.a,
            b: spec.b.unwrap(),
        },
        FamilyKind::LaguerreEs => BEval::Laguerre {
            q: spec.q,
            a: spec.a,
        },
        FamilyKind::Qes => BEval::Qes {
            q: spec.q,
            a: spec.a,
            xi: spec.xi.unwrap(),
            f0: family.qes_solution().unwrap().levels[0].coeffs.clone(),
        },
    };
    Intertwiner {
        family: family.clone(),
        epsilon: family.energy(0).expect("ground state exists"),
        b,
    }
}

impl Intertwiner {
    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Factorization energy (the source ground-state energy).
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn b_at(&self, x: f64) -> f64 {
        self.b.derivs(x).0
    }

    pub fn b_d1_at(&self, x: f64) -> f64 {
        self.b.derivs(x).1
    }

    pub fn b_d2_at(&self, x: f64) -> f64 {
        self.b.derivs(x).2
    }

    /// Apply `eta` to a wavefunction value: `(eta psi)(x) = psi'/sqrt(M) + B psi`.
    pub fn apply(&self, psi: f64, psi_d1: f64, x: f64) -> f64 {
        let m = self.family.mass_profile().value_at(x);
        psi_d1 / m.sqrt() + self.b_at(x) * psi
    }
}

/// `(eta psi)(x)` for a catalog level.
pub fn intertwine(itw: &Intertwiner, level: &LevelFunction, x: f64) -> f64 {
    let (p, p1, _) = level.psi_derivs(x);
    itw.apply(p, p1, x)
}

/// Partner effective potential from the generic construction,
/// `V_eff + 2B'/sqrt(M) + M''/(2M^2) - 3M'^2/(4M^3)`.
pub fn partner_veff_generic(itw: &Intertwiner, x: f64) -> f64 {
    let mass = itw.family.mass_profile();
    let m = mass.value_at(x);
    let m1 = mass.d1_at(x);
    let m2 = mass.d2_at(x);
    itw.family.veff_at(x) + 2.0 * itw.b_d1_at(x) / m.sqrt() + m2 / (2.0 * m * m)
        - 0.75 * m1 * m1 / (m * m * m)
}

/// Partner potential in closed form: the shape-invariant shifted family for
/// the ES kinds, the rational displays for QES `k = 1, 2`.
pub fn partner_veff_closed(family: &Family, x: f64) -> Result<f64> {
    let spec = family.spec();
    let q = spec.q;
    let q2 = q * q;
    let a = spec.a;
    match family.kind() {
        FamilyKind::JacobiEs => {
            let shifted = shifted_spec(family).unwrap();
            let f = crate::families::make_family(shifted)?;
            Ok(f.veff_at(x))
        }
        FamilyKind::LaguerreEs => {
            let shifted = shifted_spec(family).unwrap();
            let f = crate::families::make_family(shifted)?;
            Ok(f.veff_at(x))
        }
        FamilyKind::Qes => {
            let xi = spec.xi.unwrap();
            let k = spec.k.unwrap();
            let xi2 = xi * xi;
            let eqx = (q * x).exp();
            let emx = (-q * x).exp();
            let em3x = (-3.0 * q * x).exp();
            match k {
                1 => Ok(q2
                    * (0.25 * (a - 1.0) * (a + 1.0) * eqx - 0.5 * a * a * xi2 * emx
                        + 0.25 * a * a * xi2 * xi2 * em3x
                        + 3.0 * xi2 / (eqx + xi)
                        - 2.0 * xi2 * xi / ((eqx + xi) * (eqx + xi)))
                    + spec.v0
                    - q2 * xi),
                2 => {
                    let delta = (2.0 * a * (2.0 * a + 3.0)).sqrt();
                    let ap2 = a + 2.0;
                    let den = eqx * eqx - delta / ap2 * xi * eqx + a / ap2 * xi2;
                    let z1 = (6.0 * ap2 * (a + 1.0) * eqx - (a + 6.0) * delta * xi) / den;
                    let z2 = ((3.0 * a + 4.0) * eqx - delta * xi) / (den * den);
                    Ok(q2
                        * (0.25 * (a + 1.0) * (a + 3.0) * eqx - 0.5 * a * a * xi2 * emx
                            + 0.25 * a * a * xi2 * xi2 * em3x
                            + a * xi2 / (ap2 * ap2 * ap2) * z1
                            - 4.0 * a * a * xi2 * xi2 / (ap2 * ap2 * ap2 * ap2) * z2)
                        + spec.v0
                        + q2 * delta * xi / ap2)
                }
                k => Err(Error::NoClosedForm { k }),
            }
        }
    }
}

/// For the shape-invariant ES kinds, the parameter-shifted family whose
/// `V_eff` coincides with the partner: Jacobi `(a+1, b+1, V0)`, Laguerre
/// `(a+1, V0 + q^2/2)`.
pub fn shifted_spec(family: &Family) -> Option<FamilySpec> {
    let spec = family.spec();
    match family.kind() {
        FamilyKind::JacobiEs => {
            Some(FamilySpec::jacobi(spec.q, spec.a + 1.0, spec.b.unwrap() + 1.0).with_v0(spec.v0))
        }
        FamilyKind::LaguerreEs => Some(
            FamilySpec::laguerre(spec.q, spec.a + 1.0).with_v0(spec.v0 + 0.5 * spec.q * spec.q),
        ),
        FamilyKind::Qes => None,
    }
}

/// The image `eta psi_{n+1}` as an analytic level of the partner problem:
/// energy `E_{n+1}` and first two derivatives assembled from the source
/// level's first three.
#[derive(Debug, Clone)]
pub struct IntertwinedLevel {
    itw: Intertwiner,
    source: LevelFunction,
    window: (f64, f64),
}

pub fn intertwined_level(itw: &Intertwiner, source: &LevelFunction) -> IntertwinedLevel {
    let window = image_residual_window(itw, source);
    IntertwinedLevel {
        itw: itw.clone(),
        source: source.clone(),
        window,
    }
}

/// Residual window for `eta psi`: where the image is within ~1e-12 density
/// of its peak AND the cancellation noise of the `A psi' + B psi` assembly,
/// amplified by `1/M`, stays far below the residual tolerances. The image
/// decays faster than the source (the intertwiner strips a tail factor),
/// so the source window is a valid superset to scan.
fn image_residual_window(itw: &Intertwiner, source: &LevelFunction) -> (f64, f64) {
    let (slo, shi) = source.residual_window();
    let mass = itw.family.mass_profile();
    const N: usize = 2048;
    let step = (shi - slo) / (N as f64 - 1.0);
    let mut log_phi = [0.0f64; N];
    let mut log_noise = [0.0f64; N];
    let mut peak = f64::NEG_INFINITY;
    let mut peak_idx = 0;
    for i in 0..N {
        let x = slo + step * i as f64;
        let (p, p1, _) = source.psi_derivs(x);
        let m = mass.value_at(x);
        let a = 1.0 / m.sqrt();
        let b = itw.b.derivs(x).0;
        let phi = a * p1 + b * p;
        let amp = (a * p1).abs() + (b * p).abs();
        log_phi[i] = phi.abs().ln();
        log_noise[i] = (amp / m).ln();
        if log_phi[i] > peak {
            peak = log_phi[i];
            peak_idx = i;
        }
    }
    let density_floor = peak - 12.0 * std::f64::consts::LN_10 - 3.0;
    let noise_cap = peak + 14.0;
    let good = |i: usize| log_phi[i] >= density_floor && log_noise[i] <= noise_cap;
    let mut edges = [peak_idx, peak_idx];
    for (side, dir) in [(0usize, -1i64), (1usize, 1i64)] {
        let mut i = peak_idx as i64;
        let mut bad_run = 0;
        while bad_run < 12 && i + dir >= 0 && i + dir < N as i64 {
            i += dir;
            if good(i as usize) {
                bad_run = 0;
            } else {
                bad_run += 1;
            }
        }
        edges[side] = (i - dir * bad_run) as usize;
    }
    (slo + step * edges[0] as f64, slo + step * edges[1] as f64)
}

impl IntertwinedLevel {
    pub fn energy(&self) -> f64 {
        self.source.energy
    }

    /// `(phi, phi', phi'')` for `phi = A psi' + B psi`, `A = M^{-1/2}`.
    pub fn psi_derivs(&self, x: f64) -> (f64, f64, f64) {
        let mass = self.itw.family.mass_profile();
        let m = mass.value_at(x);
        let m1 = mass.d1_at(x);
        let m2 = mass.d2_at(x);
        let a0 = 1.0 / m.sqrt();
        let a1 = -0.5 * m1 * a0 / m;
        let a2 = -0.5 * m2 * a0 / m + 0.75 * m1 * m1 * a0 / (m * m);
        let (b0, b1, b2) = self.itw.b.derivs(x);
        let (p, p1, p2) = self.source.psi_derivs(x);
        let p3 = self.source.psi_d3_at(x);
        let phi = a0 * p1 + b0 * p;
        let phi1 = a1 * p1 + a0 * p2 + b1 * p + b0 * p1;
        let phi2 = a2 * p1 + 2.0 * a1 * p2 + a0 * p3 + b2 * p + 2.0 * b1 * p1 + b0 * p2;
        (phi, phi1, phi2)
    }

    pub fn residual_window(&self) -> (f64, f64) {
        self.window
    }
}

/// Edge conditions for discretizing a QES partner potential: the
/// intertwiner maps source tails `e^{kappa x}` to `e^{(kappa - q/2) x}`
/// on the right; the left end decays double-exponentially, so a plain
/// wall is exact there.
pub fn qes_partner_edge_conditions(
    family: &Family,
    grid: &crate::numerics::Grid,
) -> crate::numerics::EdgeConditions {
    let spec = family.spec();
    let q = spec.q;
    let k = spec.k.expect("QES family") as f64;
    let kappa = 0.5 * (spec.a - 2.0) * q + k * q;
    crate::numerics::EdgeConditions {
        left_log_ratio: f64::NEG_INFINITY,
        right_log_ratio: (kappa - 0.5 * q) * grid.h(),
    }
}

/// Partner potential summary: evaluator, closed-form tag, and the known
/// part of the partner spectrum (`E_{1,n} = E_{n+1}` of the source).
#[derive(Debug, Clone)]
pub struct PartnerPotential {
    itw: Intertwiner,
    pub kind: PartnerKind,
    /// `(partner index, energy)`; all `k` mapped levels for QES, the first
    /// eight for the ES ladders.
    pub known_levels: Vec<(usize, f64)>,
    /// For shape-invariant kinds, the shifted source family `V_1` equals.
    pub shifted: Option<FamilySpec>,
}

pub fn partner(family: &Family) -> PartnerPotential {
    let itw = build_intertwiner(family);
    let kind = match family.kind() {
        FamilyKind::JacobiEs => PartnerKind::ShapeInvariantJacobi,
        FamilyKind::LaguerreEs => PartnerKind::ShapeInvariantLaguerre,
        FamilyKind::Qes => match family.spec().k.unwrap() {
            1 => PartnerKind::QesRationalK1,
            2 => PartnerKind::QesRationalK2,
            _ => PartnerKind::GenericNumeric,
        },
    };
    let mapped = match family.level_count() {
        Some(count) => count - 1,
        None => 8,
    };
    let known_levels = (0..mapped)
        .map(|n| (n, family.energy(n + 1).expect("mapped level exists")))
        .collect();
    PartnerPotential {
        itw,
        kind,
        known_levels,
        shifted: shifted_spec(family),
    }
}

impl PartnerPotential {
    pub fn veff1_at(&self, x: f64) -> f64 {
        partner_veff_generic(&self.itw, x)
    }

    pub fn closed_veff1_at(&self, x: f64) -> Result<f64> {
        partner_veff_closed(&self.itw.family, x)
    }

    pub fn intertwiner(&self) -> &Intertwiner {
        &self.itw
    }

    pub fn source(&self) -> &Family {
        &self.itw.family
    }
}
