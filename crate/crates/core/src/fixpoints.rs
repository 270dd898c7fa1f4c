//! Fixed points, multipliers, critical points and postcritical orbits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::method::{extraneous_polynomial, MethodBundle, MethodKind};
use crate::orbit::{run_orbit, InfinityPolicy, OrbitOutcome};
use crate::poly::{MapValue, Polynomial, Root, CLUSTER_TOL};

/// `|λ|` below this is superattracting.
pub const SUPERATTRACTING_TOL: f64 = 1e-8;
/// Half-width of the parabolic band around `|λ| = 1`.
pub const PARABOLIC_BAND: f64 = 1e-9;

/// Longest orbit prefix kept in a [`CriticalOrbitRecord`].
pub const ORBIT_PREFIX_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Finite(Complex64),
    Infinity,
}

impl Location {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Location::Finite(z) => Some(z),
            Location::Infinity => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Superattracting,
    Attracting,
    Parabolic,
    Repelling,
}

impl Stability {
    pub fn is_attracting(self) -> bool {
        matches!(self, Stability::Superattracting | Stability::Attracting)
    }
}

pub fn classify(multiplier: Complex64) -> Stability {
    let m = multiplier.norm();
    if m < SUPERATTRACTING_TOL {
        Stability::Superattracting
    } else if (m - 1.0).abs() <= PARABOLIC_BAND {
        Stability::Parabolic
    } else if m < 1.0 {
        Stability::Attracting
    } else {
        Stability::Repelling
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointSource {
    RootOfP,
    /// Solution of `L_p = -2` that is not a root of `p`.
    #[serde(rename = "L_p-equals-minus-2")]
    LpEqualsMinus2,
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointRecord {
    pub location: Location,
    pub multiplier: Complex64,
    pub kind: Stability,
    pub extraneous: bool,
    pub source: FixedPointSource,
    /// Multiplicity as a root of `p` (or of `p p'' + 2 p'^2` for
    /// extraneous points); 1 for infinity.
    pub multiplicity: usize,
}

impl FixedPointRecord {
    fn new(location: Location, multiplier: Complex64, source: FixedPointSource, multiplicity: usize) -> Self {
        FixedPointRecord {
            location,
            multiplier,
            kind: classify(multiplier),
            extraneous: source == FixedPointSource::LpEqualsMinus2,
            source,
            multiplicity,
        }
    }
}

/// Derivative of the iteration map at `z`.
pub fn multiplier(bundle: &MethodBundle, z: Complex64) -> Result<Complex64> {
    match bundle.deriv_at(z)? {
        MapValue::Finite(v) => Ok(v),
        MapValue::Infinity => Err(Error::Pole { at: z }),
    }
}

/// `2 (3 - L_{p'}(z))`, the multiplier of Chebyshev's method at a solution
/// of `L_p(z) = -2`.
pub fn extraneous_multiplier_formula(bundle: &MethodBundle, z: Complex64) -> Result<Complex64> {
    match bundle.lp_prime.eval(z)? {
        MapValue::Finite(v) => Ok((Complex64::new(3.0, 0.0) - v) * 2.0),
        MapValue::Infinity => Err(Error::Pole { at: z }),
    }
}

/// Multiplier of the fixed point at infinity: the reciprocal of the
/// asymptotic slope `lead(num) / lead(den)`.
pub fn multiplier_at_infinity(bundle: &MethodBundle) -> Result<Complex64> {
    let (num, den) = (bundle.map.num(), bundle.map.den());
    if num.deg() != den.deg() + 1 {
        return Err(Error::Numeric(format!(
            "map does not fix infinity with finite nonzero slope (deg num {}, deg den {})",
            num.deg(),
            den.deg()
        )));
    }
    Ok(den.leading() / num.leading())
}

fn near(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < CLUSTER_TOL * (1.0 + a.norm().max(b.norm()))
}

/// All fixed points: roots of `p`, extraneous fixed points (Chebyshev only)
/// and infinity.
pub fn fixed_points(bundle: &MethodBundle) -> Result<Vec<FixedPointRecord>> {
    let roots = bundle.p.roots()?;
    let poles = bundle.map.poles()?;
    let mut out = Vec::new();
    for r in &roots {
        let lambda = multiplier(bundle, r.value)?;
        out.push(FixedPointRecord::new(
            Location::Finite(r.value),
            lambda,
            FixedPointSource::RootOfP,
            r.multiplicity,
        ));
    }
    if bundle.kind == MethodKind::Chebyshev {
        for e in extraneous_points(&bundle.p)? {
            if poles.iter().any(|pole| near(pole.value, e.value)) {
                continue;
            }
            let lambda = multiplier(bundle, e.value)?;
            out.push(FixedPointRecord::new(
                Location::Finite(e.value),
                lambda,
                FixedPointSource::LpEqualsMinus2,
                e.multiplicity,
            ));
        }
    }
    out.push(FixedPointRecord::new(
        Location::Infinity,
        multiplier_at_infinity(bundle)?,
        FixedPointSource::Infinity,
        1,
    ));
    Ok(out)
}

/// Roots of `p p'' + 2 p'^2` that are not roots of `p`.
pub fn extraneous_points(p: &Polynomial) -> Result<Vec<Root>> {
    let roots = p.roots()?;
    let q = extraneous_polynomial(p);
    if q.deg() == 0 {
        return Ok(Vec::new());
    }
    Ok(q
        .roots()?
        .into_iter()
        .filter(|e| !roots.iter().any(|r| near(r.value, e.value)))
        .collect())
}

/// Finite attracting fixed points, in table order.
pub fn attractors(records: &[FixedPointRecord]) -> Vec<Complex64> {
    records
        .iter()
        .filter(|r| r.kind.is_attracting())
        .filter_map(|r| r.location.finite())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    RootOfP,
    /// Pole of multiplicity at least two.
    Pole,
    /// Any other zero of the derivative.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub point: Complex64,
    pub multiplicity: usize,
    pub kind: CriticalKind,
}

/// Finite critical points: zeros of the reduced derivative plus poles of
/// multiplicity `m >= 2` (counted `m - 1` times).
pub fn critical_points(bundle: &MethodBundle) -> Result<Vec<CriticalPoint>> {
    let roots = bundle.p.roots()?;
    let mut out = Vec::new();
    let dnum = bundle.deriv.num();
    if dnum.deg() > 0 {
        for z in dnum.roots()? {
            let kind = if roots.iter().any(|r| near(r.value, z.value)) {
                CriticalKind::RootOfP
            } else {
                CriticalKind::Free
            };
            out.push(CriticalPoint {
                point: z.value,
                multiplicity: z.multiplicity,
                kind,
            });
        }
    }
    for pole in bundle.map.poles()? {
        if pole.multiplicity >= 2 {
            out.push(CriticalPoint {
                point: pole.value,
                multiplicity: pole.multiplicity - 1,
                kind: CriticalKind::Pole,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalOrbitRecord {
    pub critical_point: Complex64,
    pub kind: CriticalKind,
    pub orbit_prefix: Vec<Complex64>,
    pub verdict: OrbitOutcome,
}

/// Follows each critical point for up to `max_iter` steps. Poles get a
/// `HitPole` verdict at step 0. Orbits run in parallel; output order follows
/// `critical_points` order.
pub fn postcritical_classify(
    bundle: &MethodBundle,
    critical: &[CriticalPoint],
    attractors: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Vec<CriticalOrbitRecord> {
    critical
        .par_iter()
        .map(|c| {
            let mut trace = Vec::new();
            let outcome = if c.kind == CriticalKind::Pole {
                trace.push(c.point);
                OrbitOutcome::HitPole { step: 0 }
            } else {
                run_orbit(
                    &bundle.map,
                    c.point,
                    attractors,
                    max_iter,
                    tol,
                    InfinityPolicy::Stop,
                    Some(&mut trace),
                )
            };
            trace.truncate(ORBIT_PREFIX_LEN);
            CriticalOrbitRecord {
                critical_point: c.point,
                kind: c.kind,
                orbit_prefix: trace,
                verdict: outcome,
            }
        })
        .collect()
}
