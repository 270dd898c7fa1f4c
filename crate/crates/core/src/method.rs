//! Construction of root-finding iteration maps.
//!
//! For Chebyshev's method
//!
//! ```text
//! C_p = z - (1 + L_p / 2) p / p',      L_p = p p'' / (p')^2
//!     = (2 z p'^3 - 2 p p'^2 - p^2 p'') / (2 p'^3)
//! C_p' = L_p^2 (3 - L_{p'}) / 2 = p^2 (3 p''^2 - p' p''') / (2 p'^4)
//! ```
//!
//! Both the map and its derivative are built on the expanded polynomial.
//! Every factor they can share lies over a root of `p`, `p'` or `p''`, and
//! its order there follows from the root multiplicities, so shared factors
//! are divided out by exact counts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{MapValue, Polynomial, RationalMap, Root, CLUSTER_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Chebyshev,
    Newton,
}

impl std::str::FromStr for MethodKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chebyshev" => Ok(MethodKind::Chebyshev),
            "newton" => Ok(MethodKind::Newton),
            other => Err(Error::InvalidInput(format!(
                "unknown method `{other}` (expected chebyshev or newton)"
            ))),
        }
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MethodKind::Chebyshev => "chebyshev",
            MethodKind::Newton => "newton",
        })
    }
}

/// An iteration map together with the auxiliary maps used to analyze it.
#[derive(Clone, Debug)]
pub struct MethodBundle {
    pub kind: MethodKind,
    pub p: Polynomial,
    /// The iteration map, reduced.
    pub map: RationalMap,
    /// Its derivative, reduced.
    pub deriv: RationalMap,
    /// `p p'' / p'^2`
    pub lp: RationalMap,
    /// `p' p''' / p''^2`
    pub lp_prime: RationalMap,
}

impl MethodBundle {
    pub fn eval(&self, z: Complex64) -> Result<MapValue> {
        self.map.eval(z)
    }

    /// Derivative of the map at `z`.
    ///
    /// Away from critical points of `p` it is formed from `p` and its first
    /// three derivatives, which stays accurate where the expanded reduced
    /// derivative is badly conditioned (clustered roots of high degree).
    /// Near critical points of `p` the reduced map is used.
    pub fn deriv_at(&self, z: Complex64) -> Result<MapValue> {
        let d1 = self.p.derivative();
        let (v1, noise) = d1.eval_with_noise(z);
        if v1.norm() > 1e8 * noise {
            let d2 = d1.derivative();
            let (v0, v2) = (self.p.eval(z), d2.eval(z));
            let v = match self.kind {
                MethodKind::Chebyshev => {
                    let v3 = d2.derivative().eval(z);
                    v0 * v0 * (v2 * v2 * 3.0 - v1 * v3) / (v1 * v1 * v1 * v1 * 2.0)
                }
                MethodKind::Newton => v0 * v2 / (v1 * v1),
            };
            if v.re.is_finite() && v.im.is_finite() {
                return Ok(MapValue::Finite(v));
            }
        }
        self.deriv.eval(z)
    }

    /// `max(deg num, deg den)` of the reduced map.
    pub fn map_degree(&self) -> usize {
        self.map.degree()
    }
}

pub fn build(kind: MethodKind, p: &Polynomial) -> Result<MethodBundle> {
    match kind {
        MethodKind::Chebyshev => chebyshev_map(p),
        MethodKind::Newton => newton_map(p),
    }
}

fn check_input(p: &Polynomial, method: &str) -> Result<()> {
    match p.degree() {
        Some(d) if d >= 2 => {}
        _ => {
            return Err(Error::InvalidInput(format!(
                "{method} needs degree at least 2; for lower degree the map is constant or linear"
            )))
        }
    }
    Ok(())
}

/// True when `p = a (z - c)^d`, i.e. an affine image of a monomial.
pub fn is_affine_monomial(p: &Polynomial) -> bool {
    let d = p.deg();
    if d == 0 {
        return false;
    }
    let centroid = -p.coeff(d - 1) / (p.leading() * d as f64);
    p.monic()
        .compose_affine(Complex64::new(1.0, 0.0), centroid)
        .is_monomial()
}

/// A point where `p`, `p'` or `p''` vanishes, with the order of each there.
#[derive(Clone, Copy, Debug)]
struct Site {
    at: Complex64,
    p: usize,
    d1: usize,
    d2: usize,
}

/// Distinct roots of `p`, `p'` and `p''`, each with its order in all three.
/// At a `k`-fold root of `p` with `k >= 2` the derivative orders are exactly
/// `k - 1` and `k - 2`; elsewhere they are read off the root lists.
fn sites(p: &Polynomial) -> Result<Vec<Site>> {
    let d1 = p.derivative();
    let d2 = d1.derivative();
    let lists = [p.roots()?, d1.roots()?, if d2.deg() > 0 { d2.roots()? } else { Vec::new() }];
    let near = |a: Complex64, b: Complex64| (a - b).norm() < CLUSTER_TOL * (1.0 + a.norm());
    let order = |list: &[Root], at: Complex64| {
        list.iter().find(|r| near(r.value, at)).map_or(0, |r| r.multiplicity)
    };
    let mut sites: Vec<Site> = Vec::new();
    for r in lists.iter().flatten() {
        if sites.iter().any(|s| near(s.at, r.value)) {
            continue;
        }
        let at = r.value;
        let k = order(&lists[0], at);
        sites.push(if k >= 2 {
            Site { at, p: k, d1: k - 1, d2: k - 2 }
        } else {
            let d1 = order(&lists[1], at);
            let d2 = if d1 >= 2 { d1 - 1 } else { order(&lists[2], at) };
            Site { at, p: k, d1, d2 }
        });
    }
    Ok(sites)
}

/// Shared factor orders of one map, from a per-site rule.
fn factors(sites: &[Site], rule: impl Fn(&Site) -> usize) -> Vec<(Complex64, usize)> {
    sites.iter().map(|s| (s.at, rule(s))).filter(|&(_, k)| k > 0).collect()
}

/// `p p'' / p'^2`: all of `p'^2` cancels at roots of `p`, and the `p''`
/// factor cancels at other roots of `p'`.
fn lp_rule(s: &Site) -> usize {
    if s.p > 0 {
        2 * s.d1
    } else if s.d1 > 0 {
        s.d2
    } else {
        0
    }
}

/// `p' p''' / p''^2`, the same pattern one derivative up.
fn lp_prime_rule(s: &Site) -> usize {
    if s.d1 > 0 {
        2 * s.d2
    } else if s.d2 > 0 {
        s.d2 - 1
    } else {
        0
    }
}

/// Roots of `p` are fixed points, so all of `p'^3` cancels there. At other
/// roots of `p'` only the `p''` factor of the numerator is shared.
fn chebyshev_rule(s: &Site) -> usize {
    if s.p > 0 {
        3 * s.d1
    } else if s.d1 > 0 {
        s.d2
    } else {
        0
    }
}

/// `3 p''^2 - p' p'''` has order exactly `2(m - 1)` at an `m`-fold root of
/// `p'`.
fn chebyshev_deriv_rule(s: &Site) -> usize {
    if s.p > 0 {
        4 * s.d1
    } else if s.d1 > 0 {
        2 * s.d2
    } else {
        0
    }
}

struct Parts {
    d1: Polynomial,
    d2: Polynomial,
    d3: Polynomial,
    lp: RationalMap,
    lp_prime: RationalMap,
    sites: Vec<Site>,
}

fn auxiliary(p: &Polynomial) -> Result<Parts> {
    let sites = sites(p)?;
    let d1 = p.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let lp = RationalMap::new(p.mul(&d2), d1.mul(&d1))?.cancel_at(&factors(&sites, lp_rule));
    let lp_prime =
        RationalMap::new(d1.mul(&d3), d2.mul(&d2))?.cancel_at(&factors(&sites, lp_prime_rule));
    Ok(Parts { d1, d2, d3, lp, lp_prime, sites })
}

pub fn chebyshev_map(p: &Polynomial) -> Result<MethodBundle> {
    check_input(p, "Chebyshev's method")?;
    if is_affine_monomial(p) {
        return Err(Error::InvalidInput(
            "Chebyshev's method of a monomial (z - c)^d is a linear map; p must not be a monomial"
                .into(),
        ));
    }
    let Parts { d1, d2, d3, lp, lp_prime, sites } = auxiliary(p)?;
    let z = Polynomial::monomial(Complex64::new(1.0, 0.0), 1);
    let d1_sq = d1.mul(&d1);
    let d1_cu = d1_sq.mul(&d1);
    let p_sq = p.mul(p);

    let num = z
        .mul(&d1_cu)
        .scale_real(2.0)
        .sub(&p.mul(&d1_sq).scale_real(2.0))
        .sub(&p_sq.mul(&d2));
    let den = d1_cu.scale_real(2.0);
    let map = RationalMap::new(num, den)?.cancel_at(&factors(&sites, chebyshev_rule));

    let deriv_num = p_sq.mul(&d2.mul(&d2).scale_real(3.0).sub(&d1.mul(&d3)));
    let deriv_den = d1_sq.mul(&d1_sq).scale_real(2.0);
    let deriv = RationalMap::new(deriv_num, deriv_den)?
        .cancel_at(&factors(&sites, chebyshev_deriv_rule));

    Ok(MethodBundle {
        kind: MethodKind::Chebyshev,
        p: p.clone(),
        map,
        deriv,
        lp,
        lp_prime,
    })
}

/// Newton's method `z - p / p'`, with derivative `p p'' / p'^2`.
pub fn newton_map(p: &Polynomial) -> Result<MethodBundle> {
    check_input(p, "Newton's method")?;
    let Parts { d1, d2, lp, lp_prime, sites, .. } = auxiliary(p)?;
    let z = Polynomial::monomial(Complex64::new(1.0, 0.0), 1);
    let map = RationalMap::new(z.mul(&d1).sub(p), d1.clone())?
        .cancel_at(&factors(&sites, |s| if s.p > 0 { s.d1 } else { 0 }));
    let deriv = RationalMap::new(p.mul(&d2), d1.mul(&d1))?.cancel_at(&factors(&sites, lp_rule));
    Ok(MethodBundle {
        kind: MethodKind::Newton,
        p: p.clone(),
        map,
        deriv,
        lp,
        lp_prime,
    })
}

/// Polynomial whose roots (other than roots of `p`) are the extraneous
/// fixed points, i.e. the solutions of `L_p = -2`: `p p'' + 2 p'^2`.
pub fn extraneous_polynomial(p: &Polynomial) -> Polynomial {
    let d1 = p.derivative();
    let d2 = d1.derivative();
    p.mul(&d2).add(&d1.mul(&d1).scale_real(2.0))
}
