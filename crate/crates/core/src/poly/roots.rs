//! Simultaneous polynomial root finding.
//!
//! Aberth–Ehrlich iteration from a golden-angle circle of starting points,
//! with a Durand–Kerner fallback. Approximations are then grouped into
//! clusters (one cluster per distinct root) and each cluster center is
//! polished: simple roots by Newton on `p`, an `m`-fold cluster by Newton on
//! `p^(m-1)`, for which the multiple root is simple.

use num_complex::Complex64;

use super::{Polynomial, Root};
use crate::error::{Error, Result};

/// Relative distance below which two approximations always merge.
pub const CLUSTER_TOL: f64 = 1e-6;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
const PHASE_OFFSET: f64 = 0.4;

#[derive(Clone, Copy, Debug)]
pub struct RootFinder {
    pub max_iter: usize,
    /// Convergence when every step is below `step_tol * radius`.
    pub step_tol: f64,
    pub cluster_tol: f64,
}

impl Default for RootFinder {
    fn default() -> Self {
        RootFinder {
            max_iter: 500,
            step_tol: 1e-13,
            cluster_tol: CLUSTER_TOL,
        }
    }
}

/// Roots of `p` with multiplicities, using the default configuration.
pub fn find_roots(p: &Polynomial) -> Result<Vec<Root>> {
    RootFinder::default().roots(p)
}

enum Stall {
    NonFinite,
    IterationCap,
}

impl RootFinder {
    pub fn roots(&self, p: &Polynomial) -> Result<Vec<Root>> {
        let degree = match p.degree() {
            None | Some(0) => {
                return Err(Error::InvalidInput(
                    "root finding needs a polynomial of degree at least 1".into(),
                ))
            }
            Some(d) => d,
        };

        // Exactly-zero trailing coefficients are an exact root at the origin.
        let zeros = p.coeffs().iter().take_while(|c| c.norm() == 0.0).count();
        let q = Polynomial::new(p.coeffs()[zeros..].to_vec());
        let mut out = Vec::new();
        if zeros > 0 {
            out.push(Root::new(Complex64::new(0.0, 0.0), zeros));
        }
        match q.deg() {
            0 => {}
            1 => out.push(Root::simple(-q.coeff(0) / q.coeff(1))),
            _ => {
                let approx = match self.aberth(&q) {
                    Ok(z) => z,
                    Err(_) => self.durand_kerner(&q).map_err(|stall| {
                        let guesses = initial_guesses(&q, PHASE_OFFSET);
                        Error::RootFinding {
                            degree,
                            residual: reconstruction_residual(
                                &q,
                                &guesses.iter().map(|&z| Root::simple(z)).collect::<Vec<_>>(),
                            ),
                            reason: match stall {
                                Stall::NonFinite => "non-finite iterate".into(),
                                Stall::IterationCap => {
                                    format!("no convergence after {} iterations", self.max_iter)
                                }
                            },
                        }
                    })?,
                };
                out.extend(self.cluster_and_polish(&q, &approx));
            }
        }
        out.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        });
        Ok(out)
    }

    fn aberth(&self, p: &Polynomial) -> std::result::Result<Vec<Complex64>, Stall> {
        let dp = p.derivative();
        let radius = root_bound(p);
        let mut z = initial_guesses(p, PHASE_OFFSET);
        let n = z.len();
        let mut done = vec![false; n];
        for _ in 0..self.max_iter {
            let mut all_done = true;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let (pv, noise) = p.eval_with_noise(z[i]);
                if pv.norm() <= noise {
                    done[i] = true;
                    continue;
                }
                let repulsion: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (z[i] - z[j]).inv())
                    .sum();
                let step = (ratio(dp.eval(z[i]), pv) - repulsion).inv();
                if !(step.re.is_finite() && step.im.is_finite()) {
                    return Err(Stall::NonFinite);
                }
                z[i] -= step;
                if step.norm() < self.step_tol * radius {
                    done[i] = true;
                } else {
                    all_done = false;
                }
            }
            if all_done {
                return Ok(z);
            }
        }
        Err(Stall::IterationCap)
    }

    fn durand_kerner(&self, p: &Polynomial) -> std::result::Result<Vec<Complex64>, Stall> {
        let monic = p.monic();
        let radius = root_bound(p);
        let mut z = initial_guesses(p, PHASE_OFFSET + 0.7);
        let n = z.len();
        let mut done = vec![false; n];
        for _ in 0..self.max_iter {
            let mut all_done = true;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let (pv, noise) = monic.eval_with_noise(z[i]);
                if pv.norm() <= noise {
                    done[i] = true;
                    continue;
                }
                let denom: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| z[i] - z[j])
                    .product();
                let step = ratio(pv, denom);
                if !(step.re.is_finite() && step.im.is_finite()) {
                    return Err(Stall::NonFinite);
                }
                z[i] -= step;
                if step.norm() < self.step_tol * radius {
                    done[i] = true;
                } else {
                    all_done = false;
                }
            }
            if all_done {
                return Ok(z);
            }
        }
        Err(Stall::IterationCap)
    }

    /// Groups approximations into distinct roots.
    ///
    /// Two approximations share a cluster when they are closer than
    /// `cluster_tol * (1 + |z|)` or when their Weierstrass inclusion disks
    /// `D(z_i, d |p(z_i)| / |a_d prod_{j != i}(z_i - z_j)|)` overlap. The
    /// disks use the rounding-error bound of `p(z_i)` as a floor, so the
    /// ring of approximations that a multiple root breaks into under
    /// rounding always forms one connected component.
    fn cluster_and_polish(&self, p: &Polynomial, z: &[Complex64]) -> Vec<Root> {
        let n = z.len();
        let lead = p.leading().norm();
        let radii: Vec<f64> = (0..n)
            .map(|i| {
                let (pv, noise) = p.eval_with_noise(z[i]);
                let prod: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (z[i] - z[j]).norm())
                    .filter(|&d| d > 0.0)
                    .product();
                n as f64 * pv.norm().max(noise) / (lead * prod)
            })
            .collect();

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dist = (z[i] - z[j]).norm();
                let close = dist < self.cluster_tol * (1.0 + z[i].norm().max(z[j].norm()));
                if close || dist <= radii[i] + radii[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }

        groups
            .iter()
            .map(|members| {
                let m = members.len();
                let mean = members.iter().map(|&i| z[i]).sum::<Complex64>() / m as f64;
                let spread = members
                    .iter()
                    .map(|&i| (z[i] - mean).norm())
                    .fold(0.0, f64::max);
                let target = p.nth_derivative(m - 1);
                let start = if m == 1 { z[members[0]] } else { mean };
                Root::new(polish(&target, start, spread), m)
            })
            .collect()
    }
}

/// Newton iteration on `q` from `start`, keeping only improving steps that
/// stay near the starting cluster.
fn polish(q: &Polynomial, start: Complex64, spread: f64) -> Complex64 {
    let dq = q.derivative();
    let leash = 4.0 * spread + 1e-8 * (1.0 + start.norm());
    let mut best = start;
    let mut best_val = q.eval(start).norm();
    let mut x = start;
    for _ in 0..30 {
        if best_val == 0.0 {
            break;
        }
        let d = dq.eval(x);
        if d.norm() == 0.0 {
            break;
        }
        let next = x - q.eval(x) / d;
        if !(next.re.is_finite() && next.im.is_finite()) || (next - start).norm() > leash {
            break;
        }
        let val = q.eval(next).norm();
        let moved = (next - x).norm();
        x = next;
        if val < best_val {
            best = next;
            best_val = val;
        } else if moved <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
        if moved <= 4.0 * f64::EPSILON * (1.0 + x.norm()) {
            break;
        }
    }
    best
}

/// Fujiwara's bound `2 max_k |a_{d-k} / a_d|^{1/k}` (with the constant term
/// halved) on the moduli of the roots. Unlike `1 + max |a_j / a_d|` it stays
/// close to the actual root radius when the leading coefficient is small.
fn root_bound(p: &Polynomial) -> f64 {
    let lead = p.leading();
    let d = p.deg();
    let b = (1..=d)
        .map(|k| {
            let a = (p.coeff(d - k) / lead).norm();
            let a = if k == d { a / 2.0 } else { a };
            a.powf(1.0 / k as f64)
        })
        .fold(0.0, f64::max);
    if b > 0.0 {
        2.0 * b
    } else {
        1.0
    }
}

/// `a / b` with both operands rescaled first, so `|b|^2` cannot overflow.
fn ratio(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    if s == 0.0 || !s.is_finite() {
        return a / b;
    }
    (a / s) / (b / s)
}

fn initial_guesses(p: &Polynomial, offset: f64) -> Vec<Complex64> {
    let radius = root_bound(p);
    (0..p.deg())
        .map(|k| Complex64::from_polar(radius, offset + k as f64 * GOLDEN_ANGLE))
        .collect()
}

/// Largest relative deviation between `p` and `leading * prod (z - r)^m`
/// over sample points on circles enclosing the roots.
///
/// Deviation at `z` is normalized by `sum |a_j| |z|^j`.
pub fn reconstruction_residual(p: &Polynomial, roots: &[Root]) -> f64 {
    let rebuilt = Polynomial::from_roots(p.leading(), roots);
    let rmax = roots.iter().map(|r| r.value.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for ring in [0.5, 1.0, 1.5] {
        let radius = ring * (1.0 + rmax);
        for k in 0..32 {
            let z = Complex64::from_polar(radius, 0.1 + k as f64 * GOLDEN_ANGLE);
            let (v, _) = p.eval_with_noise(z);
            let scale: f64 = p
                .coeffs()
                .iter()
                .rev()
                .fold(0.0, |s, a| s * z.norm() + a.norm());
            let dev = (v - rebuilt.eval(z)).norm() / scale.max(f64::MIN_POSITIVE);
            worst = worst.max(dev);
        }
    }
    worst
}
