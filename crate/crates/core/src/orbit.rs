//! Forward orbits of an iteration map towards known attractors.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::poly::{MapValue, RationalMap};

/// Magnitude of the finite proxy that replaces an orbit point at infinity.
pub const RESTART_MAGNITUDE: f64 = 1e12;

/// What to do when an orbit lands on a pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfinityPolicy {
    /// Continue from `RESTART_MAGNITUDE` in the direction of the blow-up.
    /// Infinity is repelling for the maps studied here, so such orbits come
    /// back to moderate scale.
    Restart,
    /// Report [`OrbitOutcome::HitPole`].
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum OrbitOutcome {
    Converged { attractor: usize, steps: usize },
    NonConverged,
    HitPole { step: usize },
}

/// Index of the attractor within `tol` of `z`, nearest first.
pub fn nearest_attractor(z: Complex64, attractors: &[Complex64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, a) in attractors.iter().enumerate() {
        let d = (z - a).norm();
        if d < tol && best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Iterates `map` from `z0` until the orbit comes within `tol` of an
/// attractor, for at most `max_iter` applications of the map. Visited points
/// (starting with `z0`) are appended to `trace` when given.
pub fn run_orbit(
    map: &RationalMap,
    z0: Complex64,
    attractors: &[Complex64],
    max_iter: usize,
    tol: f64,
    policy: InfinityPolicy,
    mut trace: Option<&mut Vec<Complex64>>,
) -> OrbitOutcome {
    let mut z = z0;
    for step in 0..=max_iter {
        if let Some(t) = trace.as_deref_mut() {
            t.push(z);
        }
        if let Some(attractor) = nearest_attractor(z, attractors, tol) {
            return OrbitOutcome::Converged { attractor, steps: step };
        }
        if step == max_iter {
            break;
        }
        match map.eval(z) {
            Ok(MapValue::Finite(w)) => z = w,
            Ok(MapValue::Infinity) | Err(Error::Indeterminate { .. }) => match policy {
                InfinityPolicy::Stop => return OrbitOutcome::HitPole { step },
                InfinityPolicy::Restart => z = map.direction(z) * RESTART_MAGNITUDE,
            },
            Err(_) => return OrbitOutcome::NonConverged,
        }
    }
    OrbitOutcome::NonConverged
}
