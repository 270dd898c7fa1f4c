//! Rotational symmetry of polynomials (exact, from the coefficient support)
//! and of Julia sets (empirical, from basin rasters).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basins::{julia_band, window3, BasinRaster, NONCONV};
use crate::error::{Error, Result};
use crate::method::is_affine_monomial;
use crate::poly::Polynomial;
use crate::scaling::normalize;

/// A rotation test passes when fewer than this fraction of band pixels miss.
pub const MISMATCH_THRESHOLD: f64 = 0.01;
pub const DEFAULT_MAX_ORDER: usize = 12;
/// `line_test` residuals below this mean the band is a straight line.
pub const LINE_THRESHOLD: f64 = 0.01;
/// Fraction of band pixels a shift must preserve to count as a translation.
pub const TRANSLATION_HIT_RATE: f64 = 0.99;
const MIN_LINE_PIXELS: usize = 100;

/// The cyclic group of rotations `z ↦ center + e^{2πik/order}(z - center)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryGroup {
    pub center: Complex64,
    pub order: usize,
    pub trivial: bool,
}

impl SymmetryGroup {
    pub fn new(center: Complex64, order: usize) -> Self {
        let order = order.max(1);
        SymmetryGroup { center, order, trivial: order == 1 }
    }

    /// The generating rotation by `2π / order`.
    pub fn generator(&self) -> impl Fn(Complex64) -> Complex64 {
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU / self.order as f64);
        let c = self.center;
        move |z| c + w * (z - c)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rotations preserving `p` up to the induced rotation of the image: the
/// order is `gcd{d - j : a_j ≠ 0, j < d}` of the normalized polynomial and the
/// center is the centroid.
pub fn poly_symmetry_group(p: &Polynomial) -> Result<SymmetryGroup> {
    if p.deg() < 2 || is_affine_monomial(p) {
        return Err(Error::InvalidInput(
            "p is a monomial (z - c)^d whose symmetry group is a full circle; monomials are excluded".into(),
        ));
    }
    let n = normalize(p)?;
    let d = n.g.deg();
    let floor = 1e-10 * n.g.max_coeff_norm();
    let order = (0..d)
        .filter(|&j| n.g.coeff(j).norm() > floor)
        .fold(0, |acc, j| gcd(acc, d - j));
    let group = SymmetryGroup::new(n.t.b, order);
    if !satisfies_rotation_identity(&n.g, order) {
        return Err(Error::Numeric(format!("rotation of order {order} fails g∘σ = σ^d∘g")));
    }
    Ok(group)
}

/// `g(ω z) = ω^d g(z)` at 20 sample points for `ω = e^{2πi/order}`.
pub fn satisfies_rotation_identity(g: &Polynomial, order: usize) -> bool {
    let w = Complex64::from_polar(1.0, std::f64::consts::TAU / order as f64);
    let wd = w.powu(g.deg() as u32);
    (0..20).all(|k| {
        let z = Complex64::from_polar(0.3 + 0.09 * k as f64, 0.7 + 1.3 * k as f64);
        let (lhs, rhs) = (g.eval(w * z), wd * g.eval(z));
        let scale: f64 = g.coeffs().iter().enumerate().map(|(j, c)| c.norm() * z.norm().powi(j as i32)).sum();
        (lhs - rhs).norm() <= 1e-10 * scale.max(1.0)
    })
}

/// Band mismatch of a single rotation order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationTrial {
    pub order: usize,
    pub mismatch_rate: f64,
    /// Fraction of converged pixels whose rotated label is not the image of
    /// their attractor under the rotation.
    pub label_mismatch_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JuliaSymmetry {
    /// Largest order whose band mismatch is below 1%, 1 when none passes.
    pub order: usize,
    pub mismatch_rate: f64,
    /// Whether the detected rotation also permutes basin labels consistently.
    pub labels_consistent: bool,
    pub trials: Vec<RotationTrial>,
}

/// Rotates every band pixel inside the inscribed disk about `center` by
/// `2π/m` for `m = 2..=max_order` and counts how often the nearest pixel of
/// the image is outside the band.
pub fn julia_symmetry_detect(raster: &BasinRaster, center: Complex64, max_order: usize) -> Result<JuliaSymmetry> {
    if max_order < 2 {
        return Err(Error::InvalidInput("max order must be at least 2".into()));
    }
    let band = julia_band(raster);
    let g = &raster.grid;
    let radius = inscribed_radius(raster, center);
    let in_disk = |i: usize| (g.pixel_center(i % g.width, i / g.width) - center).norm() <= radius;
    let band_pixels: Vec<usize> = (0..g.len()).filter(|&i| band[i] && in_disk(i)).collect();
    if band_pixels.is_empty() {
        return Err(Error::Numeric("no Julia band pixels inside the inscribed disk".into()));
    }
    let trials: Vec<RotationTrial> = (2..=max_order)
        .into_par_iter()
        .map(|m| {
            let rot = SymmetryGroup::new(center, m).generator();
            let mismatch_rate = transform_mismatch(raster, &band, &band_pixels, &rot, true);
            let label_mismatch_rate = label_mismatch(raster, &band, &in_disk, &rot);
            RotationTrial { order: m, mismatch_rate, label_mismatch_rate }
        })
        .collect();
    let best = trials.iter().rev().find(|t| t.mismatch_rate < MISMATCH_THRESHOLD);
    Ok(match best {
        Some(t) => JuliaSymmetry {
            order: t.order,
            mismatch_rate: t.mismatch_rate,
            labels_consistent: t.label_mismatch_rate < MISMATCH_THRESHOLD,
            trials,
        },
        None => JuliaSymmetry { order: 1, mismatch_rate: 0.0, labels_consistent: true, trials },
    })
}

/// Radius of the largest disk about `center` inside the raster, less one
/// pixel so rotated pixel centers stay on the grid.
fn inscribed_radius(raster: &BasinRaster, center: Complex64) -> f64 {
    let g = &raster.grid;
    let dx = g.half_extent - (center.re - g.center.re).abs();
    let dy = g.half_height() - (center.im - g.center.im).abs();
    (dx.min(dy) - g.pixel_size()).max(0.0)
}

/// Fraction of `pixels` whose image under `f` does not land on a band pixel
/// (images outside the grid count as misses). With `slack` an image also
/// hits when any pixel of its 3x3 neighborhood is in the band; rotations
/// need this because rotated pixel centers fall between pixel centers.
fn transform_mismatch(
    raster: &BasinRaster,
    band: &[bool],
    pixels: &[usize],
    f: &impl Fn(Complex64) -> Complex64,
    slack: bool,
) -> f64 {
    let g = &raster.grid;
    let misses = pixels
        .iter()
        .filter(|&&i| {
            let z = f(g.pixel_center(i % g.width, i / g.width));
            match g.pixel_of(z) {
                Some((c, r)) if slack => !window3(g, c, r).any(|k| band[k]),
                Some((c, r)) => !band[g.index(c, r)],
                None => true,
            }
        })
        .count();
    misses as f64 / pixels.len() as f64
}

/// Image of each attractor under `f`, matched to the nearest attractor.
fn attractor_permutation(attractors: &[Complex64], f: &impl Fn(Complex64) -> Complex64) -> Vec<i32> {
    attractors
        .iter()
        .map(|&a| {
            let image = f(a);
            attractors
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - image).norm().total_cmp(&(y.1 - image).norm()))
                .map_or(NONCONV, |(k, _)| k as i32)
        })
        .collect()
}

/// Fraction of converged, off-band pixels in the disk whose image under `f`
/// carries a label other than the image of their own attractor.
fn label_mismatch(
    raster: &BasinRaster,
    band: &[bool],
    in_disk: &impl Fn(usize) -> bool,
    f: &impl Fn(Complex64) -> Complex64,
) -> f64 {
    let g = &raster.grid;
    let perm = attractor_permutation(&raster.attractors, f);
    let mut total = 0usize;
    let mut misses = 0usize;
    for i in 0..g.len() {
        let l = raster.labels[i];
        if l == NONCONV || band[i] || !in_disk(i) {
            continue;
        }
        total += 1;
        let z = f(g.pixel_center(i % g.width, i / g.width));
        let hit = g.pixel_of(z).map(|(c, r)| raster.labels[g.index(c, r)]);
        if hit != Some(perm[l as usize]) {
            misses += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        misses as f64 / total as f64
    }
}

/// Mismatch rates of the band and of the labels under the mirror
/// `z ↦ 2 Re(center) - conj(z)` about the vertical line through the grid center.
pub fn mirror_mismatch(raster: &BasinRaster) -> Result<(f64, f64)> {
    let band = julia_band(raster);
    let g = &raster.grid;
    let c = g.center;
    let mirror = move |z: Complex64| Complex64::new(2.0 * c.re - z.re, z.im);
    let pixels: Vec<usize> = (0..g.len()).filter(|&i| band[i]).collect();
    if pixels.is_empty() {
        return Err(Error::Numeric("the Julia band is empty".into()));
    }
    let band_rate = transform_mismatch(raster, &band, &pixels, &mirror, false);
    let label_rate = label_mismatch(raster, &band, &|_| true, &mirror);
    Ok((band_rate, label_rate))
}

/// RMS orthogonal distance of band pixel centers from their total least
/// squares line, divided by the raster half extent.
pub fn line_test(raster: &BasinRaster) -> Result<f64> {
    let band = julia_band(raster);
    let g = &raster.grid;
    let pts: Vec<Complex64> = (0..g.len())
        .filter(|&i| band[i])
        .map(|i| g.pixel_center(i % g.width, i / g.width))
        .collect();
    if pts.len() < MIN_LINE_PIXELS {
        return Err(Error::Numeric(format!(
            "line fit needs at least {MIN_LINE_PIXELS} band pixels, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean = pts.iter().sum::<Complex64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in &pts {
        let d = p - mean;
        sxx += d.re * d.re;
        syy += d.im * d.im;
        sxy += d.re * d.im;
    }
    let (sxx, syy, sxy) = (sxx / n, syy / n, sxy / n);
    // smallest eigenvalue of the 2x2 covariance
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let lambda_min = (half_trace - disc).max(0.0);
    Ok(lambda_min.sqrt() / g.half_extent)
}

/// True when some shift maps at least 99% of the band pixels whose image
/// stays on the grid onto band pixels.
pub fn translation_test(raster: &BasinRaster, candidates: &[Complex64]) -> bool {
    let band = julia_band(raster);
    let g = &raster.grid;
    let pixels: Vec<usize> = (0..g.len()).filter(|&i| band[i]).collect();
    candidates.iter().any(|&v| {
        let mut total = 0usize;
        let mut hits = 0usize;
        for &i in &pixels {
            let z = g.pixel_center(i % g.width, i / g.width) + v;
            if let Some((c, r)) = g.pixel_of(z) {
                total += 1;
                hits += usize::from(band[g.index(c, r)]);
            }
        }
        total > 0 && hits as f64 >= TRANSLATION_HIT_RATE * total as f64
    })
}

/// Default shifts for [`translation_test`], scaled to the raster.
pub fn default_translation_candidates(raster: &BasinRaster) -> Vec<Complex64> {
    let h = raster.grid.half_extent;
    vec![
        Complex64::new(0.125 * h, 0.0),
        Complex64::new(0.0, 0.125 * h),
        Complex64::new(0.0625 * h, 0.0625 * h),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub poly_group: SymmetryGroup,
    pub julia_group_order: usize,
    pub julia_mismatch_rate: f64,
    pub julia_labels_consistent: bool,
    /// `None` when the band is too sparse for a line fit.
    pub line_residual: Option<f64>,
    pub is_line: Option<bool>,
    pub translation_suspected: bool,
    /// The polynomial has no rotational symmetry, so the Julia order is
    /// reported without a prediction to compare against.
    pub exploratory: bool,
}

pub fn symmetry_report(p: &Polynomial, raster: &BasinRaster, max_order: usize) -> Result<SymmetryReport> {
    let poly_group = poly_symmetry_group(p)?;
    let julia = julia_symmetry_detect(raster, poly_group.center, max_order)?;
    let line_residual = line_test(raster).ok();
    let translation_suspected = translation_test(raster, &default_translation_candidates(raster));
    Ok(SymmetryReport {
        poly_group,
        julia_group_order: julia.order,
        julia_mismatch_rate: julia.mismatch_rate,
        julia_labels_consistent: julia.labels_consistent,
        line_residual,
        is_line: line_residual.map(|r| r < LINE_THRESHOLD),
        translation_suspected,
        exploratory: poly_group.trivial,
    })
}
