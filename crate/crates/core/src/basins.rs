//! Basin rasters, immediate basins, the Julia band and axis dynamics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixpoints::CriticalKind;
use crate::method::MethodBundle;
use crate::orbit::{run_orbit, InfinityPolicy, OrbitOutcome};
use crate::poly::{Polynomial, CLUSTER_TOL};

/// Label of a pixel whose orbit did not reach an attractor.
pub const NONCONV: i32 = -1;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-8;
/// Components of the Julia band smaller than this fraction of the grid are
/// treated as rasterization noise.
pub const NOISE_FRACTION: f64 = 1e-4;
/// Minimum size, as a fraction of the grid, of a border-touching Fatou
/// component reported by [`major_unbounded_components`].
pub const MAJOR_FRACTION: f64 = 0.01;
/// Imaginary parts below this count as real in the axis analyses.
const REAL_TOL: f64 = 1e-9;

/// Viewport with square pixels: `half_extent` is half the width, the
/// vertical half-extent follows from the aspect ratio. Row 0 is the top.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub center: Complex64,
    pub half_extent: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(center: Complex64, half_extent: f64, width: usize, height: usize) -> Result<Self> {
        if width < 16 || height < 16 {
            return Err(Error::InvalidInput(format!("grid must be at least 16x16, got {width}x{height}")));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidInput(format!("half extent must be positive, got {half_extent}")));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidInput(format!("center must be finite, got {center}")));
        }
        Ok(GridSpec { center, half_extent, width, height })
    }

    /// Centered at the centroid of `p` with half extent `2 (1 + max |root|)`.
    pub fn default_for(p: &Polynomial, width: usize, height: usize) -> Result<Self> {
        let center = crate::scaling::centroid(p)?;
        let rmax = p.roots()?.iter().map(|r| r.value.norm()).fold(0.0, f64::max);
        GridSpec::new(center, 2.0 * (1.0 + rmax), width, height)
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.half_extent / self.width as f64
    }

    pub fn half_height(&self) -> f64 {
        self.half_extent * self.height as f64 / self.width as f64
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let s = self.pixel_size();
        Complex64::new(
            self.center.re - self.half_extent + (col as f64 + 0.5) * s,
            self.center.im + self.half_height() - (row as f64 + 0.5) * s,
        )
    }

    /// Pixel containing `z`, if inside the viewport.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let s = self.pixel_size();
        let x = (z.re - (self.center.re - self.half_extent)) / s;
        let y = (self.center.im + self.half_height() - z.im) / s;
        if !(x >= 0.0 && y >= 0.0) {
            return None;
        }
        let (col, row) = (x.floor() as usize, y.floor() as usize);
        (col < self.width && row < self.height).then_some((col, row))
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn on_border(&self, idx: usize) -> bool {
        let (col, row) = (idx % self.width, idx / self.width);
        col == 0 || row == 0 || col + 1 == self.width || row + 1 == self.height
    }

    /// 4-neighbors of a pixel index.
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (col, row) = (idx % self.width, idx / self.width);
        let (w, h) = (self.width, self.height);
        [
            (col > 0).then(|| idx - 1),
            (col + 1 < w).then(|| idx + 1),
            (row > 0).then(|| idx - w),
            (row + 1 < h).then(|| idx + w),
        ]
        .into_iter()
        .flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasinRaster {
    pub grid: GridSpec,
    /// Attractor index per pixel, or [`NONCONV`].
    pub labels: Vec<i32>,
    /// Map applications before the orbit came within `tol`.
    pub iters: Vec<u32>,
    pub attractors: Vec<Complex64>,
    pub max_iter: usize,
    pub tol: f64,
}

impl BasinRaster {
    pub fn label_at(&self, z: Complex64) -> Option<i32> {
        self.grid
            .pixel_of(z)
            .map(|(c, r)| self.labels[self.grid.index(c, r)])
    }

    pub fn nonconv_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&l| l == NONCONV).count() as f64 / self.labels.len() as f64
    }
}

/// Labels every pixel by the attractor its orbit reaches. Rows are computed
/// in parallel and written by position, so the result does not depend on
/// scheduling. `threads` selects a dedicated pool size; `None` uses the
/// global pool.
pub fn compute_basins(
    bundle: &MethodBundle,
    attractors: &[Complex64],
    grid: GridSpec,
    max_iter: usize,
    tol: f64,
    threads: Option<usize>,
) -> Result<BasinRaster> {
    if attractors.is_empty() {
        return Err(Error::InvalidInput("at least one attractor is required".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let mut labels = vec![NONCONV; grid.len()];
    let mut iters = vec![max_iter as u32; grid.len()];
    let fill = |labels: &mut [i32], iters: &mut [u32]| {
        labels
            .par_chunks_mut(grid.width)
            .zip(iters.par_chunks_mut(grid.width))
            .enumerate()
            .for_each(|(row, (lrow, irow))| {
                for col in 0..grid.width {
                    let z0 = grid.pixel_center(col, row);
                    let outcome =
                        run_orbit(&bundle.map, z0, attractors, max_iter, tol, InfinityPolicy::Restart, None);
                    if let OrbitOutcome::Converged { attractor, steps } = outcome {
                        lrow[col] = attractor as i32;
                        irow[col] = steps as u32;
                    }
                }
            });
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
            pool.install(|| fill(&mut labels, &mut iters));
        }
        None => fill(&mut labels, &mut iters),
    }
    Ok(BasinRaster {
        grid,
        labels,
        iters,
        attractors: attractors.to_vec(),
        max_iter,
        tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImmediateBasin {
    pub attractor: usize,
    /// Pixel indices, in flood-fill order.
    #[serde(skip)]
    pub pixels: Vec<usize>,
    pub pixel_count: usize,
    pub unbounded: bool,
}

/// Flood fill (4-connected) of same-label pixels from `seed`.
fn flood(raster: &BasinRaster, seed: usize, seen: &mut [bool]) -> (Vec<usize>, bool) {
    let label = raster.labels[seed];
    let mut stack = vec![seed];
    let mut out = Vec::new();
    let mut touches = false;
    seen[seed] = true;
    while let Some(i) = stack.pop() {
        out.push(i);
        touches |= raster.grid.on_border(i);
        for n in raster.grid.neighbors4(i) {
            if !seen[n] && raster.labels[n] == label {
                seen[n] = true;
                stack.push(n);
            }
        }
    }
    (out, touches)
}

/// Component of each attractor's basin containing the attractor; unbounded
/// when it reaches the raster border.
pub fn immediate_basins(raster: &BasinRaster) -> Result<Vec<ImmediateBasin>> {
    let g = &raster.grid;
    raster
        .attractors
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let (col, row) = g
                .pixel_of(a)
                .ok_or_else(|| Error::InvalidInput(format!("attractor {a} lies outside the grid")))?;
            let seed = g.index(col, row);
            if raster.labels[seed] != i as i32 {
                return Err(Error::Numeric(format!(
                    "pixel of attractor {a} is labeled {} instead of {i}",
                    raster.labels[seed]
                )));
            }
            let mut seen = vec![false; g.len()];
            let (pixels, unbounded) = flood(raster, seed, &mut seen);
            Ok(ImmediateBasin {
                attractor: i,
                pixel_count: pixels.len(),
                pixels,
                unbounded,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FatouComponent {
    pub label: i32,
    pub pixel_count: usize,
    pub unbounded: bool,
}

/// All 4-connected same-label components of converged pixels at least
/// [`NOISE_FRACTION`] of the grid in size.
pub fn fatou_components(raster: &BasinRaster) -> Vec<FatouComponent> {
    let g = &raster.grid;
    let min = noise_threshold(g);
    let mut seen = vec![false; g.len()];
    let mut out = Vec::new();
    for i in 0..g.len() {
        if seen[i] || raster.labels[i] == NONCONV {
            continue;
        }
        let (pixels, unbounded) = flood(raster, i, &mut seen);
        if pixels.len() >= min {
            out.push(FatouComponent {
                label: raster.labels[i],
                pixel_count: pixels.len(),
                unbounded,
            });
        }
    }
    out
}

/// Border-touching Fatou components covering at least [`MAJOR_FRACTION`] of
/// the grid. The frame also cuts through bounded components near the edge;
/// those are orders of magnitude smaller than the genuinely unbounded ones.
pub fn major_unbounded_components(raster: &BasinRaster) -> Vec<FatouComponent> {
    let min = (MAJOR_FRACTION * raster.grid.len() as f64).ceil() as usize;
    fatou_components(raster)
        .into_iter()
        .filter(|c| c.unbounded && c.pixel_count >= min)
        .collect()
}

fn noise_threshold(g: &GridSpec) -> usize {
    ((NOISE_FRACTION * g.len() as f64).ceil() as usize).max(1)
}

/// Non-converged pixels together with pixels that have a 4-neighbor of a
/// different label.
pub fn julia_band(raster: &BasinRaster) -> Vec<bool> {
    let g = &raster.grid;
    (0..g.len())
        .map(|i| {
            let l = raster.labels[i];
            l == NONCONV || g.neighbors4(i).any(|n| raster.labels[n] != l)
        })
        .collect()
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskComponent {
    pub pixel_count: usize,
    pub unbounded: bool,
    #[serde(skip)]
    pub root: usize,
}

/// 8-connected components of `mask` at least `min_size` pixels large,
/// largest first, together with the component representative of every
/// pixel (`usize::MAX` outside the mask).
///
/// With `join_at_infinity` every border-touching pixel is also linked to a
/// virtual point at infinity, so all unbounded pieces form one component.
/// Infinity is a repelling fixed point and belongs to the Julia set, so on
/// the sphere these pieces do meet.
pub fn mask_components(
    grid: &GridSpec,
    mask: &[bool],
    min_size: usize,
    join_at_infinity: bool,
) -> (Vec<MaskComponent>, Vec<usize>) {
    let (w, h) = (grid.width, grid.height);
    let infinity = mask.len();
    let mut ds = DisjointSet::new(mask.len() + 1);
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            if !mask[i] {
                continue;
            }
            // previously visited neighbors: W, NW, N, NE
            if join_at_infinity && grid.on_border(i) {
                ds.union(i, infinity);
            }
            if col > 0 && mask[i - 1] {
                ds.union(i, i - 1);
            }
            if row > 0 {
                let up = i - w;
                if mask[up] {
                    ds.union(i, up);
                }
                if col > 0 && mask[up - 1] {
                    ds.union(i, up - 1);
                }
                if col + 1 < w && mask[up + 1] {
                    ds.union(i, up + 1);
                }
            }
        }
    }
    let mut owner = vec![usize::MAX; mask.len()];
    let mut border = vec![false; mask.len() + 1];
    for i in 0..mask.len() {
        if mask[i] {
            let r = ds.find(i);
            owner[i] = r;
            border[r] |= grid.on_border(i);
        }
    }
    let inf_root = ds.find(infinity);
    let mut comps: Vec<MaskComponent> = (0..=mask.len())
        .filter(|&i| ds.parent[i] == i && (i == infinity || mask[i]))
        .map(|i| {
            // the virtual node is not a pixel
            let pixels = ds.size[i] - usize::from(i == inf_root);
            MaskComponent { pixel_count: pixels, unbounded: border[i], root: i }
        })
        .filter(|c| c.pixel_count >= min_size)
        .collect();
    comps.sort_by(|a, b| b.pixel_count.cmp(&a.pixel_count).then(a.root.cmp(&b.root)));
    (comps, owner)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectivityReport {
    /// Components of the Julia band above the noise threshold.
    pub julia_component_count: usize,
    pub unbounded_component_exists: bool,
    /// Every pole inside the grid has a pixel of the largest unbounded
    /// component in its 3x3 neighborhood.
    pub poles_in_unbounded: bool,
    pub immediate_basins_unbounded: Vec<bool>,
    pub noise_threshold_pixels: usize,
    /// `[width, height]` of the raster the verdict was computed at.
    pub resolution: [usize; 2],
}

impl ConnectivityReport {
    pub fn connected(&self) -> bool {
        self.julia_component_count == 1 && self.unbounded_component_exists && self.poles_in_unbounded
    }
}

/// Raster evidence for a connected Julia set containing all poles. This is
/// limited by resolution: thin bridges narrower than a pixel split
/// components.
pub fn connectivity(raster: &BasinRaster, poles: &[Complex64]) -> Result<ConnectivityReport> {
    let g = &raster.grid;
    let band = julia_band(raster);
    if !band.iter().any(|&b| b) {
        return Err(Error::Numeric("the Julia band is empty".into()));
    }
    let min = noise_threshold(g);
    let (comps, owner) = mask_components(g, &band, min, true);
    let unbounded = comps.iter().find(|c| c.unbounded);
    let poles_in_unbounded = match unbounded {
        None => false,
        Some(u) => poles.iter().all(|&pole| match g.pixel_of(pole) {
            None => true,
            Some((col, row)) => window3(g, col, row).any(|i| owner[i] == u.root),
        }),
    };
    let immediate = immediate_basins(raster)?.iter().map(|b| b.unbounded).collect();
    Ok(ConnectivityReport {
        julia_component_count: comps.len(),
        unbounded_component_exists: unbounded.is_some(),
        poles_in_unbounded,
        immediate_basins_unbounded: immediate,
        noise_threshold_pixels: min,
        resolution: [g.width, g.height],
    })
}

/// Indices of the 3x3 neighborhood of a pixel, clipped to the grid.
pub fn window3(g: &GridSpec, col: usize, row: usize) -> impl Iterator<Item = usize> + '_ {
    let cols = col.saturating_sub(1)..=(col + 1).min(g.width - 1);
    let rows = row.saturating_sub(1)..=(row + 1).min(g.height - 1);
    rows.flat_map(move |r| cols.clone().map(move |c| g.index(c, r)))
}

/// Real-valued orbit from `x0`, iterated with the complex map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisOrbit {
    pub start: f64,
    pub outcome: OrbitOutcome,
    /// Attractor the orbit converged to.
    pub limit: Option<Complex64>,
    /// The orbit never left the axis (imaginary or real part below 1e-9
    /// relative to the modulus).
    pub stays_on_axis: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealLineReport {
    pub interval: [f64; 2],
    /// `Some(true)` when `F(x) > x` at every sample, `Some(false)` when
    /// `F(x) < x` at every sample, `None` when the sign changes.
    pub map_above_identity: Option<bool>,
    pub derivative_positive: bool,
    /// Monotone map on an interval it moves in a single direction.
    pub monotone_hypotheses_hold: bool,
    pub orbits: Vec<AxisOrbit>,
    /// Common limit of all orbits, when they agree.
    pub limit: Option<Complex64>,
}

fn real_points(roots: &[crate::poly::Root]) -> Vec<f64> {
    roots
        .iter()
        .filter(|r| r.value.im.abs() < REAL_TOL * (1.0 + r.value.norm()))
        .map(|r| r.value.re)
        .collect()
}

fn follow_axis(
    bundle: &MethodBundle,
    z0: Complex64,
    attractors: &[Complex64],
    max_iter: usize,
    tol: f64,
    imaginary: bool,
) -> (OrbitOutcome, bool) {
    let mut trace = Vec::new();
    let outcome = run_orbit(&bundle.map, z0, attractors, max_iter, tol, InfinityPolicy::Stop, Some(&mut trace));
    let on_axis = trace.iter().all(|z| {
        let off = if imaginary { z.re } else { z.im };
        off.abs() <= REAL_TOL * (1.0 + z.norm())
    });
    (outcome, on_axis)
}

fn limit_of(outcome: OrbitOutcome, attractors: &[Complex64]) -> Option<Complex64> {
    match outcome {
        OrbitOutcome::Converged { attractor, .. } => Some(attractors[attractor]),
        _ => None,
    }
}

fn common_limit(orbits: &[AxisOrbit]) -> Option<Complex64> {
    let first = orbits.first()?.limit?;
    orbits.iter().all(|o| o.limit == Some(first)).then_some(first)
}

fn linspace(lo: f64, hi: f64, n: usize, open: bool) -> Vec<f64> {
    match (n, open) {
        (0, _) => Vec::new(),
        (1, false) => vec![lo],
        (_, false) => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        (_, true) => (0..n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64).collect(),
    }
}

/// Sign of `F(x) - x` and `F'(x)` at `samples` interior points of
/// `[lo, hi]`, and the limits of `orbits` real orbits started on a uniform
/// grid of the closed interval.
#[allow(clippy::too_many_arguments)]
pub fn real_line_analysis(
    bundle: &MethodBundle,
    lo: f64,
    hi: f64,
    samples: usize,
    orbits: usize,
    attractors: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Result<RealLineReport> {
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    for x in real_points(&bundle.map.poles()?) {
        if x >= lo && x <= hi {
            return Err(Error::InvalidInput(format!("pole at x = {x} lies in [{lo}, {hi}]")));
        }
    }
    let mut above = 0;
    let mut below = 0;
    let mut derivative_positive = true;
    for x in linspace(lo, hi, samples, true) {
        let z = Complex64::new(x, 0.0);
        let fx = bundle.map.eval_finite(z).ok_or(Error::Pole { at: z })?;
        if fx.re > x {
            above += 1;
        } else if fx.re < x {
            below += 1;
        }
        let dfx = bundle.deriv_at(z)?.finite().ok_or(Error::Pole { at: z })?;
        derivative_positive &= dfx.re > 0.0;
    }
    let map_above_identity = match (above, below) {
        (a, 0) if a > 0 => Some(true),
        (0, b) if b > 0 => Some(false),
        _ => None,
    };
    let orbits: Vec<AxisOrbit> = linspace(lo, hi, orbits, false)
        .into_iter()
        .map(|x| {
            let (outcome, stays_on_axis) =
                follow_axis(bundle, Complex64::new(x, 0.0), attractors, max_iter, tol, false);
            AxisOrbit { start: x, outcome, limit: limit_of(outcome, attractors), stays_on_axis }
        })
        .collect();
    Ok(RealLineReport {
        interval: [lo, hi],
        map_above_identity,
        derivative_positive,
        monotone_hypotheses_hold: derivative_positive && map_above_identity.is_some(),
        limit: common_limit(&orbits),
        orbits,
    })
}

/// Distinguished real points of a map with real coefficients, each sorted
/// ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealLandmarks {
    /// Real zeros of the map.
    pub zeros: Vec<f64>,
    /// Real extraneous fixed points.
    pub extraneous: Vec<f64>,
    /// Real free critical points (not roots of `p`, not poles).
    pub free_critical: Vec<f64>,
    /// Map values at the free critical points, same order.
    pub critical_values: Vec<f64>,
    pub poles: Vec<f64>,
}

pub fn real_landmarks(bundle: &MethodBundle) -> Result<RealLandmarks> {
    let sorted = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v
    };
    let num = bundle.map.num();
    let zeros = if num.deg() == 0 { Vec::new() } else { real_points(&num.roots()?) };
    let extraneous = real_points(&crate::fixpoints::extraneous_points(&bundle.p)?);
    let free_critical = sorted(
        crate::fixpoints::critical_points(bundle)?
            .into_iter()
            .filter(|c| c.kind == CriticalKind::Free && c.point.im.abs() < REAL_TOL * (1.0 + c.point.norm()))
            .map(|c| c.point.re)
            .collect(),
    );
    let critical_values = free_critical
        .iter()
        .map(|&x| {
            let z = Complex64::new(x, 0.0);
            bundle.map.eval_finite(z).map(|v| v.re).ok_or(Error::Pole { at: z })
        })
        .collect::<Result<_>>()?;
    Ok(RealLandmarks {
        zeros: sorted(zeros),
        extraneous: sorted(extraneous),
        free_critical,
        critical_values,
        poles: sorted(real_points(&bundle.map.poles()?)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImaginaryAxisReport {
    pub interval: [f64; 2],
    pub orbits: Vec<AxisOrbit>,
    pub limit: Option<Complex64>,
}

/// Checks `F(-conj z) = -conj F(z)` at sample points, which makes the
/// imaginary axis invariant.
pub fn preserves_imaginary_axis(bundle: &MethodBundle) -> bool {
    let samples = [
        Complex64::new(0.37, 0.81),
        Complex64::new(-1.3, 0.22),
        Complex64::new(0.05, -2.4),
        Complex64::new(2.2, 1.7),
        Complex64::new(-0.6, -0.45),
    ];
    samples.iter().all(|&z| {
        let mirrored = -z.conj();
        match (bundle.map.eval_finite(z), bundle.map.eval_finite(mirrored)) {
            (Some(a), Some(b)) => (b + a.conj()).norm() <= 1e-10 * (1.0 + a.norm()),
            _ => true,
        }
    })
}

/// Orbits of `orbits` points `i y`, `y` uniform on `[y_lo, y_hi]`.
pub fn imaginary_axis_analysis(
    bundle: &MethodBundle,
    y_lo: f64,
    y_hi: f64,
    orbits: usize,
    attractors: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Result<ImaginaryAxisReport> {
    if !preserves_imaginary_axis(bundle) {
        return Err(Error::InvalidInput(
            "the map does not commute with z -> -conj(z), so the imaginary axis is not invariant".into(),
        ));
    }
    let orbits: Vec<AxisOrbit> = linspace(y_lo, y_hi, orbits, false)
        .into_iter()
        .map(|y| {
            let (outcome, stays_on_axis) =
                follow_axis(bundle, Complex64::new(0.0, y), attractors, max_iter, tol, true);
            AxisOrbit { start: y, outcome, limit: limit_of(outcome, attractors), stays_on_axis }
        })
        .collect();
    Ok(ImaginaryAxisReport { interval: [y_lo, y_hi], limit: common_limit(&orbits), orbits })
}

/// Attractors of `bundle` in table order (finite attracting fixed points).
pub fn default_attractors(bundle: &MethodBundle) -> Result<Vec<Complex64>> {
    Ok(crate::fixpoints::attractors(&crate::fixpoints::fixed_points(bundle)?))
}

/// Index of the attractor nearest `z` within the clustering tolerance.
pub fn attractor_index(attractors: &[Complex64], z: Complex64) -> Option<usize> {
    attractors
        .iter()
        .position(|a| (a - z).norm() < CLUSTER_TOL * (1.0 + z.norm()))
}
