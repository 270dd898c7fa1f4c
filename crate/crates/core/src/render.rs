//! Binary PPM output of basin rasters.

use rayon::prelude::*;
use serde::Serialize;

use crate::basins::{BasinRaster, NONCONV};
use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shading {
    None,
    /// Darken pixels by how many iterations they took.
    Iteration,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Palette {
    pub basin_colors: Vec<Rgb>,
    pub nonconv_color: Rgb,
    pub shading: Shading,
}

/// `round(x)` with ties away from zero, for non-negative `x`.
fn round_half_up(x: f64) -> u8 {
    (x + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Sector-formula HSV to RGB; `h` in degrees, `s`, `v` in `[0, 1]`.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> Rgb {
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [
        round_half_up((r + m) * 255.0),
        round_half_up((g + m) * 255.0),
        round_half_up((b + m) * 255.0),
    ]
}

/// `k` evenly spaced hues at saturation 0.9 and value 0.95, black for
/// non-converged pixels, no shading.
pub fn default_palette(k: usize) -> Result<Palette> {
    if k == 0 {
        return Err(Error::InvalidInput("palette needs at least one color".into()));
    }
    Ok(Palette {
        basin_colors: (0..k).map(|i| hsv_to_rgb(360.0 * i as f64 / k as f64, 0.9, 0.95)).collect(),
        nonconv_color: [0, 0, 0],
        shading: Shading::None,
    })
}

pub fn ppm_header(width: usize, height: usize) -> Vec<u8> {
    format!("P6\n{width} {height}\n255\n").into_bytes()
}

fn shade(c: Rgb, iters: u32, max_iter: usize) -> Rgb {
    let t = if max_iter == 0 { 1.0 } else { (iters as f64 / max_iter as f64).min(1.0) };
    let s = 0.55 + 0.45 * (1.0 - t);
    c.map(|ch| round_half_up(ch as f64 * s))
}

/// Row-major, top row first.
pub fn render_ppm(raster: &BasinRaster, palette: &Palette) -> Result<Vec<u8>> {
    let needed = raster.labels.iter().copied().max().unwrap_or(NONCONV) + 1;
    if (palette.basin_colors.len() as i32) < needed.max(raster.attractors.len() as i32) {
        return Err(Error::InvalidInput(format!(
            "palette has {} colors but the raster has {} attractors",
            palette.basin_colors.len(),
            raster.attractors.len()
        )));
    }
    let (w, h) = (raster.grid.width, raster.grid.height);
    let mut out = ppm_header(w, h);
    let header_len = out.len();
    out.resize(header_len + 3 * w * h, 0);
    out[header_len..]
        .par_chunks_mut(3 * w)
        .enumerate()
        .for_each(|(row, bytes)| {
            for col in 0..w {
                let i = row * w + col;
                let l = raster.labels[i];
                let base = if l == NONCONV { palette.nonconv_color } else { palette.basin_colors[l as usize] };
                let c = match palette.shading {
                    Shading::None => base,
                    Shading::Iteration => shade(base, raster.iters[i], raster.max_iter),
                };
                bytes[3 * col..3 * col + 3].copy_from_slice(&c);
            }
        });
    Ok(out)
}

/// A decoded P6 image with maxval 255.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl PpmImage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = ppm_header(self.width, self.height);
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Parses a binary P6 image with maxval 255 (whitespace-separated header,
/// `#` comments allowed).
pub fn parse_ppm(bytes: &[u8]) -> Result<PpmImage> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse { pos, msg: "truncated PPM header".into() });
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let bad = |msg: &str| Error::Parse { pos: 0, msg: msg.into() };
    if token()? != "P6" {
        return Err(bad("not a binary PPM (P6)"));
    }
    let width: usize = token()?.parse().map_err(|_| bad("bad width"))?;
    let height: usize = token()?.parse().map_err(|_| bad("bad height"))?;
    if token()? != "255" {
        return Err(bad("only maxval 255 is supported"));
    }
    let start = pos + 1;
    let pixels = bytes
        .get(start..start + 3 * width * height)
        .ok_or_else(|| bad("pixel data is truncated"))?
        .to_vec();
    Ok(PpmImage { width, height, pixels })
}
