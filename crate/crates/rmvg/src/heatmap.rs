//! PNG rendering of a manifold grid.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};

const CELL: u32 = 24;

/// Dark blue through teal to yellow.
const RAMP: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn color(t: f64) -> Rgb<u8> {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (RAMP.len() - 1) as f64;
    let i = (pos as usize).min(RAMP.len() - 2);
    let f = pos - i as f64;
    let mix = |c: usize| (RAMP[i][c] + (RAMP[i + 1][c] - RAMP[i][c]) * f).round() as u8;
    Rgb([mix(0), mix(1), mix(2)])
}

/// Renders a row-major `rows x cols` grid with the first row at the bottom.
pub fn render(values: &[f64], rows: usize, cols: usize) -> RgbImage {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut img = RgbImage::new(cols as u32 * CELL, rows as u32 * CELL);
    for (px, py, pixel) in img.enumerate_pixels_mut() {
        let k = rows - 1 - (py / CELL) as usize;
        let j = (px / CELL) as usize;
        *pixel = color((values[k * cols + j] - lo) / span);
    }
    img
}

pub fn write(path: &Path, values: &[f64], rows: usize, cols: usize) -> Result<()> {
    render(values, rows, cols)
        .save(path)
        .map_err(|source| Error::Image { path: path.to_path_buf(), source })
}
