//! Canny edge detection on grayscale images.
//!
//! Pipeline: Gaussian smoothing, Sobel gradients, non-maximum suppression
//! along the quantized gradient direction, then double-threshold
//! hysteresis. The single-threshold stage [`threshold`] is available on its
//! own. Images are row-major with `u` the column and `v` the row.

use std::collections::VecDeque;
use std::f64::consts::PI;

use thiserror::Error;

use crate::par::{self, Parallelism};

#[derive(Debug, Error, PartialEq)]
pub enum VisionError {
    #[error("image is {width}x{height}; at least 3x3 is required")]
    ImageTooSmall { width: usize, height: usize },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("malformed PGM: {0}")]
    Pgm(String),
}

/// A rectangular grid of reals, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                data.push(f(u, v));
            }
        }
        Self { width, height, data }
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: f64) {
        self.data[v * self.width + u] = value;
    }

    /// Value at a possibly out-of-range position, replicating the border.
    pub fn clamped(&self, u: isize, v: isize) -> f64 {
        let u = u.clamp(0, self.width as isize - 1) as usize;
        let v = v.clamp(0, self.height as isize - 1) as usize;
        self.get(u, v)
    }

    /// Value at a possibly out-of-range position, zero outside.
    fn or_zero(&self, u: isize, v: isize) -> f64 {
        if u < 0 || v < 0 || u >= self.width as isize || v >= self.height as isize {
            0.0
        } else {
            self.get(u as usize, v as usize)
        }
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Rotates a quarter turn counterclockwise as displayed (rows down).
    pub fn rotate90(&self) -> Self {
        Grid::from_fn(self.height, self.width, |u, v| self.get(self.width - 1 - v, u))
    }

    fn from_rows(width: usize, height: usize, rows: Vec<Vec<f64>>) -> Self {
        Self {
            width,
            height,
            data: rows.into_iter().flatten().collect(),
        }
    }
}

/// 8-bit grayscale image stored as reals in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage(Grid);

impl GrayImage {
    pub fn new(grid: Grid) -> Result<Self, VisionError> {
        if grid.width == 0 || grid.height == 0 {
            return Err(VisionError::InvalidImage("empty image".into()));
        }
        if grid.data.len() != grid.width * grid.height {
            return Err(VisionError::InvalidImage("pixel count does not match dimensions".into()));
        }
        if grid.data.iter().any(|p| !(0.0..=255.0).contains(p)) {
            return Err(VisionError::InvalidImage("intensity outside [0, 255]".into()));
        }
        Ok(Self(grid))
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self, VisionError> {
        Self::new(Grid::from_fn(width, height, f))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.0.get(u, v)
    }

    pub fn rotate90(&self) -> Self {
        Self(self.0.rotate90())
    }

    /// Linearly maps `[0, max]` of a non-negative grid onto `[0, 255]`.
    /// An all-zero grid stays black.
    pub fn rescaled(grid: &Grid) -> Self {
        let max = grid.max();
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        Self(Grid {
            width: grid.width,
            height: grid.height,
            data: grid.data.iter().map(|m| (m.max(0.0) * scale).min(255.0)).collect(),
        })
    }

    /// Maps directions in `(-π, π]` onto `[0, 255]`.
    pub fn from_directions(grid: &Grid) -> Self {
        Self(Grid {
            width: grid.width,
            height: grid.height,
            data: grid.data.iter().map(|t| ((t + PI) / (2.0 * PI) * 255.0).clamp(0.0, 255.0)).collect(),
        })
    }

    /// Binary P5 encoding with max value 255; intensities are rounded.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width(), self.height()).into_bytes();
        out.extend(self.0.data.iter().map(|p| p.round() as u8));
        out
    }

    /// Parses P2 (ASCII) or P5 (binary) graymaps; `#` comments are skipped.
    /// Samples are rescaled to `[0, 255]` when the max value is smaller.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self, VisionError> {
        let mut pos = 0;
        let magic = header_token(bytes, &mut pos)?;
        let binary = match magic.as_str() {
            "P5" => true,
            "P2" => false,
            other => return Err(VisionError::Pgm(format!("unsupported magic number `{other}`"))),
        };
        let mut number = |what: &str| -> Result<usize, VisionError> {
            let tok = header_token(bytes, &mut pos)?;
            tok.parse()
                .map_err(|_| VisionError::Pgm(format!("bad {what} `{tok}`")))
        };
        let width = number("width")?;
        let height = number("height")?;
        let maxval = number("max value")?;
        if !(1..=255).contains(&maxval) {
            return Err(VisionError::Pgm(format!("max value {maxval} outside 1..=255")));
        }
        if width == 0 || height == 0 {
            return Err(VisionError::Pgm("zero dimension".into()));
        }
        let count = width * height;
        let raw: Vec<usize> = if binary {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            let body = bytes
                .get(start..start + count)
                .ok_or_else(|| VisionError::Pgm(format!("expected {count} raster bytes")))?;
            body.iter().map(|&b| b as usize).collect()
        } else {
            let mut vals = Vec::with_capacity(count);
            for _ in 0..count {
                let tok = header_token(bytes, &mut pos)?;
                vals.push(tok.parse().map_err(|_| VisionError::Pgm(format!("bad sample `{tok}`")))?);
            }
            vals
        };
        if let Some(bad) = raw.iter().find(|&&s| s > maxval) {
            return Err(VisionError::Pgm(format!("sample {bad} exceeds max value {maxval}")));
        }
        let scale = 255.0 / maxval as f64;
        Self::new(Grid {
            width,
            height,
            data: raw.into_iter().map(|s| s as f64 * scale).collect(),
        })
    }
}

fn header_token(bytes: &[u8], pos: &mut usize) -> Result<String, VisionError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(VisionError::Pgm("unexpected end of file".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

/// Square Gaussian kernel of side `2·radius + 1`, normalized to sum 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub radius: usize,
    /// Row-major weights.
    pub weights: Vec<f64>,
}

impl Kernel {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn at(&self, du: isize, dv: isize) -> f64 {
        let r = self.radius as isize;
        self.weights[((dv + r) * (2 * r + 1) + du + r) as usize]
    }
}

pub fn gaussian_kernel(sigma: f64, radius: usize) -> Kernel {
    debug_assert!(sigma > 0.0);
    let r = radius as isize;
    let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
    for v in -r..=r {
        for u in -r..=r {
            weights.push((-((u * u + v * v) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    Kernel { radius, weights }
}

/// Default kernel radius ⌈3σ⌉.
pub fn default_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

fn convolve(grid: &Grid, kernel: &Kernel, mode: Parallelism) -> Grid {
    let r = kernel.radius as isize;
    let rows = par::map_range(mode, grid.height, |v| {
        (0..grid.width)
            .map(|u| {
                let mut acc = 0.0;
                for dv in -r..=r {
                    for du in -r..=r {
                        acc += kernel.at(du, dv) * grid.clamped(u as isize - du, v as isize - dv);
                    }
                }
                acc
            })
            .collect()
    });
    Grid::from_rows(grid.width, grid.height, rows)
}

/// Gaussian blur with replicated borders.
pub fn smooth(img: &GrayImage, sigma: f64, mode: Parallelism) -> GrayImage {
    let kernel = gaussian_kernel(sigma, default_radius(sigma));
    let mut out = convolve(img.grid(), &kernel, mode);
    // a convex combination can only leave the range by rounding
    let (lo, hi) = img.grid().data.iter().fold((f64::MAX, f64::MIN), |(a, b), &p| (a.min(p), b.max(p)));
    out.data.iter_mut().for_each(|p| *p = p.clamp(lo, hi));
    GrayImage(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub magnitude: Grid,
    /// Direction `atan2(g_v, g_u)` in `(-π, π]`.
    pub direction: Grid,
}

/// Sobel derivatives with replicated borders.
pub fn gradients(img: &GrayImage, mode: Parallelism) -> Result<GradientField, VisionError> {
    let g = img.grid();
    if g.width < 3 || g.height < 3 {
        return Err(VisionError::ImageTooSmall {
            width: g.width,
            height: g.height,
        });
    }
    let rows = par::map_range(mode, g.height, |v| {
        let v = v as isize;
        (0..g.width as isize)
            .map(|u| {
                let p = |du: isize, dv: isize| g.clamped(u + du, v + dv);
                let gu = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
                let gv = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
                (gu.hypot(gv), gv.atan2(gu))
            })
            .collect::<Vec<_>>()
    });
    let (mut mag, mut dir) = (Vec::new(), Vec::new());
    for row in rows {
        for (m, t) in row {
            mag.push(m);
            // atan2 returns -π for (-0, -x); fold it into (-π, π]
            dir.push(if t <= -PI { PI } else { t });
        }
    }
    Ok(GradientField {
        magnitude: Grid {
            width: g.width,
            height: g.height,
            data: mag,
        },
        direction: Grid {
            width: g.width,
            height: g.height,
            data: dir,
        },
    })
}

/// Keeps magnitudes strictly above `t`.
pub fn threshold(field: &GradientField, t: f64) -> Grid {
    let m = &field.magnitude;
    Grid {
        width: m.width,
        height: m.height,
        data: m.data.iter().map(|&x| if x > t { x } else { 0.0 }).collect(),
    }
}

/// Unit step toward the neighbor ahead along the gradient. The axis is
/// quantized to 0°, 45°, 90° or 135°; the sign follows the gradient.
pub fn direction_offset(theta: f64) -> (isize, isize) {
    const STEPS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
    let bin = (theta / (PI / 4.0)).round().rem_euclid(8.0) as usize;
    STEPS[bin % 8]
}

/// Magnitudes that count as equal when breaking ties.
fn tie_slack(m: f64) -> f64 {
    1e-9 * (1.0 + m)
}

/// Thins ridges to one pixel: a pixel survives when its magnitude is at
/// least the neighbor behind it along the gradient and strictly above the
/// neighbor ahead (neighbors outside the image count as zero). Breaking
/// exact ties toward the gradient direction keeps one pixel of a
/// symmetric two-pixel ridge.
pub fn non_max_suppression(field: &GradientField, mode: Parallelism) -> Grid {
    let m = &field.magnitude;
    let rows = par::map_range(mode, m.height, |v| {
        (0..m.width)
            .map(|u| {
                let here = m.get(u, v);
                if here <= 0.0 {
                    return 0.0;
                }
                let (du, dv) = direction_offset(field.direction.get(u, v));
                let (u, v) = (u as isize, v as isize);
                let ahead = m.or_zero(u + du, v + dv);
                let behind = m.or_zero(u - du, v - dv);
                let slack = tie_slack(here);
                if here >= behind - slack && here > ahead + slack {
                    here
                } else {
                    0.0
                }
            })
            .collect()
    });
    Grid::from_rows(m.width, m.height, rows)
}

pub const EDGE: f64 = 255.0;

/// Strong pixels (≥ `t_high`) seed the edge map; positive pixels at or
/// above `t_low` join when 8-connected to it. Output is 0 or 255.
pub fn hysteresis(thinned: &Grid, t_low: f64, t_high: f64) -> GrayImage {
    debug_assert!(0.0 <= t_low && t_low <= t_high);
    let (w, h) = (thinned.width, thinned.height);
    let candidate = |i: usize| thinned.data[i] > 0.0 && thinned.data[i] >= t_low;
    let mut out = Grid::zeros(w, h);
    let mut queue: VecDeque<usize> = VecDeque::new();
    for i in 0..w * h {
        if thinned.data[i] > 0.0 && thinned.data[i] >= t_high {
            out.data[i] = EDGE;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (u, v) = ((i % w) as isize, (i / w) as isize);
        for dv in -1..=1 {
            for du in -1..=1 {
                let (nu, nv) = (u + du, v + dv);
                if nu < 0 || nv < 0 || nu >= w as isize || nv >= h as isize {
                    continue;
                }
                let j = nv as usize * w + nu as usize;
                if out.data[j] == 0.0 && candidate(j) {
                    out.data[j] = EDGE;
                    queue.push_back(j);
                }
            }
        }
    }
    GrayImage(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    /// Defaults to half of the high threshold.
    pub t_low: Option<f64>,
    /// Defaults to 0.2 of the largest gradient magnitude.
    pub t_high: Option<f64>,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            t_low: None,
            t_high: None,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<(), VisionError> {
        let bad = |m: &str| Err(VisionError::InvalidImage(m.into()));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        if [self.t_low, self.t_high].iter().flatten().any(|t| t.is_nan() || *t < 0.0) {
            return bad("thresholds must be non-negative");
        }
        if let (Some(lo), Some(hi)) = (self.t_low, self.t_high) {
            if lo > hi {
                return bad("t_low exceeds t_high");
            }
        }
        Ok(())
    }
}

/// Every intermediate result of one pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct CannyStages {
    pub smoothed: GrayImage,
    pub field: GradientField,
    pub thinned: Grid,
    pub t_low: f64,
    pub t_high: f64,
    pub edges: GrayImage,
}

pub fn canny_stages(img: &GrayImage, params: &CannyParams, mode: Parallelism) -> Result<CannyStages, VisionError> {
    params.validate()?;
    let smoothed = smooth(img, params.sigma, mode);
    let field = gradients(&smoothed, mode)?;
    let thinned = non_max_suppression(&field, mode);
    let t_high = params.t_high.unwrap_or(0.2 * field.magnitude.max());
    let t_low = params.t_low.unwrap_or(0.5 * t_high).min(t_high);
    let edges = hysteresis(&thinned, t_low, t_high);
    Ok(CannyStages {
        smoothed,
        field,
        thinned,
        t_low,
        t_high,
        edges,
    })
}

pub fn canny(img: &GrayImage, params: &CannyParams, mode: Parallelism) -> Result<GrayImage, VisionError> {
    canny_stages(img, params, mode).map(|s| s.edges)
}

/// Synthetic test images.
pub mod fixtures {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::GrayImage;

    pub fn constant(width: usize, height: usize, value: f64) -> GrayImage {
        GrayImage::from_fn(width, height, |_, _| value).expect("valid fixture")
    }

    /// Left half 0, right half `high`.
    pub fn vertical_step(width: usize, height: usize, high: f64) -> GrayImage {
        GrayImage::from_fn(width, height, |u, _| if u >= width / 2 { high } else { 0.0 }).expect("valid fixture")
    }

    /// Top half 0, bottom half `high`.
    pub fn horizontal_step(width: usize, height: usize, high: f64) -> GrayImage {
        GrayImage::from_fn(width, height, |_, v| if v >= height / 2 { high } else { 0.0 }).expect("valid fixture")
    }

    /// A centered white `side`×`side` square on a black `size`×`size` field.
    pub fn square(size: usize, side: usize) -> GrayImage {
        let lo = (size - side) / 2;
        let hi = lo + side;
        GrayImage::from_fn(size, size, |u, v| {
            if (lo..hi).contains(&u) && (lo..hi).contains(&v) {
                255.0
            } else {
                0.0
            }
        })
        .expect("valid fixture")
    }

    /// [`square`] with additive uniform noise of amplitude `amplitude`.
    pub fn noisy_square(size: usize, side: usize, amplitude: f64, seed: u64) -> GrayImage {
        let base = square(size, side);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise: Vec<f64> = (0..size * size).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
        GrayImage::from_fn(size, size, |u, v| (base.get(u, v) + noise[v * size + u]).clamp(0.0, 255.0))
            .expect("valid fixture")
    }

    /// The standard fixture set with names.
    pub fn all() -> Vec<(&'static str, GrayImage)> {
        vec![
            ("constant", constant(32, 32, 128.0)),
            ("vertical_step", vertical_step(32, 32, 100.0)),
            ("horizontal_step", horizontal_step(32, 32, 100.0)),
            ("square", square(64, 20)),
            ("noisy_square", noisy_square(64, 20, 20.0, 11)),
        ]
    }
}

/// Edge pixels of a binary map as (u, v).
pub fn edge_pixels(img: &GrayImage) -> Vec<(usize, usize)> {
    let g = img.grid();
    (0..g.height)
        .flat_map(|v| (0..g.width).map(move |u| (u, v)))
        .filter(|&(u, v)| g.get(u, v) > 0.0)
        .collect()
}

/// Number of 8-connected components among nonzero pixels.
pub fn component_count(img: &GrayImage) -> usize {
    let g = img.grid();
    let mut seen = vec![false; g.data.len()];
    let mut count = 0;
    for start in 0..g.data.len() {
        if seen[start] || g.data[start] == 0.0 {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (u, v) = ((i % g.width) as isize, (i / g.width) as isize);
            for dv in -1..=1 {
                for du in -1..=1 {
                    let (nu, nv) = (u + du, v + dv);
                    if nu < 0 || nv < 0 || nu >= g.width as isize || nv >= g.height as isize {
                        continue;
                    }
                    let j = nv as usize * g.width + nu as usize;
                    if !seen[j] && g.data[j] > 0.0 {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
    }
    count
}

/// Background pixels reachable from `(u, v)` through 4-connected zero pixels.
pub fn flood_zero(img: &GrayImage, u: usize, v: usize) -> Vec<bool> {
    let g = img.grid();
    let mut seen = vec![false; g.data.len()];
    if g.get(u, v) != 0.0 {
        return seen;
    }
    let mut stack = vec![(u, v)];
    seen[v * g.width + u] = true;
    while let Some((u, v)) = stack.pop() {
        let mut push = |nu: usize, nv: usize| {
            let j = nv * g.width + nu;
            if !seen[j] && g.data[j] == 0.0 {
                seen[j] = true;
                stack.push((nu, nv));
            }
        };
        if u > 0 {
            push(u - 1, v);
        }
        if v > 0 {
            push(u, v - 1);
        }
        if u + 1 < g.width {
            push(u + 1, v);
        }
        if v + 1 < g.height {
            push(u, v + 1);
        }
    }
    seen
}

/// True when some 2×2 block is entirely nonzero.
pub fn has_thick_block(img: &GrayImage) -> bool {
    let g = img.grid();
    (0..g.height.saturating_sub(1)).any(|v| {
        (0..g.width - 1).any(|u| g.get(u, v) > 0.0 && g.get(u + 1, v) > 0.0 && g.get(u, v + 1) > 0.0 && g.get(u + 1, v + 1) > 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use approx::assert_relative_eq;

    const SEQ: Parallelism = Parallelism::Sequential;

    #[test]
    fn single_tap_kernel() {
        assert_eq!(gaussian_kernel(2.0, 0).weights, vec![1.0]);
    }

    #[test]
    fn kernel_ratios_and_symmetry() {
        let k = gaussian_kernel(1.0, 1);
        assert_relative_eq!(k.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let c = k.at(0, 0);
        assert_relative_eq!(k.at(1, 0) / c, (-0.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(k.at(1, 1) / c, (-1.0f64).exp(), max_relative = 1e-14);
        let k = gaussian_kernel(1.7, 4);
        for dv in -4..=4 {
            for du in -4..=4 {
                assert_eq!(k.at(du, dv), k.at(-du, dv));
                assert_eq!(k.at(du, dv), k.at(du, -dv));
            }
        }
    }

    #[test]
    fn smoothing_keeps_constants() {
        let img = constant(9, 7, 42.0);
        let s = smooth(&img, 1.3, SEQ);
        assert!(s.grid().data.iter().all(|&p| (p - 42.0).abs() < 1e-12));
    }

    #[test]
    fn single_pixel_spreads_as_kernel() {
        let img = GrayImage::from_fn(11, 11, |u, v| if (u, v) == (5, 5) { 200.0 } else { 0.0 }).unwrap();
        let s = smooth(&img, 1.0, SEQ);
        let k = gaussian_kernel(1.0, 3);
        for dv in -3..=3isize {
            for du in -3..=3isize {
                let got = s.get((5 + du) as usize, (5 + dv) as usize);
                assert_relative_eq!(got, 200.0 * k.at(du, dv), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn large_sigma_softens_step_monotonically() {
        let s = smooth(&vertical_step(24, 5, 200.0), 4.0, SEQ);
        for v in 0..5 {
            for u in 1..24 {
                assert!(s.get(u, v) >= s.get(u - 1, v));
            }
        }
        assert!(s.get(11, 2) > 0.0 && s.get(12, 2) < 200.0);
    }

    #[test]
    fn gradients_of_steps() {
        let f = gradients(&constant(5, 5, 9.0), SEQ).unwrap();
        assert!(f.magnitude.data.iter().all(|&m| m == 0.0));

        let f = gradients(&vertical_step(8, 6, 100.0), SEQ).unwrap();
        // the Sobel response straddles columns 3 and 4: 4·100 each
        for v in 0..6 {
            assert_eq!(f.magnitude.get(3, v), 400.0);
            assert_eq!(f.magnitude.get(4, v), 400.0);
            assert_eq!(f.magnitude.get(1, v), 0.0);
            assert_eq!(f.direction.get(3, v), 0.0);
        }
        let f = gradients(&horizontal_step(6, 8, 100.0), SEQ).unwrap();
        assert_relative_eq!(f.direction.get(2, 3), PI / 2.0);
        assert!(matches!(
            gradients(&constant(2, 5, 0.0), SEQ),
            Err(VisionError::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn strict_threshold() {
        let field = GradientField {
            magnitude: Grid {
                width: 3,
                height: 1,
                data: vec![5.0, 10.0, 20.0],
            },
            direction: Grid::zeros(3, 1),
        };
        assert_eq!(threshold(&field, 10.0).data, vec![0.0, 0.0, 20.0]);
        assert_eq!(threshold(&field, 25.0).data, vec![0.0; 3]);
    }

    #[test]
    fn quantized_directions() {
        assert_eq!(direction_offset(0.0), (1, 0));
        assert_eq!(direction_offset(PI), (-1, 0));
        assert_eq!(direction_offset(PI / 4.0), (1, 1));
        assert_eq!(direction_offset(-3.0 * PI / 4.0), (-1, -1));
        assert_eq!(direction_offset(PI / 2.0), (0, 1));
        assert_eq!(direction_offset(-PI / 2.0), (0, -1));
        assert_eq!(direction_offset(3.0 * PI / 4.0), (-1, 1));
        assert_eq!(direction_offset(0.3), (1, 0));
        assert_eq!(direction_offset(-0.3), (1, 0));
    }

    #[test]
    fn nms_keeps_peak_and_thins_step() {
        let mut m = Grid::zeros(5, 1);
        m.data = vec![1.0, 3.0, 7.0, 3.0, 1.0];
        let field = GradientField {
            magnitude: m,
            direction: Grid::zeros(5, 1),
        };
        assert_eq!(non_max_suppression(&field, SEQ).data, vec![0.0, 0.0, 7.0, 0.0, 0.0]);

        let s = smooth(&vertical_step(16, 8, 200.0), 1.0, SEQ);
        let thin = non_max_suppression(&gradients(&s, SEQ).unwrap(), SEQ);
        for v in 0..8 {
            let row: Vec<usize> = (0..16).filter(|&u| thin.get(u, v) > 0.0).collect();
            assert_eq!(row, vec![8]);
        }
    }

    #[test]
    fn hysteresis_chain() {
        let mut g = Grid::zeros(7, 1);
        g.data = vec![9.0, 5.0, 5.0, 0.0, 5.0, 0.0, 2.0];
        let e = hysteresis(&g, 4.0, 8.0);
        assert_eq!(e.grid().data, vec![255.0, 255.0, 255.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(hysteresis(&g, 1.0, 10.0).grid().data.iter().all(|&p| p == 0.0));
        let single = hysteresis(&g, 5.0, 5.0);
        assert_eq!(single.grid().data, vec![255.0, 255.0, 255.0, 0.0, 255.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_image_has_no_edges() {
        let e = canny(&constant(16, 16, 77.0), &CannyParams::default(), SEQ).unwrap();
        assert!(e.grid().data.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn square_gives_closed_thin_contour() {
        let img = square(64, 20);
        let e = canny(&img, &CannyParams::default(), SEQ).unwrap();
        assert_eq!(component_count(&e), 1);
        assert!(!has_thick_block(&e));
        let outside = flood_zero(&e, 0, 0);
        assert!(!outside[32 * 64 + 32], "contour leaks");
        assert!(e.grid().data.iter().all(|&p| p == 0.0 || p == EDGE));
    }

    #[test]
    fn rotation_commutes() {
        for (_, img) in all() {
            let a = canny(&img, &CannyParams::default(), SEQ).unwrap().rotate90();
            let b = canny(&img.rotate90(), &CannyParams::default(), SEQ).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn modes_are_bit_identical() {
        let img = noisy_square(48, 16, 30.0, 3);
        let a = canny_stages(&img, &CannyParams::default(), SEQ).unwrap();
        let b = canny_stages(&img, &CannyParams::default(), Parallelism::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pgm_round_trip_and_ascii() {
        let img = noisy_square(12, 4, 40.0, 1);
        let rounded = GrayImage::from_fn(12, 12, |u, v| img.get(u, v).round()).unwrap();
        assert_eq!(GrayImage::from_pgm(&rounded.to_pgm()).unwrap(), rounded);
        let text = b"P2\n# a comment\n3 2\n# another\n255\n0 10 20\n30 40 255\n";
        let p = GrayImage::from_pgm(text).unwrap();
        assert_eq!(p.grid().data, vec![0.0, 10.0, 20.0, 30.0, 40.0, 255.0]);
        let half = GrayImage::from_pgm(b"P2 1 1 1 1").unwrap();
        assert_eq!(half.get(0, 0), 255.0);
        for bad in [&b"P6 1 1 255 x"[..], b"P2 2 2 255 1 2 3", b"P5 2 1 255\n\x01", b"P2 1 1 255 300"] {
            assert!(matches!(GrayImage::from_pgm(bad), Err(VisionError::Pgm(_))));
        }
    }
}
