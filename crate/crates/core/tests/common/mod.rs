//! Brute-force oracles and random fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rialscan_core::{BinaryImage, ComponentSet, Connectivity, GrayImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each pixel foreground with probability `p`.
pub fn random_binary(rng: &mut impl Rng, w: usize, h: usize, p: f64) -> BinaryImage {
    BinaryImage::from_fn(w, h, |_, _| rng.random_bool(p))
}

pub fn random_gray(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random())
}

/// Foreground pixel sets of all components, found by explicit-stack flood
/// fill, each set sorted and the list sorted by first pixel.
pub fn flood_fill_partition(img: &BinaryImage, conn: Connectivity) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut parts = Vec::new();
    for sy in 0..h {
        for sx in 0..w {
            if !img.get(sx, sy) || seen[sy * w + sx] {
                continue;
            }
            let mut part = Vec::new();
            let mut stack = vec![(sx, sy)];
            seen[sy * w + sx] = true;
            while let Some((x, y)) = stack.pop() {
                part.push((x, y));
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        if (dx, dy) == (0, 0) || (conn == Connectivity::Four && dx != 0 && dy != 0) {
                            continue;
                        }
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if img.get(nx, ny) && !seen[ny * w + nx] {
                            seen[ny * w + nx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            part.sort_by_key(|&(x, y)| (y, x));
            parts.push(part);
        }
    }
    parts.sort();
    parts
}

/// The same shape as [`flood_fill_partition`], read off a label raster.
pub fn raster_partition(set: &ComponentSet) -> Vec<Vec<(usize, usize)>> {
    let mut by_label: std::collections::BTreeMap<u32, Vec<(usize, usize)>> = Default::default();
    for y in 0..set.height() {
        for x in 0..set.width() {
            let l = set.label_at(x, y);
            if l != 0 {
                by_label.entry(l).or_default().push((x, y));
            }
        }
    }
    let mut parts: Vec<_> = by_label.into_values().collect();
    for p in &mut parts {
        p.sort_by_key(|&(x, y)| (y, x));
    }
    parts.sort();
    parts
}

/// Double loop over the edge-replicated window, mean = sum / window².
pub fn naive_threshold(img: &GrayImage, window: usize, bias: f64) -> BinaryImage {
    let r = (window / 2) as isize;
    let n = (window * window) as f64;
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let mut sum = 0u64;
        for dy in -r..=r {
            for dx in -r..=r {
                sum += u64::from(img.get_clamped(x as isize + dx, y as isize + dy));
            }
        }
        let mean = sum as f64 / n;
        f64::from(img.get(x, y)) >= mean * (1.0 - bias)
    })
}

/// Number of foreground cells in the edge-replicated 3×3 neighbourhood.
pub fn ones_around(img: &BinaryImage, x: usize, y: usize) -> usize {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut n = 0;
    for dy in -1..=1 {
        for dx in -1..=1 {
            let sx = (x as isize + dx).clamp(0, w - 1) as usize;
            let sy = (y as isize + dy).clamp(0, h - 1) as usize;
            n += usize::from(img.get(sx, sy));
        }
    }
    n
}

pub fn naive_median(img: &BinaryImage) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| ones_around(img, x, y) >= 5)
}

/// `a ⊆ b` pixelwise.
pub fn subset(a: &BinaryImage, b: &BinaryImage) -> bool {
    a.pixels().iter().zip(b.pixels()).all(|(&p, &q)| !p || q)
}

/// Nearest-neighbour upscale by an integer factor.
pub fn upscale(img: &BinaryImage, k: usize) -> BinaryImage {
    BinaryImage::from_fn(img.width() * k, img.height() * k, |x, y| img.get(x / k, y / k))
}

pub fn mirror_x(img: &BinaryImage) -> BinaryImage {
    let w = img.width();
    BinaryImage::from_fn(w, img.height(), |x, y| img.get(w - 1 - x, y))
}

pub fn mirror_y(img: &BinaryImage) -> BinaryImage {
    let h = img.height();
    BinaryImage::from_fn(img.width(), h, |x, y| img.get(x, h - 1 - y))
}

/// Largest relative error between `analytic` and central differences of
/// `f` at `x` with step `h`, using `max(|a|, |n|, 1e-8)` as the scale.
pub fn gradient_check(f: impl Fn(&[f64]) -> f64, x: &[f64], analytic: &[f64], h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}
