//! Weighted k-means color quantization.
//!
//! Runs on the distinct colors of the image, weighted by pixel counts, so the
//! cost is independent of image size. Seeding is k-means++ from a ChaCha8
//! stream, so equal seeds give bit-identical palettes on every platform.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::raster::Raster;
use crate::error::{OtError, Result};
use crate::problem::Histogram;

pub const MAX_LLOYD_ITERS: usize = 300;
pub const MOVE_TOL: f64 = 1e-6;

/// Quantized image: `k` centroids, the centroid of every pixel, and the
/// fraction of pixels per centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub centroids: Vec<[f64; 3]>,
    pub assignments: Vec<usize>,
    pub histogram: Histogram,
}

impl Palette {
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }
}

pub(crate) fn dist2(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)
}

/// Distinct colors in first-seen order, their counts, and each pixel's color
/// index.
fn distinct_colors(image: &Raster) -> (Vec<[f64; 3]>, Vec<f64>, Vec<usize>) {
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut colors = Vec::new();
    let mut counts = Vec::new();
    let pixel_color = image
        .pixels
        .iter()
        .map(|p| {
            let key = p.map(f64::to_bits);
            let k = *index.entry(key).or_insert_with(|| {
                colors.push(*p);
                counts.push(0.0);
                colors.len() - 1
            });
            counts[k] += 1.0;
            k
        })
        .collect();
    (colors, counts, pixel_color)
}

fn nearest(p: &[f64; 3], centroids: &[[f64; 3]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, q) in centroids.iter().enumerate() {
        let d = dist2(p, q);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_pp(colors: &[[f64; 3]], weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let sample = |scores: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let total: f64 = scores.iter().sum();
        let mut r = rng.gen::<f64>() * total;
        for (i, &s) in scores.iter().enumerate() {
            if s > 0.0 {
                if r < s {
                    return i;
                }
                r -= s;
            }
        }
        scores.iter().rposition(|&s| s > 0.0).expect("some score is positive")
    };
    let mut centroids = vec![colors[sample(weights, rng)]];
    let mut d2: Vec<f64> = colors.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let scores: Vec<f64> = d2.iter().zip(weights).map(|(d, w)| d * w).collect();
        let next = colors[sample(&scores, rng)];
        for (d, p) in d2.iter_mut().zip(colors) {
            *d = d.min(dist2(p, &next));
        }
        centroids.push(next);
    }
    centroids
}

fn assign(colors: &[[f64; 3]], centroids: &[[f64; 3]]) -> Vec<(usize, f64)> {
    colors.par_iter().map(|p| nearest(p, centroids)).collect()
}

/// Ensures every cluster owns at least one color by moving the farthest
/// color of a multi-color cluster into each empty one.
fn fill_empty(labels: &mut [(usize, f64)], colors: &[[f64; 3]], centroids: &mut [[f64; 3]]) {
    loop {
        let mut members = vec![0usize; centroids.len()];
        labels.iter().for_each(|(c, _)| members[*c] += 1);
        let Some(empty) = members.iter().position(|&n| n == 0) else { return };
        let mut far = None;
        for (i, (c, d)) in labels.iter().enumerate() {
            if members[*c] > 1 && far.is_none_or(|(_, best)| *d > best) {
                far = Some((i, *d));
            }
        }
        let (i, _) = far.expect("k does not exceed the number of distinct colors");
        centroids[empty] = colors[i];
        labels[i] = (empty, 0.0);
    }
}

/// Weighted means by incremental updates, which return a one-color cluster's
/// color exactly.
fn update(labels: &[(usize, f64)], colors: &[[f64; 3]], weights: &[f64], centroids: &mut [[f64; 3]]) {
    let mut means = vec![[0.0; 3]; centroids.len()];
    let mut mass = vec![0.0; centroids.len()];
    for ((c, _), (p, w)) in labels.iter().zip(colors.iter().zip(weights)) {
        mass[*c] += w;
        let r = w / mass[*c];
        for d in 0..3 {
            means[*c][d] += r * (p[d] - means[*c][d]);
        }
    }
    for ((cent, mean), m) in centroids.iter_mut().zip(means).zip(&mass) {
        if *m > 0.0 {
            *cent = mean;
        }
    }
}

/// k-means with k-means++ seeding, Lloyd iterations until no centroid moves
/// more than `1e-6` (or 300 iterations), and empty clusters re-seeded from the
/// farthest color.
pub fn quantize(image: &Raster, k: usize, seed: u64) -> Result<Palette> {
    if image.is_empty() {
        return Err(OtError::InvalidParameter("image must be non-empty".into()));
    }
    if k == 0 {
        return Err(OtError::InvalidParameter("k must be positive".into()));
    }
    let (colors, weights, pixel_color) = distinct_colors(image);
    if k > colors.len() {
        return Err(OtError::TooFewColors { distinct: colors.len(), k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp(&colors, &weights, k, &mut rng);
    let mut labels = assign(&colors, &centroids);
    for _ in 0..MAX_LLOYD_ITERS {
        fill_empty(&mut labels, &colors, &mut centroids);
        let previous = centroids.clone();
        update(&labels, &colors, &weights, &mut centroids);
        labels = assign(&colors, &centroids);
        let moved = centroids.iter().zip(&previous).map(|(x, y)| dist2(x, y).sqrt()).fold(0.0, f64::max);
        if moved <= MOVE_TOL {
            break;
        }
    }
    fill_empty(&mut labels, &colors, &mut centroids);

    let mut counts = vec![0.0; k];
    for ((c, _), w) in labels.iter().zip(&weights) {
        counts[*c] += w;
    }
    let assignments: Vec<usize> = pixel_color.iter().map(|&i| labels[i].0).collect();
    let histogram = Histogram::from_weights(counts)?;
    Ok(Palette { centroids, assignments, histogram })
}
