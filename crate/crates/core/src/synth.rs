//! Procedural textured images for experiments without a photo corpus.
//!
//! Each image is a sum of multi-octave value noise with a power-law amplitude
//! spectrum and a handful of flat-shaded shapes with hard boundaries, so it
//! has both smooth regions and real edges. Every channel is finally
//! histogram-equalized onto the 256 byte levels, which makes the images use
//! the full value range and balances each bit plane.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{from_byte, ImageBuf};

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn value_noise(rng: &mut ChaCha8Rng, w: usize, h: usize, cell: usize) -> Vec<f64> {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let ox = rng.random::<f64>() * cell as f64;
    let oy = rng.random::<f64>() * cell as f64;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let fy = (y as f64 + oy) / cell as f64;
        let (iy, ty) = (fy.floor() as usize, smooth(fy.fract()));
        for x in 0..w {
            let fx = (x as f64 + ox) / cell as f64;
            let (ix, tx) = (fx.floor() as usize, smooth(fx.fract()));
            let g = |gx: usize, gy: usize| grid[gy.min(gh - 1) * gw + gx.min(gw - 1)];
            let top = g(ix, iy) * (1.0 - tx) + g(ix + 1, iy) * tx;
            let bottom = g(ix, iy + 1) * (1.0 - tx) + g(ix + 1, iy + 1) * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

fn fbm(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<f64> {
    let mut acc = vec![0.0; w * h];
    let mut cell = (w.max(h) / 4).max(2);
    while cell >= 2 {
        let amp = (cell as f64).powf(0.8);
        for (a, v) in acc.iter_mut().zip(value_noise(rng, w, h, cell)) {
            *a += amp * v;
        }
        cell /= 2;
    }
    acc
}

fn add_shapes(rng: &mut ChaCha8Rng, field: &mut [Vec<f64>], w: usize, h: usize, scale: f64) {
    let count = rng.random_range(5..12);
    for _ in 0..count {
        let cx = rng.random::<f64>() * w as f64;
        let cy = rng.random::<f64>() * h as f64;
        let size = (0.08 + 0.25 * rng.random::<f64>()) * w.min(h) as f64;
        let offsets: Vec<f64> = field
            .iter()
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale)
            .collect();
        let disk = rng.random::<bool>();
        let aspect = 0.5 + rng.random::<f64>();
        for y in 0..h {
            for x in 0..w {
                let dx = (x as f64 - cx) / size;
                let dy = (y as f64 - cy) / (size * aspect);
                let inside = if disk {
                    dx * dx + dy * dy <= 1.0
                } else {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                };
                if inside {
                    for (plane, off) in field.iter_mut().zip(&offsets) {
                        plane[y * w + x] += off;
                    }
                }
            }
        }
    }
}

fn equalize(plane: &[f64]) -> Vec<f64> {
    let n = plane.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| plane[a].total_cmp(&plane[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = from_byte(((rank * 256) / n) as u8);
    }
    out
}

/// Deterministic textured image; `channels` is 1 or 3.
pub fn natural_image(width: usize, height: usize, channels: usize, seed: u64) -> ImageBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1a6e_0000_0000);
    let luma = fbm(&mut rng, width, height);
    let spread = luma.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-9);
    let mut planes: Vec<Vec<f64>> = (0..channels)
        .map(|_| {
            let tint = value_noise(&mut rng, width, height, (width.max(height) / 3).max(2));
            luma.iter()
                .zip(tint)
                .map(|(l, t)| l + 0.35 * spread * t)
                .collect()
        })
        .collect();
    add_shapes(&mut rng, &mut planes, width, height, 0.9 * spread);

    let planes: Vec<Vec<f64>> = planes.iter().map(|p| equalize(p)).collect();
    let mut data = Vec::with_capacity(width * height * channels);
    for i in 0..width * height {
        for p in &planes {
            data.push(p[i]);
        }
    }
    ImageBuf::new(width, height, channels, data).expect("valid shape")
}

/// `count` images with seeds `base_seed..base_seed + count`.
pub fn corpus(count: usize, width: usize, height: usize, channels: usize, base_seed: u64) -> Vec<ImageBuf> {
    (0..count as u64)
        .map(|i| natural_image(width, height, channels, base_seed + i))
        .collect()
}
