//! Exactly invertible hiding schemes with a known locality radius.
//!
//! Both schemes work on the 8-bit quantization of the cover and the secret.
//! The top `bits` bits of every secret value end up in the low `bits` bit
//! planes of the container:
//!
//! - LSB (radius 0): secret pixel `(x, y)` lives in container pixel `(x, y)`.
//! - Spread (radius `r`): bit `t` of secret pixel `p` lives in bit plane `t`
//!   of container pixel `P_t(p)`, where `P_t` is a fixed involution that
//!   moves every pixel by at most `r` along each axis.
//!
//! `P_t` is built per axis from an offset `u` in `-r..=r`: the axis is split
//! into aligned blocks of length `2|u|` and the two halves of each block are
//! swapped. Blocks start at 0 for `u > 0` and at `|u|` for `u < 0`, so the two
//! signs pair each position with different neighbours. Incomplete blocks at
//! the borders map to themselves. Because `P_t` is a bijection, hide/reveal
//! is exact with no slot collisions at the borders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{from_byte, to_byte, ImageBuf};
use crate::metrics::Distance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HidingScheme {
    Lsb { bits: u8 },
    Spread { radius: usize, bits: u8 },
}

impl HidingScheme {
    pub fn lsb(bits: u8) -> Result<Self> {
        check_lsb_bits(bits)?;
        Ok(HidingScheme::Lsb { bits })
    }

    pub fn spread(radius: usize, bits: u8) -> Result<Self> {
        check_spread(radius, bits)?;
        Ok(HidingScheme::Spread { radius, bits })
    }

    pub fn name(&self) -> &'static str {
        match self {
            HidingScheme::Lsb { .. } => "lsb",
            HidingScheme::Spread { .. } => "spread",
        }
    }

    /// Maximal Chebyshev distance at which a secret pixel influences the container.
    pub fn locality_radius(&self) -> usize {
        match *self {
            HidingScheme::Lsb { .. } => 0,
            HidingScheme::Spread { radius, .. } => radius,
        }
    }

    pub fn bits(&self) -> u8 {
        match *self {
            HidingScheme::Lsb { bits } | HidingScheme::Spread { bits, .. } => bits,
        }
    }

    pub fn hide(&self, cover: &ImageBuf, secret: &ImageBuf) -> Result<ImageBuf> {
        match *self {
            HidingScheme::Lsb { bits } => lsb_hide(cover, secret, bits),
            HidingScheme::Spread { radius, bits } => spread_hide(cover, secret, radius, bits),
        }
    }

    pub fn reveal(&self, container: &ImageBuf) -> Result<ImageBuf> {
        match *self {
            HidingScheme::Lsb { bits } => lsb_reveal(container, bits),
            HidingScheme::Spread { radius, bits } => spread_reveal(container, radius, bits),
        }
    }
}

fn check_lsb_bits(bits: u8) -> Result<()> {
    if (1..=4).contains(&bits) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lsb bits must be in 1..=4, got {bits}"
        )))
    }
}

fn check_spread(radius: usize, bits: u8) -> Result<()> {
    if radius == 0 {
        return Err(Error::InvalidParameter("spread radius must be positive".into()));
    }
    if !(1..=8).contains(&bits) {
        return Err(Error::InvalidParameter(format!(
            "spread bits must be in 1..=8, got {bits}"
        )));
    }
    if (2 * radius + 1).pow(2) < bits as usize {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} has fewer than {bits} neighborhood slots"
        )));
    }
    Ok(())
}

#[inline]
fn low_mask(bits: u8) -> u8 {
    ((1u16 << bits) - 1) as u8
}

/// Keeps the top `bits` bits of the 8-bit quantization of every value.
pub fn quantize_bits(img: &ImageBuf, bits: u8) -> ImageBuf {
    let shift = 8 - bits.min(8);
    let data = img
        .data()
        .iter()
        .map(|&v| from_byte((to_byte(v) >> shift) << shift))
        .collect();
    ImageBuf::new(img.width(), img.height(), img.channels(), data).expect("shape preserved")
}

pub fn lsb_hide(cover: &ImageBuf, secret: &ImageBuf, bits: u8) -> Result<ImageBuf> {
    check_lsb_bits(bits)?;
    cover.check_same_shape(secret, "cover vs secret")?;
    let mask = low_mask(bits);
    let data = cover
        .data()
        .iter()
        .zip(secret.data())
        .map(|(&c, &s)| from_byte((to_byte(c) & !mask) | (to_byte(s) >> (8 - bits))))
        .collect();
    ImageBuf::new(cover.width(), cover.height(), cover.channels(), data)
}

pub fn lsb_reveal(container: &ImageBuf, bits: u8) -> Result<ImageBuf> {
    check_lsb_bits(bits)?;
    let mask = low_mask(bits);
    let data = container
        .data()
        .iter()
        .map(|&c| from_byte((to_byte(c) & mask) << (8 - bits)))
        .collect();
    ImageBuf::new(container.width(), container.height(), container.channels(), data)
}

/// Neighborhood offsets `(dy, dx)` in the order bit planes claim them.
/// Ring 1 comes first (diagonals before axis neighbours), then the outer
/// rings row-major, and the centre last.
pub fn spread_offsets(radius: usize) -> Vec<(i64, i64)> {
    let mut out = vec![
        (1, 1),
        (-1, -1),
        (1, -1),
        (-1, 1),
        (0, 1),
        (1, 0),
        (0, -1),
        (-1, 0),
    ];
    let r = radius as i64;
    for ring in 2..=r {
        for dy in -ring..=ring {
            for dx in -ring..=ring {
                if dy.abs().max(dx.abs()) == ring {
                    out.push((dy, dx));
                }
            }
        }
    }
    out.push((0, 0));
    out
}

/// Axis involution with displacement exactly `|u|` or 0.
#[inline]
pub(crate) fn axis_swap(pos: usize, u: i64, n: usize) -> usize {
    if u == 0 {
        return pos;
    }
    let a = u.unsigned_abs() as usize;
    let start = if u > 0 { 0 } else { a };
    if pos < start {
        return pos;
    }
    let rel = pos - start;
    let block_start = start + (rel / (2 * a)) * 2 * a;
    if block_start + 2 * a > n {
        return pos;
    }
    if rel % (2 * a) < a {
        pos + a
    } else {
        pos - a
    }
}

struct SpreadTable {
    /// For each bit plane: per-pixel partner index.
    partner: Vec<Vec<usize>>,
}

impl SpreadTable {
    fn new(width: usize, height: usize, radius: usize, bits: u8) -> Self {
        let offsets = spread_offsets(radius);
        let partner = offsets[..bits as usize]
            .iter()
            .map(|&(dy, dx)| {
                let cols: Vec<usize> = (0..width).map(|x| axis_swap(x, dx, width)).collect();
                let mut p = Vec::with_capacity(width * height);
                for y in 0..height {
                    let yy = axis_swap(y, dy, height);
                    p.extend(cols.iter().map(|&xx| yy * width + xx));
                }
                p
            })
            .collect();
        SpreadTable { partner }
    }
}

pub fn spread_hide(
    cover: &ImageBuf,
    secret: &ImageBuf,
    radius: usize,
    bits: u8,
) -> Result<ImageBuf> {
    check_spread(radius, bits)?;
    cover.check_same_shape(secret, "cover vs secret")?;
    let (w, h, ch) = (cover.width(), cover.height(), cover.channels());
    let table = SpreadTable::new(w, h, radius, bits);
    let cover_b = cover.to_bytes();
    let secret_b = secret.to_bytes();
    let mask = low_mask(bits);
    let mut out = Vec::with_capacity(cover_b.len());
    for p in 0..w * h {
        for c in 0..ch {
            let mut low = 0u8;
            for (t, partner) in table.partner.iter().enumerate() {
                let bit = (secret_b[partner[p] * ch + c] >> (7 - t)) & 1;
                low |= bit << (bits as usize - 1 - t);
            }
            out.push(from_byte((cover_b[p * ch + c] & !mask) | low));
        }
    }
    ImageBuf::new(w, h, ch, out)
}

pub fn spread_reveal(container: &ImageBuf, radius: usize, bits: u8) -> Result<ImageBuf> {
    check_spread(radius, bits)?;
    let (w, h, ch) = (container.width(), container.height(), container.channels());
    let table = SpreadTable::new(w, h, radius, bits);
    let bytes = container.to_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    for p in 0..w * h {
        for c in 0..ch {
            let mut s = 0u8;
            for (t, partner) in table.partner.iter().enumerate() {
                let bit = (bytes[partner[p] * ch + c] >> (bits as usize - 1 - t)) & 1;
                s |= bit << (7 - t);
            }
            out.push(from_byte(s));
        }
    }
    ImageBuf::new(w, h, ch, out)
}

/// Empirical fidelity of a scheme: mean `D(c, c')` and mean `D(s, s')`.
pub fn measure_xi(
    scheme: &HidingScheme,
    corpus: &[(ImageBuf, ImageBuf)],
    metric: Distance,
) -> Result<(f64, f64)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut cover_sum = 0.0;
    let mut secret_sum = 0.0;
    for (c, s) in corpus {
        let container = scheme.hide(c, s)?;
        let revealed = scheme.reveal(&container)?;
        cover_sum += metric.distance(c, &container)?;
        secret_sum += metric.distance(s, &revealed)?;
    }
    let n = corpus.len() as f64;
    Ok((cover_sum / n, secret_sum / n))
}

/// Axis-aligned pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Rect {
            x,
            y,
            width,
            height,
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    /// Pixels within Chebyshev distance `r` of the rectangle.
    pub fn dilated_contains(&self, x: usize, y: usize, r: usize) -> bool {
        x + r >= self.x
            && x < self.x + self.width + r
            && y + r >= self.y
            && y < self.y + self.height + r
    }

    fn check_inside(&self, img: &ImageBuf) -> Result<()> {
        if self.width == 0
            || self.height == 0
            || self.x + self.width > img.width()
            || self.y + self.height > img.height()
        {
            Err(Error::OutOfBounds(format!(
                "rect {}x{}+{}+{} in {}x{} image",
                self.width,
                self.height,
                self.x,
                self.y,
                img.width(),
                img.height()
            )))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeMode {
    /// Zero the rectangle.
    Remove,
    /// Zero everything except the rectangle.
    KeepOnly,
}

impl ProbeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeMode::Remove => "remove",
            ProbeMode::KeepOnly => "keep_only",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalityProbe {
    pub damaged_container: ImageBuf,
    pub damaged_reveal: ImageBuf,
    /// Mean absolute error inside the rectangle dilated by the locality radius.
    pub in_region_err: f64,
    /// Mean absolute error everywhere else.
    pub out_region_err: f64,
}

/// Zeroes a rectangle (or its complement) of the container and measures where
/// the revealed secret changes.
pub fn locality_probe(
    scheme: &HidingScheme,
    cover: &ImageBuf,
    secret: &ImageBuf,
    rect: Rect,
    mode: ProbeMode,
) -> Result<LocalityProbe> {
    rect.check_inside(cover)?;
    let container = scheme.hide(cover, secret)?;
    let clean = scheme.reveal(&container)?;
    let ch = container.channels();
    let mut damaged = container.clone();
    for y in 0..container.height() {
        for x in 0..container.width() {
            let zero = match mode {
                ProbeMode::Remove => rect.contains(x, y),
                ProbeMode::KeepOnly => !rect.contains(x, y),
            };
            if zero {
                for c in 0..ch {
                    damaged.set(x, y, c, 0.0);
                }
            }
        }
    }
    let revealed = scheme.reveal(&damaged)?;
    let r = scheme.locality_radius();
    let (mut in_sum, mut in_n, mut out_sum, mut out_n) = (0.0, 0usize, 0.0, 0usize);
    for y in 0..clean.height() {
        for x in 0..clean.width() {
            let inside = rect.dilated_contains(x, y, r);
            for c in 0..ch {
                let e = (clean.get(x, y, c) - revealed.get(x, y, c)).abs();
                if inside {
                    in_sum += e;
                    in_n += 1;
                } else {
                    out_sum += e;
                    out_n += 1;
                }
            }
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
    Ok(LocalityProbe {
        damaged_container: damaged,
        damaged_reveal: revealed,
        in_region_err: mean(in_sum, in_n),
        out_region_err: mean(out_sum, out_n),
    })
}

/// Sets one container pixel (all channels) to `value` and counts revealed
/// pixels that move by more than `tau` in any channel.
pub fn redundancy_probe(
    scheme: &HidingScheme,
    cover: &ImageBuf,
    secret: &ImageBuf,
    pos: (usize, usize),
    value: f64,
    tau: f64,
) -> Result<usize> {
    let container = scheme.hide(cover, secret)?;
    redundancy_probe_container(scheme, &container, pos, value, tau)
}

pub(crate) fn redundancy_probe_container(
    scheme: &HidingScheme,
    container: &ImageBuf,
    (x, y): (usize, usize),
    value: f64,
    tau: f64,
) -> Result<usize> {
    if x >= container.width() || y >= container.height() {
        return Err(Error::OutOfBounds(format!("pixel ({x}, {y})")));
    }
    let clean = scheme.reveal(container)?;
    let mut changed = container.clone();
    for c in 0..container.channels() {
        changed.set(x, y, c, value);
    }
    let revealed = scheme.reveal(&changed)?;
    Ok(clean
        .data()
        .chunks_exact(clean.channels())
        .zip(revealed.data().chunks_exact(clean.channels()))
        .filter(|(a, b)| a.iter().zip(*b).any(|(p, q)| (p - q).abs() > tau))
        .count())
}

/// Uniformly random image with a fixed seed; handy for oracle checks.
pub fn random_image(width: usize, height: usize, channels: usize, seed: u64) -> ImageBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height * channels)
        .map(|_| from_byte(rng.random()))
        .collect();
    ImageBuf::new(width, height, channels, data).expect("valid shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn byte_img(w: usize, h: usize, bytes: &[u8]) -> ImageBuf {
        ImageBuf::from_bytes(w, h, 1, bytes).unwrap()
    }

    #[test]
    fn lsb_bit_splice() {
        let c = byte_img(1, 1, &[0b1010_0000]);
        let s = byte_img(1, 1, &[0b1101_0000]);
        let out = lsb_hide(&c, &s, 4).unwrap();
        assert_eq!(out.to_bytes(), vec![0b1010_1101]);
        assert_eq!(lsb_reveal(&out, 4).unwrap().to_bytes(), vec![0b1101_0000]);
    }

    #[test]
    fn lsb_secret_equal_cover() {
        let c = random_image(8, 8, 3, 1);
        let out = lsb_hide(&c, &c, 4).unwrap();
        assert_eq!(lsb_reveal(&out, 4).unwrap(), quantize_bits(&c, 4));
    }

    #[test]
    fn lsb_distortion_bounded() {
        let c = random_image(32, 32, 3, 2);
        let s = random_image(32, 32, 3, 3);
        for bits in 1..=4u8 {
            let out = lsb_hide(&c, &s, bits).unwrap();
            let bound = ((1u32 << bits) - 1) as f64 / 255.0;
            let worst = c
                .data()
                .iter()
                .zip(out.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst <= bound + 1e-12);
        }
        assert!((15.0f64 / 255.0 - 0.0588).abs() < 1e-4);
    }

    #[test]
    fn lsb_rejects_bad_input() {
        let a = random_image(4, 4, 1, 0);
        let b = random_image(5, 4, 1, 0);
        assert!(matches!(lsb_hide(&a, &b, 4), Err(Error::DimensionMismatch(_))));
        assert!(lsb_hide(&a, &a, 0).is_err());
        assert!(lsb_hide(&a, &a, 5).is_err());
    }

    #[test]
    fn lsb_reveal_of_black_is_black() {
        let z = ImageBuf::zeros(4, 4, 3).unwrap();
        assert_eq!(lsb_reveal(&z, 4).unwrap(), z);
    }

    #[test]
    fn lsb_single_pixel_damage() {
        let c = random_image(16, 16, 1, 4);
        let s = random_image(16, 16, 1, 5);
        let mut container = lsb_hide(&c, &s, 4).unwrap();
        let clean = lsb_reveal(&container, 4).unwrap();
        // force nonzero low bits so zeroing is visible
        container.set(3, 7, 0, from_byte(0b0000_0101));
        let before = lsb_reveal(&container, 4).unwrap();
        container.set(3, 7, 0, 0.0);
        let after = lsb_reveal(&container, 4).unwrap();
        let diff = before
            .data()
            .iter()
            .zip(after.data())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diff, 1);
        let diff_clean = clean
            .data()
            .iter()
            .zip(after.data())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        assert!(diff_clean.iter().all(|&i| i == 7 * 16 + 3));
    }

    #[test]
    fn axis_swap_is_local_involution() {
        for n in 1..20 {
            for u in -3i64..=3 {
                let mut seen = vec![false; n];
                for p in 0..n {
                    let q = axis_swap(p, u, n);
                    assert!(q < n);
                    assert_eq!(axis_swap(q, u, n), p);
                    assert!((q as i64 - p as i64).abs() <= u.abs());
                    assert!(!seen[q]);
                    seen[q] = true;
                }
            }
        }
    }

    #[test]
    fn offsets_are_distinct_and_within_radius() {
        for r in 1..4 {
            let offs = spread_offsets(r);
            assert_eq!(offs.len(), (2 * r + 1).pow(2));
            let mut sorted = offs.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), offs.len());
            assert!(offs
                .iter()
                .all(|(dy, dx)| dy.unsigned_abs() as usize <= r && dx.unsigned_abs() as usize <= r));
        }
    }

    #[test]
    fn spread_roundtrip_exact() {
        for (w, h) in [(16, 16), (17, 5), (1, 1), (3, 2)] {
            let c = random_image(w, h, 3, 10);
            let s = random_image(w, h, 3, 11);
            for bits in [1u8, 4, 8] {
                let r = if bits > 1 { 1 } else { 2 };
                let out = spread_hide(&c, &s, r, bits).unwrap();
                assert_eq!(
                    spread_reveal(&out, r, bits).unwrap(),
                    quantize_bits(&s, bits)
                );
            }
        }
    }

    #[test]
    fn spread_rejects_infeasible() {
        let a = random_image(4, 4, 1, 0);
        assert!(spread_hide(&a, &a, 0, 4).is_err());
        assert!(spread_hide(&a, &a, 1, 9).is_err());
        assert!(spread_hide(&a, &random_image(4, 3, 1, 0), 1, 4).is_err());
    }

    #[test]
    fn spread_single_pixel_damage_bounded() {
        let c = random_image(16, 16, 1, 12);
        let s = random_image(16, 16, 1, 13);
        let scheme = HidingScheme::spread(1, 4).unwrap();
        let container = scheme.hide(&c, &s).unwrap();
        for (x, y) in [(0, 0), (7, 8), (15, 15), (15, 3)] {
            let n = redundancy_probe_container(&scheme, &container, (x, y), 0.0, 0.0).unwrap();
            assert!(n <= 9);
        }
    }

    #[test]
    fn spread_box_with_margin_destroys_cell() {
        // cell [8, 13) x [8, 13), margin 1 box [7, 14)
        let w = 24;
        let c = random_image(w, w, 1, 14);
        let s = random_image(w, w, 1, 15);
        let container = spread_hide(&c, &s, 1, 4).unwrap();
        let table = SpreadTable::new(w, w, 1, 4);
        for y in 8..13 {
            for x in 8..13 {
                for partner in &table.partner {
                    let q = partner[y * w + x];
                    let (qx, qy) = (q % w, q / w);
                    assert!((7..14).contains(&qx) && (7..14).contains(&qy));
                }
            }
        }
        let mut damaged = container.clone();
        for y in 7..14 {
            for x in 7..14 {
                damaged.set(x, y, 0, 0.0);
            }
        }
        let rev = spread_reveal(&damaged, 1, 4).unwrap();
        for y in 8..13 {
            for x in 8..13 {
                assert_eq!(rev.get(x, y, 0), 0.0);
            }
        }
    }

    /// Brute-force expectation of RMSE when a uniform low nibble is replaced
    /// by an independent uniform nibble.
    fn nibble_replacement_rmse() -> f64 {
        let mut acc = 0.0;
        for a in 0..16 {
            for b in 0..16 {
                acc += ((a - b) as f64).powi(2);
            }
        }
        (acc / 256.0).sqrt() / 255.0
    }

    #[test]
    fn xi_matches_nibble_oracle() {
        let corpus: Vec<_> = (0..8)
            .map(|i| (random_image(64, 64, 3, 100 + i), random_image(64, 64, 3, 200 + i)))
            .collect();
        let scheme = HidingScheme::lsb(4).unwrap();
        let (xc, xs) = measure_xi(&scheme, &corpus, Distance::Rmse).unwrap();
        let oracle = nibble_replacement_rmse();
        assert!((oracle - 0.025565).abs() < 1e-5);
        assert!((xc - oracle).abs() < 0.002, "xi_cover {xc} vs {oracle}");

        // secret error is the 4-bit quantization error, computed directly
        let direct: f64 = corpus
            .iter()
            .map(|(_, s)| Distance::Rmse.distance(s, &quantize_bits(s, 4)).unwrap())
            .sum::<f64>()
            / corpus.len() as f64;
        assert!((xs - direct).abs() < 1e-12);

        let (xc1, _) = measure_xi(&HidingScheme::lsb(1).unwrap(), &corpus, Distance::Rmse).unwrap();
        assert!(xc1 < xc);
        assert!(matches!(
            measure_xi(&scheme, &[], Distance::Rmse),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn locality_probe_lsb() {
        let c = random_image(32, 32, 3, 20);
        let s = random_image(32, 32, 3, 21);
        let scheme = HidingScheme::lsb(4).unwrap();
        let rect = Rect::new(5, 9, 10, 7);
        let rm = locality_probe(&scheme, &c, &s, rect, ProbeMode::Remove).unwrap();
        assert_eq!(rm.out_region_err, 0.0);
        assert!(rm.in_region_err > 0.0);
        let keep = locality_probe(&scheme, &c, &s, rect, ProbeMode::KeepOnly).unwrap();
        assert_eq!(keep.in_region_err, 0.0);
        assert!(keep.out_region_err > 0.0);
        assert!(matches!(
            locality_probe(&scheme, &c, &s, Rect::new(30, 0, 5, 5), ProbeMode::Remove),
            Err(Error::OutOfBounds(_))
        ));
    }

    #[test]
    fn locality_probe_spread() {
        let c = random_image(32, 32, 1, 22);
        let s = random_image(32, 32, 1, 23);
        let scheme = HidingScheme::spread(1, 4).unwrap();
        let rm = locality_probe(&scheme, &c, &s, Rect::new(4, 4, 9, 9), ProbeMode::Remove).unwrap();
        assert_eq!(rm.out_region_err, 0.0);
        assert!(rm.in_region_err > 0.0);
    }

    #[test]
    fn redundancy_probe_lsb() {
        let c = random_image(16, 16, 3, 30);
        let s = random_image(16, 16, 3, 31);
        let scheme = HidingScheme::lsb(4).unwrap();
        let n = redundancy_probe(&scheme, &c, &s, (4, 4), 0.0, 0.0).unwrap();
        assert!(n <= 1);
        let gray = ImageBuf::filled(16, 16, 1, 0.5).unwrap();
        let gs = random_image(16, 16, 1, 32);
        let g_container = scheme.hide(&gray, &gs).unwrap();
        let keep = g_container.get(2, 3, 0);
        assert_eq!(
            redundancy_probe(&scheme, &gray, &gs, (2, 3), keep, 0.0).unwrap(),
            0
        );
        assert!(redundancy_probe(&scheme, &c, &s, (16, 0), 0.0, 0.0).is_err());
    }

    #[test]
    fn exhaustive_locality_small() {
        let c = random_image(16, 16, 1, 40);
        let s = random_image(16, 16, 1, 41);
        for scheme in [HidingScheme::lsb(4).unwrap(), HidingScheme::spread(1, 4).unwrap()] {
            let container = scheme.hide(&c, &s).unwrap();
            let clean = scheme.reveal(&container).unwrap();
            let r = scheme.locality_radius() as i64;
            for py in 0..16 {
                for px in 0..16 {
                    let mut ch = container.clone();
                    let v = to_byte(ch.get(px, py, 0)) ^ 0x0f;
                    ch.set(px, py, 0, from_byte(v));
                    let rev = scheme.reveal(&ch).unwrap();
                    for y in 0..16 {
                        for x in 0..16 {
                            if rev.get(x, y, 0) != clean.get(x, y, 0) {
                                let d = (x as i64 - px as i64)
                                    .abs()
                                    .max((y as i64 - py as i64).abs());
                                assert!(d <= r, "{} changed at distance {d}", scheme.name());
                            }
                        }
                    }
                }
            }
        }
    }
}
