//! Grid partitioning, box removal, the two schedulers and the attack driver.
//!
//! The container is zero-padded to a multiple of the cell side `k` and cut
//! into `k`x`k` cells. Every phase zeroes an `l`x`l` box around each of its
//! cells (always starting from the original padded container), asks the
//! inpainter to fill the holes, and keeps only the cell interiors of the
//! result. Once every cell has been visited the mosaic is cropped back.
//!
//! - single-cell schedule: one cell per phase, row-major.
//! - residue schedule: phase `(a, b)` takes every cell with
//!   `row % (d+1) == a` and `col % (d+1) == b`, giving `(d+1)^2` phases for
//!   any image size.

use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, crop, gaussian_blur, median_blur, pad_zero, ImageBuf, PadInfo};
use crate::inpaint::{
    extract_edges, make_dr, InpaintRequest, Inpainter, InpainterKind, DEFAULT_CANNY_HI,
    DEFAULT_CANNY_LO, DEFAULT_CANNY_SIGMA,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    /// `(m, n)` = `(row * k + k / 2, col * k + k / 2)`, i.e. `(y, x)`.
    pub fn center(&self, k: usize) -> (usize, usize) {
        (self.row * k + k / 2, self.col * k + k / 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegionGrid {
    pub padded_width: usize,
    pub padded_height: usize,
    pub k: usize,
    pub pad: PadInfo,
}

impl RegionGrid {
    pub fn rows(&self) -> usize {
        self.padded_height / self.k
    }

    pub fn cols(&self) -> usize {
        self.padded_width / self.k
    }

    pub fn cell_count(&self) -> usize {
        self.rows() * self.cols()
    }

    /// Row-major.
    pub fn cells(&self) -> Vec<Cell> {
        (0..self.rows())
            .flat_map(|row| (0..self.cols()).map(move |col| Cell { row, col }))
            .collect()
    }
}

pub fn grid_partition(width: usize, height: usize, k: usize) -> Result<RegionGrid> {
    if k == 0 {
        return Err(Error::InvalidParameter("cell side k must be >= 1".into()));
    }
    let pad = PadInfo::for_cell(width, height, k);
    Ok(RegionGrid {
        padded_width: pad.padded_width(),
        padded_height: pad.padded_height(),
        k,
        pad,
    })
}

/// Binary raster with `true` = kept, `false` = removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovalMask {
    width: usize,
    height: usize,
    keep: Vec<bool>,
}

impl RemovalMask {
    pub fn all_kept(width: usize, height: usize) -> Self {
        RemovalMask {
            width,
            height,
            keep: vec![true; width * height],
        }
    }

    pub fn from_keep(width: usize, height: usize, keep: Vec<bool>) -> Result<Self> {
        if keep.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask of {width}x{height} needs {} entries, got {}",
                width * height,
                keep.len()
            )));
        }
        Ok(RemovalMask {
            width,
            height,
            keep,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn is_kept(&self, x: usize, y: usize) -> bool {
        self.keep[y * self.width + x]
    }

    pub fn removed_count(&self) -> usize {
        self.keep.iter().filter(|k| !**k).count()
    }

    /// Removes `[x0, x1) x [y0, y1)`, clipped to the raster.
    pub fn remove_rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize) {
        for y in y0.min(self.height)..y1.min(self.height) {
            for x in x0.min(self.width)..x1.min(self.width) {
                self.keep[y * self.width + x] = false;
            }
        }
    }

    /// Image with every removed pixel zeroed in all channels.
    pub fn apply(&self, img: &ImageBuf) -> Result<ImageBuf> {
        if img.width() != self.width || img.height() != self.height {
            return Err(Error::DimensionMismatch("mask vs image".into()));
        }
        let ch = img.channels();
        let mut data = img.data().to_vec();
        for (i, keep) in self.keep.iter().enumerate() {
            if !keep {
                data[i * ch..(i + 1) * ch].fill(0.0);
            }
        }
        ImageBuf::new(self.width, self.height, ch, data)
    }
}

fn cell_of_center(center: (usize, usize), k: usize, img: &ImageBuf) -> Result<Cell> {
    let (m, n) = center;
    let half = k / 2;
    let valid = m >= half
        && n >= half
        && (m - half).is_multiple_of(k)
        && (n - half).is_multiple_of(k)
        && m - half + k <= img.height()
        && n - half + k <= img.width();
    if !valid {
        return Err(Error::OutOfBounds(format!(
            "({m}, {n}) is not a cell center for k={k} in {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(Cell {
        row: (m - half) / k,
        col: (n - half) / k,
    })
}

/// Zeroes the box that extends each listed cell by `margin` pixels on every
/// side, clipped to the image. `margin = 0` removes just the cells.
pub fn zero_boxes(
    img: &ImageBuf,
    centers: &[(usize, usize)],
    k: usize,
    margin: usize,
) -> Result<(ImageBuf, RemovalMask)> {
    let mut mask = RemovalMask::all_kept(img.width(), img.height());
    for &center in centers {
        let cell = cell_of_center(center, k, img)?;
        let (y0, x0) = (cell.row * k, cell.col * k);
        mask.remove_rect(
            x0.saturating_sub(margin),
            y0.saturating_sub(margin),
            x0 + k + margin,
            y0 + k + margin,
        );
    }
    Ok((mask.apply(img)?, mask))
}

/// Zeroes an `l`x`l` box centred on each listed cell, clipped at the borders.
pub fn removal(
    img: &ImageBuf,
    centers: &[(usize, usize)],
    k: usize,
    l: usize,
) -> Result<(ImageBuf, RemovalMask)> {
    if l <= k {
        return Err(Error::InvalidParameter(format!(
            "removal box l={l} must exceed cell side k={k}"
        )));
    }
    if !(l - k).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "l - k must be even to centre the box, got l={l} k={k}"
        )));
    }
    zero_boxes(img, centers, k, (l - k) / 2)
}

/// One singleton phase per cell, row-major.
pub fn peel_schedule(grid: &RegionGrid) -> Vec<Vec<Cell>> {
    grid.cells().into_iter().map(|c| vec![c]).collect()
}

/// `(d+1)^2` residue-class phases in lexicographic `(a, b)` order.
pub fn peelo_schedule(grid: &RegionGrid, d: usize, l: usize) -> Result<Vec<Vec<Cell>>> {
    if d == 0 {
        return Err(Error::InvalidParameter("phase stride d must be >= 1".into()));
    }
    let period = d + 1;
    if l >= period * grid.k {
        return Err(Error::InvalidParameter(format!(
            "l={l} must be below (d+1)k={} so same-phase boxes stay apart",
            period * grid.k
        )));
    }
    let mut phases = vec![Vec::new(); period * period];
    for cell in grid.cells() {
        phases[(cell.row % period) * period + cell.col % period].push(cell);
    }
    Ok(phases)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackMode {
    Peel,
    PeelO,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    pub k: usize,
    pub l: usize,
    pub d: usize,
    pub delta: f64,
    pub seed: u64,
    pub inpainter: InpainterKind,
    pub use_edge: bool,
    pub use_dr: bool,
    pub canny_sigma: f64,
    pub canny_lo: f64,
    pub canny_hi: f64,
}

impl AttackConfig {
    /// k=25, l=35, diffusion inpainting, no side inputs.
    pub fn peel() -> Self {
        AttackConfig {
            k: 25,
            l: 35,
            d: 1,
            delta: 0.0,
            seed: 0,
            inpainter: InpainterKind::Diffusion,
            use_edge: false,
            use_dr: false,
            canny_sigma: DEFAULT_CANNY_SIGMA,
            canny_lo: DEFAULT_CANNY_LO,
            canny_hi: DEFAULT_CANNY_HI,
        }
    }

    /// k=50, d=2, l=60, delta=0.05 with edge and distorted-region inputs.
    pub fn peelo() -> Self {
        AttackConfig {
            k: 50,
            l: 60,
            d: 2,
            delta: 0.05,
            use_edge: true,
            use_dr: true,
            ..Self::peel()
        }
    }

    pub fn margin(&self) -> usize {
        (self.l - self.k) / 2
    }

    pub fn validate(&self, mode: AttackMode) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if self.l <= self.k {
            return Err(Error::InvalidParameter(format!(
                "l={} must exceed k={}",
                self.l, self.k
            )));
        }
        if !(self.l - self.k).is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "l - k must be even, got l={} k={}",
                self.l, self.k
            )));
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta must be >= 0, got {}",
                self.delta
            )));
        }
        if mode == AttackMode::PeelO {
            if self.d == 0 {
                return Err(Error::InvalidParameter("d must be >= 1".into()));
            }
            if self.l >= (self.d + 1) * self.k {
                return Err(Error::InvalidParameter(format!(
                    "l={} must be below (d+1)k={}",
                    self.l,
                    (self.d + 1) * self.k
                )));
            }
        }
        Ok(())
    }
}

/// SplitMix64 of `base` mixed with `index`; decorrelates per-phase and
/// per-image seeds derived from one configured seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct AttackTrace {
    /// Attacked container, cropped to the input size.
    pub image: ImageBuf,
    /// Phase index that wrote each pixel of the padded canvas, row-major.
    pub provenance: Vec<usize>,
    pub grid: RegionGrid,
    pub phases: usize,
}

pub fn run_attack(
    container: &ImageBuf,
    cfg: &AttackConfig,
    mode: AttackMode,
    inpainter: &dyn Inpainter,
) -> Result<ImageBuf> {
    run_attack_traced(container, cfg, mode, inpainter).map(|t| t.image)
}

pub fn run_attack_traced(
    container: &ImageBuf,
    cfg: &AttackConfig,
    mode: AttackMode,
    inpainter: &dyn Inpainter,
) -> Result<AttackTrace> {
    cfg.validate(mode)?;
    let grid = grid_partition(container.width(), container.height(), cfg.k)?;
    let phases = match mode {
        AttackMode::Peel => peel_schedule(&grid),
        AttackMode::PeelO => peelo_schedule(&grid, cfg.d, cfg.l)?,
    };
    run_phases(container, cfg, &grid, &phases, cfg.margin(), inpainter)
}

/// Drives an explicit phase list with an explicit box margin. Used by
/// [`run_attack_traced`]; callers may pass `margin = 0` to study under-sized
/// boxes, which the validated entry points refuse.
pub fn run_phases(
    container: &ImageBuf,
    cfg: &AttackConfig,
    grid: &RegionGrid,
    phases: &[Vec<Cell>],
    margin: usize,
    inpainter: &dyn Inpainter,
) -> Result<AttackTrace> {
    let (padded, pad) = pad_zero(container, grid.k);
    let (w, h, ch) = (padded.width(), padded.height(), padded.channels());
    let k = grid.k;
    let edges = if cfg.use_edge {
        Some(extract_edges(&padded, cfg.canny_sigma, cfg.canny_lo, cfg.canny_hi)?)
    } else {
        None
    };

    let mut mosaic = vec![0.0; w * h * ch];
    let mut provenance = vec![usize::MAX; w * h];
    for (pi, phase) in phases.iter().enumerate() {
        let centers: Vec<(usize, usize)> = phase.iter().map(|c| c.center(k)).collect();
        let (masked, mask) = zero_boxes(&padded, &centers, k, margin)?;
        let phase_err = |source: Error| Error::Phase {
            phase: pi,
            source: Box::new(source),
        };
        let dr = if cfg.use_dr {
            Some(make_dr(&padded, &mask, cfg.delta, derive_seed(cfg.seed, pi as u64)).map_err(phase_err)?)
        } else {
            None
        };
        let mut req = InpaintRequest::new(masked, mask).map_err(phase_err)?;
        if let Some(e) = &edges {
            req = req.with_edge(e.clone()).map_err(phase_err)?;
        }
        if let Some(dr) = dr {
            req = req.with_dr(dr).map_err(phase_err)?;
        }
        let repaired = inpainter.inpaint(&req).map_err(phase_err)?;
        if !repaired.same_shape(&padded) {
            return Err(phase_err(Error::DimensionMismatch(
                "inpainter output vs padded container".into(),
            )));
        }
        for cell in phase {
            for y in cell.row * k..(cell.row + 1) * k {
                let row = y * w;
                let (x0, x1) = (cell.col * k, (cell.col + 1) * k);
                mosaic[(row + x0) * ch..(row + x1) * ch]
                    .copy_from_slice(&repaired.data()[(row + x0) * ch..(row + x1) * ch]);
                for p in &mut provenance[row + x0..row + x1] {
                    debug_assert_eq!(*p, usize::MAX, "cell scheduled twice");
                    *p = pi;
                }
            }
        }
    }
    let image = crop(&ImageBuf::new(w, h, ch, mosaic)?, &pad)?;
    Ok(AttackTrace {
        image,
        provenance,
        grid: *grid,
        phases: phases.len(),
    })
}

pub const GB_KERNEL: usize = 5;
pub const GB_SIGMA: f64 = 3.0;
pub const MB_KERNEL: usize = 5;
pub const GN_DELTAS: [f64; 2] = [0.03, 0.05];

pub fn gn_attack(container: &ImageBuf, delta: f64, seed: u64) -> ImageBuf {
    add_gaussian_noise(container, delta, seed)
}

pub fn gb_attack(container: &ImageBuf) -> ImageBuf {
    gaussian_blur(container, GB_KERNEL, GB_SIGMA).expect("fixed odd kernel")
}

pub fn mb_attack(container: &ImageBuf) -> ImageBuf {
    median_blur(container, MB_KERNEL).expect("fixed odd kernel")
}

/// Any attack the harness can run against a container.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Attack {
    None,
    Peel(AttackConfig),
    PeelO(AttackConfig),
    GaussianNoise { delta: f64, seed: u64 },
    GaussianBlur,
    MedianBlur,
}

impl Attack {
    pub fn name(&self) -> &'static str {
        match self {
            Attack::None => "none",
            Attack::Peel(_) => "peel",
            Attack::PeelO(_) => "peelo",
            Attack::GaussianNoise { .. } => "gn",
            Attack::GaussianBlur => "gb",
            Attack::MedianBlur => "mb",
        }
    }

    pub fn config(&self) -> Option<&AttackConfig> {
        match self {
            Attack::Peel(c) | Attack::PeelO(c) => Some(c),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            Attack::Peel(c) | Attack::PeelO(c) => c.seed,
            Attack::GaussianNoise { seed, .. } => seed,
            _ => 0,
        }
    }

    /// Same attack with its random seed replaced.
    pub fn with_seed(&self, seed: u64) -> Attack {
        match *self {
            Attack::Peel(c) => Attack::Peel(AttackConfig { seed, ..c }),
            Attack::PeelO(c) => Attack::PeelO(AttackConfig { seed, ..c }),
            Attack::GaussianNoise { delta, .. } => Attack::GaussianNoise { delta, seed },
            other => other,
        }
    }

    /// `inpainter` is only consulted by the remove-and-inpaint attacks.
    pub fn apply(&self, container: &ImageBuf, inpainter: &dyn Inpainter) -> Result<ImageBuf> {
        match self {
            Attack::None => Ok(container.clone()),
            Attack::Peel(cfg) => run_attack(container, cfg, AttackMode::Peel, inpainter),
            Attack::PeelO(cfg) => run_attack(container, cfg, AttackMode::PeelO, inpainter),
            Attack::GaussianNoise { delta, seed } => Ok(gn_attack(container, *delta, *seed)),
            Attack::GaussianBlur => Ok(gb_attack(container)),
            Attack::MedianBlur => Ok(mb_attack(container)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hiding::random_image;
    use crate::inpaint::{DiffusionInpainter, ZeroFill};
    use std::collections::BTreeMap;

    #[test]
    fn grid_counts() {
        let g = grid_partition(256, 256, 25).unwrap();
        assert_eq!((g.padded_width, g.padded_height, g.cell_count()), (275, 275, 121));
        let g = grid_partition(256, 256, 50).unwrap();
        assert_eq!((g.padded_width, g.cell_count()), (300, 36));
        assert_eq!(grid_partition(25, 25, 25).unwrap().cell_count(), 1);
        assert!(grid_partition(10, 10, 0).is_err());
    }

    #[test]
    fn interior_box_area() {
        let img = ImageBuf::filled(275, 275, 3, 0.5).unwrap();
        let center = Cell { row: 5, col: 5 }.center(25);
        let (masked, mask) = removal(&img, &[center], 25, 35).unwrap();
        assert_eq!(mask.removed_count(), 35 * 35);
        let zeros = masked.data().iter().filter(|v| **v == 0.0).count();
        assert_eq!(zeros, 35 * 35 * 3);
    }

    #[test]
    fn corner_box_is_clipped() {
        let img = ImageBuf::filled(275, 275, 1, 0.5).unwrap();
        let (_, mask) = removal(&img, &[Cell { row: 0, col: 0 }.center(25)], 25, 35).unwrap();
        // box spans [-5, 30) on both axes
        assert_eq!(mask.removed_count(), 30 * 30);
        let (_, mask) = removal(&img, &[Cell { row: 10, col: 0 }.center(25)], 25, 35).unwrap();
        // rows [245, 280) clip to [245, 275)
        assert_eq!(mask.removed_count(), 30 * 30);
    }

    #[test]
    fn all_centers_clear_image() {
        let img = random_image(100, 75, 3, 1);
        let grid = grid_partition(100, 75, 25).unwrap();
        let centers: Vec<_> = grid.cells().iter().map(|c| c.center(25)).collect();
        let (masked, mask) = removal(&img, &centers, 25, 35).unwrap();
        assert_eq!(mask.removed_count(), 100 * 75);
        assert!(masked.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn removal_rejects_bad_boxes() {
        let img = ImageBuf::filled(50, 50, 1, 0.5).unwrap();
        assert!(removal(&img, &[(12, 12)], 25, 25).is_err());
        assert!(removal(&img, &[(12, 12)], 25, 36).is_err());
        assert!(removal(&img, &[(13, 12)], 25, 35).is_err());
        assert!(removal(&img, &[(62, 12)], 25, 35).is_err());
    }

    #[test]
    fn peel_schedule_counts() {
        let g = grid_partition(256, 256, 25).unwrap();
        let s = peel_schedule(&g);
        assert_eq!(s.len(), 121);
        let flat: Vec<Cell> = s.into_iter().flatten().collect();
        assert_eq!(flat, g.cells());
        assert_eq!(peel_schedule(&grid_partition(25, 25, 25).unwrap()).len(), 1);
    }

    #[test]
    fn peelo_schedule_counts() {
        let g = grid_partition(256, 256, 50).unwrap();
        let s = peelo_schedule(&g, 2, 60).unwrap();
        assert_eq!(s.len(), 9);
        assert!(s.iter().all(|p| p.len() == 4));
        let g_big = grid_partition(1000, 900, 50).unwrap();
        assert_eq!(peelo_schedule(&g_big, 2, 60).unwrap().len(), 9);
        assert!(peelo_schedule(&g, 0, 60).is_err());
        assert!(peelo_schedule(&g, 1, 100).is_err());
    }

    #[test]
    fn same_phase_gap() {
        // d=1, k=50, l=60: gap between same-phase boxes is 2*50 - 60 = 40
        let g = grid_partition(400, 400, 50).unwrap();
        let img = ImageBuf::filled(400, 400, 1, 1.0).unwrap();
        for phase in peelo_schedule(&g, 1, 60).unwrap() {
            let centers: Vec<_> = phase.iter().map(|c| c.center(50)).collect();
            let (_, mask) = removal(&img, &centers, 50, 60).unwrap();
            for y in 0..400 {
                let mut run = 0;
                let mut runs = vec![];
                let mut seen_hole = false;
                for x in 0..400 {
                    if mask.is_kept(x, y) {
                        run += 1;
                    } else {
                        if seen_hole && run > 0 {
                            runs.push(run);
                        }
                        seen_hole = true;
                        run = 0;
                    }
                }
                assert!(runs.iter().all(|&r| r == 40), "{runs:?}");
            }
        }
    }

    #[test]
    fn zero_fill_attack_is_black() {
        let img = random_image(80, 60, 3, 3);
        for (mode, cfg) in [
            (AttackMode::Peel, AttackConfig { k: 20, l: 24, ..AttackConfig::peel() }),
            (AttackMode::PeelO, AttackConfig { k: 20, l: 24, d: 1, ..AttackConfig::peelo() }),
        ] {
            let out = run_attack(&img, &cfg, mode, &ZeroFill).unwrap();
            assert_eq!((out.width(), out.height()), (80, 60));
            assert!(out.data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn coverage_maps_match() {
        let img = random_image(70, 50, 1, 4);
        let base = AttackConfig {
            k: 10,
            l: 14,
            d: 2,
            ..AttackConfig::peel()
        };
        let inp = DiffusionInpainter::default();
        let a = run_attack_traced(&img, &base, AttackMode::Peel, &inp).unwrap();
        let b = run_attack_traced(&img, &base, AttackMode::PeelO, &inp).unwrap();
        assert_eq!(a.phases, 35);
        assert_eq!(b.phases, 9);
        assert!(a.provenance.iter().all(|p| *p < a.phases));
        assert!(b.provenance.iter().all(|p| *p < b.phases));
        // every cell is written exactly once, by a single phase
        let cells = |t: &AttackTrace| {
            let mut m = BTreeMap::new();
            for (i, p) in t.provenance.iter().enumerate() {
                let (x, y) = (i % 70, i / 70);
                m.entry((y / 10, x / 10)).or_insert_with(Vec::new).push(*p);
            }
            m
        };
        let (ca, cb) = (cells(&a), cells(&b));
        assert_eq!(ca.keys().collect::<Vec<_>>(), cb.keys().collect::<Vec<_>>());
        for v in ca.values().chain(cb.values()) {
            assert!(v.iter().all(|p| *p == v[0]));
        }
    }

    #[test]
    fn config_validation() {
        assert!(AttackConfig::peel().validate(AttackMode::Peel).is_ok());
        assert!(AttackConfig::peelo().validate(AttackMode::PeelO).is_ok());
        let bad = AttackConfig { l: 25, ..AttackConfig::peel() };
        assert!(bad.validate(AttackMode::Peel).is_err());
        let odd = AttackConfig { l: 36, ..AttackConfig::peel() };
        assert!(odd.validate(AttackMode::Peel).is_err());
        let wide = AttackConfig { l: 150, ..AttackConfig::peelo() };
        assert!(wide.validate(AttackMode::PeelO).is_err());
        assert!(wide.validate(AttackMode::Peel).is_ok());
    }

    #[test]
    fn phase_errors_carry_index() {
        struct FailSecond;
        impl Inpainter for FailSecond {
            fn name(&self) -> &str {
                "fail"
            }
            fn inpaint(&self, req: &InpaintRequest) -> Result<ImageBuf> {
                if req.mask.is_kept(0, 0) {
                    Err(Error::ExternalProcess("boom".into()))
                } else {
                    Ok(req.masked.clone())
                }
            }
        }
        let img = random_image(40, 40, 1, 0);
        let cfg = AttackConfig { k: 20, l: 24, ..AttackConfig::peel() };
        match run_attack(&img, &cfg, AttackMode::Peel, &FailSecond) {
            Err(Error::Phase { phase, .. }) => assert_eq!(phase, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn baselines() {
        let flat = ImageBuf::filled(20, 20, 3, 0.6).unwrap();
        assert!(gb_attack(&flat).data().iter().all(|v| (v - 0.6).abs() < 1e-15));
        let salted = ImageBuf::from_fn(20, 20, 1, |x, y, _| if (x, y) == (7, 9) { 1.0 } else { 0.3 }).unwrap();
        assert!(mb_attack(&salted).data().iter().all(|v| *v == 0.3));
        assert_eq!(GN_DELTAS, [0.03, 0.05]);
        assert_eq!(gn_attack(&flat, 0.03, 1), add_gaussian_noise(&flat, 0.03, 1));
        assert_eq!(Attack::None.apply(&flat, &ZeroFill).unwrap(), flat);
    }
}
