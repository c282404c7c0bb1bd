//! Hole filling: the inpainter contract and its implementations.
//!
//! An [`InpaintRequest`] carries the masked image (holes already zero), the
//! removal mask and the two optional side inputs: a binary edge map of the
//! unmasked container and a heavily distorted copy of the hole content.

use std::collections::VecDeque;
use std::path::Path;
use std::process::Command;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::image::{convolve_separable, gaussian_kernel, load_image, save_binary, save_image, ImageBuf};
use crate::metrics::Distance;
use crate::removal::RemovalMask;

/// Binary raster, row-major, `true` on edge pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "edge map of {width}x{height} needs {} entries, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(EdgeMap {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|e| **e).count()
    }
}

#[derive(Clone, Debug)]
pub struct InpaintRequest {
    pub masked: ImageBuf,
    pub mask: RemovalMask,
    pub edge: Option<EdgeMap>,
    pub dr: Option<ImageBuf>,
}

impl InpaintRequest {
    pub fn new(masked: ImageBuf, mask: RemovalMask) -> Result<Self> {
        if masked.width() != mask.width() || masked.height() != mask.height() {
            return Err(Error::DimensionMismatch("mask vs masked image".into()));
        }
        let ch = masked.channels();
        for (i, keep) in mask.keep().iter().enumerate() {
            if !keep && masked.data()[i * ch..(i + 1) * ch].iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "hole pixel {} is not zeroed",
                    i
                )));
            }
        }
        Ok(InpaintRequest {
            masked,
            mask,
            edge: None,
            dr: None,
        })
    }

    pub fn with_edge(mut self, edge: EdgeMap) -> Result<Self> {
        if edge.width() != self.mask.width() || edge.height() != self.mask.height() {
            return Err(Error::DimensionMismatch("edge map vs mask".into()));
        }
        self.edge = Some(edge);
        Ok(self)
    }

    pub fn with_dr(mut self, dr: ImageBuf) -> Result<Self> {
        self.masked.check_same_shape(&dr, "dr vs masked image")?;
        let ch = dr.channels();
        for (i, keep) in self.mask.keep().iter().enumerate() {
            if *keep && dr.data()[i * ch..(i + 1) * ch].iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "dr is nonzero at kept pixel {i}"
                )));
            }
        }
        self.dr = Some(dr);
        Ok(self)
    }
}

pub trait Inpainter: Send + Sync {
    fn name(&self) -> &str;
    fn inpaint(&self, req: &InpaintRequest) -> Result<ImageBuf>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InpainterKind {
    Zero,
    Diffusion,
    External,
}

impl InpainterKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InpainterKind::Zero => "zero",
            InpainterKind::Diffusion => "diffusion",
            InpainterKind::External => "external",
        }
    }
}

impl std::str::FromStr for InpainterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(InpainterKind::Zero),
            "diffusion" => Ok(InpainterKind::Diffusion),
            "external" => Ok(InpainterKind::External),
            other => Err(Error::InvalidParameter(format!("unknown inpainter {other:?}"))),
        }
    }
}

/// Leaves holes at zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroFill;

pub fn zero_fill(req: &InpaintRequest) -> ImageBuf {
    req.masked.clone()
}

impl Inpainter for ZeroFill {
    fn name(&self) -> &str {
        "zero"
    }

    fn inpaint(&self, req: &InpaintRequest) -> Result<ImageBuf> {
        Ok(zero_fill(req))
    }
}

pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_DR_WEIGHT: f64 = 0.3;

/// Harmonic (Laplace) hole filling with kept pixels as boundary values.
#[derive(Clone, Copy, Debug)]
pub struct DiffusionInpainter {
    /// `None` picks `10 * n^2` where `n` is the longest hole run.
    pub max_iters: Option<usize>,
    pub tol: f64,
    /// Weight of the distorted-region input in the final hole values.
    pub dr_weight: f64,
}

impl Default for DiffusionInpainter {
    fn default() -> Self {
        DiffusionInpainter {
            max_iters: None,
            tol: DEFAULT_TOL,
            dr_weight: DEFAULT_DR_WEIGHT,
        }
    }
}

impl Inpainter for DiffusionInpainter {
    fn name(&self) -> &str {
        "diffusion"
    }

    fn inpaint(&self, req: &InpaintRequest) -> Result<ImageBuf> {
        let iters = self
            .max_iters
            .unwrap_or_else(|| default_max_iters(&req.mask));
        let out = diffusion_inpaint_weighted(req, iters, self.tol, self.dr_weight);
        if !out.converged {
            warn!(
                "diffusion did not converge within {} iterations (tol {})",
                out.iterations, self.tol
            );
        }
        Ok(out.image)
    }
}

#[derive(Clone, Debug)]
pub struct DiffusionOutcome {
    pub image: ImageBuf,
    pub converged: bool,
    /// Largest iteration count over channels.
    pub iterations: usize,
}

fn longest_hole_run(mask: &RemovalMask) -> usize {
    let (w, h) = (mask.width(), mask.height());
    let mut best = 0;
    for y in 0..h {
        let mut run = 0;
        for x in 0..w {
            run = if mask.is_kept(x, y) { 0 } else { run + 1 };
            best = best.max(run);
        }
    }
    for x in 0..w {
        let mut run = 0;
        for y in 0..h {
            run = if mask.is_kept(x, y) { 0 } else { run + 1 };
            best = best.max(run);
        }
    }
    best
}

pub fn default_max_iters(mask: &RemovalMask) -> usize {
    let n = longest_hole_run(mask).max(1);
    10 * n * n
}

/// Neighbour structure of the hole pixels.
struct HoleGraph {
    /// Pixel index of each hole unknown.
    pixels: Vec<usize>,
    /// CSR offsets into `links`.
    start: Vec<usize>,
    /// Either another unknown or a fixed pixel.
    links: Vec<Link>,
}

#[derive(Clone, Copy)]
enum Link {
    Hole(usize),
    Fixed(usize),
}

impl HoleGraph {
    fn build(mask: &RemovalMask, edge: Option<&EdgeMap>) -> Self {
        let (w, h) = (mask.width(), mask.height());
        let mut unknown = vec![usize::MAX; w * h];
        let mut pixels = Vec::new();
        for (i, keep) in mask.keep().iter().enumerate() {
            if !keep {
                unknown[i] = pixels.len();
                pixels.push(i);
            }
        }
        let is_edge = |i: usize| edge.is_some_and(|e| e.data()[i]);
        let neighbours = |p: usize| {
            let (x, y) = (p % w, p / w);
            let mut out = [usize::MAX; 4];
            if x > 0 {
                out[0] = p - 1;
            }
            if x + 1 < w {
                out[1] = p + 1;
            }
            if y > 0 {
                out[2] = p - w;
            }
            if y + 1 < h {
                out[3] = p + w;
            }
            out
        };
        let link = |q: usize| {
            if unknown[q] == usize::MAX {
                Link::Fixed(q)
            } else {
                Link::Hole(unknown[q])
            }
        };

        // edges cut every link between an edge pixel and a non-edge pixel
        let mut adj: Vec<Vec<Link>> = pixels
            .iter()
            .map(|&p| {
                neighbours(p)
                    .into_iter()
                    .filter(|&q| q != usize::MAX && is_edge(p) == is_edge(q))
                    .map(link)
                    .collect()
            })
            .collect();

        if edge.is_some() {
            // components cut off from every boundary value fall back to plain links
            let n = pixels.len();
            let mut comp = vec![usize::MAX; n];
            let mut queue = VecDeque::new();
            for seed in 0..n {
                if comp[seed] != usize::MAX {
                    continue;
                }
                let mut members = vec![seed];
                let mut anchored = false;
                comp[seed] = seed;
                queue.push_back(seed);
                while let Some(u) = queue.pop_front() {
                    for l in &adj[u] {
                        match *l {
                            Link::Fixed(_) => anchored = true,
                            Link::Hole(v) if comp[v] == usize::MAX => {
                                comp[v] = seed;
                                members.push(v);
                                queue.push_back(v);
                            }
                            Link::Hole(_) => {}
                        }
                    }
                }
                if !anchored {
                    for &u in &members {
                        adj[u] = neighbours(pixels[u])
                            .into_iter()
                            .filter(|&q| q != usize::MAX)
                            .map(link)
                            .collect();
                    }
                }
            }
        }

        let mut start = Vec::with_capacity(pixels.len() + 1);
        let mut links = Vec::new();
        start.push(0);
        for a in adj {
            links.extend(a);
            start.push(links.len());
        }
        HoleGraph {
            pixels,
            start,
            links,
        }
    }
}

/// Harmonic fill with `dr_weight` = 0.3 when a distorted-region input is present.
pub fn diffusion_inpaint(req: &InpaintRequest, max_iters: usize, tol: f64) -> DiffusionOutcome {
    diffusion_inpaint_weighted(req, max_iters, tol, DEFAULT_DR_WEIGHT)
}

/// Solves the discrete Laplace equation on the holes by successive
/// over-relaxation of the 4-neighbour average, stopping once the largest
/// per-pixel update drops below `tol`.
///
/// With an edge map, links between edge and non-edge pixels are cut so edges
/// act as internal boundaries. With a distorted-region input the solve starts
/// from it and the final hole value is
/// `(1 - dr_weight) * harmonic + dr_weight * dr`.
pub fn diffusion_inpaint_weighted(
    req: &InpaintRequest,
    max_iters: usize,
    tol: f64,
    dr_weight: f64,
) -> DiffusionOutcome {
    let masked = &req.masked;
    let ch = masked.channels();
    let graph = HoleGraph::build(&req.mask, req.edge.as_ref());
    let n = graph.pixels.len();
    if n == 0 {
        return DiffusionOutcome {
            image: masked.clone(),
            converged: true,
            iterations: 0,
        };
    }
    let run = longest_hole_run(&req.mask).max(1) as f64;
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (run + 1.0)).sin());

    let mut out = masked.data().to_vec();
    let mut converged = true;
    let mut max_iterations = 0;
    for c in 0..ch {
        let value = |p: usize| masked.data()[p * ch + c];
        let mut fixed_sum = vec![0.0; n];
        let mut degree = vec![0usize; n];
        let mut boundary = (0.0, 0usize);
        for u in 0..n {
            for l in &graph.links[graph.start[u]..graph.start[u + 1]] {
                degree[u] += 1;
                if let Link::Fixed(q) = *l {
                    fixed_sum[u] += value(q);
                    boundary.0 += value(q);
                    boundary.1 += 1;
                }
            }
        }
        let init = if boundary.1 > 0 {
            boundary.0 / boundary.1 as f64
        } else {
            0.0
        };
        let mut x: Vec<f64> = match &req.dr {
            Some(dr) => graph.pixels.iter().map(|&p| dr.data()[p * ch + c]).collect(),
            None => vec![init; n],
        };

        let mut iterations = 0;
        let mut done = false;
        while iterations < max_iters {
            iterations += 1;
            let mut max_delta: f64 = 0.0;
            for u in 0..n {
                if degree[u] == 0 {
                    continue;
                }
                let mut acc = fixed_sum[u];
                for l in &graph.links[graph.start[u]..graph.start[u + 1]] {
                    if let Link::Hole(v) = *l {
                        acc += x[v];
                    }
                }
                let target = acc / degree[u] as f64;
                let delta = omega * (target - x[u]);
                x[u] += delta;
                max_delta = max_delta.max(delta.abs());
            }
            if max_delta < tol {
                done = true;
                break;
            }
        }
        converged &= done;
        max_iterations = max_iterations.max(iterations);

        for (u, &p) in graph.pixels.iter().enumerate() {
            let harmonic = x[u];
            let v = match &req.dr {
                Some(dr) => (1.0 - dr_weight) * harmonic + dr_weight * dr.data()[p * ch + c],
                None => harmonic,
            };
            out[p * ch + c] = v.clamp(0.0, 1.0);
        }
    }
    DiffusionOutcome {
        image: ImageBuf::new(masked.width(), masked.height(), ch, out).expect("shape preserved"),
        converged,
        iterations: max_iterations,
    }
}

pub const DEFAULT_CANNY_SIGMA: f64 = 2.0;
pub const DEFAULT_CANNY_LO: f64 = 0.1;
pub const DEFAULT_CANNY_HI: f64 = 0.2;

/// Canny edges on the channel-mean plane. Thresholds apply to the gradient
/// magnitude normalized by its maximum over the image.
pub fn extract_edges(img: &ImageBuf, sigma: f64, lo: f64, hi: f64) -> Result<EdgeMap> {
    if !(lo >= 0.0 && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "canny thresholds need 0 <= lo < hi, got lo={lo} hi={hi}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let ksize = 2 * (3.0 * sigma).ceil() as usize + 1;
    let kernel = gaussian_kernel(ksize, sigma)?;
    let smooth = convolve_separable(&img.gray_plane(), w, h, &kernel);

    let at = |x: i64, y: i64| {
        let xx = x.clamp(0, w as i64 - 1) as usize;
        let yy = y.clamp(0, h as i64 - 1) as usize;
        smooth[yy * w + xx]
    };
    let mut mag = vec![0.0; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            mag[i] = gx.hypot(gy);
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            dir[i] = if !(22.5..157.5).contains(&angle) {
                0
            } else if angle < 67.5 {
                1
            } else if angle < 112.5 {
                2
            } else {
                3
            };
        }
    }
    let peak = mag.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return EdgeMap::new(w, h, vec![false; w * h]);
    }

    let m = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut thin = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            let ((nx, ny), (px, py)) = match dir[i] {
                0 => ((x - 1, y), (x + 1, y)),
                1 => ((x - 1, y - 1), (x + 1, y + 1)),
                2 => ((x, y - 1), (x, y + 1)),
                _ => ((x + 1, y - 1), (x - 1, y + 1)),
            };
            // strict on one side so plateaus of width two thin to one pixel
            if mag[i] > m(nx, ny) && mag[i] >= m(px, py) {
                thin[i] = mag[i] / peak;
            }
        }
    }

    let mut edges = vec![false; w * h];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &v) in thin.iter().enumerate() {
        if v >= hi {
            edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (xx, yy) = (x + dx, y + dy);
                if xx < 0 || yy < 0 || xx >= w as i64 || yy >= h as i64 {
                    continue;
                }
                let j = yy as usize * w + xx as usize;
                if !edges[j] && thin[j] >= lo {
                    edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    EdgeMap::new(w, h, edges)
}

/// `clip(c' + delta * n)` on hole pixels, zero on kept pixels. One normal draw
/// per stored value in storage order, independent of the mask.
pub fn make_dr(container: &ImageBuf, mask: &RemovalMask, delta: f64, seed: u64) -> Result<ImageBuf> {
    if container.width() != mask.width() || container.height() != mask.height() {
        return Err(Error::DimensionMismatch("container vs mask".into()));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
    }
    if delta == 0.0 {
        warn!("distorted-region input with delta = 0 passes hole content through unchanged");
    }
    let ch = container.channels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = container
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let n: f64 = StandardNormal.sample(&mut rng);
            if mask.keep()[i / ch] {
                0.0
            } else {
                (v + delta * n).clamp(0.0, 1.0)
            }
        })
        .collect();
    ImageBuf::new(container.width(), container.height(), ch, data)
}

/// Runs an external tool over a directory of PNGs.
///
/// The directory holds `masked.png`, `mask.png` (0 = hole, 255 = keep) and,
/// when present, `edge.png` (0/255) and `dr.png`. The command template is
/// split on whitespace and the directory path appended as the last argument.
/// The tool must write `result.png` with the same size and channel count.
#[derive(Clone, Debug)]
pub struct ExternalInpainter {
    pub command: String,
}

impl ExternalInpainter {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalInpainter {
            command: command.into(),
        }
    }
}

impl Inpainter for ExternalInpainter {
    fn name(&self) -> &str {
        "external"
    }

    fn inpaint(&self, req: &InpaintRequest) -> Result<ImageBuf> {
        external_inpaint(&self.command, req)
    }
}

pub fn external_inpaint(command: &str, req: &InpaintRequest) -> Result<ImageBuf> {
    let mut parts = command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::ExternalProcess("empty command".into()))?;
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    write_request(req, dir.path())?;

    let output = Command::new(program)
        .args(parts)
        .arg(dir.path())
        .output()
        .map_err(|e| Error::ExternalProcess(format!("could not run {program:?}: {e}")))?;
    if !output.status.success() {
        return Err(Error::ExternalProcess(format!(
            "{program:?} exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }

    let result_path = dir.path().join("result.png");
    if !result_path.exists() {
        return Err(Error::ExternalProtocol("result.png was not written".into()));
    }
    let result = load_image(&result_path)
        .map_err(|e| Error::ExternalProtocol(format!("unreadable result.png: {e}")))?;
    if !result.same_shape(&req.masked) {
        return Err(Error::ExternalProtocol(format!(
            "result.png is {}x{}x{}, expected {}x{}x{}",
            result.width(),
            result.height(),
            result.channels(),
            req.masked.width(),
            req.masked.height(),
            req.masked.channels()
        )));
    }
    let ch = result.channels();
    for (i, keep) in req.mask.keep().iter().enumerate() {
        if !keep {
            continue;
        }
        for c in 0..ch {
            let expected = req.masked.data()[i * ch + c];
            let actual = result.data()[i * ch + c];
            if (expected - actual).abs() > 1.0 / 255.0 + 1e-9 {
                return Err(Error::KeptPixelViolation {
                    x: i % result.width(),
                    y: i / result.width(),
                    channel: c,
                    expected,
                    actual,
                });
            }
        }
    }
    Ok(result)
}

fn write_request(req: &InpaintRequest, dir: &Path) -> Result<()> {
    let (w, h) = (req.mask.width(), req.mask.height());
    save_image(&req.masked, dir.join("masked.png"))?;
    save_binary(w, h, req.mask.keep(), dir.join("mask.png"))?;
    if let Some(edge) = &req.edge {
        save_binary(w, h, edge.data(), dir.join("edge.png"))?;
    }
    if let Some(dr) = &req.dr {
        save_image(dr, dir.join("dr.png"))?;
    }
    Ok(())
}

/// Mean `D(x, I(x ⊗ M))` over `trials` uniformly placed `l`x`l` holes.
/// Trial `i` uses image `i mod |corpus|`.
pub fn estimate_gamma(
    inpainter: &dyn Inpainter,
    corpus: &[ImageBuf],
    l: usize,
    trials: usize,
    metric: Distance,
    seed: u64,
) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for t in 0..trials {
        let x = &corpus[t % corpus.len()];
        if l == 0 || l > x.width() || l > x.height() {
            return Err(Error::InvalidParameter(format!(
                "hole side {l} does not fit a {}x{} image",
                x.width(),
                x.height()
            )));
        }
        let x0 = rng.random_range(0..=x.width() - l);
        let y0 = rng.random_range(0..=x.height() - l);
        let mut mask = RemovalMask::all_kept(x.width(), x.height());
        mask.remove_rect(x0, y0, x0 + l, y0 + l);
        let req = InpaintRequest::new(mask.apply(x)?, mask)?;
        let out = inpainter.inpaint(&req)?;
        total += metric.distance(x, &out)?;
    }
    Ok(total / trials as f64)
}
