//! Full-reference distances: RMSE, PSNR and pixel-domain multiscale VIF.

use crate::error::{Error, Result};
use crate::image::{convolve_separable, gaussian_kernel, ImageBuf};

/// Norm-induced distances used wherever a true metric is required.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    Rmse,
    MeanAbs,
}

impl Distance {
    pub fn distance(&self, a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
        match self {
            Distance::Rmse => rmse(a, b),
            Distance::MeanAbs => mean_abs(a, b),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Distance::Rmse => "rmse",
            Distance::MeanAbs => "mae",
        }
    }
}

fn mse(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    a.check_same_shape(b, "metric inputs")?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.data().len() as f64)
}

pub fn rmse(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    Ok(mse(a, b)?.sqrt())
}

pub fn mean_abs(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    a.check_same_shape(b, "metric inputs")?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.data().len() as f64)
}

/// PSNR in dB for unit peak signal; `f64::INFINITY` for identical images.
pub fn psnr(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / m).log10())
    }
}

const VIF_SCALES: usize = 4;
const VIF_NOISE_VAR: f64 = 2.0;
const VIF_EPS: f64 = 1e-10;

fn decimate(plane: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
    let mut out = Vec::with_capacity(nw * nh);
    for y in (0..h).step_by(2) {
        for x in (0..w).step_by(2) {
            out.push(plane[y * w + x]);
        }
    }
    (out, nw, nh)
}

/// Visual information fidelity of `dist` against `reference`.
///
/// Pixel-domain, four scales on the `[0, 255]` value scale. Scale `s`
/// (1-based) uses a Gaussian window of side `2^(5-s) + 1` with standard
/// deviation side/5; scales after the first are obtained by smoothing with
/// that window and keeping every second sample. Filtering replicates edges,
/// so planes keep their size until decimation.
///
/// Not symmetric in its arguments.
pub fn vif(reference: &ImageBuf, dist: &ImageBuf) -> Result<f64> {
    reference.check_same_shape(dist, "vif inputs")?;
    if reference.width().min(reference.height()) < 32 {
        return Err(Error::InvalidImage(format!(
            "vif needs both dimensions >= 32, got {}x{}",
            reference.width(),
            reference.height()
        )));
    }
    // the regularized ratio is 1 - O(eps) for identical inputs; report it exactly
    if reference.data() == dist.data() {
        return Ok(1.0);
    }
    let mut r: Vec<f64> = reference.gray_plane().iter().map(|v| v * 255.0).collect();
    let mut d: Vec<f64> = dist.gray_plane().iter().map(|v| v * 255.0).collect();
    let (mut w, mut h) = (reference.width(), reference.height());
    let mut num = 0.0;
    let mut den = 0.0;

    for scale in 1..=VIF_SCALES {
        let n = (1usize << (VIF_SCALES + 1 - scale)) + 1;
        let win = gaussian_kernel(n, n as f64 / 5.0)?;
        if scale > 1 {
            let (rr, nw, nh) = decimate(&convolve_separable(&r, w, h, &win), w, h);
            let (dd, _, _) = decimate(&convolve_separable(&d, w, h, &win), w, h);
            r = rr;
            d = dd;
            w = nw;
            h = nh;
        }
        let mu1 = convolve_separable(&r, w, h, &win);
        let mu2 = convolve_separable(&d, w, h, &win);
        let rr: Vec<f64> = r.iter().map(|v| v * v).collect();
        let dd: Vec<f64> = d.iter().map(|v| v * v).collect();
        let rd: Vec<f64> = r.iter().zip(&d).map(|(a, b)| a * b).collect();
        let s11 = convolve_separable(&rr, w, h, &win);
        let s22 = convolve_separable(&dd, w, h, &win);
        let s12 = convolve_separable(&rd, w, h, &win);

        for i in 0..w * h {
            let mut sigma1_sq = (s11[i] - mu1[i] * mu1[i]).max(0.0);
            let sigma2_sq = (s22[i] - mu2[i] * mu2[i]).max(0.0);
            let sigma12 = s12[i] - mu1[i] * mu2[i];

            let mut g = sigma12 / (sigma1_sq + VIF_EPS);
            let mut sv_sq = sigma2_sq - g * sigma12;
            if sigma1_sq < VIF_EPS {
                g = 0.0;
                sv_sq = sigma2_sq;
                sigma1_sq = 0.0;
            }
            if sigma2_sq < VIF_EPS {
                g = 0.0;
                sv_sq = 0.0;
            }
            if g < 0.0 {
                sv_sq = sigma2_sq;
                g = 0.0;
            }
            let sv_sq = sv_sq.max(VIF_EPS);

            num += (1.0 + g * g * sigma1_sq / (sv_sq + VIF_NOISE_VAR)).log2();
            den += (1.0 + sigma1_sq / VIF_NOISE_VAR).log2();
        }
    }

    if den <= 0.0 {
        return Err(Error::Degenerate("vif reference has no variance".into()));
    }
    Ok(num / den)
}

/// Container-side (C) and revealed-side (S) quality of one attacked pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricRecord {
    pub psnr_c: f64,
    pub psnr_s: f64,
    pub vif_c: f64,
    pub vif_s: f64,
    pub rmse_c: f64,
    pub rmse_s: f64,
}

/// C metrics compare the container before and after the attack; S metrics
/// compare the reveal of the clean container with the reveal of the attacked one.
pub fn report_pair(
    container: &ImageBuf,
    attacked: &ImageBuf,
    revealed_clean: &ImageBuf,
    revealed_attacked: &ImageBuf,
) -> Result<MetricRecord> {
    Ok(MetricRecord {
        psnr_c: psnr(container, attacked)?,
        psnr_s: psnr(revealed_clean, revealed_attacked)?,
        vif_c: vif(container, attacked)?,
        vif_s: vif_or_zero(revealed_clean, revealed_attacked)?,
        rmse_c: rmse(container, attacked)?,
        rmse_s: rmse(revealed_clean, revealed_attacked)?,
    })
}

/// A flat clean reveal carries no information to preserve; scoring it 0 unless
/// the attacked reveal is identical keeps per-image reports total.
fn vif_or_zero(reference: &ImageBuf, dist: &ImageBuf) -> Result<f64> {
    match vif(reference, dist) {
        Err(Error::Degenerate(_)) => Ok(0.0),
        other => other,
    }
}
