//! Removal-bound arithmetic and the empirical attack certifier.
//!
//! For a `K`x`K` canvas cut into `k`x`k` cells there are `N = (K/k)^2 - 1`
//! cells besides any given one; an attack built from an inpainter with
//! per-patch error `gamma` is bounded by `gamma * N`.
//!
//! Inputs are treated as the decimal numbers they print as (shortest
//! round-trip form), so `0.01 * 35` is exactly `0.35` and the equality case
//! of [`check_theorem`] is decided without binary rounding.

use std::cmp::Ordering;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::hiding::HidingScheme;
use crate::image::{pad_zero, ImageBuf};
use crate::inpaint::{estimate_gamma, Inpainter};
use crate::metrics::{vif, Distance};
use crate::removal::{grid_partition, Attack};

/// `mantissa * 10^-scale`.
#[derive(Clone, Debug)]
struct Decimal {
    mantissa: BigInt,
    scale: u32,
}

impl Decimal {
    fn from_f64(v: f64, what: &str) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{what} must be finite, got {v}")));
        }
        // f64 Display is shortest round-trip and never uses exponent notation
        let text = format!("{v}");
        let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
        let mantissa: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
        Ok(Decimal {
            mantissa,
            scale: frac.len() as u32,
        })
    }

    fn mul_int(&self, n: u64) -> Self {
        Decimal {
            mantissa: &self.mantissa * n,
            scale: self.scale,
        }
    }

    fn rescaled(&self, scale: u32) -> BigInt {
        &self.mantissa * BigInt::from(10u32).pow(scale - self.scale)
    }

    fn cmp(&self, other: &Decimal) -> Ordering {
        let s = self.scale.max(other.scale);
        self.rescaled(s).cmp(&other.rescaled(s))
    }

    fn to_f64(&self) -> f64 {
        let digits = self.mantissa.magnitude().to_string();
        let sign = if self.mantissa.sign() == num_bigint::Sign::Minus { "-" } else { "" };
        let scale = self.scale as usize;
        let text = if scale == 0 {
            digits
        } else if digits.len() > scale {
            let (i, f) = digits.split_at(digits.len() - scale);
            format!("{i}.{f}")
        } else {
            format!("0.{}{digits}", "0".repeat(scale - digits.len()))
        };
        format!("{sign}{text}").parse().expect("valid decimal")
    }
}

/// `N = (K/k)^2 - 1` for a square canvas.
pub fn other_cells(big_k: usize, k: usize) -> Result<u64> {
    if k == 0 || big_k <= k {
        return Err(Error::InvalidParameter(format!(
            "canvas side K={big_k} must exceed cell side k={k}"
        )));
    }
    if !big_k.is_multiple_of(k) {
        return Err(Error::InvalidParameter(format!(
            "canvas side K={big_k} is not a multiple of k={k}"
        )));
    }
    let per_side = (big_k / k) as u64;
    Ok(per_side * per_side - 1)
}

fn check_gamma(gamma: f64) -> Result<Decimal> {
    if gamma < 0.0 {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    Decimal::from_f64(gamma, "gamma")
}

/// `gamma * N` for an arbitrary number `N` of other cells, rounded up to the
/// smallest `f64` that [`check_theorem_cells`] accepts.
pub fn epsilon_bound_cells(gamma: f64, others: u64) -> Result<f64> {
    let exact = check_gamma(gamma)?.mul_int(others);
    let mut v = exact.to_f64();
    if v.is_finite() && Decimal::from_f64(v, "bound")?.cmp(&exact) == Ordering::Less {
        v = v.next_up();
    }
    Ok(v)
}

/// Smallest distortion budget the bound supports at this `gamma`.
pub fn epsilon_bound(gamma: f64, big_k: usize, k: usize) -> Result<f64> {
    epsilon_bound_cells(gamma, other_cells(big_k, k)?)
}

/// `gamma * N <= epsilon` for `N` other cells.
pub fn check_theorem_cells(gamma: f64, epsilon: f64, others: u64) -> Result<bool> {
    let lhs = check_gamma(gamma)?.mul_int(others);
    let rhs = Decimal::from_f64(epsilon, "epsilon")?;
    Ok(lhs.cmp(&rhs) != Ordering::Greater)
}

/// `gamma <= epsilon / ((K/k)^2 - 1)`, inclusive.
pub fn check_theorem(gamma: f64, epsilon: f64, big_k: usize, k: usize) -> Result<bool> {
    check_theorem_cells(gamma, epsilon, other_cells(big_k, k)?)
}

/// Empirical `(epsilon, lambda)` summary of one attack against one scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub scheme: String,
    pub attack: String,
    pub images: usize,
    pub failures: usize,
    /// Mean `D(c', F(c'))`.
    pub epsilon_hat: f64,
    /// Mean `D(R(c'), R(F(c')))`.
    pub lambda_hat: f64,
    /// `None` for attacks that do not inpaint.
    pub gamma_hat: Option<f64>,
    pub big_k_w: usize,
    pub big_k_h: usize,
    pub k: usize,
    /// `gamma_hat * N`.
    pub epsilon_bound: Option<f64>,
    pub epsilon_target: Option<f64>,
    /// `gamma_hat * N <= epsilon_target`.
    pub bound_ok: Option<bool>,
    /// `epsilon_hat <= epsilon_bound`.
    pub within_bound: Option<bool>,
    pub vif_c: f64,
    pub vif_s: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub metric: Distance,
    pub gamma_trials: usize,
    pub gamma_seed: u64,
    /// Defaults to the certificate's own `epsilon_bound`.
    pub epsilon_target: Option<f64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            metric: Distance::Rmse,
            gamma_trials: 50,
            gamma_seed: 0,
            epsilon_target: None,
        }
    }
}

struct PairScore {
    eps: f64,
    lambda: f64,
    vif_c: f64,
    vif_s: f64,
}

fn score_pair(
    scheme: &HidingScheme,
    attack: &Attack,
    inpainter: &dyn Inpainter,
    metric: Distance,
    cover: &ImageBuf,
    secret: &ImageBuf,
) -> Result<PairScore> {
    let container = scheme.hide(cover, secret)?;
    let revealed = scheme.reveal(&container)?;
    let attacked = attack.apply(&container, inpainter)?;
    let revealed_attacked = scheme.reveal(&attacked)?;
    let vif_s = match vif(&revealed, &revealed_attacked) {
        Err(Error::Degenerate(_)) => 0.0,
        other => other?,
    };
    Ok(PairScore {
        eps: metric.distance(&container, &attacked)?,
        lambda: metric.distance(&revealed, &revealed_attacked)?,
        vif_c: vif(&container, &attacked)?,
        vif_s,
    })
}

/// Runs `attack` over every `(cover, secret)` pair. Per-image failures are
/// logged and counted; the means cover the successful pairs only.
pub fn certify_attack(
    scheme: &HidingScheme,
    attack: &Attack,
    inpainter: &dyn Inpainter,
    corpus: &[(ImageBuf, ImageBuf)],
    opts: &CertifyOptions,
) -> Result<Certificate> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut scores = Vec::with_capacity(corpus.len());
    let mut failures = 0;
    for (i, (cover, secret)) in corpus.iter().enumerate() {
        match score_pair(scheme, attack, inpainter, opts.metric, cover, secret) {
            Ok(s) => scores.push(s),
            Err(e) => {
                log::error!("pair {i}: {e}");
                failures += 1;
            }
        }
    }
    let n = scores.len().max(1) as f64;
    let mean = |f: fn(&PairScore) -> f64| scores.iter().map(f).sum::<f64>() / n;

    let (w, h) = (corpus[0].0.width(), corpus[0].0.height());
    let (k, big_k_w, big_k_h, gamma_hat, others) = match attack.config() {
        Some(cfg) => {
            let grid = grid_partition(w, h, cfg.k)?;
            let padded: Vec<ImageBuf> = corpus.iter().map(|(c, _)| pad_zero(c, cfg.k).0).collect();
            let gamma = estimate_gamma(inpainter, &padded, cfg.l, opts.gamma_trials, opts.metric, opts.gamma_seed)?;
            let others = grid.cell_count() as u64 - 1;
            (cfg.k, grid.padded_width, grid.padded_height, Some(gamma), Some(others))
        }
        None => (0, w, h, None, None),
    };
    let epsilon_hat = mean(|s| s.eps);
    let bound = match (gamma_hat, others) {
        (Some(g), Some(n)) => Some(epsilon_bound_cells(g, n)?),
        _ => None,
    };
    let epsilon_target = opts.epsilon_target.or(bound);
    let bound_ok = match (gamma_hat, others, epsilon_target) {
        (Some(g), Some(n), Some(t)) => Some(check_theorem_cells(g, t, n)?),
        _ => None,
    };
    Ok(Certificate {
        scheme: scheme.name().to_string(),
        attack: attack.name().to_string(),
        images: scores.len(),
        failures,
        epsilon_hat,
        lambda_hat: mean(|s| s.lambda),
        gamma_hat,
        big_k_w,
        big_k_h,
        k,
        epsilon_bound: bound,
        epsilon_target,
        bound_ok,
        within_bound: bound.map(|b| epsilon_hat <= b),
        vif_c: mean(|s| s.vif_c),
        vif_s: mean(|s| s.vif_s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inpaint::{DiffusionInpainter, ZeroFill};
    use crate::metrics::rmse;
    use crate::removal::AttackConfig;
    use crate::synth::corpus;
    use proptest::prelude::*;

    #[test]
    fn bound_values() {
        assert_eq!(epsilon_bound(0.0, 275, 25).unwrap(), 0.0);
        assert_eq!(epsilon_bound(0.001, 275, 25).unwrap(), 0.12);
        assert_eq!(epsilon_bound(0.01, 300, 50).unwrap(), 0.35);
        assert_eq!(epsilon_bound(0.25, 100, 50).unwrap(), 0.75);
    }

    #[test]
    fn bound_errors() {
        assert!(epsilon_bound(0.1, 270, 25).is_err());
        assert!(epsilon_bound(0.1, 25, 25).is_err());
        assert!(epsilon_bound(0.1, 10, 25).is_err());
        assert!(epsilon_bound(-0.1, 275, 25).is_err());
        assert!(epsilon_bound(f64::NAN, 275, 25).is_err());
        assert!(check_theorem(0.1, f64::INFINITY, 275, 25).is_err());
    }

    #[test]
    fn theorem_equality_and_neighbours() {
        assert!(check_theorem(0.0, 0.0, 275, 25).unwrap());
        assert!(check_theorem(0.0, 3.0, 275, 25).unwrap());
        assert!(check_theorem(0.001, 0.12, 275, 25).unwrap());
        assert!(check_theorem(0.01, 0.35, 300, 50).unwrap());
        assert!(!check_theorem(0.001f64.next_up(), 0.12, 275, 25).unwrap());
        assert!(!check_theorem(0.01f64.next_up(), 0.35, 300, 50).unwrap());
        assert!(!check_theorem(0.001, 0.11999999999999998, 275, 25).unwrap());
    }

    #[test]
    fn decimal_round_trip() {
        for v in [0.0, 1.0, 0.1, 123.456, 1e-20, 5e-324, 1e300, -2.5] {
            assert_eq!(Decimal::from_f64(v, "v").unwrap().to_f64(), v);
        }
    }

    proptest! {
        #[test]
        fn bound_is_linear_and_monotone(g in 0.0f64..1.0, a in 1.0f64..10.0, m in 2usize..12, k in 1usize..40) {
            let b = epsilon_bound(g, m * k, k).unwrap();
            let n = (m * m - 1) as f64;
            prop_assert!((b - g * n).abs() <= 1e-12 * (1.0 + g * n));
            let scaled = epsilon_bound(g * a, m * k, k).unwrap();
            prop_assert!((scaled - a * b).abs() <= 1e-9 * (1.0 + a * b));
            prop_assert!(epsilon_bound(g, (m + 1) * k, k).unwrap() >= b);
            prop_assert!(check_theorem(g, b, m * k, k).unwrap());
            prop_assert!(!check_theorem(g, b.next_down(), m * k, k).unwrap());
        }
    }

    fn pairs(n: usize, size: usize) -> Vec<(ImageBuf, ImageBuf)> {
        let covers = corpus(n, size, size, 3, 100);
        let secrets = corpus(n, size, size, 3, 200);
        covers.into_iter().zip(secrets).collect()
    }

    #[test]
    fn noop_certificate() {
        let s = HidingScheme::lsb(4).unwrap();
        let cert = certify_attack(&s, &Attack::None, &ZeroFill, &pairs(3, 48), &CertifyOptions::default()).unwrap();
        assert_eq!((cert.epsilon_hat, cert.lambda_hat), (0.0, 0.0));
        assert_eq!(cert.gamma_hat, None);
        assert_eq!(cert.images, 3);
    }

    #[test]
    fn zero_fill_lambda_matches_direct() {
        let s = HidingScheme::lsb(4).unwrap();
        let ps = pairs(3, 50);
        let cfg = AttackConfig { k: 25, l: 35, ..AttackConfig::peel() };
        let opts = CertifyOptions { gamma_trials: 5, ..Default::default() };
        let cert = certify_attack(&s, &Attack::Peel(cfg), &ZeroFill, &ps, &opts).unwrap();
        let black_reveal = s.reveal(&ImageBuf::zeros(50, 50, 3).unwrap()).unwrap();
        let direct: f64 = ps
            .iter()
            .map(|(c, sec)| rmse(&s.reveal(&s.hide(c, sec).unwrap()).unwrap(), &black_reveal).unwrap())
            .sum::<f64>()
            / 3.0;
        assert!((cert.lambda_hat - direct).abs() < 1e-12);
        assert_eq!(cert.bound_ok, Some(true));
        let noop = certify_attack(&s, &Attack::None, &ZeroFill, &ps, &opts).unwrap();
        assert!(cert.lambda_hat > noop.lambda_hat);
    }

    #[test]
    fn diffusion_respects_bound() {
        let s = HidingScheme::lsb(4).unwrap();
        let cfg = AttackConfig { k: 25, l: 35, ..AttackConfig::peel() };
        let opts = CertifyOptions { gamma_trials: 6, ..Default::default() };
        let cert = certify_attack(&s, &Attack::Peel(cfg), &DiffusionInpainter::default(), &pairs(2, 64), &opts).unwrap();
        assert_eq!((cert.big_k_w, cert.big_k_h, cert.k), (75, 75, 25));
        assert_eq!(cert.within_bound, Some(true), "{cert:?}");
        let again = certify_attack(&s, &Attack::Peel(cfg), &DiffusionInpainter::default(), &pairs(2, 64), &opts).unwrap();
        assert_eq!(cert, again);
    }

    #[test]
    fn empty_corpus_errors() {
        let s = HidingScheme::lsb(4).unwrap();
        assert!(matches!(
            certify_attack(&s, &Attack::None, &ZeroFill, &[], &CertifyOptions::default()),
            Err(Error::EmptyCorpus)
        ));
    }
}
