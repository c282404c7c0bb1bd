//! Subcommand bodies. Each returns the number of per-item failures; fatal
//! problems come back as [`CliError`].

use std::fs;
use std::path::Path;

use anyhow::Context;
use peel_core::hiding::{locality_probe, redundancy_probe, ProbeMode, Rect};
use peel_core::image::{from_byte, save_image};
use peel_core::inpaint::{estimate_gamma, Inpainter};
use peel_core::metrics::{report_pair, Distance, MetricRecord};
use peel_core::removal::{derive_seed, Attack};
use peel_core::theory::{certify_attack, Certificate, CertifyOptions};
use peel_core::{HidingScheme, ImageBuf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::corpus::{pair_up, PairPaths};
use crate::CliError;

pub const ATTACK_HEADER: [&str; 15] = [
    "image_id", "scheme", "bits_or_r", "attack", "k", "l", "d", "delta", "seed", "rmse_c",
    "rmse_s", "psnr_c", "psnr_s", "vif_c", "vif_s",
];

pub const CERTIFY_HEADER: [&str; 20] = [
    "scheme", "bits_or_r", "attack", "k", "l", "d", "delta", "images", "failures",
    "epsilon_hat", "lambda_hat", "gamma_hat", "K_w", "K_h", "epsilon_bound",
    "epsilon_target", "bound_ok", "within_bound", "vif_c", "vif_s",
];

pub const PROBE_HEADER: [&str; 13] = [
    "image_id", "scheme", "bits_or_r", "probe", "mode", "x", "y", "width", "height", "value",
    "in_region_err", "out_region_err", "affected_count",
];

pub const EVAL_HEADER: [&str; 6] = ["inpainter", "l", "trials", "metric", "images", "gamma"];

/// Gap between tiles in probe figure grids.
pub const GRID_MARGIN: usize = 8;

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn bits_or_r(s: &HidingScheme) -> String {
    match s {
        HidingScheme::Lsb { bits } => bits.to_string(),
        HidingScheme::Spread { radius, .. } => radius.to_string(),
    }
}

/// `k, l, d, delta` columns; blank where the attack has no such parameter.
fn attack_params(a: &Attack) -> [String; 4] {
    match a {
        Attack::Peel(c) => [c.k.to_string(), c.l.to_string(), String::new(), num(c.delta)],
        Attack::PeelO(c) => [c.k.to_string(), c.l.to_string(), c.d.to_string(), num(c.delta)],
        Attack::GaussianNoise { delta, .. } => [String::new(), String::new(), String::new(), num(*delta)],
        _ => Default::default(),
    }
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
    }
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(header).map_err(anyhow::Error::from)?;
    Ok(w)
}

fn make_dirs(root: &Path, subdirs: &[&str]) -> Result<(), CliError> {
    for d in subdirs {
        let p = root.join(d);
        fs::create_dir_all(&p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?;
    }
    Ok(())
}

fn single<'a, T: std::fmt::Debug>(items: &'a [T], what: &str) -> Result<&'a T, CliError> {
    match items {
        [one] => Ok(one),
        _ => Err(CliError::Config(format!("this subcommand takes exactly one {what}"))),
    }
}

struct AttackRow {
    record: MetricRecord,
    seed: u64,
}

fn attack_one(
    pair: &PairPaths,
    index: usize,
    cfg: &RunConfig,
    scheme: &HidingScheme,
    attack: &Attack,
    inpainter: &dyn Inpainter,
    out: &Path,
) -> anyhow::Result<AttackRow> {
    let (cover, secret) = pair.load()?;
    let seed = derive_seed(cfg.seed, index as u64);
    let container = scheme.hide(&cover, &secret)?;
    let revealed = scheme.reveal(&container)?;
    let attacked = attack.with_seed(seed).apply(&container, inpainter)?;
    let revealed_attacked = scheme.reveal(&attacked)?;
    let record = report_pair(&container, &attacked, &revealed, &revealed_attacked)?;
    let name = format!("{}.png", pair.id);
    save_image(&container, out.join("container").join(&name))?;
    save_image(&attacked, out.join("attacked").join(&name))?;
    save_image(&revealed, out.join("revealed_clean").join(&name))?;
    save_image(&revealed_attacked, out.join("revealed_attacked").join(&name))?;
    Ok(AttackRow { record, seed })
}

pub fn cmd_attack(cfg: &RunConfig) -> Result<usize, CliError> {
    let scheme = single(&cfg.schemes, "scheme")?;
    let attack = single(&cfg.attacks, "attack")?;
    let out = cfg.output_dir_required()?;
    make_dirs(out, &["container", "attacked", "revealed_clean", "revealed_attacked"])?;
    let report = cfg.report_or("report.csv")?;
    let mut w = writer(&report, &ATTACK_HEADER)?;
    let pairs = pair_up(&cfg.input_dir, &cfg.pairs)?;
    let inpainter = cfg.inpainter.build();

    let results: Vec<anyhow::Result<AttackRow>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| attack_one(p, i, cfg, scheme, attack, inpainter.as_ref(), out))
        .collect();

    let [k, l, d, delta] = attack_params(attack);
    let mut failures = 0;
    let mut ok = Vec::new();
    for (pair, res) in pairs.iter().zip(results) {
        match res {
            Ok(row) => {
                let r = row.record;
                w.write_record([
                    pair.id.clone(), scheme.name().into(), bits_or_r(scheme), attack.name().into(),
                    k.clone(), l.clone(), d.clone(), delta.clone(), row.seed.to_string(),
                    num(r.rmse_c), num(r.rmse_s), num(r.psnr_c), num(r.psnr_s), num(r.vif_c), num(r.vif_s),
                ])
                .map_err(anyhow::Error::from)?;
                ok.push(r);
            }
            Err(e) => {
                log::error!("{}: {e:#}", pair.cover.display());
                failures += 1;
            }
        }
    }
    w.flush().map_err(anyhow::Error::from)?;

    let n = ok.len().max(1) as f64;
    let mean = |f: fn(&MetricRecord) -> f64| ok.iter().map(f).sum::<f64>() / n;
    println!(
        "images={} failures={failures} rmse_c={} rmse_s={} psnr_c={} psnr_s={} vif_c={} vif_s={}",
        ok.len(),
        mean(|r| r.rmse_c),
        mean(|r| r.rmse_s),
        mean(|r| r.psnr_c),
        mean(|r| r.psnr_s),
        mean(|r| r.vif_c),
        mean(|r| r.vif_s),
    );
    Ok(failures)
}

fn certificate_row(scheme: &HidingScheme, attack: &Attack, c: &Certificate, failures: usize) -> Vec<String> {
    let [k, l, d, delta] = attack_params(attack);
    let (kw, kh) = if attack.config().is_some() {
        (c.big_k_w.to_string(), c.big_k_h.to_string())
    } else {
        Default::default()
    };
    vec![
        scheme.name().into(), bits_or_r(scheme), attack.name().into(), k, l, d, delta,
        c.images.to_string(), failures.to_string(), num(c.epsilon_hat), num(c.lambda_hat),
        opt(c.gamma_hat), kw, kh, opt(c.epsilon_bound), opt(c.epsilon_target),
        opt(c.bound_ok), opt(c.within_bound), num(c.vif_c), num(c.vif_s),
    ]
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<usize, CliError> {
    let report = cfg.report_or("certificates.csv")?;
    let pairs = pair_up(&cfg.input_dir, &cfg.pairs)?;
    let loaded: Vec<anyhow::Result<(ImageBuf, ImageBuf)>> = pairs.par_iter().map(|p| p.load()).collect();
    let mut load_failures = 0;
    let mut corpus = Vec::new();
    for (p, res) in pairs.iter().zip(loaded) {
        match res {
            Ok(pair) => corpus.push(pair),
            Err(e) => {
                log::error!("{}: {e:#}", p.cover.display());
                load_failures += 1;
            }
        }
    }
    if corpus.is_empty() {
        return Err(CliError::Fatal(anyhow::anyhow!("no readable image pairs")));
    }
    let opts = CertifyOptions {
        metric: Distance::Rmse,
        gamma_trials: cfg.trials,
        gamma_seed: cfg.seed,
        epsilon_target: cfg.epsilon_target,
    };
    let inpainter = cfg.inpainter.build();
    let combos: Vec<(&HidingScheme, &Attack)> = cfg
        .schemes
        .iter()
        .flat_map(|s| cfg.attacks.iter().map(move |a| (s, a)))
        .collect();
    let certs: Vec<_> = combos
        .par_iter()
        .map(|(s, a)| certify_attack(s, a, inpainter.as_ref(), &corpus, &opts))
        .collect();

    let mut w = writer(&report, &CERTIFY_HEADER)?;
    let mut failures = load_failures;
    for ((s, a), cert) in combos.iter().zip(certs) {
        let cert = cert.with_context(|| format!("certifying {} against {}", a.name(), s.name()))?;
        failures += cert.failures;
        w.write_record(certificate_row(s, a, &cert, cert.failures + load_failures))
            .map_err(anyhow::Error::from)?;
        println!(
            "scheme={} attack={} epsilon_hat={} lambda_hat={} gamma_hat={} epsilon_bound={} bound_ok={}",
            s.name(),
            a.name(),
            cert.epsilon_hat,
            cert.lambda_hat,
            opt(cert.gamma_hat),
            opt(cert.epsilon_bound),
            opt(cert.bound_ok)
        );
    }
    w.flush().map_err(anyhow::Error::from)?;
    Ok(failures)
}

/// Tiles `rows` of equally sized images with `margin` white pixels after
/// every tile: `cols * (W + margin)` by `rows * (H + margin)`.
pub fn compose_grid(tiles: &[Vec<&ImageBuf>], margin: usize) -> anyhow::Result<ImageBuf> {
    let first = tiles
        .first()
        .and_then(|r| r.first())
        .context("empty grid")?;
    let (w, h, ch) = (first.width(), first.height(), first.channels());
    let cols = tiles.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut grid = ImageBuf::filled(cols * (w + margin), tiles.len() * (h + margin), ch, 1.0)?;
    for (r, row) in tiles.iter().enumerate() {
        for (c, tile) in row.iter().enumerate() {
            anyhow::ensure!(tile.same_shape(first), "grid tiles differ in shape");
            for y in 0..h {
                for x in 0..w {
                    for k in 0..ch {
                        grid.set(c * (w + margin) + x, r * (h + margin) + y, k, tile.get(x, y, k));
                    }
                }
            }
        }
    }
    Ok(grid)
}

fn probe_one(
    pair: &PairPaths,
    index: usize,
    cfg: &RunConfig,
    scheme: &HidingScheme,
    out: &Path,
) -> anyhow::Result<Vec<Vec<String>>> {
    let (cover, secret) = pair.load()?;
    let (w, h) = (cover.width(), cover.height());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, index as u64));
    let (rw, rh) = (cfg.rect_size.min(w), cfg.rect_size.min(h));
    let samples = cfg.samples.unwrap_or(4).max(1);
    let base = |probe: &str, mode: &str| {
        vec![pair.id.clone(), scheme.name().to_string(), bits_or_r(scheme), probe.to_string(), mode.to_string()]
    };
    let mut rows = Vec::new();
    let mut figure = None;
    for _ in 0..samples {
        let rect = Rect::new(rng.random_range(0..=w - rw), rng.random_range(0..=h - rh), rw, rh);
        let mut pair_probes = Vec::new();
        for mode in [ProbeMode::Remove, ProbeMode::KeepOnly] {
            let p = locality_probe(scheme, &cover, &secret, rect, mode)?;
            let mut row = base("locality", mode.as_str());
            row.extend([
                rect.x.to_string(), rect.y.to_string(), rect.width.to_string(), rect.height.to_string(),
                String::new(), num(p.in_region_err), num(p.out_region_err), String::new(),
            ]);
            rows.push(row);
            pair_probes.push(p);
        }
        figure.get_or_insert(pair_probes);
    }
    for _ in 0..samples {
        let (x, y) = (rng.random_range(0..w), rng.random_range(0..h));
        let value = from_byte(rng.random());
        let affected = redundancy_probe(scheme, &cover, &secret, (x, y), value, cfg.tau)?;
        let mut row = base("redundancy", "set_pixel");
        row.extend([
            x.to_string(), y.to_string(), "1".into(), "1".into(), num(value),
            String::new(), String::new(), affected.to_string(),
        ]);
        rows.push(row);
    }

    let probes = figure.expect("at least one sample");
    let container = scheme.hide(&cover, &secret)?;
    let revealed = scheme.reveal(&container)?;
    let grid = compose_grid(
        &[
            vec![&container, &probes[0].damaged_container, &probes[1].damaged_container],
            vec![&revealed, &probes[0].damaged_reveal, &probes[1].damaged_reveal],
        ],
        GRID_MARGIN,
    )?;
    save_image(&grid, out.join("probe").join(format!("{}_{}.png", pair.id, scheme.name())))?;
    Ok(rows)
}

pub fn cmd_probe(cfg: &RunConfig) -> Result<usize, CliError> {
    let out = cfg.output_dir_required()?;
    make_dirs(out, &["probe"])?;
    let report = cfg.report_or("probe.csv")?;
    let mut w = writer(&report, &PROBE_HEADER)?;
    let pairs = pair_up(&cfg.input_dir, &cfg.pairs)?;
    let jobs: Vec<(usize, &PairPaths, &HidingScheme)> = cfg
        .schemes
        .iter()
        .flat_map(|s| pairs.iter().enumerate().map(move |(i, p)| (i, p, s)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(i, p, s)| probe_one(p, *i, cfg, s, out))
        .collect();
    let mut failures = 0;
    for ((_, p, _), res) in jobs.iter().zip(results) {
        match res {
            Ok(rows) => {
                for row in rows {
                    w.write_record(row).map_err(anyhow::Error::from)?;
                }
            }
            Err(e) => {
                log::error!("{}: {e:#}", p.cover.display());
                failures += 1;
            }
        }
    }
    w.flush().map_err(anyhow::Error::from)?;
    Ok(failures)
}

pub fn cmd_inpaint_eval(cfg: &RunConfig) -> Result<usize, CliError> {
    let report = cfg.report_or("inpaint_eval.csv")?;
    let pairs = pair_up(&cfg.input_dir, &cfg.pairs)?;
    let loaded: Vec<_> = pairs.par_iter().map(|p| peel_core::image::load_image(&p.cover)).collect();
    let mut failures = 0;
    let mut images = Vec::new();
    for (p, res) in pairs.iter().zip(loaded) {
        match res {
            Ok(img) => images.push(img),
            Err(e) => {
                log::error!("{}: {e}", p.cover.display());
                failures += 1;
            }
        }
    }
    if images.is_empty() {
        return Err(CliError::Fatal(anyhow::anyhow!("no readable images")));
    }
    let inpainter = cfg.inpainter.build();
    let gamma = estimate_gamma(inpainter.as_ref(), &images, cfg.l, cfg.trials, Distance::Rmse, cfg.seed)
        .map_err(anyhow::Error::from)?;
    let mut w = writer(&report, &EVAL_HEADER)?;
    w.write_record([
        inpainter.name().to_string(), cfg.l.to_string(), cfg.trials.to_string(),
        Distance::Rmse.as_str().to_string(), images.len().to_string(), num(gamma),
    ])
    .map_err(anyhow::Error::from)?;
    w.flush().map_err(anyhow::Error::from)?;
    println!("inpainter={} l={} trials={} gamma={gamma}", inpainter.name(), cfg.l, cfg.trials);
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let a = ImageBuf::filled(5, 4, 3, 0.0).unwrap();
        let g = compose_grid(&[vec![&a, &a, &a], vec![&a, &a, &a]], 2).unwrap();
        assert_eq!((g.width(), g.height()), (3 * 7, 2 * 6));
        assert_eq!(g.get(0, 0, 0), 0.0);
        assert_eq!(g.get(5, 0, 0), 1.0);
        assert_eq!(g.get(7, 6, 2), 0.0);
    }

    #[test]
    fn params_columns() {
        let p = attack_params(&Attack::Peel(peel_core::AttackConfig::peel()));
        assert_eq!(p, ["25", "35", "", "0"]);
        assert_eq!(attack_params(&Attack::GaussianBlur), [String::new(), String::new(), String::new(), String::new()]);
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
