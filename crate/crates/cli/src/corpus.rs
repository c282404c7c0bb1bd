//! Image discovery and cover/secret pairing.

use std::fs;
use std::path::{Path, PathBuf};

use peel_core::image::load_image;
use peel_core::ImageBuf;

use crate::config::Pairing;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairPaths {
    /// Cover file stem; names every per-pair artifact.
    pub id: String,
    pub cover: PathBuf,
    pub secret: PathBuf,
}

impl PairPaths {
    pub fn load(&self) -> anyhow::Result<(ImageBuf, ImageBuf)> {
        let cover = load_image(&self.cover)?;
        let secret = load_image(&self.secret)?;
        Ok((cover, secret))
    }
}

/// `*.png` files directly inside `dir`, sorted by file name.
pub fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("cannot list {}: {e}", dir.display())))?;
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| x.eq_ignore_ascii_case("png"))
        })
        .collect();
    out.sort();
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Secret `i` is cover `i + 1 mod N`, or the pairs listed in a file of
/// `cover,secret` lines relative to the input directory.
pub fn pair_up(dir: &Path, pairing: &Pairing) -> Result<Vec<PairPaths>, CliError> {
    let pairs = match pairing {
        Pairing::Shifted => {
            let files = list_pngs(dir)?;
            let n = files.len();
            (0..n)
                .map(|i| PairPaths {
                    id: stem(&files[i]),
                    cover: files[i].clone(),
                    secret: files[(i + 1) % n].clone(),
                })
                .collect()
        }
        Pairing::List(list) => {
            let text = fs::read_to_string(list)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", list.display())))?;
            let mut out = Vec::new();
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (c, s) = line.split_once(',').ok_or_else(|| {
                    CliError::Config(format!("{}:{}: expected cover,secret", list.display(), n + 1))
                })?;
                let (cover, secret) = (dir.join(c.trim()), dir.join(s.trim()));
                for p in [&cover, &secret] {
                    if !p.is_file() {
                        return Err(CliError::Config(format!("{} does not exist", p.display())));
                    }
                }
                out.push(PairPaths {
                    id: stem(&cover),
                    cover,
                    secret,
                });
            }
            out
        }
    };
    if pairs.is_empty() {
        return Err(CliError::Config(format!("no PNG images in {}", dir.display())));
    }
    Ok(pairs)
}
