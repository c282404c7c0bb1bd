//! Command-line surface and its resolution into a [`RunConfig`].
//!
//! Every flag may also be given as `key=value` in the file passed with
//! `--config` (keys are the long flag names without dashes, e.g.
//! `use-edge=true`). Flags on the command line win over the file.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use peel_core::inpaint::{DiffusionInpainter, ExternalInpainter, Inpainter, InpainterKind, ZeroFill};
use peel_core::removal::{Attack, AttackConfig, AttackMode};
use peel_core::HidingScheme;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "peel", version, about = "Remove-and-inpaint attacks against image hiding schemes")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hide, attack and reveal every pair; write PNGs and a per-image CSV.
    Attack(RunArgs),
    /// One certificate row per (scheme, attack) combination.
    Certify(RunArgs),
    /// Locality and redundancy probes with figure grids.
    Probe(RunArgs),
    /// Estimate the inpainter's mean patch error on the input images.
    InpaintEval(RunArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// Directory of 8-bit gray or RGB PNG images.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV path; defaults to `<out>/report.csv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// key=value defaults, overridden by flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lsb or spread; comma-separated for certify.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub bits: Option<u8>,
    #[arg(long = "r")]
    pub radius: Option<usize>,
    /// peel, peelo, gn, gb, mb or none; comma-separated for certify.
    #[arg(long)]
    pub attack: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// zero, diffusion or external.
    #[arg(long)]
    pub inpainter: Option<String>,
    /// Program plus arguments; the request directory is appended.
    #[arg(long)]
    pub external_cmd: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub use_edge: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub use_dr: Option<bool>,
    /// File of `cover,secret` names; default pairs image i with image i+1.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Hole placements for the patch-error estimate.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub epsilon_target: Option<f64>,
    /// Probe rectangles and pixels per image.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub rect_size: Option<usize>,
    /// Per-channel change that counts a revealed pixel as affected.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pairing {
    Shifted,
    List(PathBuf),
}

#[derive(Clone, Debug)]
pub struct InpainterSpec {
    pub kind: InpainterKind,
    pub external_cmd: Option<String>,
}

impl InpainterSpec {
    pub fn build(&self) -> Box<dyn Inpainter> {
        match self.kind {
            InpainterKind::Zero => Box::new(ZeroFill),
            InpainterKind::Diffusion => Box::new(DiffusionInpainter::default()),
            InpainterKind::External => Box::new(ExternalInpainter::new(
                self.external_cmd.clone().expect("validated at resolve time"),
            )),
        }
    }
}

/// Fully resolved parameters for one subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input_dir: PathBuf,
    pub output_dir: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub schemes: Vec<HidingScheme>,
    pub attacks: Vec<Attack>,
    pub inpainter: InpainterSpec,
    pub seed: u64,
    pub pairs: Pairing,
    pub trials: usize,
    pub epsilon_target: Option<f64>,
    pub samples: Option<usize>,
    pub rect_size: usize,
    pub tau: f64,
    /// Hole side for inpaint-eval.
    pub l: usize,
    pub jobs: Option<usize>,
}

struct Layer {
    values: HashMap<String, String>,
    origin: PathBuf,
}

impl Layer {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Layer {
                values: HashMap::new(),
                origin: PathBuf::new(),
            });
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Layer {
            values: parse_key_values(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            origin: path.to_path_buf(),
        })
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                CliError::Config(format!("{}: bad value {raw:?} for {key}: {e}", self.origin.display()))
            }),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "in", "out", "report", "scheme", "bits", "r", "attack", "k", "l", "d", "delta", "seed",
    "inpainter", "external-cmd", "use-edge", "use-dr", "pairs", "trials", "epsilon-target",
    "samples", "rect-size", "tau", "jobs",
];

/// `key = value` lines; `#` starts a comment; blank lines are ignored.
pub fn parse_key_values(text: &str) -> Result<HashMap<String, String>, String> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
        let key = key.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key {key:?}", n + 1));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn split_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .filter(|s| !s.is_empty())
        .collect()
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        Self::resolve_for(args, true)
    }

    /// With `uses_attacks = false` the attack flags are not validated and
    /// `attacks` is left empty.
    pub fn resolve_for(args: &RunArgs, uses_attacks: bool) -> Result<Self, CliError> {
        let file = Layer::load(args.config.as_deref())?;

        let input_dir: PathBuf = file
            .pick(args.input.clone(), "in")?
            .ok_or_else(|| bad("--in is required"))?;
        if !input_dir.is_dir() {
            return Err(bad(format!("input directory {} does not exist", input_dir.display())));
        }
        let output_dir: Option<PathBuf> = file.pick(args.out.clone(), "out")?;
        let report_path: Option<PathBuf> = file.pick(args.report.clone(), "report")?;

        let bits: Option<u8> = file.pick(args.bits, "bits")?;
        let radius: usize = file.pick(args.radius, "r")?.unwrap_or(1);
        let scheme_names = split_list(&file.pick(args.scheme.clone(), "scheme")?.unwrap_or_else(|| "lsb".into()));
        let mut schemes = Vec::new();
        for name in &scheme_names {
            let scheme = match name.as_str() {
                "lsb" => HidingScheme::lsb(bits.unwrap_or(4)),
                "spread" => HidingScheme::spread(radius, bits.unwrap_or(4)),
                other => return Err(bad(format!("unknown scheme {other:?}"))),
            }
            .map_err(|e| bad(e.to_string()))?;
            schemes.push(scheme);
        }
        if schemes.is_empty() {
            return Err(bad("no scheme given"));
        }

        let seed: u64 = file.pick(args.seed, "seed")?.unwrap_or(0);
        let kind: InpainterKind = file
            .pick(args.inpainter.clone(), "inpainter")?
            .unwrap_or_else(|| "diffusion".into())
            .parse()
            .map_err(|e: peel_core::Error| bad(e.to_string()))?;
        let external_cmd: Option<String> = file.pick(args.external_cmd.clone(), "external-cmd")?;
        if kind == InpainterKind::External && external_cmd.as_deref().is_none_or(|c| c.trim().is_empty()) {
            return Err(bad("--inpainter external needs --external-cmd"));
        }

        let k = file.pick(args.k, "k")?;
        let l = file.pick(args.l, "l")?;
        let d = file.pick(args.d, "d")?;
        let delta = file.pick(args.delta, "delta")?;
        let use_edge = file.pick(args.use_edge, "use-edge")?;
        let use_dr = file.pick(args.use_dr, "use-dr")?;
        let attack_names = if uses_attacks {
            split_list(&file.pick(args.attack.clone(), "attack")?.unwrap_or_else(|| "peel".into()))
        } else {
            Vec::new()
        };
        let mut attacks = Vec::new();
        for name in &attack_names {
            let overlay = |base: AttackConfig| AttackConfig {
                k: k.unwrap_or(base.k),
                l: l.unwrap_or(base.l),
                d: d.unwrap_or(base.d),
                delta: delta.unwrap_or(base.delta),
                seed,
                inpainter: kind,
                use_edge: use_edge.unwrap_or(base.use_edge),
                use_dr: use_dr.unwrap_or(base.use_dr),
                ..base
            };
            let attack = match name.as_str() {
                "none" => Attack::None,
                "peel" => Attack::Peel(overlay(AttackConfig::peel())),
                "peelo" => Attack::PeelO(overlay(AttackConfig::peelo())),
                "gn" => Attack::GaussianNoise {
                    delta: delta.unwrap_or(peel_core::removal::GN_DELTAS[0]),
                    seed,
                },
                "gb" => Attack::GaussianBlur,
                "mb" => Attack::MedianBlur,
                other => return Err(bad(format!("unknown attack {other:?}"))),
            };
            match &attack {
                Attack::Peel(c) => c.validate(AttackMode::Peel),
                Attack::PeelO(c) => c.validate(AttackMode::PeelO),
                Attack::GaussianNoise { delta, .. } if delta.is_nan() || *delta < 0.0 => {
                    Err(peel_core::Error::InvalidParameter(format!("delta must be >= 0, got {delta}")))
                }
                _ => Ok(()),
            }
            .map_err(|e| bad(e.to_string()))?;
            attacks.push(attack);
        }
        if uses_attacks && attacks.is_empty() {
            return Err(bad("no attack given"));
        }

        let pairs = match file.pick::<PathBuf>(args.pairs.clone(), "pairs")? {
            Some(p) if !p.is_file() => return Err(bad(format!("pairs file {} does not exist", p.display()))),
            Some(p) => Pairing::List(p),
            None => Pairing::Shifted,
        };
        let trials = file.pick(args.trials, "trials")?.unwrap_or(50);
        if trials == 0 {
            return Err(bad("--trials must be >= 1"));
        }
        let samples = file.pick(args.samples, "samples")?;
        let rect_size = file.pick(args.rect_size, "rect-size")?.unwrap_or(32);
        if rect_size == 0 {
            return Err(bad("--rect-size must be >= 1"));
        }
        let tau = file.pick(args.tau, "tau")?.unwrap_or(0.0);
        let jobs = file.pick(args.jobs, "jobs")?;
        if jobs == Some(0) {
            return Err(bad("--jobs must be >= 1"));
        }
        Ok(RunConfig {
            input_dir,
            output_dir,
            report_path,
            schemes,
            attacks,
            inpainter: InpainterSpec { kind, external_cmd },
            seed,
            pairs,
            trials,
            epsilon_target: file.pick(args.epsilon_target, "epsilon-target")?,
            samples,
            rect_size,
            tau,
            l: l.unwrap_or(AttackConfig::peel().l),
            jobs,
        })
    }

    /// Report path, falling back to `<out>/<default_name>`.
    pub fn report_or(&self, default_name: &str) -> Result<PathBuf, CliError> {
        match (&self.report_path, &self.output_dir) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(out)) => Ok(out.join(default_name)),
            (None, None) => Err(bad("--report or --out is required")),
        }
    }

    pub fn output_dir_required(&self) -> Result<&Path, CliError> {
        self.output_dir.as_deref().ok_or_else(|| bad("--out is required"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(dir: &Path) -> RunArgs {
        RunArgs {
            input: Some(dir.to_path_buf()),
            ..Default::default()
        }
    }

    #[test]
    fn published_defaults() {
        let tmp = tempfile::tempdir().unwrap();
        let mut a = args(tmp.path());
        a.attack = Some("peel,peelo".into());
        let cfg = RunConfig::resolve(&a).unwrap();
        match cfg.attacks[..] {
            [Attack::Peel(p), Attack::PeelO(o)] => {
                assert_eq!((p.k, p.l, p.use_edge, p.use_dr), (25, 35, false, false));
                assert_eq!((o.k, o.l, o.d, o.delta, o.use_edge, o.use_dr), (50, 60, 2, 0.05, true, true));
            }
            ref other => panic!("{other:?}"),
        }
        assert_eq!(cfg.schemes, vec![HidingScheme::lsb(4).unwrap()]);
    }

    #[test]
    fn flags_override_file() {
        let tmp = tempfile::tempdir().unwrap();
        let conf = tmp.path().join("run.conf");
        fs::write(&conf, "# defaults\nattack = peelo\nk=40\nl = 46\nuse_dr=false\nseed=9\n").unwrap();
        let mut a = args(tmp.path());
        a.config = Some(conf);
        a.k = Some(30);
        a.l = Some(36);
        let cfg = RunConfig::resolve(&a).unwrap();
        let Attack::PeelO(o) = cfg.attacks[0] else { panic!() };
        assert_eq!((o.k, o.l, o.use_dr, o.use_edge, o.seed), (30, 36, false, true, 9));
    }

    #[test]
    fn config_errors() {
        let tmp = tempfile::tempdir().unwrap();
        let cases: Vec<Box<dyn Fn(&mut RunArgs)>> = vec![
            Box::new(|a| a.attack = Some("warp".into())),
            Box::new(|a| a.scheme = Some("dct".into())),
            Box::new(|a| a.l = Some(25)),
            Box::new(|a| a.l = Some(36)),
            Box::new(|a| a.inpainter = Some("external".into())),
            Box::new(|a| a.bits = Some(9)),
            Box::new(|a| a.input = Some("/nonexistent/dir".into())),
            Box::new(|a| a.trials = Some(0)),
        ];
        for set in cases {
            let mut a = args(tmp.path());
            set(&mut a);
            assert!(matches!(RunConfig::resolve(&a), Err(CliError::Config(_))), "{a:?}");
        }
    }

    #[test]
    fn key_value_parser() {
        let kv = parse_key_values("k=3\n\n # c\nexternal_cmd = sh tool.sh  \n").unwrap();
        assert_eq!(kv["k"], "3");
        assert_eq!(kv["external-cmd"], "sh tool.sh");
        assert!(parse_key_values("k 3").is_err());
        assert!(parse_key_values("colour=red").is_err());
    }
}
