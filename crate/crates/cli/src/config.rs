//! Experiment configuration: TOML file, command-line overrides, and the
//! resolved record embedded in every report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "RANDONB_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const MIN_SAMPLES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Moments,
    McVerify,
    Beta4Adjudicate,
    Slln,
    TorusShells,
    TorusQe,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_possible_value().expect("no skipped variants");
        f.write_str(s.get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpectrumSource {
    /// Explicit eigenvalues.
    List { values: Vec<f64> },
    /// `d` equally spaced points on `[-1, 1]`.
    Grid { d: usize },
    /// Spectrum of the default torus observable compressed to a shell.
    Shell { dim: usize, n: u64 },
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub d: Option<Vec<usize>>,
    pub dim: Option<usize>,
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub min_multiplicity: Option<u64>,
    pub draws: Option<u64>,
    pub spectra: Option<usize>,
    pub weingarten_max_d: Option<usize>,
    pub spectrum: Option<SpectrumSource>,
}

/// Values given on the command line; they override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub d: Option<Vec<usize>>,
    pub dim: Option<usize>,
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub min_multiplicity: Option<u64>,
    pub draws: Option<u64>,
    pub spectra: Option<usize>,
    pub weingarten_max_d: Option<usize>,
    pub spectrum: Option<SpectrumSource>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSource {
    Flag,
    ConfigFile,
    Environment,
    Default,
}

/// Fully resolved configuration, embedded verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub samples: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub d: Vec<usize>,
    pub dim: usize,
    pub n_min: u64,
    pub n_max: u64,
    pub min_multiplicity: u64,
    pub draws: u64,
    pub spectra: usize,
    pub weingarten_max_d: usize,
    pub spectrum: SpectrumSource,
    pub config_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Flag,
    File,
    Default,
}

/// Tracks where each key came from so validation errors can point at a line.
struct Resolver<'a> {
    path: Option<&'a Path>,
    text: &'a str,
    origins: BTreeMap<&'static str, Origin>,
}

impl Resolver<'_> {
    fn pick<T>(&mut self, key: &'static str, flag: Option<T>, file: Option<T>, default: T) -> T {
        let (origin, value) = match (flag, file) {
            (Some(v), _) => (Origin::Flag, v),
            (None, Some(v)) => (Origin::File, v),
            (None, None) => (Origin::Default, default),
        };
        self.origins.insert(key, origin);
        value
    }

    fn invalid(&self, key: &'static str, msg: impl fmt::Display) -> anyhow::Error {
        match (self.origins.get(key), self.path) {
            (Some(Origin::File), Some(path)) => match line_of(self.text, key) {
                Some(line) => anyhow!("{}:{line}: invalid `{key}`: {msg}", path.display()),
                None => anyhow!("{}: invalid `{key}`: {msg}", path.display()),
            },
            (Some(Origin::Flag), _) => anyhow!("--{}: {msg}", key.replace('_', "-")),
            _ => anyhow!("invalid `{key}`: {msg}"),
        }
    }
}

/// 1-based line of `key = ...` or `[key]`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let t = l.trim_start();
        let assign = t
            .strip_prefix(key)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false);
        assign || t.starts_with(&format!("[{key}]"))
    })
    .map(|i| i + 1)
}

pub fn load_file(path: &Path) -> Result<(FileConfig, String)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: FileConfig = toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        anyhow!("{}:{line}: {}", path.display(), e.message())
    })?;
    Ok((cfg, text))
}

pub fn resolve(
    flags: Overrides,
    file: Option<(&Path, FileConfig, String)>,
    env_seed: Option<String>,
) -> Result<ExperimentConfig> {
    let (path, file, text) = match file {
        Some((p, f, t)) => (Some(p), f, t),
        None => (None, FileConfig::default(), String::new()),
    };
    let mut r = Resolver {
        path,
        text: &text,
        origins: BTreeMap::new(),
    };

    let command = match (flags.command, file.command) {
        (Some(c), Some(f)) if c != f => {
            return Err(r.invalid_command(f, c));
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => bail!("no command given on the command line or in the config file"),
    };

    let (seed, seed_source) = match (flags.seed, file.seed, env_seed) {
        (Some(s), _, _) => (s, SeedSource::Flag),
        (None, Some(s), _) => (s, SeedSource::ConfigFile),
        (None, None, Some(v)) => {
            let s = v
                .trim()
                .parse::<u64>()
                .map_err(|e| anyhow!("{SEED_ENV}={v:?}: {e}"))?;
            (s, SeedSource::Environment)
        }
        (None, None, None) => (DEFAULT_SEED, SeedSource::Default),
    };

    let default_d = match command {
        Command::Beta4Adjudicate => (4..=8).collect(),
        _ => vec![3, 10, 50],
    };
    let default_n_max = match command {
        Command::TorusQe => 9,
        _ => 200,
    };
    let default_min_mult = match command {
        Command::TorusQe => 50,
        _ => 1,
    };

    let cfg = ExperimentConfig {
        command,
        seed,
        seed_source,
        samples: r.pick("samples", flags.samples, file.samples, DEFAULT_SAMPLES),
        format: r.pick("format", flags.format, file.format, Format::Json),
        out: r.pick("out", flags.out.map(Some), file.out.map(Some), None),
        d: r.pick("d", flags.d, file.d, default_d),
        dim: r.pick("dim", flags.dim, file.dim, 5),
        n_min: r.pick("n_min", flags.n_min, file.n_min, 1),
        n_max: r.pick("n_max", flags.n_max, file.n_max, default_n_max),
        min_multiplicity: r.pick("min_multiplicity", flags.min_multiplicity, file.min_multiplicity, default_min_mult),
        draws: r.pick("draws", flags.draws, file.draws, 20),
        spectra: r.pick("spectra", flags.spectra, file.spectra, 3),
        weingarten_max_d: r.pick("weingarten_max_d", flags.weingarten_max_d, file.weingarten_max_d, 12),
        spectrum: r.pick(
            "spectrum",
            flags.spectrum,
            file.spectrum,
            SpectrumSource::List {
                values: vec![1.0, 0.0, -1.0],
            },
        ),
        config_file: path.map(Path::to_path_buf),
    };
    validate(&cfg, &r)?;
    Ok(cfg)
}

impl Resolver<'_> {
    fn invalid_command(&self, file: Command, flag: Command) -> anyhow::Error {
        let msg = format!("file selects `{file}` but the command line selects `{flag}`");
        match (self.path, line_of(self.text, "command")) {
            (Some(p), Some(line)) => anyhow!("{}:{line}: {msg}", p.display()),
            _ => anyhow!("{msg}"),
        }
    }
}

fn validate(cfg: &ExperimentConfig, r: &Resolver<'_>) -> Result<()> {
    use Command::*;
    if matches!(cfg.command, Moments | McVerify) && cfg.samples < MIN_SAMPLES {
        return Err(r.invalid("samples", format!("{} is below the minimum of {MIN_SAMPLES}", cfg.samples)));
    }
    if matches!(cfg.command, McVerify | Beta4Adjudicate) {
        if cfg.d.is_empty() {
            return Err(r.invalid("d", "empty dimension list"));
        }
        if let Some(&bad) = cfg.d.iter().find(|&&d| d == 0) {
            return Err(r.invalid("d", format!("dimension {bad} must be positive")));
        }
        if cfg.spectra == 0 {
            return Err(r.invalid("spectra", "need at least one spectrum per dimension"));
        }
    }
    if cfg.command == Beta4Adjudicate {
        if let Some(&bad) = cfg.d.iter().find(|&&d| d < 4) {
            return Err(r.invalid("d", format!("the degree-4 oracle needs d >= 4, got {bad}")));
        }
    }
    if cfg.command == Slln && cfg.n_max < 2 {
        return Err(r.invalid("n_max", "the sequence needs levels up to at least d = 2"));
    }
    if matches!(cfg.command, TorusShells | TorusQe) {
        if !(2..=6).contains(&cfg.dim) {
            return Err(r.invalid("dim", format!("torus dimension {} outside [2, 6]", cfg.dim)));
        }
        if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
            return Err(r.invalid("n_min", format!("empty range {}..={}", cfg.n_min, cfg.n_max)));
        }
    }
    if cfg.command == TorusQe && cfg.draws < 2 {
        return Err(r.invalid("draws", "need at least two bases per shell for a standard error"));
    }
    if cfg.command == Moments {
        match &cfg.spectrum {
            SpectrumSource::List { values } if values.is_empty() => {
                return Err(r.invalid("spectrum", "empty eigenvalue list"));
            }
            SpectrumSource::List { values } if values.iter().any(|v| !v.is_finite()) => {
                return Err(r.invalid("spectrum", "non-finite eigenvalue"));
            }
            SpectrumSource::Grid { d } if *d < 2 => {
                return Err(r.invalid("spectrum", "grid needs at least two points"));
            }
            SpectrumSource::Shell { dim, .. } if !(2..=6).contains(dim) => {
                return Err(r.invalid("spectrum", format!("torus dimension {dim} outside [2, 6]")));
            }
            _ => {}
        }
    }
    Ok(())
}
