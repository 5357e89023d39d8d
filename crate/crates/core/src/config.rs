//! Experiment configuration: line-oriented `key = value` text with `#` comments.

use std::fmt;
use std::path::Path;

use crate::error::{parse_err, Error, Result};
use crate::nfunction::NFunction;
use crate::weights::WeightSequence;

pub const BASE_ATOMS_RANGE: (usize, usize) = (1, 16);
pub const FIBER_ATOMS_RANGE: (usize, usize) = (1, 64);
pub const N_MAX_RANGE: (usize, usize) = (2, 1_000_000);

#[derive(Debug, Clone, PartialEq)]
pub enum BundleSource {
    Generate,
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSource {
    Generate,
    Identity,
    File(String),
}

/// How the N-function is chosen: a catalog entry or a tabulated density file.
#[derive(Debug, Clone, PartialEq)]
pub enum NFunctionSpec {
    Power { exponent: f64, scale: f64 },
    ExpType,
    Tabulated(String),
}

impl NFunctionSpec {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "exp_type" {
            return Ok(Self::ExpType);
        }
        if let Some(path) = s.strip_prefix("tabulated:") {
            let path = path.trim();
            if path.is_empty() {
                return Err("`tabulated:` needs a file path".into());
            }
            return Ok(Self::Tabulated(path.to_string()));
        }
        let params = s
            .strip_prefix("power:")
            .ok_or_else(|| format!("unknown N-function `{s}` (expected power:r=..,c=.., exp_type or tabulated:<path>)"))?;
        let (mut r, mut c) = (None, 1.0);
        for field in params.split(',') {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| format!("expected key=value in `{field}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("bad number `{}`", v.trim()))?;
            match k.trim() {
                "r" => r = Some(v),
                "c" => c = v,
                other => return Err(format!("unknown power parameter `{other}`")),
            }
        }
        let exponent = r.ok_or("power N-function needs r=<exponent>")?;
        NFunction::power(exponent, c).map_err(|e| e.to_string())?;
        Ok(Self::Power { exponent, scale: c })
    }

    /// Builds the N-function; tabulated paths resolve against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<NFunction> {
        match self {
            Self::Power { exponent, scale } => NFunction::power(*exponent, *scale),
            Self::ExpType => Ok(NFunction::exp_type()),
            Self::Tabulated(p) => crate::io::read_nfunction_file(&base_dir.join(p)),
        }
    }
}

impl fmt::Display for NFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { exponent, scale } => write!(f, "power:r={exponent},c={scale}"),
            Self::ExpType => f.write_str("exp_type"),
            Self::Tabulated(p) => write!(f, "tabulated:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub nfunction: NFunctionSpec,
    pub bundle: BundleSource,
    pub base_atoms: usize,
    pub fiber_atoms: usize,
    pub operator: OperatorSource,
    pub mixing: f64,
    pub weights: WeightSequence,
    pub n_max: usize,
    pub n_dense: usize,
    pub tol: f64,
    pub include_k0: bool,
    /// Random vectors per fiber for the sampled conditions.
    pub samples: usize,
    /// Random sections generated when the bundle file carries none.
    pub sections: usize,
    /// Adds the `A_n_value` column to the convergence table.
    pub emit_values: bool,
    /// Runs the averages even when the operator fails verification.
    pub allow_inadmissible: bool,
    pub conjugate_points: usize,
    pub conjugate_t_max: f64,
    pub seed: u64,
    pub out: String,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            nfunction: NFunctionSpec::Power {
                exponent: 2.0,
                scale: 1.0,
            },
            bundle: BundleSource::Generate,
            base_atoms: 4,
            fiber_atoms: 8,
            operator: OperatorSource::Generate,
            mixing: 0.2,
            weights: WeightSequence::constant(1.0).expect("finite constant"),
            n_max: 10_000,
            n_dense: crate::ergodic::DEFAULT_N_DENSE,
            tol: 1e-3,
            include_k0: false,
            samples: 1000,
            sections: 2,
            emit_values: false,
            allow_inadmissible: false,
            conjugate_points: 50,
            conjugate_t_max: 4.0,
            seed: 20240601,
            out: "out".into(),
        }
    }
}

fn in_range(line: usize, key: &str, v: usize, (lo, hi): (usize, usize)) -> Result<usize> {
    if v < lo || v > hi {
        return Err(parse_err(line, format!("{key} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| parse_err(line, format!("bad value `{v}` for {key}")))
}

impl Config {
    /// Parses config text; keys left out keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (key, value) = l
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{l}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(parse_err(line, format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            match key {
                "nfunction" => cfg.nfunction = NFunctionSpec::parse(value).map_err(|m| parse_err(line, m))?,
                "bundle" => {
                    cfg.bundle = match value {
                        "generate" => BundleSource::Generate,
                        "" => return Err(parse_err(line, "bundle needs `generate` or a path")),
                        p => BundleSource::File(p.to_string()),
                    }
                }
                "base_atoms" => {
                    cfg.base_atoms = in_range(line, key, parse_value(line, key, value)?, BASE_ATOMS_RANGE)?
                }
                "fiber_atoms" => {
                    cfg.fiber_atoms = in_range(line, key, parse_value(line, key, value)?, FIBER_ATOMS_RANGE)?
                }
                "operator" => {
                    cfg.operator = match value {
                        "generate" => OperatorSource::Generate,
                        "identity" => OperatorSource::Identity,
                        "" => return Err(parse_err(line, "operator needs `generate`, `identity` or a path")),
                        p => OperatorSource::File(p.to_string()),
                    }
                }
                "mixing" => {
                    let v: f64 = parse_value(line, key, value)?;
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(parse_err(line, format!("mixing = {v} outside (0, 1]")));
                    }
                    cfg.mixing = v;
                }
                "weights" => {
                    cfg.weights = value.parse().map_err(|e: Error| parse_err(line, e.to_string()))?
                }
                "n_max" => cfg.n_max = in_range(line, key, parse_value(line, key, value)?, N_MAX_RANGE)?,
                "n_dense" => cfg.n_dense = parse_value(line, key, value)?,
                "tol" => {
                    let v: f64 = parse_value(line, key, value)?;
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(parse_err(line, format!("tol = {v} must be positive")));
                    }
                    cfg.tol = v;
                }
                "include_k0" => cfg.include_k0 = parse_value(line, key, value)?,
                "samples" => cfg.samples = parse_value(line, key, value)?,
                "sections" => cfg.sections = in_range(line, key, parse_value(line, key, value)?, (1, 64))?,
                "emit_values" => cfg.emit_values = parse_value(line, key, value)?,
                "allow_inadmissible" => cfg.allow_inadmissible = parse_value(line, key, value)?,
                "conjugate_points" => {
                    cfg.conjugate_points = in_range(line, key, parse_value(line, key, value)?, (1, 1_000_000))?
                }
                "conjugate_t_max" => {
                    let v: f64 = parse_value(line, key, value)?;
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(parse_err(line, format!("conjugate_t_max = {v} must be positive")));
                    }
                    cfg.conjugate_t_max = v;
                }
                "seed" => cfg.seed = parse_value(line, key, value)?,
                "out" => {
                    if value.is_empty() {
                        return Err(parse_err(line, "out needs a directory"));
                    }
                    cfg.out = value.to_string()
                }
                other => return Err(parse_err(line, format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for Config {
    /// Every key, one per line, in a fixed order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nfunction = {}", self.nfunction)?;
        match &self.bundle {
            BundleSource::Generate => writeln!(f, "bundle = generate")?,
            BundleSource::File(p) => writeln!(f, "bundle = {p}")?,
        }
        writeln!(f, "base_atoms = {}", self.base_atoms)?;
        writeln!(f, "fiber_atoms = {}", self.fiber_atoms)?;
        match &self.operator {
            OperatorSource::Generate => writeln!(f, "operator = generate")?,
            OperatorSource::Identity => writeln!(f, "operator = identity")?,
            OperatorSource::File(p) => writeln!(f, "operator = {p}")?,
        }
        writeln!(f, "mixing = {}", self.mixing)?;
        writeln!(f, "weights = {}", self.weights)?;
        writeln!(f, "n_max = {}", self.n_max)?;
        writeln!(f, "n_dense = {}", self.n_dense)?;
        writeln!(f, "tol = {}", self.tol)?;
        writeln!(f, "include_k0 = {}", self.include_k0)?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "sections = {}", self.sections)?;
        writeln!(f, "emit_values = {}", self.emit_values)?;
        writeln!(f, "allow_inadmissible = {}", self.allow_inadmissible)?;
        writeln!(f, "conjugate_points = {}", self.conjugate_points)?;
        writeln!(f, "conjugate_t_max = {}", self.conjugate_t_max)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "out = {}", self.out)
    }
}
