//! Run settings: defaults, an optional `key = value` file with dotted
//! section names, then command-line flags on top.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use ddr_core::verification::DEFAULT_HEXACUT_MAGNITUDE;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Everything a run or a study can be configured with. `None` keeps the
/// case's own value.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub case: String,
    pub family: String,
    pub n: Option<usize>,
    pub levels: Vec<usize>,
    pub seed: u64,
    pub perturbation: f64,
    pub young: Option<f64>,
    pub poisson: Option<f64>,
    pub shear: Option<f64>,
    /// Several values sweep the incompressible case.
    pub lame: Vec<f64>,
    pub threshold: Option<f64>,
    pub beta_n: Option<f64>,
    pub beta_t: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub states_out: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            case: "frictionless".into(),
            family: "cartesian".into(),
            n: None,
            levels: Vec::new(),
            seed: 1,
            perturbation: DEFAULT_HEXACUT_MAGNITUDE,
            young: None,
            poisson: None,
            shear: None,
            lame: Vec::new(),
            threshold: None,
            beta_n: None,
            beta_t: None,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_iter: 50,
            out: None,
            states_out: None,
        }
    }
}

/// Keys accepted in a config file.
pub const KEYS: &[&str] = &[
    "case.name",
    "mesh.family",
    "mesh.n",
    "mesh.levels",
    "mesh.seed",
    "mesh.perturbation",
    "material.young",
    "material.poisson",
    "material.shear",
    "material.lame",
    "contact.threshold",
    "newton.beta",
    "newton.beta_n",
    "newton.beta_t",
    "newton.rel_tol",
    "newton.abs_tol",
    "newton.max_iter",
    "output.csv",
    "output.states",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("invalid value '{value}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "case.name" => self.case = v.to_owned(),
            "mesh.family" => self.family = v.to_owned(),
            "mesh.n" => self.n = Some(parse(key, v)?),
            "mesh.levels" => self.levels = parse_list(key, v)?,
            "mesh.seed" => self.seed = parse(key, v)?,
            "mesh.perturbation" => self.perturbation = parse(key, v)?,
            "material.young" => self.young = Some(parse(key, v)?),
            "material.poisson" => self.poisson = Some(parse(key, v)?),
            "material.shear" => self.shear = Some(parse(key, v)?),
            "material.lame" => self.lame = parse_list(key, v)?,
            "contact.threshold" => self.threshold = Some(parse(key, v)?),
            "newton.beta" => {
                let b = parse(key, v)?;
                self.beta_n = Some(b);
                self.beta_t = Some(b);
            }
            "newton.beta_n" => self.beta_n = Some(parse(key, v)?),
            "newton.beta_t" => self.beta_t = Some(parse(key, v)?),
            "newton.rel_tol" => self.rel_tol = parse(key, v)?,
            "newton.abs_tol" => self.abs_tol = parse(key, v)?,
            "newton.max_iter" => self.max_iter = parse(key, v)?,
            "output.csv" => self.out = Some(PathBuf::from(v)),
            "output.states" => self.states_out = Some(PathBuf::from(v)),
            _ => {
                return Err(ConfigError(format!(
                    "unknown configuration key '{key}' (accepted: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Reads `key = value` lines. `[section]` headers prefix the keys that
    /// follow; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_owned();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim();
            let full = if section.is_empty() { key.to_owned() } else { format!("{section}.{key}") };
            self.set(&full, value).map_err(|e| ConfigError(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }
}

/// Flags shared by `run` and `convergence`. Each one overrides the
/// matching config-file key.
#[derive(Debug, Args, Default)]
pub struct RunFlags {
    /// Config file with `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// frictionless, tresca, incompressible or demo
    #[arg(long)]
    pub case: Option<String>,
    /// cartesian, tetrahedral or hexacut
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated cells per direction, one level each
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Vertex perturbation of the hexacut family, relative to h
    #[arg(long)]
    pub perturbation: Option<f64>,
    #[arg(long)]
    pub young: Option<f64>,
    #[arg(long)]
    pub poisson: Option<f64>,
    #[arg(long)]
    pub shear: Option<f64>,
    /// Second Lame coefficient; a comma list sweeps the incompressible case
    #[arg(long)]
    pub lame: Option<String>,
    /// Tresca threshold g
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Sets both penalties
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub beta_n: Option<f64>,
    #[arg(long)]
    pub beta_t: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// CSV output path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-face contact states as CSV (run only)
    #[arg(long)]
    pub states_out: Option<PathBuf>,
}

impl RunFlags {
    pub fn resolve(&self) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        let mut set = |key: &str, v: Option<String>| match v {
            Some(v) => s.set(key, &v),
            None => Ok(()),
        };
        let text = |v: &Option<f64>| v.map(|x| x.to_string());
        set("case.name", self.case.clone())?;
        set("mesh.family", self.family.clone())?;
        set("mesh.n", self.n.map(|x| x.to_string()))?;
        set("mesh.levels", self.levels.clone())?;
        set("mesh.seed", self.seed.map(|x| x.to_string()))?;
        set("mesh.perturbation", text(&self.perturbation))?;
        set("material.young", text(&self.young))?;
        set("material.poisson", text(&self.poisson))?;
        set("material.shear", text(&self.shear))?;
        set("material.lame", self.lame.clone())?;
        set("contact.threshold", text(&self.threshold))?;
        set("newton.beta", text(&self.beta))?;
        set("newton.beta_n", text(&self.beta_n))?;
        set("newton.beta_t", text(&self.beta_t))?;
        set("newton.rel_tol", text(&self.rel_tol))?;
        set("newton.abs_tol", text(&self.abs_tol))?;
        set("newton.max_iter", self.max_iter.map(|x| x.to_string()))?;
        set("output.csv", self.out.as_ref().map(|p| p.display().to_string()))?;
        set("output.states", self.states_out.as_ref().map(|p| p.display().to_string()))?;
        Ok(s)
    }
}
