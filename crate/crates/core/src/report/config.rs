//! Run settings: command-line values override config-file entries, which
//! override the `--fast` presets, which override the defaults.

use std::path::PathBuf;
use std::str::FromStr;

use crate::engines::Method;
use crate::error::{Error, Result};

/// Which experiment `bench` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Gaussian,
    UniformQuantile,
    Coverage,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Gaussian => "gaussian",
            Experiment::UniformQuantile => "uniform-quantile",
            Experiment::Coverage => "coverage",
        }
    }

    /// Methods compared when none are requested.
    pub fn default_methods(self) -> Vec<Method> {
        match self {
            Experiment::Gaussian => vec![Method::MiceNormPredict, Method::MiceNormNob],
            Experiment::UniformQuantile => vec![Method::MiceCart, Method::MiceRf, Method::Knn, Method::MissForest],
            Experiment::Coverage => vec![Method::MiceCart, Method::MiceRf, Method::Knn],
        }
    }

    /// Rows per simulated dataset when `n` is not given.
    pub fn default_n(self) -> usize {
        match self {
            Experiment::Gaussian | Experiment::UniformQuantile => 5000,
            Experiment::Coverage => 1000,
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Experiment::Gaussian),
            "uniform-quantile" => Ok(Experiment::UniformQuantile),
            "coverage" => Ok(Experiment::Coverage),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

/// Partially specified settings from one source. Every field is optional
/// so sources can be layered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub methods: Option<Vec<Method>>,
    pub seed: Option<u64>,
    pub m: Option<usize>,
    pub max_iter: Option<usize>,
    pub k: Option<usize>,
    pub trees: Option<usize>,
    /// Bootstrap replicates per interval.
    pub l: Option<usize>,
    /// Simulated datasets in a coverage study.
    pub b: Option<usize>,
    pub reps: Option<usize>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub alpha: Option<f64>,
    pub ci_alpha: Option<f64>,
    pub mask_fraction: Option<f64>,
    /// Imputations per method in the score.
    pub big_n: Option<usize>,
    pub jobs: Option<usize>,
    pub fast: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

/// Comma-separated method names.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(Method::from_str).collect()
}

impl Overrides {
    /// Parses flat `key = value` text. Blank lines and lines starting with
    /// `#` are skipped; dashes in keys are read as underscores. Keys are
    /// case-sensitive (`n` rows, `N` imputations).
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            o.set(&key, value)
                .map_err(|e| Error::Config(format!("config line {}: {}", lineno + 1, strip_prefix(e))))?;
        }
        Ok(o)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "input" => self.input = Some(PathBuf::from(v)),
            "output_dir" => self.output_dir = Some(PathBuf::from(v)),
            "method" | "methods" => self.methods = Some(parse_methods(v)?),
            "seed" => self.seed = Some(parse_value(key, v)?),
            "m" => self.m = Some(parse_value(key, v)?),
            "max_iter" => self.max_iter = Some(parse_value(key, v)?),
            "k" => self.k = Some(parse_value(key, v)?),
            "trees" | "n_trees" => self.trees = Some(parse_value(key, v)?),
            "L" => self.l = Some(parse_value(key, v)?),
            "B" => self.b = Some(parse_value(key, v)?),
            "reps" => self.reps = Some(parse_value(key, v)?),
            "n" => self.n = Some(parse_value(key, v)?),
            "d" => self.d = Some(parse_value(key, v)?),
            "alpha" => self.alpha = Some(parse_value(key, v)?),
            "ci_alpha" => self.ci_alpha = Some(parse_value(key, v)?),
            "mask_fraction" => self.mask_fraction = Some(parse_value(key, v)?),
            "N" => self.big_n = Some(parse_value(key, v)?),
            "jobs" => self.jobs = Some(parse_value(key, v)?),
            "fast" => self.fast = Some(parse_value(key, v)?),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Field-wise `self` where set, else `lower`.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            input: self.input.or(lower.input),
            output_dir: self.output_dir.or(lower.output_dir),
            methods: self.methods.or(lower.methods),
            seed: self.seed.or(lower.seed),
            m: self.m.or(lower.m),
            max_iter: self.max_iter.or(lower.max_iter),
            k: self.k.or(lower.k),
            trees: self.trees.or(lower.trees),
            l: self.l.or(lower.l),
            b: self.b.or(lower.b),
            reps: self.reps.or(lower.reps),
            n: self.n.or(lower.n),
            d: self.d.or(lower.d),
            alpha: self.alpha.or(lower.alpha),
            ci_alpha: self.ci_alpha.or(lower.ci_alpha),
            mask_fraction: self.mask_fraction.or(lower.mask_fraction),
            big_n: self.big_n.or(lower.big_n),
            jobs: self.jobs.or(lower.jobs),
            fast: self.fast.or(lower.fast),
        }
    }

    /// The desk-scale presets.
    pub fn fast_presets() -> Overrides {
        Overrides {
            reps: Some(10),
            b: Some(25),
            l: Some(15),
            ..Overrides::default()
        }
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// Fully resolved settings. `methods` and `n` stay optional because their
/// defaults depend on the subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub methods: Option<Vec<Method>>,
    pub seed: u64,
    pub m: usize,
    pub max_iter: usize,
    pub k: usize,
    pub trees: usize,
    pub l: usize,
    pub b: usize,
    pub reps: usize,
    pub n: Option<usize>,
    pub d: usize,
    pub alpha: f64,
    pub ci_alpha: f64,
    pub mask_fraction: f64,
    pub big_n: usize,
    /// Worker threads; `None` uses one per CPU.
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            output_dir: PathBuf::from("."),
            methods: None,
            seed: 1,
            m: 5,
            max_iter: 10,
            k: 5,
            trees: 10,
            l: 30,
            b: 200,
            reps: 50,
            n: None,
            d: 5,
            alpha: 0.1,
            ci_alpha: 0.05,
            mask_fraction: 0.2,
            big_n: 20,
            jobs: None,
        }
    }
}

impl RunConfig {
    /// Layers command-line values over the config file over the presets
    /// over the defaults, then validates.
    pub fn resolve(flags: Overrides, file: Option<Overrides>) -> Result<Self> {
        let o = flags.over(file.unwrap_or_default());
        let o = if o.fast == Some(true) { o.over(Overrides::fast_presets()) } else { o };
        let d = RunConfig::default();
        let cfg = RunConfig {
            input: o.input,
            output_dir: o.output_dir.unwrap_or(d.output_dir),
            methods: o.methods,
            seed: o.seed.unwrap_or(d.seed),
            m: o.m.unwrap_or(d.m),
            max_iter: o.max_iter.unwrap_or(d.max_iter),
            k: o.k.unwrap_or(d.k),
            trees: o.trees.unwrap_or(d.trees),
            l: o.l.unwrap_or(d.l),
            b: o.b.unwrap_or(d.b),
            reps: o.reps.unwrap_or(d.reps),
            n: o.n,
            d: o.d.unwrap_or(d.d),
            alpha: o.alpha.unwrap_or(d.alpha),
            ci_alpha: o.ci_alpha.unwrap_or(d.ci_alpha),
            mask_fraction: o.mask_fraction.unwrap_or(d.mask_fraction),
            big_n: o.big_n.unwrap_or(d.big_n),
            jobs: o.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("m", self.m),
            ("max_iter", self.max_iter),
            ("k", self.k),
            ("trees", self.trees),
            ("L", self.l),
            ("B", self.b),
            ("reps", self.reps),
            ("d", self.d),
            ("N", self.big_n),
        ];
        for (name, v) in counts.into_iter().chain(self.n.map(|n| ("n", n))).chain(self.jobs.map(|j| ("jobs", j))) {
            if v == 0 {
                return Err(Error::Config(format!("`{name}` must be positive")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("ci_alpha", self.ci_alpha), ("mask_fraction", self.mask_fraction)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("`{name}` = {v} is not in (0, 1)")));
            }
        }
        if matches!(&self.methods, Some(m) if m.is_empty()) {
            return Err(Error::Config("empty method list".into()));
        }
        Ok(())
    }
}
