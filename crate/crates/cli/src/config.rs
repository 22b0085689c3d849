//! Experiment configuration: a TOML file, overridden by command-line flags,
//! embedded verbatim in every output file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use skewlab::shift::DEFAULT_ENUMERATION_CAP;
use skewlab::{preset, GeneratorSet, IrrepLabel};

use crate::error::{CliError, CliResult};

/// Marker lines (after the `# ` comment prefix) around an embedded config.
pub const CONFIG_BEGIN: &str = "--- config ---";
pub const CONFIG_END: &str = "--- end config ---";

pub const MAX_N: usize = 100_000;
pub const MAX_TWO_J: u32 = 200;
pub const MAX_SAMPLES: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `lps5`, `diagonal:<phi>` or `file:<path>`.
    pub preset: String,
    /// Expected number of generators; checked against the preset when set.
    pub k: Option<usize>,
    pub theta: f64,
    /// Truncation `J` (`"25"`, `"1/2"`, `"12.5"`).
    pub j_max: String,
    pub n_min: usize,
    pub n_max: usize,
    /// `half` (`n1 = floor(n/2)`) or `fixed:<n1>`.
    pub split: String,
    /// Monte Carlo samples per lag in `mix`; 0 disables the Monte Carlo rows.
    pub mc_samples: usize,
    pub clt_n: usize,
    pub clt_samples: usize,
    pub bins: usize,
    pub seed: u64,
    pub cap: u64,
    /// Observable specs: `builtin:trace`, `builtin:one`, `builtin:indicator:<word>`,
    /// `builtin:random:<depth>:<seed>`, `builtin:random-real:<depth>:<seed>`,
    /// `builtin:coboundary:<depth>:<seed>` or a path to an observable file.
    pub f: String,
    pub g: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Not embedded in outputs: where a file lives does not affect its contents.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: "lps5".into(),
            k: None,
            theta: 0.5,
            j_max: "2".into(),
            n_min: 0,
            n_max: 10,
            split: "half".into(),
            mc_samples: 0,
            clt_n: 1024,
            clt_samples: 10_000,
            bins: 40,
            seed: 1,
            cap: DEFAULT_ENUMERATION_CAP,
            f: "builtin:trace".into(),
            g: "builtin:trace".into(),
            workers: None,
            output_dir: None,
        }
    }
}

/// Validated view of a configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub gens: GeneratorSet,
    pub j_max: IrrepLabel,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.message()))
    }

    /// Reads a TOML config, or the config block embedded in an output file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        match extract_embedded(&text) {
            Some(block) => Self::from_toml(&block),
            None => Self::from_toml(&text),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Config lines for an output header, without the output directory.
    pub fn embedded_lines(&self) -> Vec<String> {
        let mut c = self.clone();
        c.output_dir = None;
        c.workers = None;
        let mut out = vec![CONFIG_BEGIN.to_string()];
        out.extend(c.to_toml().lines().map(str::to_string));
        out.push(CONFIG_END.to_string());
        out
    }

    pub fn output_dir(&self) -> &str {
        self.output_dir.as_deref().unwrap_or("out")
    }

    pub fn resolve(&self) -> CliResult<Resolved> {
        let gens = preset(&self.preset).map_err(|e| CliError::config("preset", e))?;
        if let Some(k) = self.k {
            if k != gens.k() {
                return Err(CliError::config(
                    "k",
                    format!("config says k = {k} but preset `{}` has {} generators", self.preset, gens.k()),
                ));
            }
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(CliError::config("theta", format!("{} is not in (0, 1)", self.theta)));
        }
        let j_max = IrrepLabel::parse(&self.j_max)
            .ok_or_else(|| CliError::config("j_max", format!("`{}` is not a half-integer", self.j_max)))?;
        if j_max.two_j() > MAX_TWO_J {
            return Err(CliError::config("j_max", format!("2J = {} exceeds {MAX_TWO_J}", j_max.two_j())));
        }
        if self.n_min > self.n_max {
            return Err(CliError::config("n_min", format!("{} exceeds n_max = {}", self.n_min, self.n_max)));
        }
        if self.n_max > MAX_N {
            return Err(CliError::config("n_max", format!("{} exceeds {MAX_N}", self.n_max)));
        }
        self.split_n1(0)?;
        if self.mc_samples == 1 || self.mc_samples > MAX_SAMPLES {
            return Err(CliError::config("mc_samples", "must be 0 or in 2..=1e8"));
        }
        if self.clt_n == 0 || self.clt_n > 1 << 24 {
            return Err(CliError::config("clt_n", "must be in 1..=2^24"));
        }
        if self.clt_samples < 2 || self.clt_samples > MAX_SAMPLES {
            return Err(CliError::config("clt_samples", "must be in 2..=1e8"));
        }
        if self.bins == 0 || self.bins > 10_000 {
            return Err(CliError::config("bins", "must be in 1..=10000"));
        }
        if self.cap == 0 {
            return Err(CliError::config("cap", "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(CliError::config("workers", "must be positive"));
        }
        Ok(Resolved { gens, j_max })
    }

    /// `n1` for a given `n` under the split rule.
    pub fn split_n1(&self, n: usize) -> CliResult<usize> {
        match self.split.as_str() {
            "half" => Ok(n / 2),
            s => match s.strip_prefix("fixed:").map(str::parse::<usize>) {
                Some(Ok(n1)) => Ok(n1.min(n)),
                _ => Err(CliError::config("split", format!("`{s}` (expected half or fixed:<n1>)"))),
            },
        }
    }
}

/// Text between the config markers of an output file, `# ` prefixes removed.
pub fn extract_embedded(text: &str) -> Option<String> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_prefix("# ").or_else(|| l.strip_prefix('#')).unwrap_or(l));
    lines.find(|l| l.trim_end() == CONFIG_BEGIN)?;
    let mut out = String::new();
    for l in lines {
        if l.trim_end() == CONFIG_END {
            return Some(out);
        }
        out.push_str(l);
        out.push('\n');
    }
    None
}
