//! Experiment configuration: a flat `key = value` text file.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Unknown keys and malformed values are errors that name
//! the key and line. Every key is optional; see [`ExperimentConfig::default`].
//!
//! ```text
//! scenario        = compare-algorithms   # | shift-error | loose-support | frames-sweep | custom
//! grid            = 128                  # square grid side, power of two
//! object          = glyph                # glyph | two-disk | three-bar | path to a PGM file
//! probe_px        = 40                   # probe diameter
//! steps           = 16                   # scan positions per axis
//! step_px         = 4
//! axis            = x                    # x | y | xy
//! frames          = 1000                 # speckle frames per position
//! algorithm       = pii                  # er | hio | pii (custom scenario)
//! iters           = 20                   # PII iterations (and custom runs)
//! baseline_iters  = 1000                 # ER / HIO iterations in compare-algorithms
//! beta            = 0.7
//! init            = uniform              # uniform | random
//! loose           = 0,5,10,15,20         # loose-support sweep; first entry used by custom
//! shift           = 0,10,20,25,50        # shift-error sweep (loose-support default: 25,50)
//! frames_list     = 10,50,100,500,1000,2000
//! replicates      = 5                    # seeds per sweep point
//! seed            = 1                    # master seed
//! save_amplitudes = true                 # store amplitude maps in the PIID containers
//! store_frames    = true                 # `simulate`: store raw frames
//! out             = results
//! ```
//!
//! A manifest written by a previous run (`*.json`) is accepted too; its
//! echoed configuration is read back.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pii_core::retrieval::InitMode;
use pii_core::scan::ScanAxis;
use pii_core::Dims;

use crate::error::{HarnessError, Result};
use crate::objects::ObjectSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    CompareAlgorithms,
    ShiftError,
    LooseSupport,
    FramesSweep,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::CompareAlgorithms,
        Scenario::ShiftError,
        Scenario::LooseSupport,
        Scenario::FramesSweep,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::CompareAlgorithms => "compare-algorithms",
            Scenario::ShiftError => "shift-error",
            Scenario::LooseSupport => "loose-support",
            Scenario::FramesSweep => "frames-sweep",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Er,
    Hio,
    Pii,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Er => "er",
            Algorithm::Hio => "hio",
            Algorithm::Pii => "pii",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "er" => Ok(Algorithm::Er),
            "hio" => Ok(Algorithm::Hio),
            "pii" => Ok(Algorithm::Pii),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid: usize,
    pub object: ObjectSpec,
    pub probe_px: usize,
    pub steps: usize,
    pub step_px: u32,
    pub axis: ScanAxis,
    pub frames: usize,
    pub algorithm: Algorithm,
    pub iters: usize,
    pub baseline_iters: usize,
    pub beta: f64,
    pub init: InitMode,
    /// `None` means the scenario default.
    pub loose: Option<Vec<u32>>,
    pub shift: Option<Vec<f64>>,
    pub frames_list: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub save_amplitudes: bool,
    pub store_frames: bool,
    pub out: PathBuf,
    /// Source line of each key read from a file, for error messages.
    lines: BTreeMap<String, usize>,
    source: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::CompareAlgorithms,
            grid: 128,
            object: ObjectSpec::Glyph,
            probe_px: 40,
            steps: 16,
            step_px: 4,
            axis: ScanAxis::X,
            frames: 1000,
            algorithm: Algorithm::Pii,
            iters: 20,
            baseline_iters: 1000,
            beta: 0.7,
            init: InitMode::Uniform,
            loose: None,
            shift: None,
            frames_list: vec![10, 50, 100, 500, 1000, 2000],
            replicates: 5,
            seed: 1,
            save_amplitudes: true,
            store_frames: true,
            out: PathBuf::from("results"),
            lines: BTreeMap::new(),
            source: "<defaults>".into(),
        }
    }
}

pub const KEYS: [&str; 21] = [
    "scenario",
    "grid",
    "object",
    "probe_px",
    "steps",
    "step_px",
    "axis",
    "frames",
    "algorithm",
    "iters",
    "baseline_iters",
    "beta",
    "init",
    "loose",
    "shift",
    "frames_list",
    "replicates",
    "seed",
    "save_amplitudes",
    "store_frames",
    "out",
];

fn parse<T: FromStr>(v: &str, what: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("expected {what}, found {v:?}"))
}

fn parse_list<T: FromStr>(v: &str, what: &str) -> std::result::Result<Vec<T>, String> {
    let items: Vec<T> = v
        .split(',')
        .map(|s| parse(s.trim(), what))
        .collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        return Err("list is empty".into());
    }
    Ok(items)
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Set one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key {
            "scenario" => self.scenario = v.parse()?,
            "grid" => self.grid = parse(v, "a positive integer")?,
            "object" => self.object = v.parse().expect("infallible"),
            "probe_px" => self.probe_px = parse(v, "a positive integer")?,
            "steps" => self.steps = parse(v, "a positive integer")?,
            "step_px" => self.step_px = parse(v, "a non-negative integer")?,
            "axis" => self.axis = ScanAxis::parse(v).ok_or_else(|| format!("expected x, y or xy, found {v:?}"))?,
            "frames" => self.frames = parse(v, "a positive integer")?,
            "algorithm" => self.algorithm = v.parse()?,
            "iters" => self.iters = parse(v, "a non-negative integer")?,
            "baseline_iters" => self.baseline_iters = parse(v, "a non-negative integer")?,
            "beta" => self.beta = parse(v, "a number")?,
            "init" => self.init = InitMode::parse(v).ok_or_else(|| format!("expected uniform or random, found {v:?}"))?,
            "loose" => self.loose = Some(parse_list(v, "non-negative integers")?),
            "shift" => self.shift = Some(parse_list(v, "percentages")?),
            "frames_list" => self.frames_list = parse_list(v, "positive integers")?,
            "replicates" => self.replicates = parse(v, "a positive integer")?,
            "seed" => self.seed = parse(v, "an unsigned 64-bit integer")?,
            "save_amplitudes" => self.save_amplitudes = parse(v, "true or false")?,
            "store_frames" => self.store_frames = parse(v, "true or false")?,
            "out" => self.out = PathBuf::from(v),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Parse configuration text; `source` names it in errors.
    pub fn parse_text(text: &str, source: &str) -> Result<Self> {
        let mut cfg = Self {
            source: source.to_string(),
            ..Self::default()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |key: &str, msg: String| HarnessError::Config {
                path: source.to_string(),
                line: i + 1,
                key: key.to_string(),
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line, "expected `key = value`".into()))?;
            let key = key.trim();
            // Trailing comments need a space before '#', so paths may contain '#'.
            let value = value.split(" #").next().unwrap_or("").trim();
            cfg.set(key, value).map_err(|m| err(key, m))?;
            cfg.lines.insert(key.to_string(), i + 1);
        }
        Ok(cfg)
    }

    /// Canonical text form; parsing it reproduces the configuration.
    pub fn to_text(&self) -> String {
        self.pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut p = vec![
            ("scenario", self.scenario.to_string()),
            ("grid", self.grid.to_string()),
            ("object", self.object.to_string()),
            ("probe_px", self.probe_px.to_string()),
            ("steps", self.steps.to_string()),
            ("step_px", self.step_px.to_string()),
            ("axis", self.axis.name().to_string()),
            ("frames", self.frames.to_string()),
            ("algorithm", self.algorithm.to_string()),
            ("iters", self.iters.to_string()),
            ("baseline_iters", self.baseline_iters.to_string()),
            ("beta", self.beta.to_string()),
            ("init", self.init.name().to_string()),
        ];
        if let Some(l) = &self.loose {
            p.push(("loose", join(l)));
        }
        if let Some(s) = &self.shift {
            p.push(("shift", join(s)));
        }
        p.extend([
            ("frames_list", join(&self.frames_list)),
            ("replicates", self.replicates.to_string()),
            ("seed", self.seed.to_string()),
            ("save_amplitudes", self.save_amplitudes.to_string()),
            ("store_frames", self.store_frames.to_string()),
            ("out", self.out.display().to_string()),
        ]);
        p
    }

    /// Loose radii swept by the scenario.
    pub fn loose_list(&self) -> Vec<u32> {
        match (&self.loose, self.scenario) {
            (Some(l), _) => l.clone(),
            (None, Scenario::LooseSupport) => vec![0, 5, 10, 15, 20],
            (None, _) => vec![0],
        }
    }

    /// Shift-error percentages swept by the scenario.
    pub fn shift_list(&self) -> Vec<f64> {
        match (&self.shift, self.scenario) {
            (Some(s), _) => s.clone(),
            (None, Scenario::ShiftError) => vec![0.0, 10.0, 20.0, 25.0, 50.0],
            (None, Scenario::LooseSupport) => vec![25.0, 50.0],
            (None, _) => vec![0.0],
        }
    }

    pub fn dims(&self) -> Result<Dims> {
        Dims::square(self.grid).map_err(|e| self.invalid("grid", e.to_string()))
    }

    fn invalid(&self, key: &str, msg: String) -> HarnessError {
        HarnessError::Config {
            path: self.source.clone(),
            line: self.lines.get(key).copied().unwrap_or(0),
            key: key.to_string(),
            msg,
        }
    }

    /// Checks everything that can be checked without running a simulation,
    /// including that the scan fits the grid.
    pub fn validate(&self) -> Result<()> {
        self.dims()?;
        if self.grid < 8 {
            return Err(self.invalid("grid", "must be at least 8".into()));
        }
        if self.probe_px == 0 || self.probe_px > self.grid {
            return Err(self.invalid("probe_px", format!("must be in 1..={}", self.grid)));
        }
        if self.steps == 0 {
            return Err(self.invalid("steps", "must be at least 1".into()));
        }
        if self.frames < 2 {
            return Err(self.invalid("frames", "at least 2 frames are needed".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(self.invalid("beta", format!("{} is outside (0, 1]", self.beta)));
        }
        if self.replicates == 0 {
            return Err(self.invalid("replicates", "must be at least 1".into()));
        }
        if let Some(f) = self.frames_list.iter().find(|&&f| f < 2) {
            return Err(self.invalid("frames_list", format!("{f} frames is too few")));
        }
        if let Some(s) = self.shift_list().iter().find(|s| !(0.0..=100.0).contains(*s)) {
            return Err(self.invalid("shift", format!("{s}% is outside [0, 100]")));
        }
        if let ObjectSpec::File(p) = &self.object {
            if !p.is_file() {
                return Err(self.invalid("object", format!("{} is not a built-in object or an existing file", p.display())));
            }
        }
        crate::scene::Scene::new(self).map_err(|e| self.invalid("steps", e.to_string()))?;
        Ok(())
    }
}

/// Read a configuration file (or a manifest) and validate it.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
        path: path.display().to_string(),
        line: 0,
        key: "<file>".into(),
        msg: e.to_string(),
    })?;
    let source = path.display().to_string();
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&text)?;
        let echoed = v
            .get("config_text")
            .and_then(|t| t.as_str())
            .ok_or_else(|| HarnessError::Invalid(format!("{source}: no config_text in manifest")))?;
        ExperimentConfig::parse_text(echoed, &source)?
    } else {
        ExperimentConfig::parse_text(&text, &source)?
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = ExperimentConfig::parse_text("", "t").unwrap();
        assert_eq!(c.to_text(), ExperimentConfig::default().to_text());
        assert_eq!(c.shift_list(), vec![0.0]);
    }

    #[test]
    fn unknown_key_is_named_with_line() {
        let err = ExperimentConfig::parse_text("# c\n\nstepp = 3\n", "f.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("stepp") && msg.contains(":3:"), "{msg}");
    }

    #[test]
    fn type_mismatch_names_key() {
        let msg = ExperimentConfig::parse_text("frames = many", "f").unwrap_err().to_string();
        assert!(msg.contains("frames"), "{msg}");
        assert!(ExperimentConfig::parse_text("loose = ", "f").is_err());
    }

    #[test]
    fn text_roundtrip() {
        let mut c = ExperimentConfig::default();
        c.set("loose", "0, 5").unwrap();
        c.set("shift", "12.5").unwrap();
        c.set("scenario", "frames-sweep").unwrap();
        let back = ExperimentConfig::parse_text(&c.to_text(), "echo").unwrap();
        assert_eq!(back.to_text(), c.to_text());
        assert_eq!(back.loose_list(), vec![0, 5]);
    }

    #[test]
    fn scenario_defaults() {
        let mut c = ExperimentConfig {
            scenario: Scenario::LooseSupport,
            ..ExperimentConfig::default()
        };
        assert_eq!(c.shift_list(), vec![25.0, 50.0]);
        assert_eq!(c.loose_list(), vec![0, 5, 10, 15, 20]);
        c.scenario = Scenario::ShiftError;
        assert_eq!(c.shift_list(), vec![0.0, 10.0, 20.0, 25.0, 50.0]);
    }

    #[test]
    fn inline_comment_is_stripped() {
        let c = ExperimentConfig::parse_text("grid = 64   # small\n", "f").unwrap();
        assert_eq!(c.grid, 64);
    }

    #[test]
    fn validation_names_key_and_line() {
        let c = ExperimentConfig::parse_text("grid = 64\nbeta = 2\n", "f").unwrap();
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("beta") && msg.contains(":2:"), "{msg}");
        let c = ExperimentConfig::parse_text("object = /no/such.pgm", "f").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("object"));
    }
}
