//! Training settings: defaults, dataset presets, `key = value` files and
//! command-line overrides, applied in that order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use wlprereq_core::predictor::{ModelConfig, TrainConfig};

use crate::error::{CliError, Result};

/// Dataset layouts with their own training defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetPreset {
    Default,
    /// Batch size 512.
    UniversityCourses,
}

impl FromStr for DatasetPreset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(DatasetPreset::Default),
            "university-courses" => Ok(DatasetPreset::UniversityCourses),
            other => Err(CliError::Config(format!(
                "unknown dataset preset {:?} (expected default or university-courses)",
                other
            ))),
        }
    }
}

impl DatasetPreset {
    pub fn name(self) -> &'static str {
        match self {
            DatasetPreset::Default => "default",
            DatasetPreset::UniversityCourses => "university-courses",
        }
    }
}

/// Everything `train` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub edges: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub preset: DatasetPreset,
    pub order: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub output_dim: usize,
    pub encoder_hidden_layers: usize,
    pub split_ratio: f64,
    pub train: TrainConfig,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let m = ModelConfig::new(2, 1);
        TrainSettings {
            edges: None,
            embeddings: None,
            out: None,
            preset: DatasetPreset::Default,
            order: m.gnn.order,
            hidden_dim: m.gnn.hidden_dim,
            layers: m.gnn.layers,
            output_dim: m.gnn.output_dim,
            encoder_hidden_layers: m.encoder_hidden_layers,
            split_ratio: 0.8,
            train: TrainConfig::default(),
        }
    }
}

/// Keys accepted in config files, in the order they are written out.
pub const KEYS: &[&str] = &[
    "edges",
    "embeddings",
    "out",
    "dataset_preset",
    "k",
    "hidden_dim",
    "layers",
    "output_dim",
    "encoder_hidden_layers",
    "split_ratio",
    "learning_rate",
    "epochs",
    "batch_size",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "seed",
    "threshold",
    "negative_ratio",
    "resample_negatives",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Config(format!("invalid value {:?} for {}", value, key)))
}

impl TrainSettings {
    /// Sets one key. Selecting a preset also applies its defaults.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "edges" => self.edges = Some(PathBuf::from(value)),
            "embeddings" => self.embeddings = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "dataset_preset" => self.set_preset(value.parse()?),
            "k" => self.order = parse(key, value)?,
            "hidden_dim" => self.hidden_dim = parse(key, value)?,
            "layers" => self.layers = parse(key, value)?,
            "output_dim" => self.output_dim = parse(key, value)?,
            "encoder_hidden_layers" => self.encoder_hidden_layers = parse(key, value)?,
            "split_ratio" => self.split_ratio = parse(key, value)?,
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "epochs" => t.epochs = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "adam_beta1" => t.adam_beta1 = parse(key, value)?,
            "adam_beta2" => t.adam_beta2 = parse(key, value)?,
            "adam_eps" => t.adam_eps = parse(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "threshold" => t.threshold = parse(key, value)?,
            "negative_ratio" => t.negative_ratio = parse(key, value)?,
            "resample_negatives" => t.resample_negatives = parse(key, value)?,
            other => return Err(CliError::Config(format!("unknown config key {:?}", other))),
        }
        Ok(())
    }

    pub fn set_preset(&mut self, preset: DatasetPreset) {
        self.preset = preset;
        if preset == DatasetPreset::UniversityCourses {
            self.train.batch_size = 512;
        }
    }

    /// Builds settings from `file` entries and then `overrides`. A preset in
    /// either place is applied before any other key.
    pub fn resolve(file: &[(String, String)], overrides: &[(&str, String)]) -> Result<Self> {
        let mut s = TrainSettings::default();
        let preset = overrides
            .iter()
            .find(|(k, _)| *k == "dataset_preset")
            .map(|(_, v)| v.as_str())
            .or_else(|| file.iter().find(|(k, _)| k == "dataset_preset").map(|(_, v)| v.as_str()));
        if let Some(p) = preset {
            s.set_preset(p.parse()?);
        }
        for (k, v) in file.iter().map(|(k, v)| (k.as_str(), v.as_str())).chain(overrides.iter().map(|(k, v)| (*k, v.as_str()))) {
            if k != "dataset_preset" {
                s.apply(k, v)?;
            }
        }
        Ok(s)
    }

    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        let mut m = ModelConfig::new(self.order, input_dim);
        m.gnn.hidden_dim = self.hidden_dim;
        m.gnn.layers = self.layers;
        m.gnn.output_dim = self.output_dim;
        m.encoder_hidden_layers = self.encoder_hidden_layers;
        m
    }

    /// The settings as a config file that [`parse_config`] reads back.
    pub fn to_config_text(&self) -> String {
        let t = &self.train;
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| p.as_deref().map(|p| p.display().to_string());
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{} = {}", k, v);
        };
        if let Some(p) = path(&self.edges) {
            put("edges", p);
        }
        if let Some(p) = path(&self.embeddings) {
            put("embeddings", p);
        }
        if let Some(p) = path(&self.out) {
            put("out", p);
        }
        put("dataset_preset", self.preset.name().to_string());
        put("k", self.order.to_string());
        put("hidden_dim", self.hidden_dim.to_string());
        put("layers", self.layers.to_string());
        put("output_dim", self.output_dim.to_string());
        put("encoder_hidden_layers", self.encoder_hidden_layers.to_string());
        put("split_ratio", self.split_ratio.to_string());
        put("learning_rate", t.learning_rate.to_string());
        put("epochs", t.epochs.to_string());
        put("batch_size", t.batch_size.to_string());
        put("adam_beta1", t.adam_beta1.to_string());
        put("adam_beta2", t.adam_beta2.to_string());
        put("adam_eps", t.adam_eps.to_string());
        put("seed", t.seed.to_string());
        put("threshold", t.threshold.to_string());
        put("negative_ratio", t.negative_ratio.to_string());
        put("resample_negatives", t.resample_negatives.to_string());
        s
    }
}

/// `key = value` lines; `#` starts a comment line. Later keys win.
pub fn parse_config(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::parse(origin, i + 1, format!("expected `key = value`, got {:?}", line)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::parse(origin, i + 1, format!("unknown key {:?}", k)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}
