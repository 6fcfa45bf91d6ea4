//! Training configuration and its flat `key = value` file format.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::DEFAULT_OOV_SEED;
use crate::features::{DEFAULT_AE_EPOCHS, POSITION_DIM, WINDOW_RANGE};
use crate::neural::{Activation, Architecture, HeadShape};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    Adam,
    Adadelta,
}

impl FromStr for Optimizer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(Optimizer::Adam),
            "adadelta" => Ok(Optimizer::Adadelta),
            other => Err(format!("unknown optimizer `{other}`")),
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Adam => "adam",
            Optimizer::Adadelta => "adadelta",
        })
    }
}

/// Which classifier `train` builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Bi-LSTM over the path with max-pooling.
    SdpLstm,
    /// Fixed-length concatenation of token vectors fed straight to the head.
    ConcatMlp,
    /// Simple recurrent encoder; the final hidden state is the summary.
    Rnn,
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sdplstm" | "bilstm" => Ok(ModelKind::SdpLstm),
            "mlp" | "concat" => Ok(ModelKind::ConcatMlp),
            "rnn" => Ok(ModelKind::Rnn),
            other => Err(format!("unknown model `{other}` (sdplstm, mlp, rnn)")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::SdpLstm => "sdplstm",
            ModelKind::ConcatMlp => "mlp",
            ModelKind::Rnn => "rnn",
        })
    }
}

/// Which optional feature segments accompany the word vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSettings {
    pub use_pos: bool,
    pub use_position: bool,
    pub window: usize,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings {
            use_pos: true,
            use_position: true,
            window: POSITION_DIM,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub lstm_units: usize,
    pub dropout: f64,
    pub activation: Activation,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub epochs: usize,
    pub mlp_hidden: usize,
    pub mlp_depth: usize,
    pub batch: usize,
    pub seed: u64,
    pub use_pos: bool,
    pub use_position: bool,
    pub position_window: usize,
    pub embedding_path: Option<String>,
    /// Tag → coarse class file replacing the bundled table.
    pub pos_table: Option<String>,
    /// Word vector width used when no embedding file is given.
    pub embedding_dim: usize,
    pub oov_seed: u64,
    pub k_folds: usize,
    /// Path length of the concatenation baseline.
    pub max_len: usize,
    pub ae_epochs: usize,
    pub tune_embeddings: bool,
    pub score_excluded: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelKind::SdpLstm,
            lstm_units: 64,
            dropout: 0.3,
            activation: Activation::Sigmoid,
            optimizer: Optimizer::Adam,
            learning_rate: 0.001,
            epochs: 130,
            mlp_hidden: 30,
            mlp_depth: 1,
            batch: 16,
            seed: 0,
            use_pos: true,
            use_position: true,
            position_window: POSITION_DIM,
            embedding_path: None,
            pos_table: None,
            embedding_dim: 200,
            oov_seed: DEFAULT_OOV_SEED,
            k_folds: 10,
            max_len: 20,
            ae_epochs: DEFAULT_AE_EPOCHS,
            tune_embeddings: false,
            score_excluded: true,
        }
    }
}

const KEYS: &[&str] = &[
    "model",
    "lstm_units",
    "dropout",
    "activation",
    "optimizer",
    "learning_rate",
    "epochs",
    "mlp_hidden",
    "mlp_depth",
    "batch",
    "seed",
    "use_pos",
    "use_position",
    "position_window",
    "embedding_path",
    "pos_table",
    "embedding_dim",
    "oov_seed",
    "k_folds",
    "max_len",
    "ae_epochs",
    "tune_embeddings",
    "score_excluded",
];

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| e.to_string())
}

impl TrainConfig {
    pub fn features(&self) -> FeatureSettings {
        FeatureSettings {
            use_pos: self.use_pos,
            use_position: self.use_position,
            window: self.position_window,
        }
    }

    pub fn apply_features(&mut self, f: FeatureSettings) {
        self.use_pos = f.use_pos;
        self.use_position = f.use_position;
        self.position_window = f.window;
    }

    pub fn architecture(&self) -> Architecture {
        match self.model {
            ModelKind::SdpLstm => Architecture::SdpLstm { units: self.lstm_units },
            ModelKind::ConcatMlp => Architecture::ConcatMlp { max_len: self.max_len },
            ModelKind::Rnn => Architecture::Rnn { units: self.lstm_units },
        }
    }

    pub fn head_shape(&self) -> HeadShape {
        HeadShape {
            hidden: self.mlp_hidden,
            depth: self.mlp_depth,
            activation: self.activation,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if self.epochs < 1 {
            return fail("epochs must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} outside [0, 1)", self.dropout));
        }
        let (lo, hi) = WINDOW_RANGE;
        if !(lo..=hi).contains(&self.position_window) {
            return fail(format!("position_window {} outside [{lo}, {hi}]", self.position_window));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate {} must be positive", self.learning_rate));
        }
        for (name, v) in [
            ("lstm_units", self.lstm_units),
            ("mlp_hidden", self.mlp_hidden),
            ("mlp_depth", self.mlp_depth),
            ("batch", self.batch),
            ("embedding_dim", self.embedding_dim),
            ("max_len", self.max_len),
        ] {
            if v == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        if self.k_folds < 2 {
            return fail(format!("k_folds {} must be at least 2", self.k_folds));
        }
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "model" => self.model = value.parse()?,
            "lstm_units" => self.lstm_units = parse_num(value)?,
            "dropout" => self.dropout = parse_num(value)?,
            "activation" => self.activation = value.parse()?,
            "optimizer" => self.optimizer = value.parse()?,
            "learning_rate" => self.learning_rate = parse_num(value)?,
            "epochs" => self.epochs = parse_num(value)?,
            "mlp_hidden" => self.mlp_hidden = parse_num(value)?,
            "mlp_depth" => self.mlp_depth = parse_num(value)?,
            "batch" => self.batch = parse_num(value)?,
            "seed" => self.seed = parse_num(value)?,
            "use_pos" => self.use_pos = parse_bool(value)?,
            "use_position" => self.use_position = parse_bool(value)?,
            "position_window" => self.position_window = parse_num(value)?,
            "embedding_path" => {
                self.embedding_path = (!value.is_empty()).then(|| value.to_owned());
            }
            "pos_table" => self.pos_table = (!value.is_empty()).then(|| value.to_owned()),
            "embedding_dim" => self.embedding_dim = parse_num(value)?,
            "oov_seed" => self.oov_seed = parse_num(value)?,
            "k_folds" => self.k_folds = parse_num(value)?,
            "max_len" => self.max_len = parse_num(value)?,
            "ae_epochs" => self.ae_epochs = parse_num(value)?,
            "tune_embeddings" => self.tune_embeddings = parse_bool(value)?,
            "score_excluded" => self.score_excluded = parse_bool(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. Blank lines and lines
    /// starting with `#` are skipped; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = TrainConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: line_no })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.to_owned(),
                });
            }
            cfg.set(key, value).map_err(|reason| ConfigError::BadValue {
                line: line_no,
                key: key.to_owned(),
                value: value.to_owned(),
                reason,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        TrainConfig::parse(&fs::read_to_string(path)?)
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model = {}", self.model)?;
        writeln!(f, "lstm_units = {}", self.lstm_units)?;
        writeln!(f, "dropout = {}", self.dropout)?;
        writeln!(f, "activation = {}", self.activation.name())?;
        writeln!(f, "optimizer = {}", self.optimizer)?;
        writeln!(f, "learning_rate = {}", self.learning_rate)?;
        writeln!(f, "epochs = {}", self.epochs)?;
        writeln!(f, "mlp_hidden = {}", self.mlp_hidden)?;
        writeln!(f, "mlp_depth = {}", self.mlp_depth)?;
        writeln!(f, "batch = {}", self.batch)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "use_pos = {}", self.use_pos)?;
        writeln!(f, "use_position = {}", self.use_position)?;
        writeln!(f, "position_window = {}", self.position_window)?;
        writeln!(f, "embedding_path = {}", self.embedding_path.as_deref().unwrap_or(""))?;
        writeln!(f, "pos_table = {}", self.pos_table.as_deref().unwrap_or(""))?;
        writeln!(f, "embedding_dim = {}", self.embedding_dim)?;
        writeln!(f, "oov_seed = {}", self.oov_seed)?;
        writeln!(f, "k_folds = {}", self.k_folds)?;
        writeln!(f, "max_len = {}", self.max_len)?;
        writeln!(f, "ae_epochs = {}", self.ae_epochs)?;
        writeln!(f, "tune_embeddings = {}", self.tune_embeddings)?;
        writeln!(f, "score_excluded = {}", self.score_excluded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_tuned_setting() {
        let c = TrainConfig::default();
        assert_eq!(c.lstm_units, 64);
        assert_eq!(c.dropout, 0.3);
        assert_eq!(c.activation, Activation::Sigmoid);
        assert_eq!(c.optimizer, Optimizer::Adam);
        assert_eq!(c.epochs, 130);
        assert_eq!(c.mlp_hidden, 30);
        assert_eq!(c.batch, 16);
        assert_eq!(c.position_window, 10);
        assert_eq!(c.k_folds, 10);
        c.validate().unwrap();
    }

    #[test]
    fn parses_and_round_trips() {
        let c = TrainConfig::parse(
            "# tuned\nepochs = 5\nuse_pos=false\n\nactivation = relu\nembedding_path = /x/vec.txt\n",
        )
        .unwrap();
        assert_eq!(c.epochs, 5);
        assert!(!c.use_pos);
        assert_eq!(c.activation, Activation::Relu);
        assert_eq!(c.embedding_path.as_deref(), Some("/x/vec.txt"));
        assert_eq!(TrainConfig::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(TrainConfig::parse("epochs = 0"), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            TrainConfig::parse("dropout = 1.0"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            TrainConfig::parse("position_window = 4"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            TrainConfig::parse("position_window = 13"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            TrainConfig::parse("epochs = 3\nlearnin_rate = 0.1"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            TrainConfig::parse("epochs"),
            Err(ConfigError::Syntax { line: 1 })
        ));
        assert!(matches!(
            TrainConfig::parse("epochs = many"),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn every_key_is_settable() {
        let text = TrainConfig::default().to_string();
        let keys: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        assert_eq!(keys, KEYS);
    }
}
