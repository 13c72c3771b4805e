//! `key = value` training configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::ClassScheme;
use crate::deppath::PathMode;
use crate::error::{Error, Result};
use crate::infer_eval::EvalStrategy;
use crate::network::{Hyperparams, Lambdas};

/// How subject/object assignment is exposed during training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Path e1→e2, `2R+1` directed classes.
    Blind2K1,
    /// Path from gold subject to gold object, `R+1` classes.
    Sighted,
    /// Sighted plus the reversed path of every non-Other instance as Other.
    SightedNs,
}

impl Regime {
    pub fn scheme(self) -> ClassScheme {
        match self {
            Regime::Blind2K1 => ClassScheme::Directed,
            Regime::Sighted | Regime::SightedNs => ClassScheme::Undirected,
        }
    }

    /// Test strategy used when the configuration does not name one.
    pub fn default_strategy(self) -> EvalStrategy {
        match self {
            Regime::Blind2K1 => EvalStrategy::Blind,
            Regime::Sighted => EvalStrategy::Sighted,
            Regime::SightedNs => EvalStrategy::Dual,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Blind2K1 => "blind_2k1",
            Regime::Sighted => "sighted",
            Regime::SightedNs => "sighted_ns",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blind" | "blind_2k1" => Ok(Regime::Blind2K1),
            "sighted" => Ok(Regime::Sighted),
            "sighted_ns" | "ns" => Ok(Regime::SightedNs),
            _ => Err(Error::Config(format!("unknown regime {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Negatives {
    None,
    /// The reversed path of each non-Other gold instance.
    Reversed,
    /// Encoded paths read from a file in `extract-paths` format.
    Pool(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub regime: Regime,
    /// `none`, `reversed` or `pool`; unset derives from the regime.
    pub negatives: Option<String>,
    pub pool_path: Option<PathBuf>,
    pub mode: PathMode,
    pub test_strategy: Option<EvalStrategy>,
    pub d: usize,
    pub w: usize,
    pub n1: usize,
    pub n2: usize,
    pub lambdas: Lambdas,
    pub learning_rate: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub min_count: usize,
    /// Let the optimizer update the PAD embedding.
    pub train_pad: bool,
    pub lex_features_path: Option<PathBuf>,
    pub embeddings_path: Option<PathBuf>,
    pub label_set_path: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            regime: Regime::SightedNs,
            negatives: None,
            pool_path: None,
            mode: PathMode::Lcnn,
            test_strategy: None,
            d: 50,
            w: 3,
            n1: 200,
            n2: 100,
            lambdas: Lambdas::default(),
            learning_rate: 0.01,
            epsilon: 1e-6,
            max_epochs: 100,
            patience: 5,
            seed: 1,
            min_count: 1,
            train_pad: false,
            lex_features_path: None,
            embeddings_path: None,
            label_set_path: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty() && value != "none").then(|| PathBuf::from(value))
}

impl TrainConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "regime" => self.regime = value.parse()?,
            "negatives" => self.negatives = Some(value.to_ascii_lowercase()),
            "pool_path" => self.pool_path = opt_path(value),
            "mode" => self.mode = value.parse()?,
            "test_strategy" => self.test_strategy = Some(value.parse()?),
            "d" => self.d = parse_num(key, value)?,
            "w" => self.w = parse_num(key, value)?,
            "n1" => self.n1 = parse_num(key, value)?,
            "n2" => self.n2 = parse_num(key, value)?,
            "lambda_we" => self.lambdas.we = parse_num(key, value)?,
            "lambda_w1" => self.lambdas.w1 = parse_num(key, value)?,
            "lambda_w2" => self.lambdas.w2 = parse_num(key, value)?,
            "lambda_w3" => self.lambdas.w3 = parse_num(key, value)?,
            "learning_rate" => self.learning_rate = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "max_epochs" => self.max_epochs = parse_num(key, value)?,
            "patience" => self.patience = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "min_count" => self.min_count = parse_num(key, value)?,
            "train_pad" => self.train_pad = parse_num(key, value)?,
            "lex_features_path" => self.lex_features_path = opt_path(value),
            "embeddings_path" => self.embeddings_path = opt_path(value),
            "label_set_path" => self.label_set_path = opt_path(value),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Resolves the negative-sampling strategy and checks it against the regime.
    pub fn negatives(&self) -> Result<Negatives> {
        let kind = self.negatives.as_deref().unwrap_or(match self.regime {
            Regime::SightedNs => "reversed",
            _ if self.pool_path.is_some() => "pool",
            _ => "none",
        });
        let negatives = match kind {
            "none" => Negatives::None,
            "reversed" => Negatives::Reversed,
            "pool" => Negatives::Pool(
                self.pool_path
                    .clone()
                    .ok_or_else(|| Error::Config("negatives = pool needs pool_path".into()))?,
            ),
            other => return Err(Error::Config(format!("unknown negatives {other:?}"))),
        };
        match (&negatives, self.regime) {
            (Negatives::Reversed, Regime::SightedNs) => Ok(negatives),
            (Negatives::Reversed, r) => Err(Error::Config(format!("reversed negatives require regime sighted_ns, got {r}"))),
            (_, Regime::SightedNs) => Err(Error::Config("regime sighted_ns requires negatives = reversed".into())),
            _ => Ok(negatives),
        }
    }

    pub fn strategy(&self) -> EvalStrategy {
        self.test_strategy.unwrap_or_else(|| self.regime.default_strategy())
    }

    /// Network shape for `k` classes and `f` lexical features.
    pub fn hyperparams(&self, k: usize, f: usize) -> Hyperparams {
        Hyperparams {
            d: self.d,
            w: self.w,
            n1: self.n1,
            n2: self.n2,
            k,
            f,
            lambdas: self.lambdas,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.negatives()?;
        self.hyperparams(1, 0).validate()?;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        let strategy = self.strategy();
        if strategy.scheme() != self.regime.scheme() {
            return Err(Error::Config(format!("test strategy {strategy} does not fit regime {}", self.regime)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_setting() {
        let c = TrainConfig::default();
        assert_eq!((c.d, c.w, c.n1, c.n2), (50, 3, 200, 100));
        assert_eq!(c.lambdas, Lambdas { we: 1e-4, w1: 1e-3, w2: 1e-4, w3: 2e-3 });
        assert_eq!(c.negatives().unwrap(), Negatives::Reversed);
        c.validate().unwrap();
    }

    #[test]
    fn parses_key_values() {
        let c = TrainConfig::parse(
            "# comment\nregime = sighted\nnegatives = pool\npool_path = nyt.paths\n\
             n1 = 20  # inline\nlambda_w3 = 0.5\nseed = 42\nmode = cnn\n",
        )
        .unwrap();
        assert_eq!(c.regime, Regime::Sighted);
        assert_eq!(c.negatives().unwrap(), Negatives::Pool("nyt.paths".into()));
        assert_eq!((c.n1, c.lambdas.w3, c.seed, c.mode), (20, 0.5, 42, PathMode::DirOnly));
        assert_eq!(c.strategy(), EvalStrategy::Sighted);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TrainConfig::parse("colour = blue\n").is_err());
        assert!(TrainConfig::parse("d = fifty\n").is_err());
        assert!(TrainConfig::parse("just words\n").is_err());
        let c = TrainConfig::parse("regime = sighted\nnegatives = reversed\n").unwrap();
        assert!(c.validate().is_err());
        let c = TrainConfig::parse("regime = sighted_ns\nnegatives = none\n").unwrap();
        assert!(c.validate().is_err());
        let c = TrainConfig::parse("learning_rate = 0\n").unwrap();
        assert!(c.validate().is_err());
        let c = TrainConfig::parse("regime = blind\ntest_strategy = dual\n").unwrap();
        assert!(c.validate().is_err());
        let c = TrainConfig::parse("w = 4\n").unwrap();
        assert!(c.validate().is_err());
    }
}
