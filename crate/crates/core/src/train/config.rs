use std::fmt;

use crate::corpus::StreamKind;
use crate::error::{Error, Result};

/// Which skip-gram variant to train.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// Mixed word and concept contexts.
    Crc,
    /// Concept-only contexts.
    ThreeC,
}

impl Model {
    pub fn stream_kind(self) -> StreamKind {
        match self {
            Model::Crc => StreamKind::Crc,
            Model::ThreeC => StreamKind::ThreeC,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Crc => "crc",
            Model::ThreeC => "3c",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Context tokens taken on each side of the target.
    pub window: usize,
    /// Negative samples per context pair.
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
    pub seed: u64,
    pub workers: usize,
    pub model: Model,
    /// Frequent-token subsampling threshold; disabled when `None`.
    pub subsample: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 500,
            window: 9,
            negatives: 5,
            epochs: 10,
            initial_lr: 0.025,
            min_lr: 1e-4,
            seed: 1,
            workers: 1,
            model: Model::Crc,
            subsample: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if !(self.min_lr > 0.0 && self.min_lr <= self.initial_lr && self.initial_lr.is_finite()) {
            return fail("learning rates must satisfy 0 < min_lr <= initial_lr");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0 && t.is_finite()) {
                return fail("subsample threshold must be positive");
            }
        }
        Ok(())
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "model={} dim={} window={} negatives={} epochs={} lr={} min_lr={} seed={} workers={} subsample={}",
            self.model,
            self.dim,
            self.window,
            self.negatives,
            self.epochs,
            self.initial_lr,
            self.min_lr,
            self.seed,
            self.workers,
            self.subsample.map_or("off".to_owned(), |t| t.to_string()),
        )
    }
}

/// Linear decay from `initial` to a floor of `min` over `total` pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearningRate {
    pub initial: f64,
    pub min: f64,
    pub total: u64,
}

impl LearningRate {
    pub fn at(&self, processed: u64) -> f64 {
        let fraction = processed as f64 / self.total.max(1) as f64;
        (self.initial * (1.0 - fraction)).max(self.min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = TrainConfig::default();
        assert_eq!((cfg.dim, cfg.window, cfg.epochs), (500, 9, 10));
        cfg.validate().unwrap();
        assert!(cfg.to_string().contains("dim=500 window=9"));
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            TrainConfig {
                dim: 0,
                ..Default::default()
            },
            TrainConfig {
                window: 0,
                ..Default::default()
            },
            TrainConfig {
                negatives: 0,
                ..Default::default()
            },
            TrainConfig {
                epochs: 0,
                ..Default::default()
            },
            TrainConfig {
                min_lr: 0.0,
                ..Default::default()
            },
            TrainConfig {
                min_lr: 0.1,
                initial_lr: 0.01,
                ..Default::default()
            },
            TrainConfig {
                subsample: Some(-1.0),
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err(), "{cfg}");
        }
    }

    #[test]
    fn schedule() {
        let lr = LearningRate {
            initial: 0.025,
            min: 1e-4,
            total: 1000,
        };
        assert_eq!(lr.at(0), 0.025);
        assert_eq!(lr.at(500), 0.025 * (1.0 - 0.5));
        assert_eq!(lr.at(1000), 1e-4);
        assert_eq!(lr.at(5000), 1e-4);
        for p in (0..1000).step_by(37) {
            assert_eq!(lr.at(p), (0.025 * (1.0 - p as f64 / 1000.0)).max(1e-4));
        }
    }
}
