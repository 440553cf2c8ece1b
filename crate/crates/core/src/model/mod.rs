//! The learned pair scorer: an ensemble of fusion networks sharing one set of
//! feature standardization statistics.

mod network;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use network::{
    loss, loss_and_grad, parameter_count, BlockTensors, Dropout, ForwardCache, FusionModel,
    ModelTensors, PairExample,
};
pub use train::{
    pairwise_accuracy, to_examples, train, train_ensemble, EpochStats, MemberReport, TrainOutput,
    TrainReport,
};

use crate::error::{Error, Result};
use crate::features::{standardize, FeatureVector, NormStats, FEATURE_DIM, FEATURE_SCHEMA_VERSION};
use crate::select::PairScorer;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_blocks: usize,
    pub dropout: f64,
    pub ensemble_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub kfold: usize,
    pub seed: u64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            input_dim: FEATURE_DIM,
            hidden_dim: 64,
            num_blocks: 2,
            dropout: 0.1,
            ensemble_size: 5,
            learning_rate: 1e-3,
            momentum: 0.9,
            batch_size: 256,
            epochs: 50,
            kfold: 5,
            seed: 0,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::invalid(format!("fusion config: {what}")));
        if self.input_dim == 0 || self.hidden_dim == 0 {
            return bad("dimensions must be positive");
        }
        if self.num_blocks == 0 {
            return bad("num_blocks must be at least 1");
        }
        if self.ensemble_size == 0 {
            return bad("ensemble_size must be at least 1");
        }
        if self.kfold == 0 {
            return bad("kfold must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionEnsemble {
    pub config: FusionConfig,
    pub norm: NormStats,
    pub members: Vec<FusionModel>,
    pub feature_schema_version: u32,
}

impl FusionEnsemble {
    pub fn new(config: FusionConfig, norm: NormStats, members: Vec<FusionModel>) -> Result<Self> {
        config.validate()?;
        norm.check_dim()?;
        if norm.mean.len() != config.input_dim {
            return Err(Error::invalid(format!(
                "norm stats have {} features, config says {}",
                norm.mean.len(),
                config.input_dim
            )));
        }
        if members.is_empty() {
            return Err(Error::invalid("an ensemble needs at least one member"));
        }
        for m in &members {
            if m.input_dim() != config.input_dim
                || m.hidden_dim() != config.hidden_dim
                || m.num_blocks() != config.num_blocks
            {
                return Err(Error::invalid("member shape disagrees with the config"));
            }
        }
        Ok(FusionEnsemble {
            config,
            norm,
            members,
            feature_schema_version: FEATURE_SCHEMA_VERSION,
        })
    }

    /// Mean of member scores on already standardized rows.
    pub fn score_standardized(&self, a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
        let (mut sa, mut sb) = (0.0, 0.0);
        for m in &self.members {
            let (x, y) = m.score(a, b)?;
            sa += x;
            sb += y;
        }
        let k = self.members.len() as f64;
        Ok((sa / k, sb / k))
    }

    pub fn predict(&self, a: &FeatureVector, b: &FeatureVector) -> Result<(f64, f64)> {
        if self.feature_schema_version != FEATURE_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                path: "<ensemble>".into(),
                what: "feature",
                expected: FEATURE_SCHEMA_VERSION,
                found: self.feature_schema_version as u64,
            });
        }
        let za = standardize(a, &self.norm)?;
        let zb = standardize(b, &self.norm)?;
        self.score_standardized(za.as_slice(), zb.as_slice())
    }
}

impl PairScorer for FusionEnsemble {
    fn score_pair(&self, a: &FeatureVector, b: &FeatureVector) -> Result<(f64, f64)> {
        self.predict(a, b)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: u32,
    feature_schema_version: u32,
    config: FusionConfig,
    norm_stats: NormStats,
    members: Vec<ModelTensors>,
}

pub fn model_to_string(ens: &FusionEnsemble) -> String {
    let file = ModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        feature_schema_version: ens.feature_schema_version,
        config: ens.config,
        norm_stats: ens.norm.clone(),
        members: ens.members.iter().map(|m| m.tensors()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn save_model(ens: &FusionEnsemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(ens)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FusionEnsemble> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, &path.display().to_string())
}

pub fn parse_model(text: &str, origin: &str) -> Result<FusionEnsemble> {
    let parse_err = |e: serde_json::Error, field: &str| Error::Parse {
        path: origin.to_string(),
        line: e.line(),
        field: field.to_string(),
        message: format!("{e} (column {})", e.column()),
    };
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_err(e, "model"))?;
    for (key, what, expected) in [
        ("schema_version", "model", MODEL_SCHEMA_VERSION),
        ("feature_schema_version", "feature", FEATURE_SCHEMA_VERSION),
    ] {
        let found = raw.get(key).and_then(|v| v.as_u64());
        if found != Some(expected as u64) {
            return Err(Error::SchemaVersion {
                path: origin.to_string(),
                what,
                expected,
                found: found.unwrap_or(0),
            });
        }
    }
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ModelFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        parse_err(e.into_inner(), &path)
    })?;
    let c = file.config;
    let members = file
        .members
        .iter()
        .map(|t| {
            if t.blocks.len() != c.num_blocks {
                return Err(Error::invalid(format!(
                    "{origin}: member has {} blocks, config says {}",
                    t.blocks.len(),
                    c.num_blocks
                )));
            }
            FusionModel::from_tensors(t, c.input_dim, c.hidden_dim)
        })
        .collect::<Result<Vec<_>>>()?;
    FusionEnsemble::new(c, file.norm_stats, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ensemble(k: usize) -> FusionEnsemble {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let config = FusionConfig {
            hidden_dim: 5,
            ensemble_size: k,
            ..FusionConfig::default()
        };
        let members = (0..k).map(|_| FusionModel::init(FEATURE_DIM, 5, 2, &mut rng)).collect();
        let norm = NormStats {
            mean: vec![0.5; FEATURE_DIM],
            std: vec![2.0; FEATURE_DIM],
        };
        FusionEnsemble::new(config, norm, members).unwrap()
    }

    fn fv(x: f64) -> FeatureVector {
        let mut v = [0.0; FEATURE_DIM];
        for (i, e) in v.iter_mut().enumerate() {
            *e = x + i as f64 * 0.1;
        }
        FeatureVector(v)
    }

    #[test]
    fn predict_is_the_member_mean() {
        let ens = ensemble(3);
        let (a, b) = (fv(0.2), fv(-1.0));
        let za = standardize(&a, &ens.norm).unwrap();
        let zb = standardize(&b, &ens.norm).unwrap();
        let mut sum = (0.0, 0.0);
        for m in &ens.members {
            let s = m.score(za.as_slice(), zb.as_slice()).unwrap();
            sum.0 += s.0;
            sum.1 += s.1;
        }
        assert_eq!(ens.predict(&a, &b).unwrap(), (sum.0 / 3.0, sum.1 / 3.0));
    }

    #[test]
    fn identical_members_predict_like_one() {
        let mut ens = ensemble(1);
        let single = ens.predict(&fv(0.3), &fv(0.9)).unwrap();
        ens.members = vec![ens.members[0].clone(); 4];
        assert_eq!(ens.predict(&fv(0.3), &fv(0.9)).unwrap(), single);
    }

    #[test]
    fn hand_built_two_member_mean() {
        let mut members = Vec::new();
        for (x, y) in [(0.2, 0.8), (0.4, 0.6)] {
            // zero network with head weights reading the first feature
            let mut m = FusionModel::zeros(FEATURE_DIM, 2, 1);
            let t = m.tensors();
            let mut t2 = t.clone();
            t2.head_w[0] = y - x;
            t2.head_b = x;
            m = FusionModel::from_tensors(&t2, FEATURE_DIM, 2).unwrap();
            members.push(m);
        }
        let config = FusionConfig {
            hidden_dim: 2,
            num_blocks: 1,
            ensemble_size: 2,
            ..FusionConfig::default()
        };
        let ens = FusionEnsemble::new(config, NormStats::identity(), members).unwrap();
        let mut a = [0.0; FEATURE_DIM];
        let mut b = [0.0; FEATURE_DIM];
        a[0] = 0.0;
        b[0] = 1.0;
        let (sa, sb) = ens.predict(&FeatureVector(a), &FeatureVector(b)).unwrap();
        assert!((sa - 0.3).abs() < 1e-15 && (sb - 0.7).abs() < 1e-15);
    }

    #[test]
    fn save_load_round_trip_is_canonical() {
        let ens = ensemble(2);
        let text = model_to_string(&ens);
        let back = parse_model(&text, "m.json").unwrap();
        assert_eq!(back, ens);
        assert_eq!(model_to_string(&back), text);
        let (a, b) = (fv(1.0), fv(2.0));
        assert_eq!(back.predict(&a, &b).unwrap(), ens.predict(&a, &b).unwrap());
    }

    #[test]
    fn tampered_schema_version_is_refused() {
        let text = model_to_string(&ensemble(1)).replace(
            "\"feature_schema_version\": 1",
            "\"feature_schema_version\": 7",
        );
        let err = parse_model(&text, "m.json").unwrap_err();
        assert!(matches!(err, Error::SchemaVersion { found: 7, .. }), "{err}");
    }

    #[test]
    fn corrupt_file_reports_position() {
        let text = model_to_string(&ensemble(1));
        let cut = &text[..text.len() / 2];
        match parse_model(cut, "m.json").unwrap_err() {
            Error::Parse { line, .. } => assert!(line > 1),
            other => panic!("unexpected {other}"),
        }
    }
}
