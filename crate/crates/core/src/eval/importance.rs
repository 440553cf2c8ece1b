use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::TrainingPair;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_DIM, FEATURE_NAMES};
use crate::select::PairScorer;

/// Which node of the pair had its column permuted. Pairs are stored in both
/// orders, so `SelfNode` is the scored node and `Sibling` its partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    #[serde(rename = "self")]
    SelfNode,
    Sibling,
}

impl Position {
    pub fn name(self) -> &'static str {
        match self {
            Position::SelfNode => "self",
            Position::Sibling => "sibling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub feature: String,
    pub position: Position,
    /// Mean drop in pairwise accuracy over the repeats.
    pub importance: f64,
    pub std: f64,
}

fn accuracy(scorer: &dyn PairScorer, pairs: &[(FeatureVector, FeatureVector, f64)]) -> Result<f64> {
    let mut hits = 0.0;
    for (a, b, want) in pairs {
        let (sa, sb) = scorer.score_pair(a, b)?;
        let got = sa - sb;
        if got == 0.0 {
            hits += 0.5;
        } else if want * got > 0.0 {
            hits += 1.0;
        }
    }
    Ok(hits / pairs.len() as f64)
}

/// Rows ordered by position, then feature index. `repeats == 0` yields no rows.
pub fn permutation_importance(
    scorer: &dyn PairScorer,
    heldout: &[TrainingPair],
    repeats: usize,
    seed: u64,
) -> Result<Vec<ImportanceRow>> {
    if repeats == 0 {
        log::warn!("permutation importance requested with 0 repeats; nothing to report");
        return Ok(Vec::new());
    }
    if heldout.is_empty() {
        return Err(Error::EmptyDataset("no held-out pairs for permutation importance".into()));
    }
    let base: Vec<(FeatureVector, FeatureVector, f64)> = heldout
        .iter()
        .map(|p| (p.features_a, p.features_b, p.label_a as f64 - p.label_b as f64))
        .collect();
    let reference = accuracy(scorer, &base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * FEATURE_DIM);
    for position in [Position::SelfNode, Position::Sibling] {
        for (k, name) in FEATURE_NAMES.iter().enumerate() {
            let mut drops = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let mut column: Vec<f64> = base
                    .iter()
                    .map(|(a, b, _)| match position {
                        Position::SelfNode => a.0[k],
                        Position::Sibling => b.0[k],
                    })
                    .collect();
                column.shuffle(&mut rng);
                let permuted: Vec<_> = base
                    .iter()
                    .zip(&column)
                    .map(|((a, b, w), &v)| {
                        let (mut a, mut b) = (*a, *b);
                        match position {
                            Position::SelfNode => a.0[k] = v,
                            Position::Sibling => b.0[k] = v,
                        }
                        (a, b, *w)
                    })
                    .collect();
                drops.push(reference - accuracy(scorer, &permuted)?);
            }
            let n = drops.len() as f64;
            let mean = drops.iter().sum::<f64>() / n;
            let var = drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
            rows.push(ImportanceRow {
                feature: name.to_string(),
                position,
                importance: mean,
                std: var.sqrt(),
            });
        }
    }
    Ok(rows)
}
