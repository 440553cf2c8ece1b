//! Mini-batch training with momentum, bagging over instance shards, and
//! K-fold selection of the ensemble.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{loss, loss_and_grad, Dropout, FusionModel, PairExample};
use super::{FusionConfig, FusionEnsemble};
use crate::datagen::{Dataset, TrainingPair};
use crate::error::{Error, Result};
use crate::features::{fit_norm_stats, standardize, NormStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    /// Parameters from the epoch with the lowest validation loss.
    pub model: FusionModel,
    pub curve: Vec<EpochStats>,
    pub best_epoch: Option<usize>,
}

pub fn to_examples(pairs: &[TrainingPair], norm: &NormStats) -> Result<Vec<PairExample>> {
    pairs
        .iter()
        .map(|p| {
            Ok(PairExample {
                a: standardize(&p.features_a, norm)?.0.to_vec(),
                b: standardize(&p.features_b, norm)?.0.to_vec(),
                label_a: p.label_a as f64,
                label_b: p.label_b as f64,
            })
        })
        .collect()
}

/// Share of pairs where the labeled node outscores its partner; ties count half.
pub fn pairwise_accuracy<F>(examples: &[PairExample], mut score: F) -> Result<f64>
where
    F: FnMut(&[f64], &[f64]) -> Result<(f64, f64)>,
{
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0.0;
    for ex in examples {
        let (sa, sb) = score(&ex.a, &ex.b)?;
        let want = ex.label_a - ex.label_b;
        let got = sa - sb;
        if got == 0.0 {
            hits += 0.5;
        } else if want * got > 0.0 {
            hits += 1.0;
        }
    }
    Ok(hits / examples.len() as f64)
}

/// Trains one network. An empty `val` set falls back to the training set
/// for model selection.
pub fn train(
    train_set: &[PairExample],
    val_set: &[PairExample],
    config: &FusionConfig,
    seed: u64,
) -> Result<TrainOutput> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::invalid("training shard is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = FusionModel::init(config.input_dim, config.hidden_dim, config.num_blocks, &mut rng);
    let val_set = if val_set.is_empty() { train_set } else { val_set };
    let val_refs: Vec<&PairExample> = val_set.iter().collect();
    let mut velocity = vec![0.0; model.params().len()];
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best: Option<(f64, usize, FusionModel)> = None;
    let mut curve = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&PairExample> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (l, grad) = if config.dropout > 0.0 {
                let mut dr = Dropout {
                    rate: config.dropout,
                    rng: &mut rng,
                };
                loss_and_grad(&model, &batch, Some(&mut dr))?
            } else {
                loss_and_grad::<ChaCha8Rng>(&model, &batch, None)?
            };
            total += l * batch.len() as f64;
            for ((p, v), g) in model.params_mut().iter_mut().zip(&mut velocity).zip(&grad) {
                *v = config.momentum * *v - config.learning_rate * g;
                *p += *v;
            }
        }
        let train_loss = total / train_set.len() as f64;
        let val_loss = loss(&model, &val_refs)?;
        if !val_loss.is_finite() || !model.is_finite() {
            return Err(Error::NonFinite(format!(
                "training diverged at epoch {epoch}: validation loss {val_loss}, training loss {train_loss}"
            )));
        }
        curve.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((val_loss, epoch, model.clone()));
        }
    }
    Ok(match best {
        Some((_, epoch, m)) => TrainOutput {
            model: m,
            curve,
            best_epoch: Some(epoch),
        },
        None => TrainOutput {
            model,
            curve,
            best_epoch: None,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub fold: usize,
    pub member: usize,
    pub train_instances: usize,
    pub train_pairs: usize,
    pub best_epoch: Option<usize>,
    /// Accuracy of this member alone on the fold's validation pairs.
    pub fold_accuracy: f64,
    pub curve: Vec<EpochStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub fold_accuracies: Vec<f64>,
    pub chosen_fold: usize,
    pub members: Vec<MemberReport>,
    /// Whether fold accuracy was measured on held-out instances (K > 1).
    pub held_out: bool,
}

impl TrainReport {
    /// Mean single-member accuracy of the chosen fold.
    pub fn mean_member_accuracy(&self) -> f64 {
        let accs: Vec<f64> = self
            .members
            .iter()
            .filter(|m| m.fold == self.chosen_fold)
            .map(|m| m.fold_accuracy)
            .collect();
        accs.iter().sum::<f64>() / accs.len().max(1) as f64
    }
}

fn group_by_instance(ds: &Dataset) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in ds.pairs.iter().enumerate() {
        groups.entry(p.instance_id.as_str()).or_default().push(i);
    }
    groups
}

fn gather(ds: &Dataset, groups: &BTreeMap<&str, Vec<usize>>, ids: &[&str]) -> Vec<TrainingPair> {
    ids.iter()
        .flat_map(|id| groups[id].iter().map(|&i| ds.pairs[i].clone()))
        .collect()
}

fn derive_seed(seed: u64, fold: usize, member: usize) -> u64 {
    seed ^ ((fold as u64 + 1) << 32) ^ (member as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Bagged ensemble: instances are split into K folds; for each fold the rest
/// is partitioned by instance into M shards, one member per shard. The fold
/// whose ensemble ranks its held-out pairs best is kept.
pub fn train_ensemble(ds: &Dataset, config: &FusionConfig) -> Result<(FusionEnsemble, TrainReport)> {
    config.validate()?;
    let groups = group_by_instance(ds);
    let mut ids: Vec<&str> = groups.keys().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    ids.shuffle(&mut rng);
    let (k, m) = (config.kfold, config.ensemble_size);
    let smallest_train = if k == 1 { ids.len() } else { ids.len() - ids.len().div_ceil(k) };
    if ids.len() < k || smallest_train < m {
        return Err(Error::invalid(format!(
            "dataset has {} instances, leaving {smallest_train} for training in the smallest \
             fold; {m} members need one instance each",
            ids.len()
        )));
    }

    let mut best: Option<(f64, usize, FusionEnsemble)> = None;
    let mut fold_accuracies = Vec::with_capacity(k);
    let mut members_report = Vec::new();
    for fold in 0..k {
        let (val_ids, train_ids): (Vec<&str>, Vec<&str>) = if k == 1 {
            (Vec::new(), ids.clone())
        } else {
            let (v, t): (Vec<_>, Vec<_>) = ids.iter().enumerate().partition(|(i, _)| i % k == fold);
            (v.into_iter().map(|(_, s)| *s).collect(), t.into_iter().map(|(_, s)| *s).collect())
        };
        let train_pairs = gather(ds, &groups, &train_ids);
        let norm = fit_norm_stats(
            train_pairs
                .iter()
                .flat_map(|p| [&p.features_a, &p.features_b]),
        );
        let fold_pairs = if k == 1 {
            train_pairs.clone()
        } else {
            gather(ds, &groups, &val_ids)
        };
        let fold_examples = to_examples(&fold_pairs, &norm)?;

        let shards: Vec<Vec<&str>> = (0..m)
            .map(|s| train_ids.iter().enumerate().filter(|(i, _)| i % m == s).map(|(_, id)| *id).collect())
            .collect();
        let trained: Vec<Result<(TrainOutput, usize, usize)>> = shards
            .par_iter()
            .enumerate()
            .map(|(member, shard)| {
                // hold out every fifth instance of the shard for early stopping
                // small shards hold out their last instance instead
                let held_out = |i: usize| {
                    shard.len() >= 2 && (i % 5 == 4 || (shard.len() < 5 && i == shard.len() - 1))
                };
                let inner_train: Vec<&str> =
                    shard.iter().enumerate().filter(|(i, _)| !held_out(*i)).map(|(_, s)| *s).collect();
                let inner_val: Vec<&str> =
                    shard.iter().enumerate().filter(|(i, _)| held_out(*i)).map(|(_, s)| *s).collect();
                let tr = to_examples(&gather(ds, &groups, &inner_train), &norm)?;
                let va = to_examples(&gather(ds, &groups, &inner_val), &norm)?;
                let out = train(&tr, &va, config, derive_seed(config.seed, fold, member))?;
                Ok((out, shard.len(), tr.len()))
            })
            .collect();
        let mut models = Vec::with_capacity(m);
        for (member, res) in trained.into_iter().enumerate() {
            let (out, n_inst, n_pairs) = res?;
            let acc = pairwise_accuracy(&fold_examples, |a, b| out.model.score(a, b))?;
            members_report.push(MemberReport {
                fold,
                member,
                train_instances: n_inst,
                train_pairs: n_pairs,
                best_epoch: out.best_epoch,
                fold_accuracy: acc,
                curve: out.curve,
            });
            models.push(out.model);
        }
        let ens = FusionEnsemble::new(*config, norm, models)?;
        let acc = pairwise_accuracy(&fold_examples, |a, b| ens.score_standardized(a, b))?;
        log::info!("fold {fold}: ensemble pairwise accuracy {acc:.4} on {} pairs", fold_examples.len());
        fold_accuracies.push(acc);
        if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
            best = Some((acc, fold, ens));
        }
    }
    let (_, chosen_fold, ens) = best.expect("at least one fold");
    Ok((
        ens,
        TrainReport {
            fold_accuracies,
            chosen_fold,
            members: members_report,
            held_out: k > 1,
        },
    ))
}
