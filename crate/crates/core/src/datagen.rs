//! Training data collection: solve each instance, label the nodes on the
//! path to the optimal incumbent, and pair them against the other nodes that
//! shared a queue with them.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bnb::{solve, BranchHistory, SearchTrace, SolveLimits, SolveOptions, SolveStatus, TraceLevel};
use crate::clock::ClockKind;
use crate::error::{Error, Result};
use crate::features::{extract_features_with, FeatureVector, FEATURE_SCHEMA_VERSION};
use crate::instance::MilpInstance;
use crate::select::{Selector, SelectorKind};

pub const DATASET_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_PAIR_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub features_a: FeatureVector,
    pub features_b: FeatureVector,
    pub label_a: u8,
    pub label_b: u8,
    pub instance_id: String,
    /// Index of the selection whose queue both nodes came from.
    pub queue_event_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleLabeling {
    pub instance_id: String,
    pub optimal_objective: f64,
    /// Root first, ending at the node where the optimal incumbent was found.
    pub oracle_ids: Vec<usize>,
    pub bpb_history: BranchHistory,
    pub nodes_created: usize,
}

/// What labeling produced for one instance.
#[derive(Debug, Clone)]
pub enum LabelOutcome {
    Labeled {
        labeling: OracleLabeling,
        trace: SearchTrace,
    },
    /// The root LP was integral, so there is no tree to learn from.
    IntegralRoot,
    /// Phase 1 did not prove optimality within the limits.
    Skipped(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectOptions {
    pub limits: SolveLimits,
    pub clock: ClockKind,
    /// Selector driving the phase-1 solve.
    pub selector: SelectorKind,
    pub pair_cap: usize,
    pub seed: u64,
    /// Run a literal second solve and check it reproduces the first tree.
    pub verify_replay: bool,
}

impl Default for CollectOptions {
    fn default() -> Self {
        CollectOptions {
            limits: SolveLimits::default(),
            clock: ClockKind::Work,
            selector: SelectorKind::Bes,
            pair_cap: DEFAULT_PAIR_CAP,
            seed: 0,
            verify_replay: false,
        }
    }
}

fn phase_options(opts: &CollectOptions) -> SolveOptions {
    SolveOptions {
        limits: opts.limits,
        clock: opts.clock,
        trace: TraceLevel::Full,
        ..SolveOptions::default()
    }
}

/// Solves `inst` and marks as oracle every node whose branch history is a
/// prefix of the history of the node where the optimum was found.
pub fn label_oracle_nodes(inst: &MilpInstance, opts: &CollectOptions) -> Result<LabelOutcome> {
    let selector = Selector::heuristic(opts.selector)?;
    let sopts = phase_options(opts);
    let first = solve(inst, selector.clone(), &sopts)?;
    if first.status != SolveStatus::Optimal {
        return Ok(LabelOutcome::Skipped(format!(
            "phase 1 ended with status {}",
            first.status.name()
        )));
    }
    if first.root_integral {
        return Ok(LabelOutcome::IntegralRoot);
    }
    let trace = first.trace.expect("full trace requested");
    let bpb_history = first.bpb_history.expect("optimal status implies an incumbent");
    let bpb_node = first.bpb_node.expect("optimal status implies an incumbent");

    if opts.verify_replay {
        let second = solve(inst, selector, &sopts)?;
        let same = second.trace.as_ref() == Some(&trace)
            && second.event_log == first.event_log
            && second.incumbent_objective == first.incumbent_objective;
        if !same {
            return Err(Error::Determinism(format!(
                "{}: the replayed solve diverged from phase 1",
                inst.name
            )));
        }
    }

    let mut oracle_ids: Vec<usize> = trace
        .nodes
        .iter()
        .filter(|n| n.history.is_prefix_of(&bpb_history))
        .map(|n| n.input.id)
        .collect();
    oracle_ids.sort_by_key(|&id| trace.nodes[id].input.depth);
    check_oracle_path(&trace, &oracle_ids, bpb_node)?;
    Ok(LabelOutcome::Labeled {
        labeling: OracleLabeling {
            instance_id: inst.name.clone(),
            optimal_objective: first.incumbent_objective,
            oracle_ids,
            bpb_history,
            nodes_created: first.nodes_created,
        },
        trace,
    })
}

fn check_oracle_path(trace: &SearchTrace, ids: &[usize], bpb_node: usize) -> Result<()> {
    let broken = |why: String| Err(Error::Determinism(format!("oracle path: {why}")));
    if ids.first() != Some(&0) {
        return broken("does not start at the root".into());
    }
    if ids.last() != Some(&bpb_node) {
        return broken(format!("ends at {:?}, not at node {bpb_node}", ids.last()));
    }
    for w in ids.windows(2) {
        if trace.nodes[w[1]].input.parent != Some(w[0]) {
            return broken(format!("node {} is not a child of node {}", w[1], w[0]));
        }
    }
    Ok(())
}

/// Emits oracle-versus-other pairs for every recorded queue holding an oracle
/// node, at most `pair_cap` partners per queue, each pair in both orders.
pub fn collect_pairs(
    labeling: &OracleLabeling,
    trace: &SearchTrace,
    pair_cap: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<TrainingPair> {
    let mut is_oracle = vec![false; trace.nodes.len()];
    for &id in &labeling.oracle_ids {
        is_oracle[id] = true;
    }
    let mut pairs = Vec::new();
    for sel in &trace.selections {
        let Some(&oracle) = sel.queue.iter().find(|&&id| is_oracle[id]) else {
            continue;
        };
        let others: Vec<usize> = sel.queue.iter().copied().filter(|&id| id != oracle).collect();
        if others.is_empty() || pair_cap == 0 {
            continue;
        }
        let chosen: Vec<usize> = if others.len() > pair_cap {
            let mut idx = sample(rng, others.len(), pair_cap).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| others[i]).collect()
        } else {
            others
        };
        let feats = |id: usize| {
            let rec = &trace.nodes[id];
            extract_features_with(&rec.input, &sel.ctx, rec.pseudocosts.0, rec.pseudocosts.1)
        };
        let fo = feats(oracle);
        for other in chosen {
            let fx = feats(other);
            if fo == fx {
                continue;
            }
            pairs.push(TrainingPair {
                features_a: fo,
                features_b: fx,
                label_a: 1,
                label_b: 0,
                instance_id: labeling.instance_id.clone(),
                queue_event_id: sel.index,
            });
            pairs.push(TrainingPair {
                features_a: fx,
                features_b: fo,
                label_a: 0,
                label_b: 1,
                instance_id: labeling.instance_id.clone(),
                queue_event_id: sel.index,
            });
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub schema_version: u32,
    pub feature_schema_version: u32,
    pub family: String,
    pub scale: String,
    pub pair_cap: usize,
    pub seed: u64,
    pub num_instances: usize,
    pub num_skipped: usize,
    pub num_integral_root: usize,
    pub oracle_nodes: usize,
    pub total_nodes: usize,
    pub num_pairs: usize,
}

impl DatasetHeader {
    /// Oracle nodes as a fraction of all nodes created in labeled solves.
    pub fn oracle_fraction(&self) -> f64 {
        if self.total_nodes == 0 {
            0.0
        } else {
            self.oracle_nodes as f64 / self.total_nodes as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub pairs: Vec<TrainingPair>,
}

impl Dataset {
    /// Distinct instance ids in first-appearance order.
    pub fn instance_ids(&self) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for p in &self.pairs {
            if seen.insert(p.instance_id.as_str()) {
                out.push(p.instance_id.clone());
            }
        }
        out
    }
}

/// Splits a generated instance name like `setcover-60x120-s3` into family and scale.
pub fn family_and_scale(name: &str) -> (String, String) {
    let mut parts = name.splitn(2, '-');
    let family = parts.next().unwrap_or_default().to_string();
    let rest = parts.next().unwrap_or_default();
    let scale = match rest.rfind("-s") {
        Some(i) => &rest[..i],
        None => rest,
    };
    (family, scale.to_string())
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Labels every instance and gathers their pairs in instance order.
pub fn build_dataset(instances: &[MilpInstance], opts: &CollectOptions) -> Result<Dataset> {
    let Some(first) = instances.first() else {
        return Err(Error::EmptyDataset("no instances given".into()));
    };
    let (family, scale) = family_and_scale(&first.name);
    for inst in instances {
        if family_and_scale(&inst.name) != (family.clone(), scale.clone()) {
            return Err(Error::invalid(format!(
                "instance {} does not belong to {family} at scale {scale}",
                inst.name
            )));
        }
    }
    let outcomes: Vec<Result<(LabelOutcome, Vec<TrainingPair>)>> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let outcome = label_oracle_nodes(inst, opts)?;
            let pairs = match &outcome {
                LabelOutcome::Labeled { labeling, trace } => {
                    collect_pairs(labeling, trace, opts.pair_cap, &mut instance_rng(opts.seed, i))
                }
                _ => Vec::new(),
            };
            Ok((outcome, pairs))
        })
        .collect();

    let mut header = DatasetHeader {
        schema_version: DATASET_SCHEMA_VERSION,
        feature_schema_version: FEATURE_SCHEMA_VERSION,
        family,
        scale,
        pair_cap: opts.pair_cap,
        seed: opts.seed,
        num_instances: instances.len(),
        num_skipped: 0,
        num_integral_root: 0,
        oracle_nodes: 0,
        total_nodes: 0,
        num_pairs: 0,
    };
    let mut pairs = Vec::new();
    for (inst, res) in instances.iter().zip(outcomes) {
        let (outcome, mut p) = res?;
        match outcome {
            LabelOutcome::Labeled { labeling, .. } => {
                header.oracle_nodes += labeling.oracle_ids.len();
                header.total_nodes += labeling.nodes_created;
            }
            LabelOutcome::IntegralRoot => header.num_integral_root += 1,
            LabelOutcome::Skipped(why) => {
                log::warn!("skipping {}: {why}", inst.name);
                header.num_skipped += 1;
            }
        }
        pairs.append(&mut p);
    }
    if pairs.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} instances gave no pairs ({} integral at the root, {} skipped)",
            instances.len(),
            header.num_integral_root,
            header.num_skipped
        )));
    }
    header.num_pairs = pairs.len();
    log::info!(
        "collected {} pairs from {} instances, oracle fraction {:.4}",
        header.num_pairs,
        instances.len(),
        header.oracle_fraction()
    );
    Ok(Dataset { header, pairs })
}

pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut put = |value: String| writeln!(out, "{value}").map_err(|e| Error::io(path, e));
    put(serde_json::to_string(&ds.header).expect("header serializes"))?;
    for p in &ds.pairs {
        put(serde_json::to_string(p).expect("pair serializes"))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let parse_err = |line: usize, field: &str, message: String| Error::Parse {
        path: path.display().to_string(),
        line,
        field: field.to_string(),
        message,
    };
    let header_line = lines
        .next()
        .ok_or_else(|| parse_err(1, "header", "file is empty".into()))?
        .map_err(|e| Error::io(path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&header_line)
        .map_err(|e| parse_err(1, "header", e.to_string()))?;
    for (what, expected) in [
        ("schema_version", DATASET_SCHEMA_VERSION),
        ("feature_schema_version", FEATURE_SCHEMA_VERSION),
    ] {
        let found = raw.get(what).and_then(|v| v.as_u64());
        if found != Some(expected as u64) {
            return Err(Error::SchemaVersion {
                path: path.display().to_string(),
                what: if what == "schema_version" { "dataset" } else { "feature" },
                expected,
                found: found.unwrap_or(0),
            });
        }
    }
    let header: DatasetHeader =
        serde_json::from_value(raw).map_err(|e| parse_err(1, "header", e.to_string()))?;
    let mut pairs = Vec::with_capacity(header.num_pairs);
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let pair: TrainingPair = serde_json::from_str(&line)
            .map_err(|e| parse_err(k + 2, "pair", e.to_string()))?;
        pairs.push(pair);
    }
    if pairs.len() != header.num_pairs {
        return Err(parse_err(
            pairs.len() + 2,
            "pairs",
            format!("header promises {} pairs, file holds {}", header.num_pairs, pairs.len()),
        ));
    }
    Ok(Dataset { header, pairs })
}
