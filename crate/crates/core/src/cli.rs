//! The `boundlab` command line: gen, solve, collect, train, bench, report.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::bnb::{self, SolveLimits, SolveOptions};
use crate::clock::ClockKind;
use crate::datagen::{build_dataset, read_dataset, write_dataset, CollectOptions, DEFAULT_PAIR_CAP};
use crate::error::{Error, Result};
use crate::eval::{
    emit_report, load_report, metric_row, permutation_importance, run_benchmark, BenchOptions, LcsMode,
    ReportFiles,
};
use crate::instance::{read_instance, write_instance, Family, FamilyParams, MilpInstance};
use crate::model::{load_model, save_model, train_ensemble, FusionConfig, FusionEnsemble};
use crate::select::{PairScorer, Selector, SelectorKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "boundlab", version, about = "Branch-and-bound MILP lab with learned node selection")]
pub struct Cli {
    /// Seed for every random choice (falls back to BOUNDLAB_SEED, then 0).
    #[arg(long, global = true, env = "BOUNDLAB_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate benchmark instances.
    Gen(GenArgs),
    /// Solve one instance with one selector and print its metric row.
    Solve(SolveArgs),
    /// Build a pairwise training dataset from oracle-labeled solves.
    Collect(CollectArgs),
    /// Train the fusion ensemble on a dataset and save the model.
    Train(TrainArgs),
    /// Run every selector on every instance and write a report.
    Bench(BenchArgs),
    /// Re-emit a report (tables and plots) from saved tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Time limit per solve, in seconds on the chosen clock.
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    /// Maximum number of processed nodes per solve.
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Clock for time limits and reported times: `work` (deterministic,
    /// charged per simplex iteration) or `wall`.
    #[arg(long, default_value = "work")]
    pub clock: ClockKind,
}

impl LimitArgs {
    fn limits(&self) -> Result<SolveLimits> {
        if !(self.time_limit > 0.0) {
            return Err(Error::invalid("--time-limit must be positive"));
        }
        Ok(SolveLimits {
            node_limit: self.node_limit,
            time_limit: self.time_limit,
        })
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Instance family: setcover, auction or cfl.
    #[arg(long)]
    pub family: Family,
    /// Size preset (tiny, easy, medium); explicit size flags override it.
    #[arg(long, default_value = "easy")]
    pub preset: String,
    /// Set covering rows.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Set covering columns.
    #[arg(long)]
    pub cols: Option<usize>,
    /// Set covering matrix density.
    #[arg(long)]
    pub density: Option<f64>,
    /// Auction items.
    #[arg(long)]
    pub items: Option<usize>,
    /// Auction bids.
    #[arg(long)]
    pub bids: Option<usize>,
    /// Facility location customers.
    #[arg(long)]
    pub customers: Option<usize>,
    /// Facility location facilities.
    #[arg(long)]
    pub facilities: Option<usize>,
    /// Facility location total capacity over total demand.
    #[arg(long)]
    pub capacity_ratio: Option<f64>,
    /// Number of instances; instance k uses seed + k.
    #[arg(short = 'n', long = "count", default_value_t = 1)]
    pub count: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl GenArgs {
    fn params(&self) -> Result<FamilyParams> {
        let base = FamilyParams::preset(self.family, &self.preset)?;
        let stray = |flags: &[(&str, bool)]| -> Result<()> {
            match flags.iter().find(|(_, set)| *set) {
                Some((flag, _)) => Err(Error::invalid(format!(
                    "--{flag} does not apply to family {}",
                    self.family
                ))),
                None => Ok(()),
            }
        };
        let sc = [("rows", self.rows.is_some()), ("cols", self.cols.is_some()), ("density", self.density.is_some())];
        let ca = [("items", self.items.is_some()), ("bids", self.bids.is_some())];
        let cfl = [
            ("customers", self.customers.is_some()),
            ("facilities", self.facilities.is_some()),
            ("capacity-ratio", self.capacity_ratio.is_some()),
        ];
        Ok(match base {
            FamilyParams::SetCover { rows, cols, density } => {
                stray(&ca)?;
                stray(&cfl)?;
                FamilyParams::SetCover {
                    rows: self.rows.unwrap_or(rows),
                    cols: self.cols.unwrap_or(cols),
                    density: self.density.unwrap_or(density),
                }
            }
            FamilyParams::Auction { items, bids } => {
                stray(&sc)?;
                stray(&cfl)?;
                FamilyParams::Auction {
                    items: self.items.unwrap_or(items),
                    bids: self.bids.unwrap_or(bids),
                }
            }
            FamilyParams::Cfl { customers, facilities, capacity_ratio } => {
                stray(&sc)?;
                stray(&ca)?;
                FamilyParams::Cfl {
                    customers: self.customers.unwrap_or(customers),
                    facilities: self.facilities.unwrap_or(facilities),
                    capacity_ratio: self.capacity_ratio.unwrap_or(capacity_ratio),
                }
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance file.
    #[arg(long)]
    pub instance: PathBuf,
    /// Node selector: dfs, bfs, bes or learned.
    #[arg(long, default_value = "bes")]
    pub selector: SelectorKind,
    /// Trained model, required by the learned selector.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Write the search event log (JSON lines) here.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Directory of instance files, all of one family and scale.
    #[arg(long)]
    pub instances: PathBuf,
    /// Dataset file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Maximum non-oracle partners sampled per oracle node and selection.
    #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
    pub pair_cap: usize,
    /// Re-solve every instance and check the search tree is reproduced.
    #[arg(long)]
    pub verify_replay: bool,
    /// Worker threads across instances.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset file written by `collect`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Hidden width of the fusion blocks.
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    /// Number of fusion blocks.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Dropout rate during training.
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Number of bagged networks.
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    /// Step size.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Momentum coefficient.
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Pairs per mini-batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Training epochs per network.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Number of folds for ensemble selection (1 trains on everything).
    #[arg(long)]
    pub kfold: Option<usize>,
    /// Worker threads for ensemble members.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

impl TrainArgs {
    fn config(&self, seed: u64) -> FusionConfig {
        let d = FusionConfig::default();
        FusionConfig {
            hidden_dim: self.hidden_dim.unwrap_or(d.hidden_dim),
            num_blocks: self.blocks.unwrap_or(d.num_blocks),
            dropout: self.dropout.unwrap_or(d.dropout),
            ensemble_size: self.ensemble_size.unwrap_or(d.ensemble_size),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            momentum: self.momentum.unwrap_or(d.momentum),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            epochs: self.epochs.unwrap_or(d.epochs),
            kfold: self.kfold.unwrap_or(d.kfold),
            seed,
            ..d
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of instance files.
    #[arg(long)]
    pub instances: PathBuf,
    /// Comma-separated selectors; defaults to dfs,bfs,bes plus learned
    /// when a model is given.
    #[arg(long, value_delimiter = ',')]
    pub selectors: Vec<SelectorKind>,
    /// Trained model for the learned selector.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Report directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads across (instance, selector) runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Held-out dataset for permutation importance (needs --model).
    #[arg(long)]
    pub importance_dataset: Option<PathBuf>,
    /// Permutations per feature for importance.
    #[arg(long, default_value_t = 30)]
    pub importance_repeats: usize,
    /// Common-run measure in the distance metric: substring or subsequence.
    #[arg(long, default_value = "substring", value_parser = parse_lcs)]
    pub lcs: LcsMode,
    #[command(flatten)]
    pub limits: LimitArgs,
}

fn parse_lcs(s: &str) -> std::result::Result<LcsMode, String> {
    match s {
        "substring" => Ok(LcsMode::Substring),
        "subsequence" => Ok(LcsMode::Subsequence),
        other => Err(format!("unknown mode `{other}` (expected substring or subsequence)")),
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report directory to read.
    #[arg(long)]
    pub from: PathBuf,
    /// Directory to write; defaults to --from.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` and runs the command. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::Parse { .. }
        | Error::SchemaVersion { .. }
        | Error::Io { .. }
        | Error::EmptyDataset(_)
        | Error::MissingModel(_) => EXIT_USER,
        Error::Stalled { .. } | Error::NonFinite(_) | Error::Determinism(_) => EXIT_INTERNAL,
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, cli.seed),
        Command::Solve(a) => cmd_solve(a),
        Command::Collect(a) => cmd_collect(a, cli.seed),
        Command::Train(a) => cmd_train(a, cli.seed),
        Command::Bench(a) => cmd_bench(a, cli.seed),
        Command::Report(a) => cmd_report(a),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(Error::invalid("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

/// Reads every `*.json` instance in `dir`, sorted by file name.
pub fn read_instance_dir(dir: &Path) -> Result<Vec<MilpInstance>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.extension().is_some_and(|x| x == "json") {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!("{}: no instance files (*.json)", dir.display())));
    }
    paths.iter().map(read_instance).collect()
}

fn load_learned(path: Option<&PathBuf>) -> Result<Arc<FusionEnsemble>> {
    let path = path.ok_or_else(|| {
        Error::MissingModel("the learned selector needs a trained model; pass --model <file>".into())
    })?;
    Ok(Arc::new(load_model(path)?))
}

fn cmd_gen(a: &GenArgs, seed: u64) -> Result<()> {
    let params = a.params()?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    for k in 0..a.count {
        let inst = params.generate(seed + k as u64)?;
        write_instance(&inst, a.out.join(format!("{}.json", inst.name)))?;
    }
    log::info!("wrote {} {} instances to {}", a.count, params.scale_label(), a.out.display());
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let selector = match a.selector {
        SelectorKind::Learned => Selector::learned(load_learned(a.model.as_ref())? as Arc<dyn PairScorer>),
        k => Selector::heuristic(k)?,
    };
    let opts = SolveOptions {
        limits: a.limits.limits()?,
        clock: a.limits.clock,
        ..SolveOptions::default()
    };
    let res = bnb::solve(&inst, selector, &opts)?;
    if let Some(path) = &a.events {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        bnb::write_event_log(&res.event_log, std::io::BufWriter::new(file))?;
    }
    let optimum = (res.status == bnb::SolveStatus::Optimal && res.has_incumbent())
        .then(|| inst.reported_objective(res.incumbent_objective));
    let row = metric_row(&inst, a.selector.name(), &res, optimum);
    let stdout = std::io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    let io = |e: csv::Error| Error::io("<stdout>", std::io::Error::other(e));
    w.serialize(&row).map_err(io)?;
    w.flush().map_err(|e| Error::io("<stdout>", e))
}

fn cmd_collect(a: &CollectArgs, seed: u64) -> Result<()> {
    let instances = read_instance_dir(&a.instances)?;
    let opts = CollectOptions {
        limits: a.limits.limits()?,
        clock: a.limits.clock,
        pair_cap: a.pair_cap,
        seed,
        verify_replay: a.verify_replay,
        ..CollectOptions::default()
    };
    let ds = pool(a.jobs)?.install(|| build_dataset(&instances, &opts))?;
    write_dataset(&ds, &a.out)?;
    let h = &ds.header;
    println!(
        "{} pairs from {} instances ({} integral at the root, {} skipped); oracle fraction {:.4}",
        h.num_pairs,
        h.num_instances,
        h.num_integral_root,
        h.num_skipped,
        h.oracle_fraction()
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs, seed: u64) -> Result<()> {
    let ds = read_dataset(&a.dataset)?;
    let config = a.config(seed);
    let (ens, report) = pool(a.jobs)?.install(|| train_ensemble(&ds, &config))?;
    save_model(&ens, &a.out)?;
    let accs: Vec<String> = report.fold_accuracies.iter().map(|x| format!("{x:.4}")).collect();
    println!(
        "fold accuracies [{}] ({}); chosen fold {}; mean member accuracy {:.4}",
        accs.join(", "),
        if report.held_out { "held out" } else { "training pairs" },
        report.chosen_fold,
        report.mean_member_accuracy()
    );
    Ok(())
}

fn cmd_bench(a: &BenchArgs, seed: u64) -> Result<()> {
    let instances = read_instance_dir(&a.instances)?;
    let selectors = if a.selectors.is_empty() {
        let mut s = vec![SelectorKind::Dfs, SelectorKind::Bfs, SelectorKind::Bes];
        if a.model.is_some() {
            s.push(SelectorKind::Learned);
        }
        s
    } else {
        a.selectors.clone()
    };
    let needs_model = selectors.contains(&SelectorKind::Learned) || a.importance_dataset.is_some();
    let model = if needs_model {
        Some(load_learned(a.model.as_ref())?)
    } else {
        None
    };
    let opts = BenchOptions {
        limits: a.limits.limits()?,
        clock: a.limits.clock,
        jobs: a.jobs,
        lcs: a.lcs,
    };
    let bench = run_benchmark(&instances, &selectors, &opts, model.clone())?;
    let importance = match (&a.importance_dataset, &model) {
        (Some(path), Some(m)) => {
            let ds = read_dataset(path)?;
            permutation_importance(m.as_ref(), &ds.pairs, a.importance_repeats, seed)?
        }
        _ => Vec::new(),
    };
    let report = ReportFiles {
        rows: bench.rows,
        curves: bench.curves,
        traces: bench.traces,
        importance,
    };
    let files = emit_report(&report, &a.out)?;
    print_summary(&report)?;
    log::info!("wrote {} files to {}", files.len(), a.out.display());
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let report = load_report(&a.from)?;
    let out = a.out.as_ref().unwrap_or(&a.from);
    emit_report(&report, out)?;
    print_summary(&report)
}

/// Per-selector means on standard output.
fn print_summary(report: &ReportFiles) -> Result<()> {
    let mut names: Vec<&str> = Vec::new();
    for r in &report.rows {
        if !names.contains(&r.selector.as_str()) {
            names.push(&r.selector);
        }
    }
    let wins = crate::eval::count_wins(&report.rows);
    let mut out = std::io::stdout().lock();
    let io = |e| Error::io("<stdout>", e);
    writeln!(out, "selector  runs  optimal  mean_nodes  mean_bpb_nodes  mean_solve_time  wins").map_err(io)?;
    for name in names {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.selector == name).collect();
        let n = rows.len() as f64;
        let mean = |f: &dyn Fn(&crate::eval::MetricRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
        writeln!(
            out,
            "{name:<8}  {:>4}  {:>7}  {:>10.2}  {:>14.2}  {:>15.4}  {:>4}",
            rows.len(),
            rows.iter().filter(|r| r.status == "optimal").count(),
            mean(&|r| r.nodes as f64),
            mean(&|r| r.bpb_nodes as f64),
            mean(&|r| r.solve_time),
            wins.wins.get(name).copied().unwrap_or(0)
        )
        .map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn every_flag_is_documented() {
        let mut root = Cli::command();
        root.build();
        for sub in root.get_subcommands() {
            let help = sub.clone().render_long_help().to_string();
            for arg in sub.get_arguments() {
                if arg.get_id() == "help" || arg.get_id() == "version" {
                    continue;
                }
                let long = arg.get_long().unwrap_or_else(|| panic!("{}: {} has no long flag", sub.get_name(), arg.get_id()));
                assert!(help.contains(&format!("--{long}")), "{} --help lacks --{long}", sub.get_name());
                let doc = arg.get_help().map(|h| h.to_string()).unwrap_or_default();
                assert!(!doc.trim().is_empty(), "{} --{long} has no description", sub.get_name());
            }
        }
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["boundlab", "--help"]), EXIT_OK);
        assert_eq!(run(["boundlab", "solve", "--bogus"]), EXIT_USER);
        assert_eq!(run(["boundlab", "frobnicate"]), EXIT_USER);
        assert_eq!(
            run(["boundlab", "solve", "--instance", "/nonexistent/x.json"]),
            EXIT_USER
        );
        assert_eq!(exit_code(&Error::Stalled { iterations: 3 }), EXIT_INTERNAL);
    }

    #[test]
    fn gen_flags_must_match_family() {
        let cli = Cli::try_parse_from(["boundlab", "gen", "--family", "auction", "--rows", "3", "--out", "x"]).unwrap();
        assert!(matches!(execute(&cli), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn learned_solve_without_model_names_the_problem() {
        let dir = tempfile::tempdir().unwrap();
        let inst = crate::instance::generate_set_covering(6, 8, 0.4, 0).unwrap();
        let path = dir.path().join("i.json");
        write_instance(&inst, &path).unwrap();
        let cli = Cli::try_parse_from(["boundlab", "solve", "--instance", path.to_str().unwrap(), "--selector", "learned"]).unwrap();
        let err = execute(&cli).unwrap_err();
        assert!(matches!(err, Error::MissingModel(_)));
        assert!(err.to_string().contains("--model"));
    }
}
