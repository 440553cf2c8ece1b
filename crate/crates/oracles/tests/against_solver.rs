use std::sync::Arc;

use boundlab::bnb::{solve, SolveOptions, TraceLevel};
use boundlab::config::Tolerances;
use boundlab::features::FeatureVector;
use boundlab::instance::{
    generate_cap_facility_location, generate_combinatorial_auction, generate_set_covering, Constraint, MilpInstance,
    Relation, Sense,
};
use boundlab::lp::{LpModel, LpStatus};
use boundlab::select::{PairScorer, Selector, SelectorKind};
use boundlab_oracles::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn tiny_instances() -> Vec<MilpInstance> {
    let mut v = Vec::new();
    for s in 0..6 {
        v.push(generate_set_covering(8, 16, 0.2, s).unwrap());
        v.push(generate_combinatorial_auction(10, 15, s).unwrap());
        v.push(generate_cap_facility_location(8, 5, 1.5, s).unwrap());
    }
    v
}

#[test]
fn solver_matches_enumeration_on_tiny_instances() {
    for inst in tiny_instances() {
        let oracle = enumerate_binary_optimum(&inst, DEFAULT_MAX_BINARIES).unwrap();
        let want = oracle.objective.expect("generated instances are feasible");
        for kind in [SelectorKind::Dfs, SelectorKind::Bfs, SelectorKind::Bes] {
            let res = solve(&inst, Selector::heuristic(kind).unwrap(), &SolveOptions::default()).unwrap();
            let got = inst.reported_objective(res.incumbent_objective);
            assert!(rel_close(got, want, 1e-6), "{} {kind}: {got} vs {want}", inst.name);
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> MilpInstance {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=4);
    let cons = (0..m)
        .map(|_| {
            let mut entries = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.8) {
                    entries.push((j, rng.gen_range(-5..=5) as f64));
                }
            }
            let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
            Constraint::new(entries, rel, rng.gen_range(-6..=6) as f64)
        })
        .collect();
    let var_lb: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=1) as f64).collect();
    let var_ub: Vec<f64> = var_lb.iter().map(|l| l + rng.gen_range(0..=5) as f64).collect();
    MilpInstance {
        name: "lp".into(),
        sense: Sense::Minimize,
        num_vars: n,
        num_cons: m,
        obj: (0..n).map(|_| rng.gen_range(-4..=4) as f64).collect(),
        cons,
        var_lb,
        var_ub,
        is_integer: vec![false; n],
        seed: 0,
    }
}

#[test]
fn lp_solvers_agree_on_random_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut optimal = 0;
    for _ in 0..300 {
        let inst = random_lp(&mut rng);
        let dense = DenseLp::relaxation(&inst, &inst.var_lb, &inst.var_ub);
        let vertex = vertex_enumeration(&dense).unwrap();
        let tableau = tableau_simplex(&dense).unwrap();
        let ours = LpModel::new(&inst, Tolerances::DEFAULT).solve(&inst.var_lb, &inst.var_ub).unwrap();
        match vertex {
            LpOutcome::Optimal { objective, .. } => {
                optimal += 1;
                assert!(rel_close(tableau.objective(), objective, 1e-7));
                assert_eq!(ours.status, LpStatus::Optimal);
                assert!(rel_close(ours.objective, objective, 1e-7), "{} vs {objective}", ours.objective);
            }
            LpOutcome::Infeasible => {
                assert_eq!(tableau, LpOutcome::Infeasible);
                assert_eq!(ours.status, LpStatus::Infeasible);
            }
            LpOutcome::Unbounded => unreachable!("boxes are finite"),
        }
    }
    assert!(optimal > 50, "too few feasible draws: {optimal}");
}

/// Deterministic stand-in for a trained model: prefers the node with the
/// smaller first feature.
struct FirstFeature;

impl PairScorer for FirstFeature {
    fn score_pair(&self, a: &FeatureVector, b: &FeatureVector) -> boundlab::Result<(f64, f64)> {
        Ok((-a.0[0], -b.0[0]))
    }
}

fn full_trace() -> SolveOptions {
    SolveOptions {
        trace: TraceLevel::Full,
        ..SolveOptions::default()
    }
}

#[test]
fn live_selections_replay_under_every_rule() {
    let insts = [
        generate_set_covering(20, 40, 0.15, 3).unwrap(),
        generate_combinatorial_auction(25, 50, 1).unwrap(),
        generate_cap_facility_location(15, 8, 1.5, 2).unwrap(),
    ];
    let mut total = 0;
    for inst in &insts {
        for (kind, rule) in [
            (SelectorKind::Dfs, Rule::Dfs),
            (SelectorKind::Bfs, Rule::Bfs),
            (SelectorKind::Bes, Rule::Bes),
            (SelectorKind::Learned, Rule::Learned),
        ] {
            let selector = match kind {
                SelectorKind::Learned => Selector::learned(Arc::new(FirstFeature)),
                k => Selector::heuristic(k).unwrap(),
            };
            let res = solve(inst, selector, &full_trace()).unwrap();
            let snaps = snapshots_from_trace(&res).unwrap();
            let live: Vec<usize> = snaps.iter().map(|s| s.selected).collect();
            let replayed = replay_selection_oracle(&snaps, SelectorSpec::new(rule)).unwrap();
            assert_eq!(replayed, live, "{} {kind}", inst.name);
            total += live.len();
        }
    }
    assert!(total > 40, "trees too small to exercise the rules: {total} selections");
}

#[test]
fn dfs_follows_stack_discipline() {
    let mut popped = 0;
    for s in 0..5 {
        let inst = generate_cap_facility_location(15, 8, 1.5, s).unwrap();
        let res = solve(&inst, Selector::heuristic(SelectorKind::Dfs).unwrap(), &full_trace()).unwrap();
        let live: Vec<usize> = res.trace.as_ref().unwrap().selections.iter().map(|s| s.selected).collect();
        assert_eq!(dfs_stack_order(&res).unwrap(), live, "{}", inst.name);
        popped += live.len();
    }
    assert!(popped > 20, "{popped}");
}

#[test]
fn logs_without_trace_are_refused() {
    let inst = generate_set_covering(8, 16, 0.2, 0).unwrap();
    let res = solve(&inst, Selector::heuristic(SelectorKind::Bes).unwrap(), &SolveOptions::default()).unwrap();
    assert!(matches!(snapshots_from_trace(&res), Err(OracleError::IncompleteLog(_))));
}
