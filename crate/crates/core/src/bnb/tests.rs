use super::*;
use crate::instance::{Constraint, FamilyParams, Family, Relation, Sense};

fn binary_instance(obj: Vec<f64>, cons: Vec<Constraint>, sense: Sense) -> MilpInstance {
    let n = obj.len();
    let obj = match sense {
        Sense::Minimize => obj,
        Sense::Maximize => obj.into_iter().map(|c| -c).collect(),
    };
    MilpInstance {
        name: "t".into(),
        sense,
        num_vars: n,
        num_cons: cons.len(),
        obj,
        cons,
        var_lb: vec![0.0; n],
        var_ub: vec![1.0; n],
        is_integer: vec![true; n],
        seed: 0,
    }
}

fn brute_force(inst: &MilpInstance) -> Option<f64> {
    let n = inst.num_vars;
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if inst.max_violation(&x) <= 1e-9 {
            let v = inst.objective_value(&x);
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

fn knapsack() -> MilpInstance {
    // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
    binary_instance(
        vec![5.0, 4.0, 3.0],
        vec![
            Constraint::new(vec![(0, 2.0), (1, 3.0), (2, 1.0)], Relation::Le, 5.0),
            Constraint::new(vec![(0, 4.0), (1, 1.0), (2, 2.0)], Relation::Le, 11.0),
            Constraint::new(vec![(0, 3.0), (1, 4.0), (2, 2.0)], Relation::Le, 8.0),
        ],
        Sense::Maximize,
    )
}

fn fractional_knapsack() -> MilpInstance {
    binary_instance(
        vec![10.0, 13.0, 7.0, 8.0, 9.0, 6.0],
        vec![Constraint::new(
            vec![(0, 3.0), (1, 4.0), (2, 2.0), (3, 3.0), (4, 3.5), (5, 2.5)],
            Relation::Le,
            9.5,
        )],
        Sense::Maximize,
    )
}

fn run(inst: &MilpInstance, kind: SelectorKind) -> SolveResult {
    solve(inst, Selector::heuristic(kind).unwrap(), &SolveOptions::default()).unwrap()
}

#[test]
fn all_heuristics_reach_the_enumerated_optimum() {
    for inst in [knapsack(), fractional_knapsack()] {
        let opt = brute_force(&inst).unwrap();
        for kind in [SelectorKind::Dfs, SelectorKind::Bfs, SelectorKind::Bes] {
            let res = run(&inst, kind);
            assert_eq!(res.status, SolveStatus::Optimal, "{kind}");
            assert!((res.incumbent_objective - opt).abs() < 1e-9, "{kind}");
            assert!((res.global_dual_bound - opt).abs() < 1e-9);
            let x = res.incumbent.unwrap();
            assert!(inst.is_feasible(&x, 1e-7, 1e-6));
        }
    }
}

#[test]
fn knapsack_optimum_is_nine() {
    let inst = knapsack();
    let res = run(&inst, SelectorKind::Bes);
    assert!((inst.reported_objective(res.incumbent_objective) - 9.0).abs() < 1e-9);
}

#[test]
fn generated_instances_match_brute_force() {
    for seed in 0..4 {
        let inst = FamilyParams::SetCover {
            rows: 8,
            cols: 12,
            density: 0.3,
        }
        .generate(seed)
        .unwrap();
        let opt = brute_force(&inst).unwrap();
        let res = run(&inst, SelectorKind::Bfs);
        assert!((res.incumbent_objective - opt).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn infeasible_instance_reports_infeasible() {
    let inst = binary_instance(
        vec![1.0, 1.0],
        vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 3.0)],
        Sense::Minimize,
    );
    let res = run(&inst, SelectorKind::Dfs);
    assert_eq!(res.status, SolveStatus::Infeasible);
    assert!(res.incumbent.is_none());
    assert_eq!(res.incumbent_objective, f64::INFINITY);
}

#[test]
fn node_limit_stops_early() {
    let inst = FamilyParams::preset(Family::SetCover, "easy").unwrap().generate(3).unwrap();
    let opts = SolveOptions {
        limits: SolveLimits {
            node_limit: Some(3),
            ..SolveLimits::default()
        },
        ..SolveOptions::default()
    };
    let res = solve(&inst, Selector::heuristic(SelectorKind::Bfs).unwrap(), &opts).unwrap();
    if res.status == SolveStatus::NodeLimit {
        assert_eq!(res.nodes_processed, 3);
        assert!(res.global_dual_bound <= res.incumbent_objective + 1e-9);
    } else {
        assert_eq!(res.status, SolveStatus::Optimal);
    }
}

#[test]
fn event_log_bounds_are_monotone_and_replay_agrees() {
    let inst = fractional_knapsack();
    let res = run(&inst, SelectorKind::Bfs);
    let mut last_pb = f64::INFINITY;
    let mut last_db = f64::NEG_INFINITY;
    for e in &res.event_log {
        if let Some(pb) = e.pb {
            assert!(pb <= last_pb + 1e-12);
            last_pb = pb;
        }
        if let Some(db) = e.db {
            assert!(db >= last_db - 1e-9, "db fell from {last_db} to {db}");
            last_db = db;
        }
    }
    let summary = replay_event_log(&res.event_log);
    assert_eq!(summary.nodes_processed, res.nodes_processed);
    assert_eq!(summary.final_pb, Some(res.incumbent_objective));
}

#[test]
fn solves_are_deterministic_under_the_work_clock() {
    let inst = FamilyParams::preset(Family::Cfl, "tiny").unwrap().generate(5).unwrap();
    let a = run(&inst, SelectorKind::Bes);
    let b = run(&inst, SelectorKind::Bes);
    assert_eq!(a.event_log, b.event_log);
    assert_eq!(a.incumbent, b.incumbent);
}

#[test]
fn bpb_history_reaches_the_incumbent_node() {
    let inst = fractional_knapsack();
    let opts = SolveOptions {
        trace: TraceLevel::Full,
        ..SolveOptions::default()
    };
    let res = solve(&inst, Selector::heuristic(SelectorKind::Dfs).unwrap(), &opts).unwrap();
    let trace = res.trace.unwrap();
    let bpb = res.bpb_node.unwrap();
    assert_eq!(trace.nodes[bpb].history, res.bpb_history.unwrap());
    // every selected node was in the queue snapshot
    for s in &trace.selections {
        assert!(s.queue.contains(&s.selected));
    }
    // children are recorded with their sibling
    for rec in &trace.nodes[1..] {
        let sib = rec.sibling.unwrap();
        assert_eq!(trace.nodes[sib].input.parent, rec.input.parent);
    }
}

#[test]
fn cold_probes_reach_the_same_optimum() {
    let inst = FamilyParams::preset(Family::Cfl, "tiny").unwrap().generate(2).unwrap();
    let warm = run(&inst, SelectorKind::Bfs);
    let opts = SolveOptions {
        warm_start: false,
        ..SolveOptions::default()
    };
    let cold = solve(&inst, Selector::heuristic(SelectorKind::Bfs).unwrap(), &opts).unwrap();
    assert!((warm.incumbent_objective - cold.incumbent_objective).abs() < 1e-9);
}

#[test]
fn bound_and_prune_removes_dominated_nodes() {
    let mut queue = vec![3.0, 7.0, 5.0, 4.999_999_999_5];
    let pruned = bound_and_prune(&mut queue, Some(5.0), |v| *v, 1e-9);
    assert_eq!(queue, vec![3.0]);
    assert_eq!(pruned, vec![7.0, 5.0, 4.999_999_999_5]);
    let mut queue = vec![1.0, 2.0];
    assert!(bound_and_prune(&mut queue, None, |v| *v, 1e-9).is_empty());
    assert_eq!(queue.len(), 2);
}

#[test]
fn branch_history_prefixes() {
    let a = BranchHistory::default().extended(Decision {
        var: 1,
        dir: Direction::Down,
        bound: 0.0,
    });
    let b = a.extended(Decision {
        var: 2,
        dir: Direction::Up,
        bound: 1.0,
    });
    assert!(a.is_prefix_of(&b));
    assert!(!b.is_prefix_of(&a));
    assert!(BranchHistory::default().is_prefix_of(&a));
}

mod fsb {
    use super::*;
    use crate::lp::LpModel;

    #[test]
    fn singleton_candidate_is_chosen() {
        // min -x0 - x1 with x0 + x1 <= 1.5: LP puts x0 = 1, x1 = 0.5
        let inst = binary_instance(
            vec![-1.0, -1.0],
            vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.5)],
            Sense::Minimize,
        );
        let model = LpModel::new(&inst, Tolerances::DEFAULT);
        let (mut lb, mut ub) = (inst.var_lb.clone(), inst.var_ub.clone());
        let (lp, basis) = model.solve_with_basis(&lb, &ub).unwrap();
        let cands = fractional_candidates(&lp.x, &inst.is_integer, 1e-6);
        assert_eq!(cands.len(), 1);
        let mut table = PseudocostTable::new(2);
        let res = branch_full_strong(&model, &mut lb, &mut ub, lp, basis, &cands, &inst.is_integer, &mut table)
            .unwrap();
        match res.outcome {
            FsbOutcome::Branch(b) => assert_eq!(b.var, cands[0]),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(res.probes, 2);
    }

    #[test]
    fn scores_match_independent_probe_recomputation() {
        let inst = fractional_knapsack();
        let model = LpModel::new(&inst, Tolerances::DEFAULT);
        let (mut lb, mut ub) = (inst.var_lb.clone(), inst.var_ub.clone());
        let (lp, basis) = model.solve_with_basis(&lb, &ub).unwrap();
        let cands = fractional_candidates(&lp.x, &inst.is_integer, 1e-6);
        assert!(!cands.is_empty());
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for &j in &cands {
            let mut u = ub.clone();
            u[j] = lp.x[j].floor();
            let d = model.solve(&lb, &u).unwrap();
            let mut l = lb.clone();
            l[j] = lp.x[j].ceil();
            let up = model.solve(&l, &ub).unwrap();
            let g = |r: &LpResult| if r.is_optimal() { (r.objective - lp.objective).max(0.0) } else { 0.0 };
            let s = g(&d).max(FSB_EPSILON) * g(&up).max(FSB_EPSILON);
            if s > best.0 {
                best = (s, j);
            }
        }
        let mut table = PseudocostTable::new(inst.num_vars);
        let res = branch_full_strong(&model, &mut lb, &mut ub, lp, basis, &cands, &inst.is_integer, &mut table)
            .unwrap();
        if let FsbOutcome::Branch(b) = res.outcome {
            assert_eq!(b.var, best.1);
            assert!((b.score - best.0).abs() <= 1e-9 * best.0.abs().max(1.0));
        }
    }

    #[test]
    fn both_sides_infeasible_prunes() {
        // x0 + x1 = 1.5 with binaries has no integer point on either side of x0
        let inst = binary_instance(
            vec![1.0, 1.0],
            vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.5)],
            Sense::Minimize,
        );
        let model = LpModel::new(&inst, Tolerances::DEFAULT);
        let (mut lb, mut ub) = (inst.var_lb.clone(), inst.var_ub.clone());
        let (lp, basis) = model.solve_with_basis(&lb, &ub).unwrap();
        let cands = fractional_candidates(&lp.x, &inst.is_integer, 1e-6);
        let mut table = PseudocostTable::new(2);
        let res = branch_full_strong(&model, &mut lb, &mut ub, lp, basis, &cands, &inst.is_integer, &mut table)
            .unwrap();
        assert_eq!(res.outcome, FsbOutcome::Prune);
        let solved = run(&inst, SelectorKind::Dfs);
        assert_eq!(solved.status, SolveStatus::Infeasible);
    }
}
