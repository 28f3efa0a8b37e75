mod common;

use leftover::decode::{decode_full, encode_plan};
use leftover::genealogy::{spawn_pool, ObjectPool};
use leftover::instance::parse_instance;
use leftover::matheuristic::{run_myopic, SubproblemSolver};
use leftover::model::{build_full_model, SubproblemState};
use leftover::oracle::{exact_multi_period, exact_single_period, validate_plan, OracleError, OracleLimits, SingleObjective};
use leftover::solver::{solve, SolverConfig};

use common::{fixture, micro};

/// Normal patterns lose nothing against every integer position.
#[test]
fn normal_patterns_match_the_full_grid() {
    let grid = OracleLimits { full_grid: true, ..Default::default() };
    let mut compared = 0;
    for seed in 200..250 {
        let inst = micro(seed);
        match (exact_multi_period(&inst, &OracleLimits::default()), exact_multi_period(&inst, &grid)) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.totals, b.totals, "seed {seed}");
                compared += 1;
            }
            (Err(OracleError::Infeasible(_)), Err(OracleError::Infeasible(_))) => compared += 1,
            (a, b) => panic!("seed {seed}: {:?} vs {:?}", a.map(|p| p.totals), b.map(|p| p.totals)),
        }
    }
    assert_eq!(compared, 50);
}

#[test]
fn toy_optima() {
    let fig2 = exact_multi_period(&fixture("fig2.txt"), &OracleLimits::default()).unwrap();
    assert_eq!((fig2.totals.cost, fig2.totals.leftover_value, fig2.totals.objective), (80, 9, 27831));
    let fig4 = exact_multi_period(&fixture("fig4.txt"), &OracleLimits::default()).unwrap();
    assert_eq!((fig4.totals.cost, fig4.totals.leftover_value), (477, 0));
}

/// Without leftovers the periods decouple.
#[test]
fn zero_expiration_separates_periods() {
    let mut checked = 0;
    for seed in 300..340 {
        let mut inst = micro(seed);
        inst.xi = 0;
        let Ok(exact) = exact_multi_period(&inst, &OracleLimits::default()) else { continue };
        let (myopic, _) = run_myopic(&inst, &SubproblemSolver::Oracle(OracleLimits::default())).unwrap();
        assert_eq!(exact.totals.cost, myopic.totals.cost, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn fig2_first_period() {
    let inst = fixture("fig2.txt");
    let st = SubproblemState::new(&inst, ObjectPool::initial(&inst));
    let sol = exact_single_period(&st, SingleObjective::Myopic, &OracleLimits::default()).unwrap();
    let used = sol.decision.used_flags();
    assert_eq!(used, vec![false, true]);
    let next = spawn_pool(&st.pool, &sol.decision, inst.objects_at(1)).unwrap();
    let mut left: Vec<(i64, i64)> =
        next.objects[next.purchasable_count..].iter().map(|o| (o.width, o.height)).filter(|d| d.0 > 0).collect();
    left.sort();
    assert_eq!(left, vec![(3, 1), (3, 6)]);
}

#[test]
fn exact_fit_uses_the_whole_object() {
    let inst = parse_instance("P 1 XI 1 D 1\nCAT 1 1\nPERIOD 0 M 1 N 1\nOBJ 4 3 2\nITEM 4 3\n").unwrap();
    let st = SubproblemState::new(&inst, ObjectPool::initial(&inst));
    let sol = exact_single_period(&st, SingleObjective::Myopic, &OracleLimits::default()).unwrap();
    assert_eq!(sol.decision.cuts[0].top, 0);
    assert_eq!(sol.decision.cuts[0].right, 0);
    assert_eq!(sol.objective, 24 * 24);
}

#[test]
fn limits_are_enforced() {
    let mut text = String::from("P 4 XI 1 D 1\nCAT 1 1\n");
    for s in 0..4 {
        text.push_str(&format!("PERIOD {s} M 1 N 1\nOBJ 4 4 1\nITEM 2 2\n"));
    }
    let inst = parse_instance(&text).unwrap();
    assert!(matches!(exact_multi_period(&inst, &OracleLimits::default()), Err(OracleError::Limit(_))));
    let big = parse_instance("P 1 XI 0 D 1\nCAT 1 1\nPERIOD 0 M 1 N 1\nOBJ 40 4 1\nITEM 2 2\n").unwrap();
    assert!(matches!(exact_multi_period(&big, &OracleLimits::default()), Err(OracleError::Limit(_))));
}

/// Oracle plans are feasible for the full model at their own objective,
/// and the model decodes back to the same plan.
#[test]
fn oracle_plans_encode_into_the_model() {
    let mut checked = 0;
    for seed in 0..40 {
        let inst = micro(seed);
        let Ok(plan) = exact_multi_period(&inst, &OracleLimits::default()) else { continue };
        assert!(validate_plan(&inst, &plan).is_empty(), "seed {seed}");
        let ms = build_full_model(&inst).unwrap();
        let x = encode_plan(&ms, &inst, &plan).unwrap();
        assert!(ms.max_violation(&x) < 1e-6, "seed {seed}: violation {}", ms.max_violation(&x));
        assert_eq!(ms.evaluate(&x), plan.totals.objective as f64, "seed {seed}");
        assert_eq!(decode_full(&ms, &inst, &x).unwrap().totals, plan.totals, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 25);
}

/// Plans decoded from the builtin B&B pass the independent validator.
#[test]
fn solver_plans_validate() {
    for seed in 0..30 {
        let inst = micro(seed);
        let ms = build_full_model(&inst).unwrap();
        let sol = solve(&ms, &SolverConfig::default()).unwrap();
        if !sol.has_values() {
            continue;
        }
        let plan = decode_full(&ms, &inst, &sol.values).unwrap();
        let v = validate_plan(&inst, &plan);
        assert!(v.is_empty(), "seed {seed}: {v:?}");
        assert_eq!(plan.totals.objective as f64, sol.objective, "seed {seed}");
    }
}
