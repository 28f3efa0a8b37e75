//! One line per acceptance criterion. Every criterion runs even when an
//! earlier one fails; the test fails at the end if any line is FAIL.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use leftover::decode::decode_full;
use leftover::harness::{classify, gap_percent, WinTieLoss};
use leftover::instance::{generate_instance, parse_instance, GenConfig, Instance};
use leftover::matheuristic::{run_forward_looking, run_myopic, SubproblemSolver, TrainingConfig};
use leftover::model::{amortized_cost, build_full_model};
use leftover::oracle::{exact_multi_period, validate_plan, OracleError, OracleLimits};
use leftover::plan::Plan;
use leftover::solver::{solve, SolverConfig, Status};

type Check = Result<String, String>;

fn fixture(name: &str) -> Instance {
    let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_instance(&text).unwrap()
}

/// One or two periods, up to two objects and three items per period, dims ≤ 12.
fn micro(seed: u64) -> Instance {
    let periods = 1 + (seed % 2) as usize;
    generate_instance(&GenConfig {
        periods,
        xi: (seed / 2 % (periods as u64 + 1)) as usize,
        objects_per_period: (1, 2),
        object_dim: (4, 12),
        items_per_period: (1, 3),
        item_dim: (2, 8),
        catalogue_size: (1, 2),
        unit_cost: (1, 3),
        seed,
    })
    .unwrap()
}

/// Three items of at most 5×5 always fit one 10×10 object, so every period
/// is feasible on its own purchases.
fn small_four_period(seed: u64) -> Instance {
    generate_instance(&GenConfig {
        periods: 4,
        xi: 1 + (seed % 3) as usize,
        objects_per_period: (1, 2),
        object_dim: (10, 12),
        items_per_period: (1, 3),
        item_dim: (2, 5),
        catalogue_size: (1, 2),
        unit_cost: (1, 3),
        seed: 1000 + seed,
    })
    .unwrap()
}

fn within(limit: Duration, t: Duration) -> Result<(), String> {
    if t < limit {
        Ok(())
    } else {
        Err(format!("took {t:.1?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn milp() -> SubproblemSolver {
    SubproblemSolver::Milp(SolverConfig::default())
}

fn usable(inst: &Instance, plan: &Plan) -> Vec<(i64, i64)> {
    plan.final_leftovers().into_iter().filter(|&(w, h)| inst.is_usable(w, h)).collect()
}

fn criterion_1() -> Check {
    let inst = fixture("fig2.txt");
    let start = Instant::now();
    let (myopic, _) = run_myopic(&inst, &milp()).map_err(|e| e.to_string())?;
    let exact = exact_multi_period(&inst, &OracleLimits::default()).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    ensure(myopic.totals.cost == 108, format!("myopic cost {}, expected 108", myopic.totals.cost))?;
    ensure(exact.totals.cost == 80, format!("exact cost {}, expected 80", exact.totals.cost))?;
    let left = usable(&inst, &exact);
    ensure(left == vec![(3, 3)], format!("exact final usable leftovers {left:?}, expected [3x3]"))?;
    within(Duration::from_secs(60), t)?;
    Ok(format!("myopic 108, exact 80 with final 3x3, {t:.1?}"))
}

fn criterion_2() -> Check {
    let inst = fixture("fig4.txt");
    let start = Instant::now();
    let (myopic, _) = run_myopic(&inst, &milp()).map_err(|e| e.to_string())?;
    let cfg = TrainingConfig { delta_ini: 1.0, ..Default::default() };
    let flook = run_forward_looking(&inst, &cfg, &milp()).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let mut errors = Vec::new();
    if myopic.totals.cost != 592 || !usable(&inst, &myopic).is_empty() {
        errors.push(format!("myopic cost {} usable {:?}, expected 592 and none", myopic.totals.cost, usable(&inst, &myopic)));
    }
    match flook.trace.cycles.first().and_then(|c| c.totals) {
        Some(c0) if c0.cost == 521 && c0.leftover_value == 70 => {}
        Some(c0) => errors.push(format!(
            "cycle 0 cost {} leftover value {}, expected 521 and 70",
            c0.cost, c0.leftover_value
        )),
        None => errors.push("cycle 0 aborted".into()),
    }
    if flook.plan.totals.cost != 477 || !usable(&inst, &flook.plan).is_empty() {
        errors.push(format!(
            "best cost {} usable {:?}, expected 477 and none",
            flook.plan.totals.cost,
            usable(&inst, &flook.plan)
        ));
    }
    if t >= Duration::from_secs(120) {
        errors.push(format!("took {t:.1?}, limit 120s"));
    }
    if errors.is_empty() {
        Ok(format!("myopic 592, cycle 0 521/70, best 477, {t:.1?}"))
    } else {
        Err(errors.join("; "))
    }
}

fn criterion_3() -> Check {
    let cases = [
        (amortized_cost(1, 21, 17, true, 1.0, 126, 1.0, 0), 231),
        (amortized_cost(1, 19, 19, true, 1.0, 152, 1.0, 0), 209),
        (amortized_cost(1, 24, 13, true, 1.0, 0, 1.0, 0), 312),
        (amortized_cost(1, 19, 19, true, 102.0 / 152.0, 152, 1.0, 0), 259),
        (amortized_cost(1, 21, 17, true, 314.0 / 357.0, 126, 1.0, 0), 247),
    ];
    let got: Vec<i64> = cases.iter().map(|c| c.0).collect();
    let want: Vec<i64> = cases.iter().map(|c| c.1).collect();
    ensure(got == want, format!("got {got:?}, expected {want:?}"))?;
    Ok("231 209 312 259 247".into())
}

/// Published four-period results at ξ = 1: (myopic cost, leftover), (flook cost, leftover).
const PUBLISHED: [((i64, i64), (i64, i64)); 10] = [
    ((9155, 0), (11679, 2647)),
    ((6715, 0), (6715, 0)),
    ((8951, 0), (8951, 0)),
    ((9677, 0), (9677, 0)),
    ((15954, 5462), (6541, 0)),
    ((6246, 2066), (3914, 0)),
    ((13433, 0), (13433, 0)),
    ((12191, 1407), (9659, 2674)),
    ((4757, 0), (4757, 0)),
    ((10884, 3115), (10884, 3115)),
];

fn criterion_4() -> Check {
    let g1 = gap_percent(400_703_843.0, 314_108_050.0).map_err(|e| e.to_string())?;
    let g5 = gap_percent(182_258_424.0, 444_536_794.0).map_err(|e| e.to_string())?;
    ensure(format!("{g1:.4}") == "27.5688", format!("instance 1 gap {g1:.4}, expected 27.5688"))?;
    ensure(format!("{g5:.4}") == "-59.0004", format!("instance 5 gap {g5:.4}, expected -59.0004"))?;
    let wtl = WinTieLoss::from_outcomes(PUBLISHED.iter().map(|&((mc, ml), (fc, fl))| classify(fc, fl, mc, ml)));
    ensure(wtl.to_string() == "3/6/1", format!("flook W/T/L {wtl}, expected 3/6/1"))?;
    Ok(format!("gaps {g1:.4} {g5:.4}, W/T/L {wtl}"))
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for seed in 0..100u64 {
        let inst = micro(seed);
        let ms = build_full_model(&inst).map_err(|e| e.to_string())?;
        let sol = solve(&ms, &SolverConfig::default()).map_err(|e| e.to_string())?;
        match exact_multi_period(&inst, &OracleLimits::default()) {
            Ok(plan) => {
                compared += 1;
                let same = sol.status == Status::Optimal && sol.objective == plan.totals.objective as f64;
                if !same {
                    mismatches.push(format!("seed {seed}: {:?} {} vs {}", sol.status, sol.objective, plan.totals.objective));
                }
            }
            Err(OracleError::Infeasible(_)) => {
                compared += 1;
                if sol.status != Status::Infeasible {
                    mismatches.push(format!("seed {seed}: oracle infeasible, B&B {:?}", sol.status));
                }
            }
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    let t = start.elapsed();
    ensure(mismatches.is_empty(), mismatches.join("; "))?;
    ensure(compared >= 100, format!("only {compared} instances compared"))?;
    within(Duration::from_secs(600), t)?;
    Ok(format!("{compared}/{compared} match, {t:.1?}"))
}

fn criterion_6() -> Check {
    let cfg = TrainingConfig { sigma: 0.9, eps: 0.01, ..Default::default() };
    let results: Vec<Result<String, String>> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let inst = small_four_period(seed);
            let r = run_forward_looking(&inst, &cfg, &milp()).map_err(|e| format!("seed {seed}: {e}"))?;
            let last = r.trace.cycles.last().ok_or(format!("seed {seed}: empty trace"))?;
            ensure(last.cycle <= 44, format!("seed {seed}: ran to cycle {}", last.cycle))?;
            for c in &r.trace.cycles {
                ensure(
                    c.delta.values().all(|d| (0.0..=1.0).contains(d)),
                    format!("seed {seed}: δ outside [0,1] at cycle {}", c.cycle),
                )?;
            }
            let keys: Vec<(i64, i64)> = r.trace.cycles.iter().filter_map(|c| c.best_key).collect();
            ensure(keys.windows(2).all(|w| w[1] <= w[0]), format!("seed {seed}: best key not monotone"))?;
            ensure(keys.last() == Some(&r.plan.totals.key()), format!("seed {seed}: returned plan is not the best"))?;
            Ok(format!("{}", r.trace.cycles.len()))
        })
        .collect();
    let mut lens = Vec::new();
    for r in results {
        lens.push(r?);
    }
    Ok(format!("20 runs, cycles {}", lens.join(" ")))
}

fn criterion_7() -> Check {
    let mut inst = fixture("bench4_01.txt");
    inst.xi = 1;
    let stats = build_full_model(&inst).map_err(|e| e.to_string())?.stats();
    let bv = stats.binary as f64;
    ensure((bv - 369.0).abs() <= 36.9, format!("BV {bv}, expected 369 ± 10%"))?;
    Ok(format!("BV {} CV {} CO {} (raw rows {})", stats.binary, stats.continuous, stats.rows_with_bounds, stats.rows))
}

/// Every plan every method produces on the toy and micro corpus.
fn corpus_plans() -> Result<Vec<(String, Instance, Plan)>, String> {
    let mut insts: Vec<(String, Instance)> =
        vec![("fig2".into(), fixture("fig2.txt")), ("fig4".into(), fixture("fig4.txt"))];
    insts.extend((0..30).map(|s| (format!("micro{s}"), micro(s))));
    let per: Vec<Vec<(String, Instance, Plan)>> = insts
        .into_par_iter()
        .map(|(name, inst)| {
            let mut out = Vec::new();
            if let Ok((p, _)) = run_myopic(&inst, &milp()) {
                out.push((format!("{name}/myopic"), inst.clone(), p));
            }
            if let Ok(r) = run_forward_looking(&inst, &TrainingConfig::default(), &milp()) {
                out.push((format!("{name}/flook"), inst.clone(), r.plan));
            }
            if let Ok(p) = exact_multi_period(&inst, &OracleLimits::default()) {
                out.push((format!("{name}/oracle"), inst.clone(), p));
            }
            if name.starts_with("micro") {
                let ms = build_full_model(&inst).unwrap();
                let sol = solve(&ms, &SolverConfig::default()).unwrap();
                if sol.has_values() {
                    out.push((format!("{name}/exact"), inst.clone(), decode_full(&ms, &inst, &sol.values).unwrap()));
                }
            }
            out
        })
        .collect();
    Ok(per.into_iter().flatten().collect())
}

fn criterion_8() -> Check {
    let plans = corpus_plans()?;
    for (name, inst, plan) in &plans {
        let v = validate_plan(inst, plan);
        ensure(v.is_empty(), format!("{name}: {}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")))?;
    }
    let mut mutants = 0;
    for (name, inst, plan) in &plans {
        for (k, pp) in plan.periods.iter().enumerate() {
            let items = inst.items_at(pp.pool.instant);
            for (n, pl) in pp.decision.placements.iter().enumerate() {
                // off the object edge
                let mut shifts = Vec::new();
                if pl.x == 0.0 {
                    shifts.push((-1.0, 0.0));
                }
                if pl.y == 0.0 {
                    shifts.push((0.0, -1.0));
                }
                // into an abutting neighbour of the same object
                for other in &pp.decision.placements {
                    if other.object != pl.object || other.item == pl.item {
                        continue;
                    }
                    let (a, b) = (&items[pl.item], &items[other.item]);
                    let y_overlap = pl.y < other.y + b.height as f64 && other.y < pl.y + a.height as f64;
                    let x_overlap = pl.x < other.x + b.width as f64 && other.x < pl.x + a.width as f64;
                    if y_overlap && pl.x + a.width as f64 == other.x {
                        shifts.push((1.0, 0.0));
                    }
                    if x_overlap && pl.y + a.height as f64 == other.y {
                        shifts.push((0.0, 1.0));
                    }
                }
                for (dx, dy) in shifts {
                    let mut bad = plan.clone();
                    bad.periods[k].decision.placements[n].x += dx;
                    bad.periods[k].decision.placements[n].y += dy;
                    mutants += 1;
                    ensure(
                        !validate_plan(inst, &bad).is_empty(),
                        format!("{name}: shifting item {} by ({dx},{dy}) went unnoticed", pl.item),
                    )?;
                }
            }
        }
        for j in 0..plan.final_pool.objects.len() {
            if plan.final_pool.objects[j].width == 0 {
                continue;
            }
            let mut bad = plan.clone();
            bad.final_pool.objects[j].width += 1;
            mutants += 1;
            ensure(!validate_plan(inst, &bad).is_empty(), format!("{name}: inflated final leftover {j} went unnoticed"))?;
        }
        for k in 1..plan.periods.len() {
            for j in plan.periods[k].pool.purchasable_count..plan.periods[k].pool.objects.len() {
                if plan.periods[k].pool.objects[j].width == 0 {
                    continue;
                }
                let mut bad = plan.clone();
                bad.periods[k].pool.objects[j].height += 1;
                mutants += 1;
                ensure(!validate_plan(inst, &bad).is_empty(), format!("{name}: inflated leftover {j} went unnoticed"))?;
            }
        }
    }
    ensure(mutants > 0, "no mutants generated")?;
    Ok(format!("{} plans valid, {mutants} mutants rejected", plans.len()))
}

#[test]
fn acceptance() {
    let checks: [(&str, fn() -> Check); 8] = [
        ("fig2 toy: myopic 108, exact 80 with 3x3", criterion_1),
        ("fig4 toy: myopic 592, cycle 0 521/70, converged 477", criterion_2),
        ("amortized cost examples", criterion_3),
        ("published gaps and W/T/L", criterion_4),
        ("oracle equivalence on 100 micro instances", criterion_5),
        ("training bounds on 20 four-period instances", criterion_6),
        ("binary variable count of instance 1 at xi=1", criterion_7),
        ("validator soundness and mutations", criterion_8),
    ];
    let mut failed = Vec::new();
    for (n, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", n + 1),
            Err(detail) => {
                println!("criterion {}: FAIL  {name} ({detail})", n + 1);
                failed.push(n + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
