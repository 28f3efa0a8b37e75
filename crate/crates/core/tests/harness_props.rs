mod common;

use std::time::Duration;

use proptest::prelude::*;

use leftover::harness::{
    classify, gap_percent, run_experiment, sweep_grid, ExperimentConfig, InstanceRow, Method, MethodResult, Outcome,
    Report, WinTieLoss,
};

proptest! {
    #[test]
    fn classify_is_antisymmetric(ca in 0i64..50, la in 0i64..50, cb in 0i64..50, lb in 0i64..50) {
        let ab = classify(ca, la, cb, lb);
        let ba = classify(cb, lb, ca, la);
        match ab {
            Outcome::Win => prop_assert_eq!(ba, Outcome::Loss),
            Outcome::Loss => prop_assert_eq!(ba, Outcome::Win),
            Outcome::Tie => {
                prop_assert_eq!(ba, Outcome::Tie);
                prop_assert_eq!((ca, la), (cb, lb));
            }
        }
    }

    #[test]
    fn gap_sign_follows_the_difference(a in -1_000_000_000i64..1_000_000_000, b in 1i64..1_000_000_000) {
        let g = gap_percent(a as f64, b as f64).unwrap();
        // rounding to 4 decimals may take tiny gaps to zero, never across it
        prop_assert!(g == 0.0 || g.signum() == (a - b).signum() as f64);
        if (a - b).abs() as f64 / b as f64 > 1e-5 {
            prop_assert_eq!(g.signum(), (a - b).signum() as f64);
        }
        prop_assert_eq!((g * 1e4).round() / 1e4, g);
    }

    #[test]
    fn report_csv_round_trips(rows in prop::collection::vec(row(), 0..8)) {
        let report = Report { methods: vec![Method::Myopic, Method::ForwardLooking], rows };
        let back = Report::from_csv(&report.to_csv().unwrap()).unwrap();
        prop_assert_eq!(back, report);
    }
}

fn result() -> impl Strategy<Value = Result<MethodResult, String>> {
    prop_oneof![
        (0i64..100_000, 0i64..10_000, -1_000_000i64..1_000_000_000, 0u64..10_000_000).prop_map(|(c, l, o, t)| Ok(
            MethodResult { cost: c, leftover_value: l, objective: o, wall_time: Duration::from_micros(t * 100), cycles: None }
        )),
        "[a-z ]{1,12}".prop_map(Err),
    ]
}

fn row() -> impl Strategy<Value = InstanceRow> {
    (
        "[a-z][a-z0-9_]{0,8}",
        1usize..13,
        0usize..13,
        result(),
        result(),
        prop::option::of(-100_000_000i64..100_000_000),
        prop::option::of(prop_oneof![Just(Outcome::Win), Just(Outcome::Tie), Just(Outcome::Loss)]),
    )
        .prop_map(|(name, periods, xi, a, b, gap, outcome)| InstanceRow {
            name,
            periods,
            xi,
            results: vec![a, b],
            outcome,
            gap: gap.map(|g| g as f64 / 1e4),
        })
}

#[test]
fn gap_needs_a_nonzero_reference() {
    assert!(gap_percent(5.0, 0.0).is_err());
    assert_eq!(gap_percent(7.0, 7.0).unwrap(), 0.0);
}

#[test]
fn tie_break_on_leftovers() {
    assert_eq!(classify(5, 10, 5, 9), Outcome::Win);
    assert_eq!(classify(6715, 0, 6715, 0), Outcome::Tie);
    assert_eq!(classify(11679, 2647, 9155, 0), Outcome::Loss);
}

/// Hand-labelled outcomes aggregate to exact counts.
#[test]
fn win_tie_loss_counts() {
    let labelled = [
        ((3, 0, 4, 0), Outcome::Win),
        ((4, 0, 4, 0), Outcome::Tie),
        ((5, 0, 4, 9), Outcome::Loss),
        ((4, 2, 4, 1), Outcome::Win),
        ((4, 1, 4, 2), Outcome::Loss),
        ((9, 9, 9, 9), Outcome::Tie),
        ((1, 0, 2, 100), Outcome::Win),
        ((2, 100, 1, 0), Outcome::Loss),
        ((0, 0, 0, 0), Outcome::Tie),
        ((7, 3, 8, 5), Outcome::Win),
    ];
    for &((ca, la, cb, lb), want) in &labelled {
        assert_eq!(classify(ca, la, cb, lb), want);
    }
    let wtl = WinTieLoss::from_outcomes(labelled.iter().map(|&((ca, la, cb, lb), _)| classify(ca, la, cb, lb)));
    assert_eq!((wtl.win, wtl.tie, wtl.loss), (4, 3, 3));
    assert_eq!(wtl.to_string(), "4/3/3");
}

#[test]
fn sweep_grid_is_the_stated_one() {
    let g = sweep_grid();
    assert_eq!(g.len(), 11);
    assert!((g[0] - 0.5).abs() < 1e-12 && (g[10] - 1.0).abs() < 1e-12);
}

#[test]
fn empty_experiment_gives_an_empty_table() {
    let r = run_experiment(&[], &ExperimentConfig::default());
    assert!(r.rows.is_empty());
    assert!(r.summary().is_empty());
    assert_eq!(Report::from_csv(&r.to_csv().unwrap()).unwrap(), r);
}

#[test]
fn toy_corpus_table() {
    let insts = vec![("fig2".to_string(), common::fixture("fig2.txt")), ("fig4".to_string(), common::fixture("fig4.txt"))];
    let r = run_experiment(&insts, &ExperimentConfig::default());
    assert_eq!(r.rows.len(), 2);
    let cost = |row: usize, k: usize| r.rows[row].results[k].as_ref().unwrap().cost;
    assert_eq!(cost(0, 0), 108);
    assert_eq!((cost(1, 0), cost(1, 1)), (592, 477));
    assert_eq!(r.rows[1].outcome, Some(Outcome::Win));
    assert!(r.rows[1].gap.unwrap() < 0.0);
    let text = r.to_text();
    assert!(text.contains("fig4") && text.contains("W/T/L"));
}
