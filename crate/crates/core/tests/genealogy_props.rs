mod common;

use proptest::prelude::*;

use leftover::genealogy::{cut_children, object_counts, slot_layout, spawn_pool, ObjectPool};
use leftover::instance::{generate_instance, GenConfig};
use leftover::matheuristic::{run_myopic, SubproblemSolver};
use leftover::oracle::OracleLimits;

proptest! {
    /// m̄ and m̂ from the recurrences agree with a slot-by-slot simulation.
    #[test]
    fn counts_match_the_slot_layout(periods in 1usize..6, xi_raw in 0usize..6, objs in 1usize..4, seed in any::<u64>()) {
        let xi = xi_raw.min(periods);
        let inst = generate_instance(&GenConfig {
            periods, xi, objects_per_period: (1, objs), items_per_period: (0, 0), seed, ..Default::default()
        }).unwrap();
        let counts = object_counts(&inst.m(), inst.p, inst.big_p, inst.xi).unwrap();
        let layout = slot_layout(&inst);
        let bar: Vec<usize> = layout.iter().map(Vec::len).collect();
        prop_assert_eq!(&counts.bar, &bar);
        let hat: Vec<usize> = layout[..periods].iter().map(|s| s.iter().filter(|x| x.expiration > 0).count()).collect();
        prop_assert_eq!(&counts.hat, &hat);
    }

    /// The two leftovers plus the cutting area tile the object.
    #[test]
    fn cuts_tile_the_object(w in 1i64..40, h in 1i64..40, t_raw in 0i64..40, r_raw in 0i64..40, eta in any::<bool>()) {
        let (t, r) = (t_raw % (h + 1), r_raw % (w + 1));
        let (top, right) = cut_children(w, h, eta, t, r);
        let cutting = (w - r) * (h - t);
        prop_assert_eq!(top.0 * top.1 + right.0 * right.1 + cutting, w * h);
        prop_assert!(top == (0, 0) || (top.0 > 0 && top.1 > 0));
        prop_assert!(right == (0, 0) || (right.0 > 0 && right.1 > 0));
    }
}

#[test]
fn counts_reject_long_expiration() {
    assert!(object_counts(&[1, 1], 0, 2, 3).is_err());
}

/// Pools rebuilt by spawn_pool along a plan equal the plan's own pools and
/// match the static layout in size, expiration and cost.
#[test]
fn plans_follow_the_layout() {
    let mut checked = 0;
    for seed in 0..20 {
        let inst = common::micro(seed);
        let Ok((plan, _)) = run_myopic(&inst, &SubproblemSolver::Oracle(OracleLimits::default())) else { continue };
        let layout = slot_layout(&inst);
        let mut pool = ObjectPool::initial(&inst);
        for (k, pp) in plan.periods.iter().enumerate() {
            assert_eq!(pp.pool, pool, "seed {seed} period {k}");
            for (o, sl) in pool.objects.iter().zip(&layout[k]) {
                assert_eq!((o.expiration, o.unit_cost), (sl.expiration, sl.unit_cost));
            }
            assert_eq!(pool.len(), layout[k].len());
            pool = spawn_pool(&pool, &pp.decision, inst.objects_at(pool.instant + 1)).unwrap();
        }
        assert_eq!(pool, plan.final_pool);
        assert_eq!(pool.len(), layout[inst.periods()].len());
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} plans");
}
