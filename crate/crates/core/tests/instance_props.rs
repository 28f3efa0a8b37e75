mod common;

use proptest::prelude::*;

use leftover::instance::{
    generate_instance, normalize, parse_instance, serialize_instance, validate_instance, GenConfig, Severity,
};

fn config() -> impl Strategy<Value = GenConfig> {
    (1usize..5, 0usize..5, 1usize..4, 4i64..20, 1usize..5, 1i64..6, any::<u64>()).prop_map(
        |(periods, xi, objs, dim, items, idim, seed)| GenConfig {
            periods,
            xi: xi.min(periods),
            objects_per_period: (1, objs),
            object_dim: (dim, dim + 10),
            items_per_period: (0, items),
            item_dim: (1, idim.min(dim)),
            catalogue_size: (1, 3),
            unit_cost: (1, 4),
            seed,
        },
    )
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(cfg in config()) {
        let inst = generate_instance(&cfg).unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text.clone());
        prop_assert_eq!(normalize(&text), text);
    }

    #[test]
    fn generated_instances_respect_the_config(cfg in config()) {
        let inst = generate_instance(&cfg).unwrap();
        prop_assert_eq!(inst.periods(), cfg.periods);
        prop_assert_eq!(inst.xi, cfg.xi);
        prop_assert!(validate_instance(&inst).iter().all(|d| d.severity != Severity::Error));
        for s in inst.p..inst.big_p {
            let objs = inst.objects_at(s);
            prop_assert!(objs.len() >= cfg.objects_per_period.0 && objs.len() <= cfg.objects_per_period.1);
            for o in objs {
                prop_assert!(o.width >= cfg.object_dim.0 && o.width <= cfg.object_dim.1);
                prop_assert!(o.height >= cfg.object_dim.0 && o.height <= cfg.object_dim.1);
                prop_assert!(o.unit_cost >= cfg.unit_cost.0 && o.unit_cost <= cfg.unit_cost.1);
            }
            for it in inst.items_at(s) {
                prop_assert!(objs.iter().any(|o| it.width <= o.width && it.height <= o.height));
            }
        }
    }

    #[test]
    fn generator_is_a_function_of_the_seed(cfg in config()) {
        prop_assert_eq!(generate_instance(&cfg).unwrap(), generate_instance(&cfg).unwrap());
    }
}

#[test]
fn fixtures_parse_and_validate() {
    for name in ["fig2.txt", "fig4.txt"] {
        let inst = common::fixture(name);
        assert!(validate_instance(&inst).iter().all(|d| d.severity != Severity::Error), "{name}");
    }
    for k in 1..=10 {
        let inst = common::fixture(&format!("bench4_{k:02}.txt"));
        assert_eq!(inst.periods(), 4);
        assert!(validate_instance(&inst).iter().all(|d| d.severity != Severity::Error), "bench {k}");
    }
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let a = parse_instance("P 1 XI 0 D 1\nCAT 1 1\nPERIOD 0 M 1 N 1\nOBJ 2 2 1\nITEM 1 1\n").unwrap();
    let b = parse_instance("# toy\n\nP 1 XI 0 D 1\n  CAT 1 1\n\nPERIOD 0 M 1 N 1\nOBJ 2 2 1 # one\nITEM 1 1\n").unwrap();
    assert_eq!(a, b);
}
