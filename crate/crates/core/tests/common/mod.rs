#![allow(dead_code)]

use std::path::PathBuf;

use leftover::instance::{generate_instance, parse_instance, GenConfig, Instance};

pub fn fixture(name: &str) -> Instance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_instance(&text).unwrap()
}

/// Small instances both the oracle and the builtin B&B can settle: one or
/// two periods, up to two objects and three items per period, dims ≤ 12.
pub fn micro_config(seed: u64) -> GenConfig {
    let periods = 1 + (seed % 2) as usize;
    GenConfig {
        periods,
        xi: (seed / 2 % (periods as u64 + 1)) as usize,
        objects_per_period: (1, 2),
        object_dim: (4, 12),
        items_per_period: (1, 3),
        item_dim: (2, 8),
        catalogue_size: (1, 2),
        unit_cost: (1, 3),
        seed,
    }
}

pub fn micro(seed: u64) -> Instance {
    generate_instance(&micro_config(seed)).unwrap()
}

/// Four-period instances small enough for the builtin solver. Three items
/// of at most 5×5 always fit one 10×10 object, so every period is feasible
/// on its own purchases.
pub fn small_four_period(seed: u64) -> Instance {
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
