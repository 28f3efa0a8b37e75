//! Prints BV, CV, rows and rows with bound rows of the full model for the
//! ten four-period benchmark instances at ξ = 1..4.

use leftover::instance::parse_instance;
use leftover::model::build_full_model;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    for k in 1..=10 {
        let text = std::fs::read_to_string(format!("{dir}/bench4_{k:02}.txt")).unwrap();
        let mut inst = parse_instance(&text).unwrap();
        let mut row = format!("{k:2}");
        for xi in 1..=4 {
            inst.xi = xi;
            let st = build_full_model(&inst).unwrap().stats();
            row += &format!(" | {} {} {} ({})", st.binary, st.continuous, st.rows, st.rows_with_bounds);
        }
        println!("{row}");
    }
}
