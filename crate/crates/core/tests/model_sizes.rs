mod common;

use leftover::model::build_full_model;

/// Published (BV, CV, CO) of the four-period benchmark instances for
/// ξ = 1, 2, 3, 4.
const PUBLISHED: [[(usize, usize, usize); 4]; 10] = [
    [(369, 150, 2664), (609, 294, 5688), (897, 518, 8168), (1185, 838, 9352)],
    [(270, 150, 1683), (498, 310, 3787), (786, 566, 5555), (1218, 1046, 7331)],
    [(298, 176, 1854), (450, 304, 3122), (626, 496, 4074), (754, 656, 4634)],
    [(397, 152, 2649), (529, 240, 3805), (721, 384, 5205), (1041, 704, 6453)],
    [(487, 150, 3752), (695, 254, 6932), (951, 430, 9396), (1335, 910, 11076)],
    [(290, 202, 1809), (546, 402, 3845), (898, 754, 5757), (1042, 914, 6349)],
    [(572, 214, 4443), (844, 358, 8667), (1164, 630, 11683), (1308, 790, 12275)],
    [(503, 154, 3328), (675, 282, 5456), (979, 426, 11560), (1235, 746, 12680)],
    [(318, 196, 2044), (538, 380, 3672), (706, 556, 4520), (1138, 1036, 6296)],
    [(345, 162, 2072), (525, 290, 3584), (749, 434, 5784), (1069, 754, 7032)],
];

#[test]
fn sizes_match_the_published_table() {
    for (k, row) in PUBLISHED.iter().enumerate() {
        let mut inst = common::fixture(&format!("bench4_{:02}.txt", k + 1));
        for (x, &(bv, cv, co)) in row.iter().enumerate() {
            inst.xi = x + 1;
            let st = build_full_model(&inst).unwrap().stats();
            assert_eq!((st.binary, st.continuous, st.rows_with_bounds), (bv, cv, co), "instance {} xi {}", k + 1, x + 1);
            assert_eq!(st.integer, 0);
        }
    }
}

#[test]
fn cuts_are_counted_apart() {
    let inst = common::fixture("fig2.txt");
    let ms = build_full_model(&inst).unwrap();
    let st = ms.stats();
    assert_eq!(st.rows + st.cut_rows, ms.constraints.len());
    assert!(st.cut_rows > 0);
}
