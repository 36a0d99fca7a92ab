//! The acceptance suite with `V ≡ 0`: every margin sits at its exact value.

use halfline::verify::{run_suite, Suite};

#[test]
fn free_suite_passes_with_trivial_margins() {
    let summary = run_suite(Suite::Free, 1);
    for c in &summary.criteria {
        println!("{}", c.line());
    }
    assert!(summary.all_pass);
    let m = |id: u32, key: &str| summary.criteria[id as usize - 1].margins[key];
    assert!(m(2, "max_drift") <= 4.0 * f64::EPSILON);
    assert_eq!(m(3, "max_violation"), 0.0);
    assert_eq!(m(4, "max_error"), 0.0);
    assert_eq!(m(7, "max_recovery_error"), 0.0);
    assert_eq!(m(8, "max_abs_delta"), 0.0);
    assert_eq!(m(9, "max_gamma"), 0.0);
}
