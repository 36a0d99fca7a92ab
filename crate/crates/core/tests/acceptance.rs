//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with the measured margins; run with `--nocapture` to see them.

use halfline::verify::{self, CriterionResult, Suite};

fn check(c: CriterionResult) {
    println!("{}", c.line());
    assert!(c.pass, "{}", c.line());
}

#[test]
fn criterion_01_free_case_exactness() {
    check(verify::free_exactness().unwrap());
}

#[test]
fn criterion_02_wronskian_conservation() {
    check(verify::wronskian_conservation(Suite::Full).unwrap());
}

#[test]
fn criterion_03_kernel_bound() {
    check(verify::kernel_bound(Suite::Full).unwrap());
}

#[test]
fn criterion_04_jost_representation() {
    check(verify::jost_representation(Suite::Full).unwrap());
}

#[test]
fn criterion_05_construction_positivity() {
    check(verify::construction_positivity(Suite::Full).unwrap());
}

#[test]
fn criterion_06_forward_positive_type() {
    check(verify::forward_positive_type(Suite::Full, 20_240_601).unwrap());
}

#[test]
fn criterion_07_volterra_roundtrip() {
    check(verify::volterra_roundtrip(Suite::Full).unwrap());
}

#[test]
fn criterion_08_phase_shift_consistency() {
    check(verify::phase_shift_consistency(Suite::Full).unwrap());
}

#[test]
fn criterion_09_gamma_positivity() {
    check(verify::gamma_positivity(Suite::Full).unwrap());
}

#[test]
fn criterion_10_omega_checks() {
    check(verify::omega_checks(Suite::Full).unwrap());
}

#[test]
fn criterion_11_determinism() {
    // Two independent evaluations of the seeded and the quadrature-heavy
    // criteria, serialized as the CLI would write them.
    let run = || {
        let parts = [
            verify::forward_positive_type(Suite::Full, 7).unwrap(),
            verify::phase_shift_consistency(Suite::Full).unwrap(),
            verify::omega_checks(Suite::Full).unwrap(),
        ];
        serde_json::to_vec(&parts).unwrap()
    };
    check(verify::determinism(&run(), &run()));
}
