//! Reproduction criteria, one test each. Every test prints a single
//! `Ak PASS|FAIL ...` line with the measured values.

use urnlab::verify::{run_criterion, DEFAULT_SEED};

fn check(id: &str) {
    let report = run_criterion(id, DEFAULT_SEED).expect("known criterion");
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn a1_closed_form_roots() {
    check("A1");
}

#[test]
fn a2_phase_anchors() {
    check("A2");
}

#[test]
fn a3_cubic_factor() {
    check("A3");
}

#[test]
fn a4_cyclic_eigenvalues() {
    check("A4");
}

#[test]
fn a5_lyapunov_identity() {
    check("A5");
}

#[test]
fn a6_equal_interaction_ensembles() {
    check("A6");
}

#[test]
fn a7_unit_cyclic_ensembles() {
    check("A7");
}

#[test]
fn a8_no_unstable_limits() {
    check("A8");
}

#[test]
fn a9_cyclic_extra_stable_points() {
    check("A9");
}

#[test]
fn a10_two_colour_roots() {
    check("A10");
}
