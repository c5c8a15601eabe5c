//! End-to-end acceptance battery.  Each test prints one `[PASS]/[FAIL]`
//! line with the measured runtime and fails if its check does.  A shared
//! lock keeps the checks sequential so the per-check runtime budgets mean
//! what they say.

use std::sync::Mutex;

use siglo_core::validate::{self, CheckOutcome, Constants};

static SERIAL: Mutex<()> = Mutex::new(());

fn run(outcome: CheckOutcome) {
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

fn guard() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

#[test]
fn c01_theta1_recovered_within_half_percent() {
    let _g = guard();
    run(validate::check_theta1(&Constants::default()));
}

#[test]
fn c02_theta2_recovered_within_five_percent() {
    let _g = guard();
    run(validate::check_theta2(&Constants::default()));
}

#[test]
fn c03_line_instance_solved_exactly() {
    let _g = guard();
    run(validate::check_line_instance());
}

#[test]
fn c04_stationary_radii_match_closed_forms() {
    let _g = guard();
    run(validate::check_stationary_radius());
}

#[test]
fn c05_single_point_probe_decreases_strictly() {
    let _g = guard();
    run(validate::check_nonexistence_probe());
}

#[test]
fn c06_certificates_confirm_the_block_optimum() {
    let _g = guard();
    run(validate::check_certificates_1d());
}

#[test]
fn c07_limit_energy_1d_and_rescaled_gaps() {
    let _g = guard();
    run(validate::check_gamma_limit_1d(&Constants::default()));
}

#[test]
fn c08_limit_trend_2d_with_shrinking_transport() {
    let _g = guard();
    run(validate::check_gamma_trend_2d(&Constants::default()));
}

#[test]
fn c09_net_cardinality_and_covering() {
    let _g = guard();
    run(validate::check_net_bounds());
}

#[test]
fn c10_invariant_suites_thousand_trials() {
    let _g = guard();
    for outcome in validate::property_suite(1000) {
        run(outcome);
    }
}
