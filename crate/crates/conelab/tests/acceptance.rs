//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line with the measured value (visible with `--nocapture`).

use conelab::verification::{self, CriterionOutcome, VerifyConfig};

fn check(outcome: CriterionOutcome) {
    println!("{}", outcome.line());
    assert!(outcome.pass, "{}", outcome.line());
}

fn vc() -> VerifyConfig {
    VerifyConfig::default()
}

#[test]
fn criterion_01_exact_null_solutions() {
    check(verification::exact_null_solutions(&vc()).unwrap());
}

#[test]
fn criterion_02_endpoint_law() {
    check(verification::endpoint_law_agreement(&vc()).unwrap());
}

#[test]
fn criterion_03_non_crossing_and_trapping() {
    check(verification::non_crossing_and_trapping(&vc()).unwrap());
}

#[test]
fn criterion_04_strain_existence_and_horismos() {
    check(verification::strain_existence_and_horismos(&vc()).unwrap());
}

#[test]
fn criterion_05_timelike_boundary_lines() {
    check(verification::timelike_lines(&vc()).unwrap());
}

#[test]
fn criterion_06_unit_map_law_and_discontinuity() {
    check(verification::unit_map_law_and_discontinuity(&vc()).unwrap());
}

#[test]
fn criterion_07_strain_collapse_and_composition() {
    check(verification::collapse_and_composition(&vc()).unwrap());
}

#[test]
fn criterion_08_quotient_embedding() {
    check(verification::quotient_embedding(&vc()).unwrap());
}

#[test]
fn criterion_09_oracle_cross_validation() {
    check(verification::oracle_cross_validation(&vc()).unwrap());
}

#[test]
fn criterion_10_chart_verification() {
    check(verification::chart_verification(&vc()).unwrap());
}
