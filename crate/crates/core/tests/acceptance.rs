//! The twelve acceptance criteria, one test each. Every test prints a
//! single PASS/FAIL line with the measured value.

use wqed::verify::run_criterion;

fn check(id: u8) {
    let r = run_criterion(id);
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_coefficient_identity() {
    check(1);
}

#[test]
fn criterion_02_bessel_identity() {
    check(2);
}

#[test]
fn criterion_03_symmetric_oracle_equivalence() {
    check(3);
}

#[test]
fn criterion_04_chiral_continuum_exactness() {
    check(4);
}

#[test]
fn criterion_05_special_time_structure() {
    check(5);
}

#[test]
fn criterion_06_symmetric_closed_forms() {
    check(6);
}

#[test]
fn criterion_07_thermodynamic_approach() {
    check(7);
}

#[test]
fn criterion_08_g2_structure() {
    check(8);
}

#[test]
fn criterion_09_correlation_field() {
    check(9);
}

#[test]
fn criterion_10_e1_correction() {
    check(10);
}

#[test]
fn criterion_11_asymptotics() {
    check(11);
}

#[test]
fn criterion_12_hierarchy_ansatz_scaling() {
    check(12);
}
