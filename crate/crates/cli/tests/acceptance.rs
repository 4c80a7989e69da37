//! The acceptance gate: every exit criterion at its stated tolerance and
//! full workload, one test per criterion.
//!
//! Heavy artifacts (PDE fields, Monte Carlo batches) are shared through a
//! process-wide context and computed lazily by whichever criterion needs
//! them first; all seeds are fixed, so the run is reproducible.

use std::sync::OnceLock;

use kpp_cli::accept::{self, AcceptContext, CriterionResult, SuiteProfile};

fn ctx() -> &'static AcceptContext {
    static CTX: OnceLock<AcceptContext> = OnceLock::new();
    CTX.get_or_init(|| AcceptContext::new(SuiteProfile::full()))
}

fn assert_criterion(result: CriterionResult) {
    println!(
        "[{}] criterion {:>2}: {}",
        if result.passed { "PASS" } else { "FAIL" },
        result.id,
        result.name
    );
    for line in &result.details {
        println!("       {line}");
    }
    assert!(result.passed, "criterion {} failed:\n{}", result.id, result.details.join("\n"));
}

#[test]
fn criterion_01_martingale_means() {
    assert_criterion(accept::criterion_1(ctx()));
}

#[test]
fn criterion_02_vanishing_limits() {
    assert_criterion(accept::criterion_2(ctx()));
}

#[test]
fn criterion_03_extinction_vs_steady_state() {
    assert_criterion(accept::criterion_3(ctx()));
}

#[test]
fn criterion_04_one_dimensional_solvers() {
    assert_criterion(accept::criterion_4(ctx()));
}

#[test]
fn criterion_05_two_dimensional_wave() {
    assert_criterion(accept::criterion_5(ctx()));
}

#[test]
fn criterion_06_probabilistic_analytic_agreement() {
    assert_criterion(accept::criterion_6(ctx()));
}

#[test]
fn criterion_07_logarithmic_shift() {
    assert_criterion(accept::criterion_7(ctx()));
}

#[test]
fn criterion_08_tail_expansion() {
    assert_criterion(accept::criterion_8(ctx()));
}

#[test]
fn criterion_09_rotated_supercritical_limit() {
    assert_criterion(accept::criterion_9(ctx()));
}

#[test]
fn criterion_10_coupled_limits() {
    assert_criterion(accept::criterion_10(ctx()));
}

#[test]
fn criterion_11_potential_toolkit() {
    assert_criterion(accept::criterion_11(ctx()));
}

#[test]
fn criterion_12_subsolution() {
    assert_criterion(accept::criterion_12(ctx()));
}
