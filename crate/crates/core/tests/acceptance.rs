//! The twelve acceptance criteria, one test each, printing a PASS/FAIL line.
//! Runtime bounds are measured here, outside the deterministic report.

use std::time::{Duration, Instant};

use trisect_core::context::Tolerances;
use trisect_core::selftest::{criterion_by_slug, run_criterion, Workbench, DEFAULT_SEED};

fn criterion(slug: &str, budget: Option<Duration>) {
    let c = criterion_by_slug(slug).expect("known slug");
    let mut wb = Workbench::new(DEFAULT_SEED, Tolerances::default());
    let start = Instant::now();
    let outcome = run_criterion(&mut wb, c);
    let elapsed = start.elapsed();
    let within = budget.is_none_or(|b| elapsed <= b);
    let mut line = outcome.summary_line();
    if let Some(b) = budget {
        line.push_str(&format!(" (runtime {:.2}s, limit {}s)", elapsed.as_secs_f64(), b.as_secs()));
    }
    if !within {
        line = line.replacen("PASS", "FAIL", 1);
    }
    println!("{line}");
    for check in &outcome.checks {
        println!("    {} {} = {} required {}", if check.pass { "ok  " } else { "FAIL" }, check.name, check.observed, check.requirement);
    }
    assert!(outcome.pass && within, "{line}");
}

#[test]
fn c01_elliptic_periods() {
    criterion("elliptic-periods", Some(Duration::from_secs(1)));
}

#[test]
fn c02_theta_identities() {
    criterion("addition-formula", Some(Duration::from_secs(30)));
}

#[test]
fn c03_derivatives() {
    criterion("derivatives", None);
}

#[test]
fn c04_riemann_constant() {
    criterion("riemann-constant", None);
}

#[test]
fn c05_fay_trisecant() {
    criterion("fay-trisecant", None);
}

#[test]
fn c06_theta_trisecant() {
    criterion("theta-trisecant", Some(Duration::from_secs(120)));
}

#[test]
fn c07_gauss_span() {
    criterion("gauss-span", None);
}

#[test]
fn c08_fiber_multiplicity() {
    criterion("fiber-multiplicity", None);
}

#[test]
fn c09_multisecant() {
    criterion("multisecant", Some(Duration::from_secs(600)));
}

#[test]
fn c10_gamma00_dimension() {
    criterion("gamma00-dimension", None);
}

#[test]
fn c11_gamma00_lemmas() {
    criterion("gamma00-lemmas", None);
}

#[test]
fn c12_secant_internals() {
    criterion("secant-internals", None);
}
