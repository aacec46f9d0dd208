//! Release gate: every verification criterion must pass.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! one-line verdict per criterion.

use edur::audit::{run_audit, AuditOptions};

#[test]
fn all_criteria_pass() {
    let results = run_audit(&AuditOptions::default()).expect("audit must run");
    assert_eq!(results.len(), 9, "expected nine criteria");
    let mut all_ok = true;
    for r in &results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("criterion {} [{}] {}: {}", r.id, verdict, r.name, r.detail);
        all_ok &= r.passed;
    }
    assert!(all_ok, "at least one criterion failed; see the lines above");
}

#[test]
fn audit_catches_injected_fault() {
    let opts = AuditOptions {
        inject_sign_fault: true,
        ..Default::default()
    };
    let results = run_audit(&opts).expect("audit must run");
    assert!(
        results.iter().any(|r| !r.passed),
        "a corrupted reconstruction term must fail at least one criterion"
    );
}
