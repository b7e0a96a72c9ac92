//! Benchmark harness support.

use mutlab_core::{calibrate, corpus, Calibration, Subject, DEFAULT_BUDGET_MULT};

/// A bundled program with its budgets already computed.
pub fn prepared(name: &str) -> (Subject, Vec<Calibration>) {
    let subject = corpus::find(name).expect("bundled program").subject();
    let cal = calibrate(&subject, DEFAULT_BUDGET_MULT).expect("original passes");
    (subject, cal)
}
