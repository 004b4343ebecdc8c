//! Process-wide counters for post-hoc witness checks.
//!
//! Every retraction witness and every equation solution produced by the
//! library is re-verified before it is returned; these counters record how
//! many checks ran and how many failed (a failure is always a bug).

use std::sync::atomic::{AtomicU64, Ordering};

static SOLUTION_CHECKS: AtomicU64 = AtomicU64::new(0);
static SOLUTION_FAILURES: AtomicU64 = AtomicU64::new(0);
static RETRACTION_CHECKS: AtomicU64 = AtomicU64::new(0);
static RETRACTION_FAILURES: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AuditSnapshot {
    pub solution_checks: u64,
    pub solution_failures: u64,
    pub retraction_checks: u64,
    pub retraction_failures: u64,
}

pub fn snapshot() -> AuditSnapshot {
    AuditSnapshot {
        solution_checks: SOLUTION_CHECKS.load(Ordering::Relaxed),
        solution_failures: SOLUTION_FAILURES.load(Ordering::Relaxed),
        retraction_checks: RETRACTION_CHECKS.load(Ordering::Relaxed),
        retraction_failures: RETRACTION_FAILURES.load(Ordering::Relaxed),
    }
}

pub(crate) fn record_solution(ok: bool) {
    SOLUTION_CHECKS.fetch_add(1, Ordering::Relaxed);
    if !ok {
        SOLUTION_FAILURES.fetch_add(1, Ordering::Relaxed);
    }
}

pub(crate) fn record_retraction(ok: bool) {
    RETRACTION_CHECKS.fetch_add(1, Ordering::Relaxed);
    if !ok {
        RETRACTION_FAILURES.fetch_add(1, Ordering::Relaxed);
    }
}
