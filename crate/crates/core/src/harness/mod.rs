//! Batch drivers behind the command-line tool: bound verification over
//! many scenarios, the discrepancy property suite, and empirical checks of
//! the loss and Lipschitz constants.

mod axioms;
mod constants;
mod verify;

pub use axioms::{run_axioms, AxiomConfig, AxiomReport, CheckFailure, CheckSummary, AXIOM_TOLERANCE, EXACT_TOLERANCE};
pub use constants::{run_constants, ConstantsConfig, ConstantsReport, MemberConstant, CONSTANT_TOLERANCE};
pub use verify::{random_candidate, role_class, run_verify, CandidateCheck, ScenarioVerification, VerifyConfig};

/// Seed of the `i`-th scenario or instance of a batch started at `seed`.
pub fn instance_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}
