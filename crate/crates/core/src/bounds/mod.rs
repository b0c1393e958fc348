//! Theorem terms, reference minimizers and step-by-step proof replay.
//!
//! Every theorem is evaluated as a chain of one-step inequalities over named
//! terms. Each step carries the single constant it applies (K for a factor
//! triangle step, L for a Lipschitz step, 1 for a discrepancy step) and is
//! checked on its own; the theorem's constant is then composed mechanically
//! by substituting steps into one another.

mod chain;
mod lemma;
mod setting;
mod theorems;

pub use chain::{BoundReport, Chain, ProofStep, Relation, StepReport, TOLERANCE};
pub use lemma::{compute_bound_cor1, lemma1_report, two_sided_quad};
pub use setting::{DASetting, SettingKind};
pub(crate) use theorems::pick;
pub use theorems::{
    best_ghat_t, best_in_class, candidate, compute_bound, compute_bound_analogy, compute_bound_bendavid,
    compute_bound_dt, compute_bound_dtn, compute_bound_mansour, compute_bound_oda, verify_proof_script, Candidate,
    Minimizer, Theorem,
};
