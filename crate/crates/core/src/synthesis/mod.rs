//! Constructive sequence synthesis: adversarial blocks against finite
//! classes, sequences with a prescribed predictability, and a sequence
//! separating finite-state prediction from the repeat detector.

mod adversary;
mod repeat;
mod separation;
mod target;

pub use adversary::{
    adversarial_block, advance_class, asymptotic_loss, guarantee_loss, min_block_len, required_errors,
    CertifiedBlock, BETA, EXHAUSTIVE_MAX_LEN,
};
pub use repeat::{predict_repeat_detector, repeat_detector_errors};
pub use separation::{separation_sequence, SeparationPlan, SeparationStage, EPS1};
pub use target::{max_block_len, synthesize_target, BlockKind, PlanBlock, SynthesisPlan};
