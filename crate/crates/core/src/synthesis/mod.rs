//! Candidate program enumeration and margin-trained program selection.

mod enumerate;
mod features;
mod selector;

pub use enumerate::{
    enumerate_candidates, enumerate_with_depth, Candidate, CandidateSet, DEFAULT_BUDGET, DEFAULT_MAX_DEPTH,
};
pub use features::{featurize, Features, StatementContext};
pub use selector::{
    filter_label_consistent, hinge, margin_loss, select_program, train_selector, SelectorConfig,
    SelectorExample, SelectorModel, TrainError, DEFAULT_GAMMA,
};
