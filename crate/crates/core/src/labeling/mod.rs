//! Node labeling problems and their decision process.
//!
//! A problem is defined by an extensibility test, a label rule and a cost.
//! States of the decision process are partial labelings; an action labels
//! one unlabeled node with a label that passes the extensibility test, and
//! the only reward is the negated cost at the terminal state.

mod cost;
mod mdp;
mod partial;
mod problem;
mod rollout;

pub use cost::{verify_and_cost, Cost, LabelingRecord};
pub use mdp::MdpState;
pub use partial::PartialLabeling;
pub use problem::{LabelingProblem, Problem};
pub use rollout::{rollout_with_ordering, Episode, Step, Trajectory};

/// Node label. Colours are `1..`, binary problems use `0` and `1`.
pub type Label = usize;
