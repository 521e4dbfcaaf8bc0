//! Learned node-ordering policy: degree features, a graph attention encoder,
//! a context embedding of the recent labeling history and an attention
//! decoder that picks the next node to label.
//!
//! Training is REINFORCE with a greedy-rollout baseline that is replaced
//! after a significant one-sided paired t-test.

pub mod decoder;
pub mod encoder;
pub mod error;
pub mod hyper;
pub mod instance;
pub mod params;
pub mod rollout;
pub mod train;
pub mod ttest;

pub use decoder::{DecoderState, PolicyEpisode, Selection};
pub use encoder::{encode, BnMode, Encoded};
pub use error::{PolicyError, Result};
pub use hyper::{DecodeMode, Hyper};
pub use instance::Instance;
pub use params::{BoundParams, ModelParameters};
pub use rollout::{forced_rollout, greedy_rollout, greedy_rollout_counted, sample_rollout, sampled_episode};
pub use train::{reinforce_batch_update, train, train_with, Adam, EpochRecord, TrainConfig, TrainOutcome};
pub use ttest::paired_t_test;
