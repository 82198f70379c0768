//! Synthetic behavioral trajectories.
//!
//! Trajectories are mapped to fixed-length vectors through per-category
//! empirical CDFs (presence flag and CDF value of the first occurrence). An
//! adversarial autoencoder learns that space with its latent codes pushed
//! toward a standard Gaussian, so decoding prior draws yields new
//! trajectories.

mod aae;
mod fidelity;
mod mapper;
mod nn;
mod trajectory;

pub use aae::{
    bce_with_logit, discriminator_accuracy, discriminator_grads, generator_grads, presence_accuracy,
    reconstruction_error, reconstruction_grads, sample, train, AaeConfig, AaeModel, LossRecord, Optimizer, PriorKind,
    PriorSpec, Training,
};
pub use fidelity::{fidelity_report, ks_statistic, CategoryFidelity, FidelityReport};
pub use mapper::{decode_features, encode_features, fit_mapper, CategoryCdf, FeatureMapper, PRESENCE_THRESHOLD};
pub use nn::{sigmoid, Activation, Adam, Dense, Gradients, Mlp};
pub use trajectory::{read_trajectories, write_trajectories, Event, Trajectory, TrajectoryIoError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("category {0:?} is not in the taxonomy")]
    UnknownCategory(String),
    #[error("feature vector has {got} components, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid training config: {0}")]
    ConfigInvalid(String),
    #[error(
        "non-finite loss at epoch {} batch {} (reconstruction {}, discriminator {}, generator {})",
        .0.epoch, .0.batch, .0.reconstruction, .0.discriminator, .0.generator
    )]
    NonFiniteLoss(LossRecord),
}
