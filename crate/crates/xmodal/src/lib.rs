//! Cross-modal grayscale/depth representation learning and navigation workbench.
//!
//! The crate is organized around five subsystems:
//!
//! - [`cmwae`]: a dual-branch convolutional autoencoder that fuses grayscale
//!   and depth images into one latent vector, trained with a reconstruction
//!   loss on clean depth plus an MMD penalty that pulls the latent
//!   distribution toward a standard normal prior.
//! - [`corruption`]: seeded, pure generators for the square-patch depth
//!   dropout protocols used during dataset training, policy training, and
//!   evaluation.
//! - [`simkit`]: a batch-steppable room world with simplified flight dynamics
//!   and a raycast depth/grayscale camera.
//! - [`policy`]: observation assembly, reward shaping, a recurrent
//!   actor-critic, PPO training across environment batches, and the
//!   obstacle-count curriculum.
//! - [`evalbench`]: reconstruction metrics (MSE/SSIM), corruption sweeps,
//!   policy evaluation grids, and report emission.
//!
//! [`dataset`], [`config`], [`checkpoint`], and [`rng`] provide the
//! supporting plumbing: paired image datasets on disk, run configuration,
//! self-describing parameter containers, and deterministic seed derivation.
//!
//! Batch-level inner loops go through [`parallel`], which uses rayon when the
//! `parallel` feature (default) is enabled and falls back to sequential
//! iteration otherwise. All parallel reductions are ordered so results are
//! bit-identical across thread schedules and both feature configurations.

pub mod checkpoint;
pub mod cmwae;
pub mod config;
pub mod corruption;
pub mod dataset;
pub mod error;
pub mod evalbench;
pub mod nn;
pub mod parallel;
pub mod policy;
pub mod rng;
pub mod simkit;

pub use error::{Error, Result};
