//! Universal denoising of finite-alphabet sequences corrupted by a known
//! discrete memoryless channel.
//!
//! The crate provides the k-th order sliding-window DUDE, its shifting
//! generalisation S-DUDE (which competes with schedules of single-symbol
//! denoisers that may switch up to `m` times inside every context), the
//! clean-data genie targets both are measured against, and the simulators
//! and harnesses used to evaluate them.
//!
//! Symbols are plain indices `0..size`. Positions handed across the public
//! API (contexts, schedules, loss ranges) are 1-based; slices are 0-based.

pub mod context;
pub mod dude;
pub mod error;
pub mod estimated_loss;
pub mod eval;
pub mod exec;
pub mod genie;
pub mod hmm;
pub mod io;
pub mod model;
pub mod sdude;
pub mod sources;

pub use context::{ContextId, ContextPartition, CountVector};
pub use dude::{dude_denoise, dude_denoise_with, BoundaryRule, DenoiseOptions};
pub use error::{Error, Result};
pub use estimated_loss::{b_h_rule, bayes_envelope, bayes_response, EstimatedLossTable};
pub use exec::Execution;
pub use genie::{brute_force_min, genie_min_loss, LossMode};
pub use model::{Alphabets, ChannelModel, LossMatrix, SingleSymbolDenoiser, SymbolSequence};
pub use sdude::{
    backward_pass, forward_pass, sdude_denoise, sdude_denoise_with, DpState, SdudeOutput, SwitchingSchedule,
};
