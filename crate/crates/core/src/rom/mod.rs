//! Surrogate architectures: a fully connected baseline, an unstacked
//! DeepONet with one branch/trunk pair per QoI, and a 1-D Fourier neural
//! operator over the output time grid.

mod config;
mod model;
mod network;

pub use config::{
    study_group, DeepOnetConfig, DnnConfig, FnoConfig, Init, RomConfig, RomKind, Target, FNO_INPUT_CHANNELS,
    QOI_COUNT, QOI_LABELS,
};
pub use model::{RomModel, MODEL_FORMAT_VERSION};
pub use network::{fno_input, forward, init_params, scalar_heads, time_coordinates};
