//! Recovering coverage structure and activity probabilities from traces.

mod bica;
mod fastica;
mod known_g;
mod nnls;
mod qlica;
mod quantize;
mod stats;

pub use bica::{
    bica, bica_components, bica_from_stats, BicaConfig, DEFAULT_EPSILON, DEFAULT_MAX_SNIFFERS,
};
pub use fastica::{fastica, FastIcaConfig, FastIcaMode, FastIcaResult};
pub use known_g::infer_p_known_g;
pub use nnls::{nnls, NnlsSolution};
pub use qlica::{estimate_p_qlica, qlica, qlica_from_stats, QlicaConfig};
pub use quantize::{maxstep, quantize, quantize_with_scaling, Quantized};
pub use stats::{ObservationStats, MAX_PATTERN_BITS};
