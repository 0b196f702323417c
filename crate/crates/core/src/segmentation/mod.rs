//! Fusion of the saliency stack into a binary mask by minimizing
//!
//! ```text
//! E(A) = sum_x sum_k w_k F_k(a_x) + sum_{x~y} S(a_x, a_y)
//! ```
//!
//! where `F_k` is `1 - f_k(x)` for a salient label and `f_k(x)` otherwise,
//! and `S` charges `gamma * exp(-beta * |I_x - I_y|^2)` for every
//! 4-adjacent pair with different labels. Minimization starts from the
//! per-pixel data-term optimum and refines it with single-pixel flips.

mod energy;
mod icm;
mod pipeline;

pub use energy::{
    data_cost, default_color_decay, first_order_labeling, pairwise_cost, total_energy, EnergyModel,
    Labeling, DEFAULT_PAIRWISE_STRENGTH,
};
pub use icm::{icm_refine, icm_refine_observed, FlipEvent, IcmReport, DEFAULT_MAX_PASSES};
pub use pipeline::{segment_pipeline, Segmentation};
