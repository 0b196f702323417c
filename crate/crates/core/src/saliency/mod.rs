//! The seven saliency maps and the stack that carries them into fusion.
//!
//! | map                 | source                                         |
//! |---------------------|------------------------------------------------|
//! | `contrast`          | multi-scale 3x3 luminance contrast             |
//! | `contrast_modified` | edge closure of `contrast`                     |
//! | `content`           | patch distinctness                             |
//! | `content_modified`  | edge closure of `content`                      |
//! | `center_surround`   | chi-squared color histogram rectangle search   |
//! | `spatial`           | color-mixture spatial compactness              |
//! | `spatial_modified`  | best single blob of `spatial`                  |

pub mod center_surround;
pub mod content;
pub mod contrast;
pub mod hull;
pub mod refine;
pub mod spatial;
mod stack;

pub use center_surround::{center_surround_map, CenterSurroundParams};
pub use content::{content_saliency, ContentParams};
pub use contrast::{multiscale_contrast, ContrastParams};
pub use refine::{
    refine_by_edges, refine_spatial_distribution, BlobSelectParams, EdgeRefineParams,
};
pub use spatial::{color_spatial_distribution, fit_color_gmm, GmmColorModel, SpatialParams};
pub use stack::{build_stack, MapKind, SaliencyLayer, SaliencyStack, StackConfig};
