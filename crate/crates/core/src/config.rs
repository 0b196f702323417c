//! Flat run configuration shared by the library pipeline and the CLI.
//!
//! Every key is optional; missing keys take the documented default and
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::saliency::{
    BlobSelectParams, CenterSurroundParams, ContentParams, ContrastParams, EdgeRefineParams,
    MapKind, SpatialParams, StackConfig,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Maps fused into the segmentation, by name.
    pub maps: Vec<MapKind>,
    /// Fusion weight per map, in stack order (contrast, contrast_modified,
    /// content, content_modified, center_surround, spatial,
    /// spatial_modified). Weights of disabled maps are ignored.
    pub weights: [f64; 7],

    pub contrast_levels: usize,
    pub edge_offset: f64,
    pub edge_window_fraction: f64,

    pub content_patch_size: usize,
    pub content_k_nearest: usize,
    pub content_position_weight: f64,
    pub content_work_size: usize,

    pub cs_rect_fractions: Vec<f64>,
    pub cs_aspect_ratios: Vec<f64>,
    pub cs_downsample: usize,
    pub cs_bins_per_channel: usize,

    pub gmm_components: usize,
    pub gmm_max_iterations: usize,
    pub gmm_kmeans_iterations: usize,
    pub gmm_variance_floor: f64,

    pub hull_max_points: usize,
    pub hull_min_volume: f64,

    /// Pairwise strength of the label-boundary term.
    pub gamma: f64,
    /// Color decay of the label-boundary term; computed per image when
    /// absent.
    pub beta: Option<f64>,
    pub max_passes: usize,

    pub seed: u64,
    pub output_dir: PathBuf,
    pub feather: usize,
    pub wiggle_frames: usize,
    pub wiggle_shift: usize,
    /// Centiseconds per frame.
    pub wiggle_delay: u16,
}

impl Default for RunConfig {
    fn default() -> Self {
        let contrast = ContrastParams::default();
        let edges = EdgeRefineParams::default();
        let content = ContentParams::default();
        let cs = CenterSurroundParams::default();
        let spatial = SpatialParams::default();
        let blob = BlobSelectParams::default();
        Self {
            maps: MapKind::ALL.to_vec(),
            weights: [1.0; 7],
            contrast_levels: contrast.levels,
            edge_offset: edges.offset,
            edge_window_fraction: edges.window_fraction,
            content_patch_size: content.patch_size,
            content_k_nearest: content.k_nearest,
            content_position_weight: content.position_weight,
            content_work_size: content.work_size,
            cs_rect_fractions: cs.rect_fractions,
            cs_aspect_ratios: cs.aspect_ratios,
            cs_downsample: cs.downsample,
            cs_bins_per_channel: cs.bins_per_channel,
            gmm_components: spatial.components,
            gmm_max_iterations: spatial.max_iterations,
            gmm_kmeans_iterations: spatial.kmeans_iterations,
            gmm_variance_floor: spatial.variance_floor,
            hull_max_points: blob.max_hull_points,
            hull_min_volume: blob.min_volume,
            gamma: 2.0,
            beta: None,
            max_passes: 100,
            seed: spatial.seed,
            output_dir: PathBuf::from("out"),
            feather: 0,
            wiggle_frames: 2,
            wiggle_shift: 4,
            wiggle_delay: 10,
        }
    }
}

fn require(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(message()))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        require(!self.maps.is_empty(), || {
            "at least one map must be enabled".into()
        })?;
        for kind in &self.maps {
            let w = self.weights[kind.index()];
            require(w > 0.0 && w.is_finite(), || {
                format!("weight of `{kind}` must be positive, got {w}")
            })?;
        }
        require(self.contrast_levels >= 1, || {
            "contrast_levels must be at least 1".into()
        })?;
        require(self.edge_offset.is_finite(), || {
            "edge_offset must be finite".into()
        })?;
        require(
            self.edge_window_fraction > 0.0 && self.edge_window_fraction <= 1.0,
            || {
                format!(
                    "edge_window_fraction {} outside (0, 1]",
                    self.edge_window_fraction
                )
            },
        )?;
        self.content_params().validate()?;
        self.center_surround_params().validate()?;
        require(self.gmm_components >= 1, || {
            "gmm_components must be at least 1".into()
        })?;
        require(self.gmm_max_iterations >= 1, || {
            "gmm_max_iterations must be at least 1".into()
        })?;
        require(
            self.gmm_variance_floor > 0.0 && self.gmm_variance_floor.is_finite(),
            || {
                format!(
                    "gmm_variance_floor must be positive, got {}",
                    self.gmm_variance_floor
                )
            },
        )?;
        require(self.hull_max_points >= 4, || {
            "hull_max_points must be at least 4".into()
        })?;
        require(
            self.hull_min_volume > 0.0 && self.hull_min_volume.is_finite(),
            || {
                format!(
                    "hull_min_volume must be positive, got {}",
                    self.hull_min_volume
                )
            },
        )?;
        require(self.gamma >= 0.0 && self.gamma.is_finite(), || {
            format!("gamma must be non-negative, got {}", self.gamma)
        })?;
        if let Some(b) = self.beta {
            require(b > 0.0 && b.is_finite(), || {
                format!("beta must be positive, got {b}")
            })?;
        }
        require(self.max_passes >= 1, || {
            "max_passes must be at least 1".into()
        })?;
        require(self.wiggle_frames >= 2, || {
            "wiggle_frames must be at least 2".into()
        })?;
        Ok(())
    }

    fn content_params(&self) -> ContentParams {
        ContentParams {
            patch_size: self.content_patch_size,
            k_nearest: self.content_k_nearest,
            position_weight: self.content_position_weight,
            work_size: self.content_work_size,
        }
    }

    fn center_surround_params(&self) -> CenterSurroundParams {
        CenterSurroundParams {
            rect_fractions: self.cs_rect_fractions.clone(),
            aspect_ratios: self.cs_aspect_ratios.clone(),
            downsample: self.cs_downsample,
            bins_per_channel: self.cs_bins_per_channel,
        }
    }

    pub fn stack_config(&self) -> StackConfig {
        let mut enabled = self.maps.clone();
        enabled.sort();
        enabled.dedup();
        StackConfig {
            enabled,
            weights: self.weights,
            contrast: ContrastParams {
                levels: self.contrast_levels,
            },
            edges: EdgeRefineParams {
                offset: self.edge_offset,
                window_fraction: self.edge_window_fraction,
            },
            content: self.content_params(),
            center_surround: self.center_surround_params(),
            spatial: SpatialParams {
                components: self.gmm_components,
                max_iterations: self.gmm_max_iterations,
                kmeans_iterations: self.gmm_kmeans_iterations,
                variance_floor: self.gmm_variance_floor,
                seed: self.seed,
            },
            blob: BlobSelectParams {
                max_hull_points: self.hull_max_points,
                min_volume: self.hull_min_volume,
            },
        }
    }
}
