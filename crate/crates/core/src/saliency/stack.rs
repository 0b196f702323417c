use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{check_same_dims, ProbabilityMap, RasterImage};

use super::center_surround::{center_surround_map, CenterSurroundParams};
use super::content::{content_saliency, ContentParams};
use super::contrast::{multiscale_contrast, ContrastParams};
use super::refine::{
    refine_by_edges, refine_spatial_distribution, BlobSelectParams, EdgeRefineParams,
};
use super::spatial::{color_spatial_distribution, SpatialParams};

/// The seven maps, in stack order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Contrast,
    ContrastModified,
    Content,
    ContentModified,
    CenterSurround,
    Spatial,
    SpatialModified,
}

impl MapKind {
    pub const ALL: [MapKind; 7] = [
        MapKind::Contrast,
        MapKind::ContrastModified,
        MapKind::Content,
        MapKind::ContentModified,
        MapKind::CenterSurround,
        MapKind::Spatial,
        MapKind::SpatialModified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Contrast => "contrast",
            MapKind::ContrastModified => "contrast_modified",
            MapKind::Content => "content",
            MapKind::ContentModified => "content_modified",
            MapKind::CenterSurround => "center_surround",
            MapKind::Spatial => "spatial",
            MapKind::SpatialModified => "spatial_modified",
        }
    }

    pub fn index(self) -> usize {
        MapKind::ALL
            .iter()
            .position(|&k| k == self)
            .expect("listed")
    }

    /// Parses a comma-separated list such as `contrast,spatial`.
    pub fn parse_list(list: &str) -> Result<Vec<MapKind>> {
        let mut kinds: Vec<MapKind> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        kinds.sort();
        kinds.dedup();
        Ok(kinds)
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MapKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown map `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct SaliencyLayer {
    pub kind: MapKind,
    pub map: ProbabilityMap,
    pub weight: f64,
}

/// Aligned saliency maps with their fusion weights.
#[derive(Clone, Debug)]
pub struct SaliencyStack {
    width: usize,
    height: usize,
    layers: Vec<SaliencyLayer>,
}

impl SaliencyStack {
    pub fn new(layers: Vec<SaliencyLayer>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::Config("a saliency stack needs at least one map".into()))?;
        let dims = first.map.dims();
        for layer in &layers {
            check_same_dims(dims, layer.map.dims())?;
            if !(layer.weight > 0.0 && layer.weight.is_finite()) {
                return Err(Error::Config(format!(
                    "weight of `{}` must be positive, got {}",
                    layer.kind, layer.weight
                )));
            }
        }
        Ok(Self {
            width: dims.0,
            height: dims.1,
            layers,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Number of maps, K.
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layers(&self) -> &[SaliencyLayer] {
        &self.layers
    }

    pub fn get(&self, kind: MapKind) -> Option<&SaliencyLayer> {
        self.layers.iter().find(|l| l.kind == kind)
    }

    pub fn total_weight(&self) -> f64 {
        self.layers.iter().map(|l| l.weight).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StackConfig {
    pub enabled: Vec<MapKind>,
    /// One weight per map, indexed by [`MapKind::index`].
    pub weights: [f64; 7],
    pub contrast: ContrastParams,
    pub edges: EdgeRefineParams,
    pub content: ContentParams,
    pub center_surround: CenterSurroundParams,
    pub spatial: SpatialParams,
    pub blob: BlobSelectParams,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            enabled: MapKind::ALL.to_vec(),
            weights: [1.0; 7],
            contrast: ContrastParams::default(),
            edges: EdgeRefineParams::default(),
            content: ContentParams::default(),
            center_surround: CenterSurroundParams::default(),
            spatial: SpatialParams::default(),
            blob: BlobSelectParams::default(),
        }
    }
}

impl StackConfig {
    pub fn only(kinds: &[MapKind]) -> Self {
        Self {
            enabled: kinds.to_vec(),
            ..Self::default()
        }
    }

    fn wants(&self, kinds: &[MapKind]) -> bool {
        kinds.iter().any(|k| self.enabled.contains(k))
    }
}

fn named<T>(kind: MapKind, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Map {
        name: kind.name(),
        source: Box::new(e),
    })
}

type Slot = Option<Result<ProbabilityMap>>;

/// Runs a base map and its optional refinement. A base failure is reported
/// in the base slot when the base is enabled, otherwise in the refined slot.
fn base_and_refined(
    cfg: &StackConfig,
    base_kind: MapKind,
    refined_kind: MapKind,
    base: impl FnOnce() -> Result<ProbabilityMap>,
    refine: impl FnOnce(&ProbabilityMap) -> Result<ProbabilityMap>,
) -> (Slot, Slot) {
    if !cfg.wants(&[base_kind, refined_kind]) {
        return (None, None);
    }
    let want_refined = cfg.wants(&[refined_kind]);
    match named(base_kind, base()) {
        Ok(b) => {
            let refined = want_refined.then(|| named(refined_kind, refine(&b)));
            (Some(Ok(b)), refined)
        }
        Err(e) if cfg.wants(&[base_kind]) => {
            let skipped = want_refined.then(|| Err(Error::Config(format!("`{base_kind}` failed"))));
            (Some(Err(e)), skipped)
        }
        Err(e) => (None, Some(Err(e))),
    }
}

/// Computes the enabled maps. Base maps needed by an enabled refinement are
/// computed even when the base itself is disabled.
pub fn build_stack(img: &RasterImage, cfg: &StackConfig) -> Result<SaliencyStack> {
    use MapKind::*;

    let contrast_branch = || {
        base_and_refined(
            cfg,
            Contrast,
            ContrastModified,
            || multiscale_contrast(img, &cfg.contrast),
            |b| refine_by_edges(b, img, &cfg.edges),
        )
    };
    let content_branch = || {
        base_and_refined(
            cfg,
            Content,
            ContentModified,
            || content_saliency(img, &cfg.content),
            |b| refine_by_edges(b, img, &cfg.edges),
        )
    };
    let cs_branch = || -> Slot {
        cfg.wants(&[CenterSurround]).then(|| {
            named(
                CenterSurround,
                center_surround_map(img, &cfg.center_surround),
            )
        })
    };
    let spatial_branch = || {
        base_and_refined(
            cfg,
            Spatial,
            SpatialModified,
            || color_spatial_distribution(img, &cfg.spatial),
            |b| refine_spatial_distribution(b, img, &cfg.blob),
        )
    };

    let ((contrast, content), (cs, spatial)) = rayon::join(
        || rayon::join(contrast_branch, content_branch),
        || rayon::join(cs_branch, spatial_branch),
    );

    let mut slots: [Slot; 7] = [
        contrast.0, contrast.1, content.0, content.1, cs, spatial.0, spatial.1,
    ];
    let mut layers = Vec::new();
    for kind in MapKind::ALL {
        if !cfg.enabled.contains(&kind) {
            continue;
        }
        let map = slots[kind.index()]
            .take()
            .expect("enabled map was computed")?;
        layers.push(SaliencyLayer {
            kind,
            map,
            weight: cfg.weights[kind.index()],
        });
    }
    SaliencyStack::new(layers)
}
