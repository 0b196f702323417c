use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{check_same_dims, BinaryMask, RasterImage};
use crate::saliency::SaliencyStack;

/// Parameters of the label-boundary term. Per-map data weights travel with
/// the [`SaliencyStack`] layers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// Cost of a label change between identically colored neighbors.
    pub pairwise_strength: f64,
    /// Decay of that cost with squared RGB distance (channels in [0, 1]).
    pub color_decay: f64,
}

pub const DEFAULT_PAIRWISE_STRENGTH: f64 = 2.0;

impl EnergyModel {
    pub fn new(pairwise_strength: f64, color_decay: f64) -> Result<Self> {
        if !(pairwise_strength >= 0.0 && pairwise_strength.is_finite()) {
            return Err(Error::Config(format!(
                "pairwise strength must be non-negative, got {pairwise_strength}"
            )));
        }
        if !(color_decay > 0.0 && color_decay.is_finite()) {
            return Err(Error::Config(format!(
                "color decay must be positive, got {color_decay}"
            )));
        }
        Ok(Self {
            pairwise_strength,
            color_decay,
        })
    }

    /// Model with the color decay adapted to `img` unless `color_decay` is
    /// given.
    pub fn for_image(
        img: &RasterImage,
        pairwise_strength: f64,
        color_decay: Option<f64>,
    ) -> Result<Self> {
        Self::new(
            pairwise_strength,
            color_decay.unwrap_or_else(|| default_color_decay(img)),
        )
    }
}

pub(crate) fn color_dist2(a: [u8; 3], b: [u8; 3]) -> f64 {
    a.iter()
        .zip(&b)
        .map(|(&p, &q)| {
            let d = (p as f64 - q as f64) / 255.0;
            d * d
        })
        .sum()
}

/// `1 / (2 * mean squared color distance over 4-adjacent pairs)`, or 1 when
/// the image has no color variation between neighbors.
pub fn default_color_decay(img: &RasterImage) -> f64 {
    let (w, h) = img.dims();
    let (mut sum, mut pairs) = (0.0, 0usize);
    for y in 0..h {
        for x in 0..w {
            let p = img.pixel(x, y);
            if x + 1 < w {
                sum += color_dist2(p, img.pixel(x + 1, y));
                pairs += 1;
            }
            if y + 1 < h {
                sum += color_dist2(p, img.pixel(x, y + 1));
                pairs += 1;
            }
        }
    }
    if pairs == 0 || sum == 0.0 {
        return 1.0;
    }
    1.0 / (2.0 * sum / pairs as f64)
}

/// Binary per-pixel assignment; `true` marks the salient object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    width: usize,
    height: usize,
    labels: Vec<bool>,
}

impl Labeling {
    pub fn new(width: usize, height: usize, labels: Vec<bool>) -> Result<Self> {
        let mask = BinaryMask::new(width, height, labels)?;
        Ok(Self::from_mask(mask))
    }

    pub fn uniform(width: usize, height: usize, label: bool) -> Result<Self> {
        Self::new(width, height, vec![label; width * height])
    }

    pub fn from_mask(mask: BinaryMask) -> Self {
        let (width, height) = mask.dims();
        Self {
            width,
            height,
            labels: mask.bits().to_vec(),
        }
    }

    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask::new(self.width, self.height, self.labels.clone()).expect("valid dimensions")
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

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: bool) {
        self.labels[y * self.width + x] = label;
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn count_salient(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

/// Weighted data cost of giving pixel `(x, y)` the label `salient`.
pub fn data_cost(stack: &SaliencyStack, x: usize, y: usize, salient: bool) -> f64 {
    stack
        .layers()
        .iter()
        .map(|layer| {
            let f = layer.map.get(x, y);
            layer.weight * if salient { 1.0 - f } else { f }
        })
        .sum()
}

/// Label-boundary cost between 4-neighbors `a` and `b`.
pub fn pairwise_cost(
    img: &RasterImage,
    a: (usize, usize),
    b: (usize, usize),
    label_a: bool,
    label_b: bool,
    model: &EnergyModel,
) -> Result<f64> {
    if a.0.abs_diff(b.0) + a.1.abs_diff(b.1) != 1 {
        return Err(Error::NotNeighbors(a.0, a.1, b.0, b.1));
    }
    if label_a == label_b {
        return Ok(0.0);
    }
    let d2 = color_dist2(img.pixel(a.0, a.1), img.pixel(b.0, b.1));
    Ok(model.pairwise_strength * (-model.color_decay * d2).exp())
}

/// Full objective: data costs of every pixel plus the boundary cost of
/// every unordered 4-adjacent pair, each counted once.
pub fn total_energy(
    stack: &SaliencyStack,
    labeling: &Labeling,
    img: &RasterImage,
    model: &EnergyModel,
) -> Result<f64> {
    check_same_dims(stack.dims(), labeling.dims())?;
    check_same_dims(stack.dims(), img.dims())?;
    let (w, h) = stack.dims();
    let mut energy = 0.0;
    for y in 0..h {
        for x in 0..w {
            let a = labeling.get(x, y);
            energy += data_cost(stack, x, y, a);
            if x + 1 < w {
                energy += pairwise_cost(img, (x, y), (x + 1, y), a, labeling.get(x + 1, y), model)?;
            }
            if y + 1 < h {
                energy += pairwise_cost(img, (x, y), (x, y + 1), a, labeling.get(x, y + 1), model)?;
            }
        }
    }
    Ok(energy)
}

/// Per-pixel minimizer of the data term alone; ties go to background.
pub fn first_order_labeling(stack: &SaliencyStack) -> Labeling {
    let (w, h) = stack.dims();
    let labels = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            data_cost(stack, x, y, true) < data_cost(stack, x, y, false)
        })
        .collect();
    Labeling {
        width: w,
        height: h,
        labels,
    }
}
