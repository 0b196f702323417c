use crate::config::RunConfig;
use crate::error::Result;
use crate::imgcore::{BinaryMask, RasterImage};
use crate::saliency::{build_stack, SaliencyStack};

use super::energy::{first_order_labeling, EnergyModel};
use super::icm::{icm_refine, IcmReport};

/// Everything the pipeline computed for one image.
#[derive(Clone, Debug)]
pub struct Segmentation {
    pub mask: BinaryMask,
    pub report: IcmReport,
    pub model: EnergyModel,
    pub stack: SaliencyStack,
}

/// Saliency stack, first-order labeling, then flip refinement.
pub fn segment_pipeline(img: &RasterImage, config: &RunConfig) -> Result<Segmentation> {
    config.validate()?;
    let stack = build_stack(img, &config.stack_config())?;
    let model = EnergyModel::for_image(img, config.gamma, config.beta)?;
    let init = first_order_labeling(&stack);
    let (labeling, report) = icm_refine(&stack, &init, img, &model, config.max_passes)?;
    Ok(Segmentation {
        mask: labeling.to_mask(),
        report,
        model,
        stack,
    })
}
