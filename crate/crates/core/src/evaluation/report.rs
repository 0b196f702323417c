use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::imgcore::io::load_image;
use crate::imgcore::BoundingBox;
use crate::segmentation::segment_pipeline;

use super::ground_truth::GroundTruthRecord;
use super::metrics::{jaccard_index, mask_bounding_box};

pub const HISTOGRAM_BINS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageScore {
    pub path: PathBuf,
    pub jaccard: f64,
    pub truth: BoundingBox,
    /// `None` when the segmentation came out empty (scored 0).
    pub predicted: Option<BoundingBox>,
    pub salient_pixels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ImageOutcome {
    Scored(ImageScore),
    Failed(ImageFailure),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub images: Vec<ImageScore>,
    /// Mean over scored images; `None` when every image failed.
    pub mean_jaccard: Option<f64>,
    /// Counts over `[0, 0.1), [0.1, 0.2), ..., [0.9, 1.0]`.
    pub histogram: [usize; HISTOGRAM_BINS],
    pub failed: usize,
    pub failures: Vec<ImageFailure>,
    pub config: RunConfig,
}

/// Histogram bin of a score in `[0, 1]`; 1.0 lands in the last bin.
pub fn histogram_bin(jaccard: f64) -> usize {
    ((jaccard * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1)
}

impl EvalReport {
    /// Aggregates outcomes in the order given.
    pub fn from_outcomes(outcomes: Vec<ImageOutcome>, config: RunConfig) -> Self {
        let mut images = Vec::new();
        let mut failures = Vec::new();
        for outcome in outcomes {
            match outcome {
                ImageOutcome::Scored(s) => images.push(s),
                ImageOutcome::Failed(f) => failures.push(f),
            }
        }
        let mut histogram = [0; HISTOGRAM_BINS];
        for s in &images {
            histogram[histogram_bin(s.jaccard)] += 1;
        }
        let mean_jaccard = (!images.is_empty())
            .then(|| images.iter().map(|s| s.jaccard).sum::<f64>() / images.len() as f64);
        Self {
            images,
            mean_jaccard,
            histogram,
            failed: failures.len(),
            failures,
            config,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `path,jaccard` per scored image.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("path,jaccard\n");
        for s in &self.images {
            let path = s.path.to_string_lossy();
            let path = if path.contains([',', '"', '\n']) {
                format!("\"{}\"", path.replace('"', "\"\""))
            } else {
                path.into_owned()
            };
            writeln!(out, "{path},{}", s.jaccard).expect("writing to a String");
        }
        out
    }

    /// Plain-text bar chart of the histogram.
    pub fn histogram_chart(&self) -> String {
        const WIDTH: usize = 40;
        let peak = self.histogram.iter().copied().max().unwrap_or(0).max(1);
        let mut out = String::new();
        for (i, &count) in self.histogram.iter().enumerate() {
            let close = if i + 1 == HISTOGRAM_BINS { ']' } else { ')' };
            let bar = "#".repeat((count * WIDTH).div_ceil(peak));
            writeln!(
                out,
                "[{:.1}, {:.1}{close} |{bar:<WIDTH$} {count}",
                i as f64 / 10.0,
                (i + 1) as f64 / 10.0
            )
            .expect("writing to a String");
        }
        match self.mean_jaccard {
            Some(m) => writeln!(out, "mean jaccard {m:.4} over {} images", self.images.len()),
            None => writeln!(out, "no image could be scored"),
        }
        .expect("writing to a String");
        if self.failed > 0 {
            writeln!(out, "{} images failed", self.failed).expect("writing to a String");
        }
        out
    }
}

/// Segments and scores one record.
pub fn evaluate_record(record: &GroundTruthRecord, config: &RunConfig) -> Result<ImageScore> {
    let img = load_image(&record.image_path)?;
    if !record.bbox.fits_within(img.width(), img.height()) {
        return Err(Error::InvalidRegion(format!(
            "ground-truth box {} outside {}x{} image",
            record.bbox,
            img.width(),
            img.height()
        )));
    }
    let seg = segment_pipeline(&img, config)?;
    let predicted = match mask_bounding_box(&seg.mask) {
        Ok(b) => Some(b),
        Err(Error::EmptyMask) => None,
        Err(e) => return Err(e),
    };
    let jaccard = predicted.map_or(0.0, |p| jaccard_index(&p, &record.bbox));
    Ok(ImageScore {
        path: record.image_path.clone(),
        jaccard,
        truth: record.bbox,
        predicted,
        salient_pixels: seg.mask.count(),
    })
}

/// Runs the pipeline on every record and aggregates the scores. Per-image
/// failures are reported, not propagated. `jobs` bounds the worker count;
/// `None` uses the global thread pool.
pub fn evaluate_dataset(
    records: &[GroundTruthRecord],
    config: &RunConfig,
    jobs: Option<usize>,
) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    config.validate()?;
    let run = || -> Vec<ImageOutcome> {
        records
            .par_iter()
            .map(|r| match evaluate_record(r, config) {
                Ok(score) => {
                    log::info!("{}: jaccard {:.4}", r.image_path.display(), score.jaccard);
                    ImageOutcome::Scored(score)
                }
                Err(e) => {
                    log::warn!("{}: {e}", r.image_path.display());
                    ImageOutcome::Failed(ImageFailure {
                        path: r.image_path.clone(),
                        error: e.to_string(),
                    })
                }
            })
            .collect()
    };
    let outcomes = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(EvalReport::from_outcomes(outcomes, config.clone()))
}
