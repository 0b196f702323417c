//! Bounding-box Jaccard scoring of segmentations against ground truth, and
//! the dataset runner that aggregates it.

mod ground_truth;
mod metrics;
mod report;

pub use ground_truth::{
    ingest_ground_truth, parse_ground_truth_csv, parse_voc_annotation, write_ground_truth_csv,
    GroundTruthRecord, VocObject,
};
pub use metrics::{jaccard_index, mask_bounding_box};
pub use report::{
    evaluate_dataset, evaluate_record, histogram_bin, EvalReport, ImageFailure, ImageOutcome,
    ImageScore, HISTOGRAM_BINS,
};
