//! Pattern synthesis, digital embedding, correlation detection, blind
//! decoding and threshold calibration.

mod blind;
mod config;
mod detect;
mod embed;
mod pattern;

pub use blind::{decode_payload, decode_plane, detect_blind, fill_occluded, BlindDecode};
pub use config::{
    CellStatistic, DetectorConfig, OcclusionFill, RotationSearch, ScaleSearch, DEFAULT_MIN_SEPARATION, DEFAULT_THRESHOLD,
};
pub use detect::{
    calibrate_threshold, calibrate_threshold_at, detect_nonblind, extract_sequence, null_similarities, similarity,
    similarity_values, upper_quantile, WatermarkSequence, CALIBRATION_SIZE,
};
pub use embed::{embed_digital, embed_plane, WORKING_STRENGTH};
pub use pattern::synthesize_pattern;
