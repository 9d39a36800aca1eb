//! Shared domain types and their invariants.

mod image;
mod layout;
mod spec;

pub use image::{ImageBuffer, Plane};
pub use layout::{canonical_angle, sector_index, PolarGrid, RingLayout};
pub use spec::{
    validate_spec, DetectionMode, DetectionReport, Payload, WatermarkSpec, MAX_PAYLOAD_BITS, MIN_BINS_PER_CELL,
    MIN_PAYLOAD_BITS,
};
