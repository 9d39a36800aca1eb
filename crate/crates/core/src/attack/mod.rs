//! Geometric attacks, occlusions, the print-scan channel, the spectrum SNR
//! metric and the benchmark harness.

mod bench;
mod chain;
mod damage;
mod metrics;
mod warp;

pub use bench::{
    calibrate_strength, passes_clean, run_benchmark, BenchOptions, BenchRow, BenchTable, ChainSummary, WorkingPoint,
};
pub use chain::{apply_attack, correct_geometry, AttackChain, AttackStep, KnownGeometry, BACKGROUND};
pub use damage::{gaussian_blur, print_scan, scratch, smear};
pub use metrics::{cell_separation, spectrum_snr};
pub(crate) use metrics::snr_from_grid;
pub use warp::{resize, rotate, scale, trapezoid, untrapezoid};
