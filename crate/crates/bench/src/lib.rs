//! Shared fixtures for the pipeline benchmarks.

use ringmark::codec::WORKING_STRENGTH;
use ringmark::{synth, ImageBuffer, Payload, RingLayout, WatermarkSpec};

/// Reference photo size.
pub const SIZE: (usize, usize) = (567, 390);

pub fn spec() -> WatermarkSpec {
    let payload: Payload = "101100111000101011010011".parse().expect("24 binary digits");
    WatermarkSpec::new(RingLayout::default(), payload, WORKING_STRENGTH, 7).expect("default layout holds 24 bits")
}

/// Cover photo and its watermarked copy at the reference size.
pub fn fixture(seed: u64) -> (ImageBuffer, ImageBuffer) {
    let cover = synth::photo(SIZE.0, SIZE.1, seed);
    let marked = ringmark::codec::embed_digital(&cover, &spec()).expect("reference cover is RGB");
    (cover, marked)
}
