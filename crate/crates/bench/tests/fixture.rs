use ringmark::codec::{decode_payload, DetectorConfig};
use ringmark_bench::{fixture, spec, SIZE};

#[test]
fn fixture_is_marked_at_reference_size() {
    let (cover, marked) = fixture(1);
    assert_eq!((cover.width(), cover.height()), SIZE);
    let d = decode_payload(&marked, spec().layout(), &DetectorConfig::default()).unwrap();
    assert_eq!(&d.payload, spec().payload());
}
