use proptest::prelude::*;
use rustfft::num_complex::Complex64;

use ringmark::attack::{run_benchmark, AttackChain, BenchOptions};
use ringmark::codec::{decode_payload, detect_nonblind, embed_digital, DetectorConfig, WORKING_STRENGTH};
use ringmark::spectral::{forward_dft_plane, Spectrum};
use ringmark::{synth, Payload, Plane, RingLayout, WatermarkSpec};

fn spec(bits: Vec<bool>, seed: u64) -> WatermarkSpec {
    WatermarkSpec::new(RingLayout::default(), Payload::new(bits).unwrap(), WORKING_STRENGTH, seed).unwrap()
}

/// Centered index of signed frequency `k` on an axis of length `n`.
fn centered(k: i64, n: usize) -> usize {
    (k.rem_euclid(n as i64) as usize + n / 2) % n
}

fn at(s: &Spectrum, kx: i64, ky: i64) -> Complex64 {
    s.get(centered(kx, s.width()), centered(ky, s.height()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // A quarter turn q(x, y) = p(y, n-1-x) maps |Q(u, v)| to |P(v, -u)|.
    #[test]
    fn quarter_turn_rotates_the_magnitude(n in 2usize..12, seed in any::<u64>()) {
        let p = synth::photo_plane(n, n, seed);
        let q = Plane::from_fn(n, n, |x, y| p.get(y, n - 1 - x));
        let (sp, sq) = (forward_dft_plane(&p), forward_dft_plane(&q));
        let half = (n / 2) as i64;
        for v in -half..(n as i64 - half) {
            for u in -half..(n as i64 - half) {
                prop_assert!((at(&sq, u, v).norm() - at(&sp, v, -u).norm()).abs() < 1e-9);
            }
        }
    }

    // Circular shifts change only the phase.
    #[test]
    fn circular_shift_keeps_the_magnitude(w in 2usize..12, h in 2usize..12, dx in 0usize..12, dy in 0usize..12, seed in any::<u64>()) {
        let p = synth::photo_plane(w, h, seed);
        let q = Plane::from_fn(w, h, |x, y| p.get((x + dx) % w, (y + dy) % h));
        let (sp, sq) = (forward_dft_plane(&p), forward_dft_plane(&q));
        for (a, b) in sp.coeffs().iter().zip(sq.coeffs()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn random_payloads_round_trip(bits in prop::collection::vec(any::<bool>(), 16..=24), seed in 0u64..1000) {
        prop_assume!(bits.iter().any(|&b| b) && bits.iter().any(|&b| !b));
        let spec = spec(bits, seed);
        let cover = synth::photo(567, 390, seed + 77);
        let wm = embed_digital(&cover, &spec).unwrap();
        let cfg = DetectorConfig { payload_bits: spec.payload().len(), ..Default::default() };
        let d = decode_payload(&wm, spec.layout(), &cfg).unwrap();
        prop_assert_eq!(&d.payload, spec.payload());
        prop_assert!(detect_nonblind(&wm, &cover, &spec, &cfg).unwrap().present);
    }
}

#[test]
fn four_attack_suite_is_detected_after_correction() {
    let spec = spec("101100111000101011010011".chars().map(|c| c == '1').collect(), 7);
    let corpus: Vec<_> = (0..3).map(|i| (format!("p{i}"), synth::photo(567, 390, 600 + i))).collect();
    let chains: Vec<AttackChain> = ["rotate:10", "trapezoid:0.1", "scratch:0.1,2", "smear:0.1,20"]
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    let table = run_benchmark(&corpus, &spec, &chains, &DetectorConfig::default(), &BenchOptions::default()).unwrap();
    for s in &table.summary {
        assert_eq!(s.detection_rate, 1.0, "{}", s.chain);
        assert_eq!(s.mean_ber, Some(0.0), "{}", s.chain);
    }
}
