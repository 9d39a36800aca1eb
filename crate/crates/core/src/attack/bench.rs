use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{apply_attack, correct_geometry, AttackChain, KnownGeometry};
use super::metrics::spectrum_snr;
use crate::codec::{decode_payload, detect_nonblind, embed_digital, extract_sequence, similarity, DetectorConfig, WatermarkSequence};
use crate::error::{Error, Result};
use crate::model::{ImageBuffer, WatermarkSpec};

/// One (image, chain) outcome. Failures are recorded in `error`, never raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub image: String,
    pub chain: String,
    /// Blind decoder found a payload.
    pub present: bool,
    /// Bit error rate of the blind decode against the embedded payload.
    pub ber: Option<f64>,
    /// Correlation similarity against the unattacked cover, when sizes match.
    pub similarity: Option<f64>,
    pub snr_db: Option<f64>,
    pub confidence: Option<f64>,
    pub rotation_deg: Option<f64>,
    pub error: Option<String>,
}

/// Aggregates over all images for one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub chain: String,
    pub rows: usize,
    pub detection_rate: f64,
    pub mean_ber: Option<f64>,
    pub mean_similarity: Option<f64>,
    pub mean_snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<ChainSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    /// Undo each chain's known warps before decoding.
    pub correct_geometry: bool,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { correct_geometry: true, seed: 0 }
    }
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl BenchTable {
    fn summarize(rows: &[BenchRow], chains: &[String]) -> Vec<ChainSummary> {
        chains
            .iter()
            .map(|c| {
                let rs: Vec<&BenchRow> = rows.iter().filter(|r| &r.chain == c).collect();
                ChainSummary {
                    chain: c.clone(),
                    rows: rs.len(),
                    detection_rate: if rs.is_empty() {
                        0.0
                    } else {
                        rs.iter().filter(|r| r.present).count() as f64 / rs.len() as f64
                    },
                    mean_ber: mean(rs.iter().filter_map(|r| r.ber)),
                    mean_similarity: mean(rs.iter().filter_map(|r| r.similarity)),
                    mean_snr_db: mean(rs.iter().filter_map(|r| r.snr_db)),
                }
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Embeds `spec` into every cover, runs the clean condition plus each
/// chain, and decodes blind. Rows are ordered by (image, chain); results
/// depend only on the inputs and `opts.seed`.
pub fn run_benchmark(
    corpus: &[(String, ImageBuffer)],
    spec: &WatermarkSpec,
    chains: &[AttackChain],
    cfg: &DetectorConfig,
    opts: &BenchOptions,
) -> Result<BenchTable> {
    cfg.validate()?;
    let mut all = vec![AttackChain::default()];
    all.extend(chains.iter().filter(|c| !c.is_empty()).cloned());
    let jobs: Vec<(usize, usize)> = (0..corpus.len()).flat_map(|i| (0..all.len()).map(move |j| (i, j))).collect();
    let rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (name, cover) = &corpus[i];
            let seed = opts.seed ^ ((i as u64) << 32) ^ j as u64;
            bench_case(name, cover, spec, &all[j], cfg, opts.correct_geometry, seed)
        })
        .collect();
    let names: Vec<String> = all.iter().map(|c| c.to_string()).collect();
    let summary = BenchTable::summarize(&rows, &names);
    Ok(BenchTable { rows, summary })
}

fn bench_case(
    name: &str,
    cover: &ImageBuffer,
    spec: &WatermarkSpec,
    chain: &AttackChain,
    cfg: &DetectorConfig,
    correct: bool,
    seed: u64,
) -> BenchRow {
    let mut row = BenchRow {
        image: name.to_string(),
        chain: chain.to_string(),
        present: false,
        ber: None,
        similarity: None,
        snr_db: None,
        confidence: None,
        rotation_deg: None,
        error: None,
    };
    let mut run = || -> Result<()> {
        let wm = embed_digital(cover, spec)?;
        let mut photo = apply_attack(&wm, chain, seed)?;
        if correct {
            photo = correct_geometry(&photo, &KnownGeometry::from_chain(chain, cover.width(), cover.height()))?;
        }
        match spectrum_snr(&photo, spec) {
            Ok(s) => row.snr_db = Some(s),
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
        if photo.width() == cover.width() && photo.height() == cover.height() {
            let eta = WatermarkSequence::expected(spec);
            row.similarity = Some(similarity(&eta, &extract_sequence(&photo, cover, spec.layout())?).unwrap_or(0.0));
        }
        match decode_payload(&photo, spec.layout(), cfg) {
            Ok(d) => {
                row.present = true;
                row.ber = Some(spec.payload().bit_error_rate(&d.payload));
                row.confidence = Some(d.confidence);
                row.rotation_deg = Some(d.estimated_rotation_deg);
            }
            Err(Error::Decode { separation, .. }) => row.confidence = Some(separation),
            Err(e) => return Err(e),
        }
        Ok(())
    };
    if let Err(e) = run() {
        row.error = Some(format!("{}: {e}", e.kind()));
    }
    row
}

/// Smallest passing strength and the working point derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    pub minimum: f64,
    /// Twice the minimum.
    pub working_point: f64,
}

/// Whether a clean embedding at `spec` decodes blind with BER 0 and is
/// detected non-blind at `cfg.threshold`.
pub fn passes_clean(cover: &ImageBuffer, spec: &WatermarkSpec, cfg: &DetectorConfig) -> Result<bool> {
    let wm = embed_digital(cover, spec)?;
    let blind = match decode_payload(&wm, spec.layout(), cfg) {
        Ok(d) => d.payload.hamming(spec.payload()) == 0,
        Err(Error::Decode { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(blind && detect_nonblind(&wm, cover, spec, cfg)?.present)
}

/// Scans `candidates` in ascending order for the smallest strength that
/// passes the clean condition on every cover, and doubles it.
pub fn calibrate_strength(
    corpus: &[ImageBuffer],
    spec: &WatermarkSpec,
    cfg: &DetectorConfig,
    candidates: &[f64],
) -> Result<WorkingPoint> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    for a in sorted {
        let s = spec.with_strength(a)?;
        let ok = corpus
            .par_iter()
            .map(|c| passes_clean(c, &s, cfg))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .all(|b| b);
        if ok {
            return Ok(WorkingPoint { minimum: a, working_point: 2.0 * a });
        }
    }
    Err(Error::Degenerate("no candidate strength passes the clean condition".into()))
}
