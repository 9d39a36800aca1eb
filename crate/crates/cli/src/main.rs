//! `ringmark` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error (bad arguments, missing inputs),
//! 2 processing error. Nothing is written when a usage error is found.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ringmark::attack::{self, AttackChain, BenchOptions};
use ringmark::capture::{self, CaptureParams};
use ringmark::codec::{self, DetectorConfig, WORKING_STRENGTH};
use ringmark::io::{read_image, read_json, write_image, write_json};
use ringmark::mask::{self, CannyParams, SubjectMask};
use ringmark::{synth, ImageBuffer, Payload, RingLayout, WatermarkSpec};

#[derive(Parser, Debug)]
#[command(name = "ringmark", version, about = "Circularly symmetric DFT-magnitude watermarking")]
struct Cli {
    /// Seed for every random draw of the command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON run configuration (spec, capture, detector, canny, seed).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Render the projector pattern for a spec.
    GenPattern {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed the payload into the blue channel of a cover.
    Embed {
        #[arg(long)]
        cover: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Photograph a scene under the pattern-modulated illumination.
    Capture {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        gain: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subject mask from the Canny contour.
    Mask {
        #[arg(long)]
        photo: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flatten everything outside the mask.
    ClearBg {
        #[arg(long)]
        photo: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        /// Fill color as `r,g,b` in [0, 1].
        #[arg(long, default_value = "1,1,1", value_parser = parse_color)]
        color: [f64; 3],
        #[arg(long)]
        out: PathBuf,
    },
    /// Detection report; non-blind when `--original` is given.
    Detect {
        #[arg(long)]
        photo: PathBuf,
        #[arg(long)]
        original: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold for a target false-alarm rate.
    Calibrate {
        #[arg(long, default_value_t = 1e-3)]
        far: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Layout JSON; the default layout otherwise.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Also search the working-point strength and capture gain.
        #[arg(long)]
        working_point: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a distortion chain such as `rotate:10;printscan:1.0,0.01,1.1`.
    Attack {
        #[arg(long)]
        photo: PathBuf,
        #[arg(long)]
        chain: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed, attack and decode a corpus; writes CSV and a JSON sibling.
    Bench {
        /// Image directory or `synthetic:N`.
        #[arg(long)]
        corpus: String,
        /// Chain to run; repeatable. The clean condition is always included.
        #[arg(long = "chain")]
        chains: Vec<String>,
        #[command(flatten)]
        spec: SpecArgs,
        /// Skip undoing known warps before decoding.
        #[arg(long)]
        no_correct: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    /// WatermarkSpec JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Payload bits, used with the default layout when no spec file is given.
    #[arg(long)]
    payload: Option<String>,
    #[arg(long)]
    strength: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    spec: Option<WatermarkSpec>,
    capture: CaptureParams,
    detector: DetectorConfig,
    canny: CannyParams,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct Calibration {
    target_far: f64,
    trials: usize,
    seed: u64,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    strength: Option<attack::WorkingPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gain: Option<attack::WorkingPoint>,
}

enum Failure {
    Usage(String),
    Run(ringmark::Error),
}

impl From<ringmark::Error> for Failure {
    fn from(e: ringmark::Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn parse_color(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    if v.len() != 3 || v.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(format!("expected r,g,b in [0, 1], got {s:?}"));
    }
    Ok([v[0], v[1], v[2]])
}

fn require(paths: &[&Path]) -> Outcome {
    match paths.iter().find(|p| !p.exists()) {
        Some(p) => Err(Failure::Usage(format!("input {} does not exist", p.display()))),
        None => Ok(()),
    }
}

struct Ctx {
    cfg: RunConfig,
    seed: u64,
}

impl Ctx {
    fn load(cli: &Cli) -> std::result::Result<Self, Failure> {
        let cfg = match &cli.config {
            Some(p) => {
                require(&[p])?;
                read_json::<RunConfig>(p).map_err(|e| Failure::Usage(format!("config {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        let seed = cli.seed.or(cfg.seed).unwrap_or(0);
        Ok(Self { cfg, seed })
    }

    /// Spec from `--spec`, else `--payload` with the default layout, else
    /// the config file.
    fn spec(&self, a: &SpecArgs) -> std::result::Result<WatermarkSpec, Failure> {
        let mut spec = if let Some(p) = &a.spec {
            read_json::<WatermarkSpec>(p)?
        } else if let Some(bits) = &a.payload {
            let payload: Payload = bits.parse().map_err(|e| Failure::Usage(format!("--payload: {e}")))?;
            WatermarkSpec::new(RingLayout::default(), payload, WORKING_STRENGTH, self.seed)?
        } else if let Some(s) = &self.cfg.spec {
            s.clone()
        } else {
            return Err(Failure::Usage("a watermark spec is needed: pass --spec, --payload or a config with `spec`".into()));
        };
        if let Some(a) = a.strength {
            spec = spec.with_strength(a)?;
        }
        Ok(spec)
    }

    fn layout(&self, a: &SpecArgs) -> std::result::Result<RingLayout, Failure> {
        if a.spec.is_some() || a.payload.is_some() || self.cfg.spec.is_some() {
            return Ok(*self.spec(a)?.layout());
        }
        Ok(RingLayout::default())
    }
}

fn spec_inputs(a: &SpecArgs) -> Vec<&Path> {
    a.spec.iter().map(PathBuf::as_path).collect()
}

/// Covers from a directory (sorted by file name) or `synthetic:N`.
fn load_corpus(spec: &str, seed: u64) -> std::result::Result<Vec<(String, ImageBuffer)>, Failure> {
    if let Some(n) = spec.strip_prefix("synthetic:") {
        let n: usize = n.parse().map_err(|_| Failure::Usage(format!("bad corpus size in {spec:?}")))?;
        return Ok((0..n).map(|i| (format!("synthetic-{i}"), synth::photo(567, 390, seed.wrapping_add(i as u64)))).collect());
    }
    let dir = Path::new(spec);
    if !dir.is_dir() {
        return Err(Failure::Usage(format!("corpus {spec} is not a directory")));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(ringmark::Error::from)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let ext = p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
            matches!(ext.as_deref(), Some("png" | "ppm" | "pgm"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Usage(format!("corpus {spec} holds no png/ppm/pgm images")));
    }
    files
        .into_iter()
        .map(|p| {
            let img = read_image(&p)?;
            let img = if img.channels() == 1 {
                let g = img.plane(0);
                ImageBuffer::from_planes(&[&g, &g, &g])?
            } else {
                img
            };
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, img))
        })
        .collect()
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx::load(&cli)?;
    match cli.cmd {
        Cmd::GenPattern { spec, width, height, out } => {
            require(&spec_inputs(&spec))?;
            let s = ctx.spec(&spec)?;
            write_image(&out, &codec::synthesize_pattern(&s, width, height)?)?;
        }
        Cmd::Embed { cover, spec, out } => {
            require(&[&cover])?;
            require(&spec_inputs(&spec))?;
            let s = ctx.spec(&spec)?;
            write_image(&out, &codec::embed_digital(&read_image(&cover)?, &s)?)?;
        }
        Cmd::Capture { scene, pattern, gain, out } => {
            require(&[&scene, &pattern])?;
            let mut p = ctx.cfg.capture;
            if let Some(g) = gain {
                p.pattern_gain = g;
            }
            let photo = capture::simulate_capture(&read_image(&scene)?, &read_image(&pattern)?, &p, ctx.seed)?;
            write_image(&out, &photo)?;
        }
        Cmd::Mask { photo, out } => {
            require(&[&photo])?;
            let m = mask::subject_mask(&read_image(&photo)?, &ctx.cfg.canny)?;
            write_image(&out, &m.to_image())?;
        }
        Cmd::ClearBg { photo, mask: mask_path, color, out } => {
            require(&[&photo, &mask_path])?;
            let m = SubjectMask::from_image(&read_image(&mask_path)?);
            write_image(&out, &mask::clear_background(&read_image(&photo)?, &m, &color)?)?;
        }
        Cmd::Detect { photo, original, spec, out } => {
            require(&[&photo])?;
            if let Some(o) = &original {
                require(&[o])?;
            }
            require(&spec_inputs(&spec))?;
            let img = read_image(&photo)?;
            let report = match &original {
                Some(o) => codec::detect_nonblind(&img, &read_image(o)?, &ctx.spec(&spec)?, &ctx.cfg.detector)?,
                None => codec::detect_blind(&img, &ctx.layout(&spec)?, &ctx.cfg.detector)?,
            };
            match out {
                Some(p) => write_json(&p, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report).map_err(ringmark::Error::from)?),
            }
        }
        Cmd::Calibrate { far, trials, layout, working_point, out } => {
            if let Some(l) = &layout {
                require(&[l])?;
            }
            let layout = match &layout {
                Some(p) => read_json::<RingLayout>(p)?,
                None => ctx.cfg.spec.as_ref().map(|s| *s.layout()).unwrap_or_default(),
            };
            let threshold = codec::calibrate_threshold(&layout, far, trials, ctx.seed)?;
            let (strength, gain) = if working_point {
                let (s, g) = calibrate_working_point(&ctx, layout)?;
                (Some(s), Some(g))
            } else {
                (None, None)
            };
            write_json(&out, &Calibration { target_far: far, trials, seed: ctx.seed, threshold, strength, gain })?;
        }
        Cmd::Attack { photo, chain, out } => {
            require(&[&photo])?;
            let chain: AttackChain = chain.parse().map_err(|e| Failure::Usage(format!("--chain: {e}")))?;
            write_image(&out, &attack::apply_attack(&read_image(&photo)?, &chain, ctx.seed)?)?;
        }
        Cmd::Bench { corpus, chains, spec, no_correct, out } => {
            require(&spec_inputs(&spec))?;
            let chains = chains
                .iter()
                .map(|c| c.parse::<AttackChain>().map_err(|e| Failure::Usage(format!("--chain {c:?}: {e}"))))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let s = ctx.spec(&spec)?;
            let covers = load_corpus(&corpus, ctx.seed)?;
            let opts = BenchOptions { correct_geometry: !no_correct, seed: ctx.seed };
            let table = attack::run_benchmark(&covers, &s, &chains, &ctx.cfg.detector, &opts)?;
            table.write_csv(&out)?;
            table.write_json(&out.with_extension("json"))?;
        }
    }
    Ok(())
}

/// Working-point strength on 20 synthetic photos and capture gain on 20
/// synthetic face scenes.
fn calibrate_working_point(ctx: &Ctx, layout: RingLayout) -> std::result::Result<(attack::WorkingPoint, attack::WorkingPoint), Failure> {
    let payload = ctx.cfg.spec.as_ref().map(|s| s.payload().clone()).unwrap_or_else(|| {
        "101100111000101011010011"[..layout.capacity().min(24)].parse().expect("fixed payload is valid")
    });
    let spec = WatermarkSpec::new(layout, payload, 1.0, ctx.seed)?;
    let covers: Vec<ImageBuffer> = (0..20).map(|i| synth::photo(567, 390, ctx.seed.wrapping_add(i))).collect();
    let strengths: Vec<f64> = (1..=60).map(|k| 5.0 * k as f64).collect();
    let strength = attack::calibrate_strength(&covers, &spec, &ctx.cfg.detector, &strengths)?;
    let scenes: Vec<ImageBuffer> = (0..20).map(|i| synth::face_scene(567, 390, ctx.seed.wrapping_add(i))).collect();
    let gains: Vec<f64> = (1..=32).map(|k| 0.025 * k as f64).collect();
    let gain = capture::calibrate_gain(&scenes, &spec, &ctx.cfg.capture, &ctx.cfg.detector, &gains, ctx.seed)?;
    Ok((strength, gain))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            eprintln!("run `ringmark --help` for the command grammar");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("{}: {e}", e.kind());
            ExitCode::from(2)
        }
    }
}
