use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::damage::{print_scan, scratch, smear};
use super::warp::{resize, rotate, scale, trapezoid, untrapezoid};
use crate::error::{Error, Result};
use crate::model::ImageBuffer;

/// Canvas fill for pixels uncovered by rotation or keystone warps.
pub const BACKGROUND: [f64; 3] = [1.0, 1.0, 1.0];

/// One distortion with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "lowercase")]
pub enum AttackStep {
    /// Counterclockwise rotation in degrees, `[-45, 45]`.
    Rotate { deg: f64 },
    /// Canvas scale factor, `[0.25, 4]`.
    Scale { factor: f64 },
    /// Keystone strength, `[0, 0.5]`: the top edge shrinks by this fraction.
    Trapezoid { strength: f64 },
    /// Black lines of `width` pixels covering `coverage` of the area, `[0, 0.5]`.
    Scratch { coverage: f64, width: f64 },
    /// Ink blobs of about `radius` pixels covering `coverage` of the area, `[0, 0.5]`.
    Smear { coverage: f64, radius: f64 },
    /// Gaussian blur sigma, additive noise sigma, gamma exponent.
    Printscan { blur: f64, noise: f64, gamma: f64 },
}

impl AttackStep {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Param(msg));
        let cov = |c: f64| (0.0..=0.5).contains(&c);
        match *self {
            AttackStep::Rotate { deg } if !(-45.0..=45.0).contains(&deg) => bad(format!("rotation {deg} outside [-45, 45]")),
            AttackStep::Scale { factor } if !(0.25..=4.0).contains(&factor) => {
                bad(format!("scale {factor} outside [0.25, 4]"))
            }
            AttackStep::Trapezoid { strength } if !(0.0..=0.5).contains(&strength) => {
                bad(format!("trapezoid {strength} outside [0, 0.5]"))
            }
            AttackStep::Scratch { coverage, width } if !cov(coverage) || !(width > 0.0 && width <= 50.0) => {
                bad(format!("scratch coverage {coverage} / width {width} out of range"))
            }
            AttackStep::Smear { coverage, radius } if !cov(coverage) || !(radius > 0.0 && radius <= 200.0) => {
                bad(format!("smear coverage {coverage} / radius {radius} out of range"))
            }
            AttackStep::Printscan { blur, noise, gamma }
                if !((0.0..=10.0).contains(&blur) && (0.0..=0.5).contains(&noise) && gamma > 0.0 && gamma <= 5.0) =>
            {
                bad(format!("printscan blur {blur} / noise {noise} / gamma {gamma} out of range"))
            }
            _ => Ok(()),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            AttackStep::Rotate { .. } => "rotate",
            AttackStep::Scale { .. } => "scale",
            AttackStep::Trapezoid { .. } => "trapezoid",
            AttackStep::Scratch { .. } => "scratch",
            AttackStep::Smear { .. } => "smear",
            AttackStep::Printscan { .. } => "printscan",
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            AttackStep::Rotate { deg } => vec![deg],
            AttackStep::Scale { factor } => vec![factor],
            AttackStep::Trapezoid { strength } => vec![strength],
            AttackStep::Scratch { coverage, width } => vec![coverage, width],
            AttackStep::Smear { coverage, radius } => vec![coverage, radius],
            AttackStep::Printscan { blur, noise, gamma } => vec![blur, noise, gamma],
        }
    }
}

impl fmt::Display for AttackStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.params().iter().map(|v| v.to_string()).collect();
        write!(f, "{}:{}", self.name(), p.join(","))
    }
}

impl FromStr for AttackStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').ok_or_else(|| Error::Param(format!("step {s:?} lacks ':'")))?;
        let vals = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Param(format!("bad number {a:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let arity = |n: usize| {
            if vals.len() == n {
                Ok(())
            } else {
                Err(Error::Param(format!("{name} takes {n} parameter(s), got {}", vals.len())))
            }
        };
        let step = match name.trim() {
            "rotate" => arity(1).map(|_| AttackStep::Rotate { deg: vals[0] }),
            "scale" => arity(1).map(|_| AttackStep::Scale { factor: vals[0] }),
            "trapezoid" => arity(1).map(|_| AttackStep::Trapezoid { strength: vals[0] }),
            "scratch" => arity(2).map(|_| AttackStep::Scratch { coverage: vals[0], width: vals[1] }),
            "smear" => arity(2).map(|_| AttackStep::Smear { coverage: vals[0], radius: vals[1] }),
            "printscan" => arity(3).map(|_| AttackStep::Printscan { blur: vals[0], noise: vals[1], gamma: vals[2] }),
            other => Err(Error::Param(format!("unknown attack {other:?}"))),
        }?;
        step.validate()?;
        Ok(step)
    }
}

/// Ordered distortions, written `rotate:10;printscan:1.0,0.01,1.1`.
/// `clean`, `none` or an empty string denote no distortion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AttackChain {
    steps: Vec<AttackStep>,
}

impl AttackChain {
    pub fn new(steps: Vec<AttackStep>) -> Result<Self> {
        steps.iter().try_for_each(|s| s.validate())?;
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[AttackStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for AttackChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("clean");
        }
        let parts: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for AttackChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t == "clean" || t == "none" {
            return Ok(Self::default());
        }
        let steps = t.split(';').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
        Ok(Self { steps })
    }
}

impl TryFrom<String> for AttackChain {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AttackChain> for String {
    fn from(c: AttackChain) -> String {
        c.to_string()
    }
}

/// Applies the chain in order. Random steps draw from one generator seeded
/// with `seed`; an empty chain returns the input unchanged.
pub fn apply_attack(photo: &ImageBuffer, chain: &AttackChain, seed: u64) -> Result<ImageBuffer> {
    chain.steps.iter().try_for_each(|s| s.validate())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = photo.clone();
    for step in &chain.steps {
        img = match *step {
            AttackStep::Rotate { deg } => rotate(&img, deg, &BACKGROUND),
            AttackStep::Scale { factor } => scale(&img, factor),
            AttackStep::Trapezoid { strength } => trapezoid(&img, strength, &BACKGROUND),
            AttackStep::Scratch { coverage, width } => scratch(&img, coverage, width, &mut rng),
            AttackStep::Smear { coverage, radius } => smear(&img, coverage, radius, &mut rng),
            AttackStep::Printscan { blur, noise, gamma } => print_scan(&img, blur, noise, gamma, &mut rng),
        };
    }
    Ok(img)
}

/// Known distortion parameters to undo.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KnownGeometry {
    pub rotation_deg: Option<f64>,
    pub trapezoid: Option<f64>,
    /// Target canvas size to resample back to after a scale.
    pub size: Option<(usize, usize)>,
}

impl KnownGeometry {
    /// Geometry a chain applied to a `width` x `height` original. Only the
    /// last value of each kind is kept.
    pub fn from_chain(chain: &AttackChain, width: usize, height: usize) -> Self {
        let mut k = KnownGeometry::default();
        for s in chain.steps() {
            match *s {
                AttackStep::Rotate { deg } => k.rotation_deg = Some(k.rotation_deg.unwrap_or(0.0) + deg),
                AttackStep::Trapezoid { strength } => k.trapezoid = Some(strength),
                AttackStep::Scale { .. } => k.size = Some((width, height)),
                _ => {}
            }
        }
        k
    }
}

/// Undoes known warps: resample to the original size, remove the keystone,
/// then rotate back.
pub fn correct_geometry(photo: &ImageBuffer, known: &KnownGeometry) -> Result<ImageBuffer> {
    let mut img = photo.clone();
    if let Some((w, h)) = known.size {
        if w == 0 || h == 0 {
            return Err(Error::Param("target size must be positive".into()));
        }
        if (w, h) != (img.width(), img.height()) {
            img = resize(&img, w, h);
        }
    }
    if let Some(t) = known.trapezoid {
        AttackStep::Trapezoid { strength: t }.validate()?;
        img = untrapezoid(&img, t, &BACKGROUND);
    }
    if let Some(deg) = known.rotation_deg {
        if !(-90.0..=90.0).contains(&deg) {
            return Err(Error::Param(format!("rotation {deg} outside [-90, 90]")));
        }
        if deg != 0.0 {
            img = rotate(&img, -deg, &BACKGROUND);
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn grammar_round_trip() {
        let text = "rotate:10;scale:0.5;trapezoid:0.1;scratch:0.25,2;smear:0.25,20;printscan:1,0.01,1.1";
        let chain: AttackChain = text.parse().unwrap();
        assert_eq!(chain.steps().len(), 6);
        assert_eq!(chain.to_string(), text);
        assert_eq!(chain.to_string().parse::<AttackChain>().unwrap(), chain);
        assert!("clean".parse::<AttackChain>().unwrap().is_empty());
        assert!("".parse::<AttackChain>().unwrap().is_empty());
    }

    #[test]
    fn grammar_rejects_out_of_range() {
        for bad in ["rotate:50", "scale:0.1", "scratch:0.6,2", "smear:0.2", "blur:1", "rotate:x", "trapezoid:-0.1"] {
            assert!(matches!(bad.parse::<AttackChain>(), Err(Error::Param(_))), "{bad}");
        }
        assert!(AttackChain::new(vec![AttackStep::Scale { factor: 8.0 }]).is_err());
    }

    #[test]
    fn empty_chain_is_identity() {
        let img = synth::photo(30, 20, 1);
        assert_eq!(apply_attack(&img, &AttackChain::default(), 5).unwrap(), img);
    }

    #[test]
    fn attacks_are_deterministic() {
        let img = synth::photo(60, 40, 1);
        let chain: AttackChain = "scratch:0.1,2;printscan:1,0.01,1.1".parse().unwrap();
        assert_eq!(apply_attack(&img, &chain, 3).unwrap(), apply_attack(&img, &chain, 3).unwrap());
    }

    #[test]
    fn zero_correction_is_identity() {
        let img = synth::photo(50, 40, 2);
        let k = KnownGeometry { rotation_deg: Some(0.0), ..Default::default() };
        assert!(correct_geometry(&img, &k).unwrap().max_abs_diff(&img) < 1e-12);
    }

    #[test]
    fn known_geometry_from_chain() {
        let chain: AttackChain = "rotate:10;scale:0.5;trapezoid:0.1".parse().unwrap();
        let k = KnownGeometry::from_chain(&chain, 100, 80);
        assert_eq!(k.rotation_deg, Some(10.0));
        assert_eq!(k.trapezoid, Some(0.1));
        assert_eq!(k.size, Some((100, 80)));
    }
}
