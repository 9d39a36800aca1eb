use thiserror::Error;

/// Errors produced anywhere in the watermarking pipeline.
///
/// Variant names double as the "typed error name" the CLI prints on
/// processing failures, see [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("payload needs {needed} cells but the layout only has {available}")]
    Capacity { needed: usize, available: usize },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("shape: {0}")]
    Shape(String),

    #[error("spectrum is not conjugate symmetric (imaginary residue {residue:.3e} of signal energy)")]
    Symmetry { residue: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no payload distinguishable (separation {separation:.3} below {required:.3})")]
    Decode { separation: f64, required: f64 },

    #[error("illumination would go negative: {0}")]
    Illumination(String),

    #[error("no closed contour encloses at least {min_fraction} of the image")]
    NoContour { min_fraction: f64 },

    #[error("parameter out of range: {0}")]
    Param(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image codec: {0}")]
    Image(#[from] image::ImageError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short name for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity { .. } => "CapacityError",
            Error::Geometry(_) => "GeometryError",
            Error::Shape(_) => "ShapeError",
            Error::Symmetry { .. } => "SymmetryError",
            Error::Degenerate(_) => "DegenerateError",
            Error::Decode { .. } => "DecodeError",
            Error::Illumination(_) => "IlluminationError",
            Error::NoContour { .. } => "NoContourError",
            Error::Param(_) => "ParamError",
            Error::Invalid(_) => "InvalidValueError",
            Error::Io(_) => "IoError",
            Error::Image(_) => "ImageError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
