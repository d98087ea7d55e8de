use std::path::PathBuf;

use thiserror::Error;

use crate::mesh::Tag;
use crate::special::SpecialError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Special(#[from] SpecialError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("mesh resolution too small: n_angular = {0} (need an even value >= 8)")]
    Resolution(usize),

    #[error("outer radius {outer} must exceed inner radius {inner}")]
    Radii { inner: f64, outer: f64 },

    #[error("degenerate triangle {index} (signed area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("boundary tag {0:?} not present in mesh")]
    MissingTag(Tag),

    #[error("boundary trace is not a closed uniform loop: {0}")]
    BadTrace(String),

    #[error("interface traces do not conform: {0}")]
    NonConforming(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("solver residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("point ({x}, {y}) lies outside the {region}")]
    OutsideRegion { x: f64, y: f64, region: &'static str },

    #[error("radius {r} outside the valid range of the series ({what})")]
    OutsideSeries { r: f64, what: &'static str },

    #[error("malformed file: {0}")]
    Parse(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Write(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_) | Error::Residual { .. } | Error::Special(_)
        )
    }
}
