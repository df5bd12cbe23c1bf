use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("angle {angle} rad is outside the beam sector [{lower}, {upper}]")]
    OutOfCoverage { angle: f64, lower: f64, upper: f64 },

    #[error("degenerate geometry at angle {angle} rad (sin below tolerance)")]
    DegenerateGeometry { angle: f64 },

    #[error("beam edge at {angle} rad has no finite rail intercept")]
    UnboundedIntercept { angle: f64 },

    #[error(
        "angle {angle} rad is abreast of the base station; the edge distances are limited by \
         the deployment, not by the beam count"
    )]
    StructuralLimit { angle: f64 },

    #[error("beam count {beam_count} scaled by {scale} is not a positive integer")]
    NonIntegralScaling { beam_count: usize, scale: f64 },

    #[error("main lobe not resolved: {reason}")]
    UnresolvedMainLobe { reason: String },

    #[error("event list is empty")]
    EmptyEvents,

    #[error("malformed phase mapper csv: {0}")]
    MalformedMapper(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be > 0, got {value}")))
    }
}
