//! Closed-form metrics of a uniform linear array.
//!
//! The half-power beamwidth and directivity both depend on the array only
//! through its aperture `d * N`, which is what makes spacing and beam count
//! interchangeable. [`Spacing`] keeps the element spacing as a base length
//! times an exact integer ratio so that a dual transform `(d, N) -> (d / s, N * s)`
//! reproduces the aperture, and therefore every derived metric, bit for bit.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default antenna-design constant in the half-power beamwidth formula.
pub const DEFAULT_BEAMWIDTH_CONSTANT: f64 = 2.782;

/// Angles within this distance of a sector edge are treated as inside it.
pub(crate) const SECTOR_EDGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayType {
    Broadside,
    OrdinaryEndFire,
}

impl ArrayType {
    /// Directivity multiplier: 2 for broadside, 4 for ordinary end-fire.
    pub fn directivity_factor(self) -> f64 {
        match self {
            ArrayType::Broadside => 2.0,
            ArrayType::OrdinaryEndFire => 4.0,
        }
    }
}

impl fmt::Display for ArrayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrayType::Broadside => write!(f, "broadside"),
            ArrayType::OrdinaryEndFire => write!(f, "ordinary_end_fire"),
        }
    }
}

/// Element spacing stored as `base * numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing {
    base: f64,
    numerator: u64,
    denominator: u64,
}

impl Spacing {
    fn new(base: f64) -> Self {
        Spacing {
            base,
            numerator: 1,
            denominator: 1,
        }
    }

    /// Spacing in meters.
    pub fn meters(&self) -> f64 {
        self.base * self.numerator as f64 / self.denominator as f64
    }

    /// Aperture `d * N` in meters. The integer part is combined before
    /// touching the base length, so equal rationals give equal results.
    fn aperture(&self, beam_count: usize) -> f64 {
        let scaled = (beam_count as u128 * self.numerator as u128) as f64;
        self.base * (scaled / self.denominator as f64)
    }

    fn rescaled(&self, numerator: u64, denominator: u64) -> Self {
        let num = self.numerator as u128 * numerator as u128;
        let den = self.denominator as u128 * denominator as u128;
        let g = gcd(num, den);
        Spacing {
            base: self.base,
            numerator: (num / g) as u64,
            denominator: (den / g) as u64,
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Physical description of a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    element_count: Option<usize>,
    spacing: Spacing,
    wavelength: f64,
    array_type: ArrayType,
    beamwidth_constant: f64,
}

impl ArrayConfig {
    /// Broadside array with the default beamwidth constant. The element count
    /// follows the beam count unless set with [`ArrayConfig::with_element_count`].
    pub fn new(spacing_m: f64, wavelength_m: f64) -> Result<Self> {
        require_positive("spacing", spacing_m)?;
        require_positive("wavelength", wavelength_m)?;
        Ok(ArrayConfig {
            element_count: None,
            spacing: Spacing::new(spacing_m),
            wavelength: wavelength_m,
            array_type: ArrayType::Broadside,
            beamwidth_constant: DEFAULT_BEAMWIDTH_CONSTANT,
        })
    }

    /// Wavelength from the carrier as `c / f_c`, spacing given in wavelengths.
    pub fn from_carrier(carrier_hz: f64, spacing_over_lambda: f64) -> Result<Self> {
        require_positive("carrier_frequency", carrier_hz)?;
        require_positive("spacing_over_lambda", spacing_over_lambda)?;
        let wavelength = SPEED_OF_LIGHT / carrier_hz;
        Self::new(spacing_over_lambda * wavelength, wavelength)
    }

    pub fn with_array_type(mut self, array_type: ArrayType) -> Self {
        self.array_type = array_type;
        self
    }

    pub fn with_beamwidth_constant(mut self, constant: f64) -> Result<Self> {
        require_positive("beamwidth_constant", constant)?;
        self.beamwidth_constant = constant;
        Ok(self)
    }

    pub fn with_element_count(mut self, element_count: usize) -> Result<Self> {
        if element_count == 0 {
            return Err(invalid("element_count", "must be >= 1"));
        }
        self.element_count = Some(element_count);
        Ok(self)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing.meters()
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn array_type(&self) -> ArrayType {
        self.array_type
    }

    pub fn beamwidth_constant(&self) -> f64 {
        self.beamwidth_constant
    }

    /// Explicit element count, if one was set.
    pub fn element_count(&self) -> Option<usize> {
        self.element_count
    }

    /// Number of elements used with a grid of `beam_count` beams.
    pub fn elements_for(&self, beam_count: usize) -> usize {
        self.element_count.unwrap_or(beam_count)
    }

    /// Wavenumber `2π / λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    fn aperture(&self, beam_count: usize) -> f64 {
        self.spacing.aperture(beam_count)
    }
}

fn require_beam_count(beam_count: usize) -> Result<()> {
    if beam_count == 0 {
        Err(invalid("beam_count", "must be >= 1"))
    } else {
        Ok(())
    }
}

/// Half-power beamwidth `C λ / (π d N)` in radians.
pub fn half_power_beamwidth(cfg: &ArrayConfig, beam_count: usize) -> Result<f64> {
    require_beam_count(beam_count)?;
    Ok(cfg.beamwidth_constant * cfg.wavelength / (PI * cfg.aperture(beam_count)))
}

/// Directivity `T d N / λ`.
///
/// The formula is the large-aperture approximation; it is returned as is for
/// small arrays too.
pub fn directivity(cfg: &ArrayConfig, beam_count: usize) -> Result<f64> {
    require_beam_count(beam_count)?;
    Ok(cfg.array_type.directivity_factor() * cfg.aperture(beam_count) / cfg.wavelength)
}

/// Directivity reached by a beam of the given half-power width: `T C / (π Θ_h)`.
pub fn directivity_from_beamwidth(cfg: &ArrayConfig, theta_h: f64) -> Result<f64> {
    require_positive("theta_h", theta_h)?;
    Ok(tradeoff_constant(cfg) / theta_h)
}

/// The product `D * Θ_h = T C / π`, which does not depend on spacing or beam count.
pub fn tradeoff_constant(cfg: &ArrayConfig) -> f64 {
    cfg.array_type.directivity_factor() * cfg.beamwidth_constant / PI
}

/// Total angular width `α = C λ / (π d)` tiled by the beams.
pub fn sector_width(cfg: &ArrayConfig) -> f64 {
    cfg.beamwidth_constant * cfg.wavelength / (PI * cfg.spacing())
}

/// Trade spacing for beam count: returns `(d / scale, N * scale)`.
///
/// `N * scale` must be a positive integer; nothing is rounded.
pub fn dual_transform(
    cfg: &ArrayConfig,
    beam_count: usize,
    scale: f64,
) -> Result<(ArrayConfig, usize)> {
    require_beam_count(beam_count)?;
    require_positive("scale", scale)?;
    let scaled = beam_count as f64 * scale;
    let rounded = scaled.round();
    if rounded < 1.0 || (scaled - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::NonIntegralScaling { beam_count, scale });
    }
    let new_count = rounded as usize;
    // d' = d * N / N'
    let mut dual = *cfg;
    dual.spacing = cfg.spacing.rescaled(beam_count as u64, new_count as u64);
    Ok((dual, new_count))
}

/// `N` equal beams tiling the sector `[π/2 - α/2, π/2 + α/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGrid {
    beam_count: usize,
    half_power_beamwidth: f64,
    sector_width: f64,
    center_angles: Vec<f64>,
}

impl BeamGrid {
    pub fn new(cfg: &ArrayConfig, beam_count: usize) -> Result<Self> {
        let theta_h = half_power_beamwidth(cfg, beam_count)?;
        let half = beam_count as f64 / 2.0;
        let center_angles = (0..beam_count)
            .map(|i| FRAC_PI_2 + (i as f64 + 0.5 - half) * theta_h)
            .collect();
        Ok(BeamGrid {
            beam_count,
            half_power_beamwidth: theta_h,
            sector_width: sector_width(cfg),
            center_angles,
        })
    }

    pub fn beam_count(&self) -> usize {
        self.beam_count
    }

    pub fn half_power_beamwidth(&self) -> f64 {
        self.half_power_beamwidth
    }

    pub fn sector_width(&self) -> f64 {
        self.sector_width
    }

    pub fn center_angles(&self) -> &[f64] {
        &self.center_angles
    }

    /// Smaller-angle edge of the sector, `π/2 - α/2`.
    pub fn sector_start(&self) -> f64 {
        FRAC_PI_2 - self.sector_width / 2.0
    }

    /// Larger-angle edge of the sector, `π/2 + α/2`.
    pub fn sector_end(&self) -> f64 {
        FRAC_PI_2 + self.sector_width / 2.0
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.sector_start() - SECTOR_EDGE_TOLERANCE
            && theta <= self.sector_end() + SECTOR_EDGE_TOLERANCE
    }

    /// Edges `(lower, upper)` of beam `index`, in radians.
    pub fn beam_edges(&self, index: usize) -> (f64, f64) {
        let half = self.beam_count as f64 / 2.0;
        let lower = FRAC_PI_2 + (index as f64 - half) * self.half_power_beamwidth;
        (lower, lower + self.half_power_beamwidth)
    }

    /// Position of `theta` measured in beamwidths from the sector start.
    pub(crate) fn beam_coordinate(&self, theta: f64) -> f64 {
        (theta - FRAC_PI_2) / self.half_power_beamwidth + self.beam_count as f64 / 2.0
    }
}
