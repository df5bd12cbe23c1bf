//! Rail-side geometry: where the base station appears from the train, which
//! beam covers it, and how far the train can drift along the rail before the
//! base station leaves that beam.
//!
//! The train carries the array. A base station sits at perpendicular
//! distance `h` from the rail, with its foot at `rail_origin`. Seen from a
//! train at position `p`, the base station lies at angle
//! `θ_b = atan2(h, rail_origin - p)`, which grows from 0 to π as the train
//! passes.

use std::f64::consts::FRAC_PI_2;

use crate::array_model::BeamGrid;
use crate::error::{require_finite, require_positive, Error, Result};

/// `sin θ` below this is treated as a degenerate (grazing) geometry.
pub const DEGENERATE_SIN_TOLERANCE: f64 = 1e-9;

/// Angles within this many beamwidths below a beam boundary snap onto it.
const BOUNDARY_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentGeometry {
    perpendicular_distance: f64,
    rail_origin: f64,
}

impl DeploymentGeometry {
    pub fn new(perpendicular_distance: f64) -> Result<Self> {
        require_positive("perpendicular_distance", perpendicular_distance)?;
        Ok(DeploymentGeometry {
            perpendicular_distance,
            rail_origin: 0.0,
        })
    }

    pub fn with_rail_origin(mut self, rail_origin: f64) -> Result<Self> {
        require_finite("rail_origin", rail_origin)?;
        self.rail_origin = rail_origin;
        Ok(self)
    }

    pub fn perpendicular_distance(&self) -> f64 {
        self.perpendicular_distance
    }

    pub fn rail_origin(&self) -> f64 {
        self.rail_origin
    }
}

/// The serving beam for a base-station angle and the along-rail slack on
/// either side of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamWindow {
    pub beam_index: usize,
    /// Distance to the beam edge on the smaller-angle side (m).
    pub left_edge_distance: f64,
    /// Distance to the beam edge on the larger-angle side (m).
    pub right_edge_distance: f64,
    pub coverage_length: f64,
}

impl BeamWindow {
    /// A window built directly from edge distances, for probability work that
    /// does not start from a grid.
    pub fn from_edges(left_edge_distance: f64, right_edge_distance: f64) -> Self {
        BeamWindow {
            beam_index: 0,
            left_edge_distance,
            right_edge_distance,
            coverage_length: left_edge_distance + right_edge_distance,
        }
    }
}

/// Angle at which the base station is seen from `train_position`, in `(0, π)`.
pub fn angle_of_bs(train_position: f64, geom: &DeploymentGeometry) -> f64 {
    let ahead = geom.rail_origin - train_position;
    geom.perpendicular_distance.atan2(ahead)
}

/// Train position from which the base station appears at `theta`. Inverse of
/// [`angle_of_bs`] on `(0, π)`.
pub fn position_for_angle(theta: f64, geom: &DeploymentGeometry) -> f64 {
    geom.rail_origin - rail_intercept(theta, geom.perpendicular_distance)
}

/// `h cot θ`: along-rail offset ahead of the train of a ray at angle `theta`.
fn rail_intercept(theta: f64, h: f64) -> f64 {
    h * theta.cos() / theta.sin()
}

fn check_sector(theta: f64, grid: &BeamGrid) -> Result<()> {
    require_finite("theta_b", theta)?;
    if grid.contains(theta) {
        Ok(())
    } else {
        Err(Error::OutOfCoverage {
            angle: theta,
            lower: grid.sector_start(),
            upper: grid.sector_end(),
        })
    }
}

/// Beam index and the fractional position of `theta` inside that beam
/// (0 at the lower edge, 1 at the upper edge).
fn locate(theta: f64, grid: &BeamGrid) -> (usize, f64) {
    let mut t = grid.beam_coordinate(theta);
    if t.ceil() - t < BOUNDARY_SNAP {
        t = t.ceil();
    }
    let last = grid.beam_count() - 1;
    let index = (t.floor().max(0.0) as usize).min(last);
    let fraction = (t - index as f64).clamp(0.0, 1.0);
    (index, fraction)
}

/// Serving beam for `theta`: `⌊(θ - (π/2 - α/2)) / Θ_h⌋`, 0-based, with the
/// upper sector edge folded into the last beam.
pub fn beam_index(theta: f64, grid: &BeamGrid) -> Result<usize> {
    check_sector(theta, grid)?;
    Ok(locate(theta, grid).0)
}

/// Small-angle edge distances: the angular offsets to the two beam edges
/// scaled by the range `h / sin θ_b`. Both distances are nonnegative and sum
/// to `h Θ_h / sin θ_b`.
pub fn beam_window(theta: f64, grid: &BeamGrid, geom: &DeploymentGeometry) -> Result<BeamWindow> {
    check_sector(theta, grid)?;
    let sin = theta.sin();
    if sin < DEGENERATE_SIN_TOLERANCE {
        return Err(Error::DegenerateGeometry { angle: theta });
    }
    let (index, fraction) = locate(theta, grid);
    let coverage = geom.perpendicular_distance / sin * grid.half_power_beamwidth();
    Ok(BeamWindow {
        beam_index: index,
        left_edge_distance: coverage * fraction,
        right_edge_distance: coverage * (1.0 - fraction),
        coverage_length: coverage,
    })
}

/// Exact along-rail edge distances from the cotangent intercepts of the beam
/// edges and of the base-station direction.
pub fn exact_beam_window(
    theta: f64,
    grid: &BeamGrid,
    geom: &DeploymentGeometry,
) -> Result<BeamWindow> {
    check_sector(theta, grid)?;
    if theta.sin() < DEGENERATE_SIN_TOLERANCE {
        return Err(Error::DegenerateGeometry { angle: theta });
    }
    let (index, fraction) = locate(theta, grid);
    let (lower, upper) = grid.beam_edges(index);
    for edge in [lower, upper] {
        if edge <= 0.0 || edge >= std::f64::consts::PI || edge.sin() < DEGENERATE_SIN_TOLERANCE {
            return Err(Error::UnboundedIntercept { angle: edge });
        }
    }
    let h = geom.perpendicular_distance;
    let x_bs = rail_intercept(theta, h);
    let (left, right) = if fraction == 0.0 {
        (0.0, rail_intercept(lower, h) - rail_intercept(upper, h))
    } else if fraction == 1.0 {
        (rail_intercept(lower, h) - rail_intercept(upper, h), 0.0)
    } else {
        (
            (rail_intercept(lower, h) - x_bs).max(0.0),
            (x_bs - rail_intercept(upper, h)).max(0.0),
        )
    };
    Ok(BeamWindow {
        beam_index: index,
        left_edge_distance: left,
        right_edge_distance: right,
        coverage_length: left + right,
    })
}

/// Whether `theta` is abreast of the base station, where the edge distances
/// stop responding to the beam count.
pub(crate) fn is_abreast(theta: f64) -> bool {
    (theta - FRAC_PI_2).abs() <= 1e-12
}
