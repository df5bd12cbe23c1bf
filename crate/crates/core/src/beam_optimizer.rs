//! Largest beam count (and so highest directivity) that keeps the effective
//! beamforming probability above a threshold, plus the parameter sweeps built
//! on top of it.
//!
//! Doubling the beam count splits every beam in two, so the beam containing
//! the base station can only shrink and the probability can only fall. The
//! search walks `1, 2, 4, ...` and stops at the first count that violates the
//! threshold, returning the last one that met it.

use rayon::prelude::*;

use crate::array_model::{directivity, half_power_beamwidth, tradeoff_constant, ArrayConfig, BeamGrid};
use crate::error::{invalid, require_positive, Error, Result};
use crate::error_model::{effective_probability, PositioningErrorModel};
use crate::rail_geometry::{beam_window, is_abreast, DeploymentGeometry};

pub const DEFAULT_MAX_BEAMS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerResult {
    /// `None` when even a single beam misses the threshold.
    pub optimal_beam_count: Option<usize>,
    pub directivity: Option<f64>,
    pub half_power_beamwidth: Option<f64>,
    /// Probability at the optimum, or at one beam when infeasible.
    pub achieved_probability: f64,
    pub constraint_threshold: f64,
    pub feasible: bool,
}

/// Search problem shared by the single search and the sweeps.
#[derive(Debug, Clone, Copy)]
pub struct SearchProblem<'a> {
    pub cfg: &'a ArrayConfig,
    pub geom: &'a DeploymentGeometry,
    pub err: &'a PositioningErrorModel,
    pub max_beams: usize,
}

fn check_threshold(p_th: f64) -> Result<()> {
    if p_th > 0.0 && p_th < 1.0 {
        Ok(())
    } else {
        Err(invalid("p_th", format!("must lie in (0, 1), got {p_th}")))
    }
}

fn check_max_beams(max_beams: usize) -> Result<()> {
    if max_beams.is_power_of_two() {
        Ok(())
    } else {
        Err(invalid("n_max", format!("must be a power of two >= 1, got {max_beams}")))
    }
}

/// Effective beamforming probability of the beam containing `theta_b` when
/// the sector is split into `beam_count` beams.
pub fn probability_at(
    cfg: &ArrayConfig,
    geom: &DeploymentGeometry,
    theta_b: f64,
    err: &PositioningErrorModel,
    beam_count: usize,
) -> Result<f64> {
    let grid = BeamGrid::new(cfg, beam_count)?;
    let window = beam_window(theta_b, &grid, geom)?;
    effective_probability(&window, err)
}

/// Doubling search for the largest power-of-two beam count `N <= n_max`
/// with `P_i(N) >= p_th`.
pub fn search_beam_count(
    cfg: &ArrayConfig,
    geom: &DeploymentGeometry,
    theta_b: f64,
    err: &PositioningErrorModel,
    p_th: f64,
    n_max: usize,
) -> Result<OptimizerResult> {
    check_threshold(p_th)?;
    check_max_beams(n_max)?;
    // the sector does not depend on N; reject out-of-coverage angles first
    let one = BeamGrid::new(cfg, 1)?;
    beam_window(theta_b, &one, geom)?;
    if is_abreast(theta_b) {
        return Err(Error::StructuralLimit { angle: theta_b });
    }

    let first = probability_at(cfg, geom, theta_b, err, 1)?;
    let mut best = None;
    let mut n = 1;
    let mut p = first;
    while p >= p_th {
        best = Some((n, p));
        if n == n_max {
            break;
        }
        n *= 2;
        p = probability_at(cfg, geom, theta_b, err, n)?;
    }

    Ok(match best {
        Some((n, p)) => OptimizerResult {
            optimal_beam_count: Some(n),
            directivity: Some(directivity(cfg, n)?),
            half_power_beamwidth: Some(half_power_beamwidth(cfg, n)?),
            achieved_probability: p,
            constraint_threshold: p_th,
            feasible: true,
        },
        None => OptimizerResult {
            optimal_beam_count: None,
            directivity: None,
            half_power_beamwidth: None,
            achieved_probability: first,
            constraint_threshold: p_th,
            feasible: false,
        },
    })
}

/// Outcome of one sweep point. Failed points stay in the table.
#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Feasible,
    Infeasible,
    Failed(Error),
}

impl PointStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PointStatus::Feasible => "feasible",
            PointStatus::Infeasible => "infeasible",
            PointStatus::Failed(Error::StructuralLimit { .. }) => "structural_limit",
            PointStatus::Failed(Error::OutOfCoverage { .. }) => "out_of_coverage",
            PointStatus::Failed(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRow {
    pub theta_b: f64,
    pub sigma: f64,
    pub p_th: f64,
    pub beam_count: Option<usize>,
    pub directivity: Option<f64>,
    pub probability: Option<f64>,
    pub status: PointStatus,
}

fn search_row(problem: &SearchProblem<'_>, theta_b: f64, err: &PositioningErrorModel, p_th: f64) -> SearchRow {
    let res = search_beam_count(problem.cfg, problem.geom, theta_b, err, p_th, problem.max_beams);
    let (beam_count, directivity, probability, status) = match res {
        Ok(r) if r.feasible => (
            r.optimal_beam_count,
            r.directivity,
            Some(r.achieved_probability),
            PointStatus::Feasible,
        ),
        Ok(r) => (None, None, Some(r.achieved_probability), PointStatus::Infeasible),
        Err(e) => (None, None, None, PointStatus::Failed(e)),
    };
    SearchRow {
        theta_b,
        sigma: err.sigma(),
        p_th,
        beam_count,
        directivity,
        probability,
        status,
    }
}

/// One beam-count search per base-station angle.
pub fn sweep_directivity_vs_theta(problem: &SearchProblem<'_>, p_th: f64, theta_grid: &[f64]) -> Vec<SearchRow> {
    theta_grid
        .par_iter()
        .map(|&theta| search_row(problem, theta, problem.err, p_th))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingRow {
    pub theta_b: f64,
    pub beam_count: Option<usize>,
    /// Spacing that holds the target directivity at the optimal beam count.
    pub spacing: Option<f64>,
    pub status: PointStatus,
}

/// For each angle, the spacing `d' = D λ / (T N*)` that keeps the directivity
/// at `target_directivity` given the optimal beam count there.
pub fn sweep_spacing_vs_theta(
    problem: &SearchProblem<'_>,
    p_th: f64,
    target_directivity: f64,
    theta_grid: &[f64],
) -> Result<Vec<SpacingRow>> {
    require_positive("target_directivity", target_directivity)?;
    let factor = problem.cfg.array_type().directivity_factor();
    let lambda = problem.cfg.wavelength();
    Ok(sweep_directivity_vs_theta(problem, p_th, theta_grid)
        .into_iter()
        .map(|row| SpacingRow {
            theta_b: row.theta_b,
            beam_count: row.beam_count,
            spacing: row
                .beam_count
                .map(|n| target_directivity * lambda / (factor * n as f64)),
            status: row.status,
        })
        .collect())
}

/// Beam-count search over every `(σ, P_th)` pair at a fixed angle. Rows are
/// ordered by threshold, then by σ.
pub fn sweep_directivity_vs_sigma(
    problem: &SearchProblem<'_>,
    theta_b: f64,
    p_th_list: &[f64],
    sigma_grid: &[f64],
) -> Vec<SearchRow> {
    let cells: Vec<(f64, f64)> = p_th_list
        .iter()
        .flat_map(|&p| sigma_grid.iter().map(move |&s| (p, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(p_th, sigma)| match PositioningErrorModel::new(sigma) {
            Ok(err) => search_row(problem, theta_b, &err, p_th),
            Err(e) => SearchRow {
                theta_b,
                sigma,
                p_th,
                beam_count: None,
                directivity: None,
                probability: None,
                status: PointStatus::Failed(e),
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub theta_h: f64,
    pub directivity: f64,
    pub product: f64,
}

/// Directivity against half-power beamwidth, `D = T C / (π Θ_h)`.
pub fn tradeoff_curve(cfg: &ArrayConfig, theta_h_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    let k = tradeoff_constant(cfg);
    theta_h_grid
        .iter()
        .map(|&theta_h| {
            if !(theta_h > 0.0 && theta_h < std::f64::consts::PI) {
                return Err(invalid("theta_h", format!("must lie in (0, π), got {theta_h}")));
            }
            let d = k / theta_h;
            Ok(TradeoffPoint {
                theta_h,
                directivity: d,
                product: d * theta_h,
            })
        })
        .collect()
}

/// `points` angles at the centers of equal slices of the sector. An even
/// count never lands on broadside or on a sector edge.
pub fn interior_theta_grid(cfg: &ArrayConfig, points: usize) -> Vec<f64> {
    let grid = match BeamGrid::new(cfg, 1) {
        Ok(g) => g,
        Err(_) => return Vec::new(),
    };
    let start = grid.sector_start();
    let step = grid.sector_width() / points as f64;
    (0..points).map(|k| start + (k as f64 + 0.5) * step).collect()
}
