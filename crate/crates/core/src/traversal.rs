//! Location-driven beam selection and a rail traversal simulator.
//!
//! The phase mapper acts as a routing table: the estimated base-station
//! angle picks a column, no channel state involved. The simulator moves the
//! train along the rail, perturbs each position fix with an independent
//! Gaussian error, and records whether the selected beam is the one that
//! actually contains the base station.

use ndarray::ArrayView1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::array_model::BeamGrid;
use crate::codebook::PhaseMapper;
use crate::error::{invalid, require_finite, require_positive, Error, Result};
use crate::error_model::PositioningErrorModel;
use crate::rail_geometry::{angle_of_bs, position_for_angle, DeploymentGeometry};
use crate::report::{format_sig, CsvTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversalConfig {
    pub speed: f64,
    pub time_step: f64,
    pub start_position: f64,
    pub end_position: f64,
    pub error: PositioningErrorModel,
    pub seed: u64,
}

impl TraversalConfig {
    pub fn new(
        speed: f64,
        time_step: f64,
        start_position: f64,
        end_position: f64,
        error: PositioningErrorModel,
        seed: u64,
    ) -> Result<Self> {
        require_positive("speed", speed)?;
        require_positive("time_step", time_step)?;
        require_finite("start_position", start_position)?;
        require_finite("end_position", end_position)?;
        if start_position >= end_position {
            return Err(invalid(
                "start_position",
                format!("must be below end_position ({start_position} >= {end_position})"),
            ));
        }
        Ok(TraversalConfig {
            speed,
            time_step,
            start_position,
            end_position,
            error,
            seed,
        })
    }

    /// A pass from just inside the sector's lower edge to just inside its
    /// upper edge.
    pub fn sector_pass(
        grid: &BeamGrid,
        geom: &DeploymentGeometry,
        speed: f64,
        time_step: f64,
        error: PositioningErrorModel,
        seed: u64,
    ) -> Result<Self> {
        let margin = grid.half_power_beamwidth() * 1e-6;
        let lower = grid.sector_start() + margin;
        let upper = grid.sector_end() - margin;
        if lower <= 0.0 || upper >= std::f64::consts::PI {
            return Err(Error::UnboundedIntercept {
                angle: if lower <= 0.0 { grid.sector_start() } else { grid.sector_end() },
            });
        }
        Self::new(
            speed,
            time_step,
            position_for_angle(lower, geom),
            position_for_angle(upper, geom),
            error,
            seed,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversalEvent {
    pub time: f64,
    pub true_position: f64,
    pub estimated_position: f64,
    pub true_angle: f64,
    pub estimated_angle: f64,
    /// Index of the selected beam, which is also its mapper column.
    pub selected_beam: usize,
    pub true_beam: usize,
    pub effective: bool,
    pub switched: bool,
}

/// Beam whose interval `[start + i α/N, start + (i+1) α/N)` holds the
/// estimated angle. Angles at or past the upper sector edge wrap to beam 0
/// (the next base station's first beam); angles below the sector select the
/// last beam.
///
/// # Panics
///
/// If the mapper has fewer columns than the grid has beams.
pub fn select_beam<'m>(theta_b_est: f64, mapper: &'m PhaseMapper, grid: &BeamGrid) -> (usize, ArrayView1<'m, f64>) {
    let n = grid.beam_count();
    assert!(mapper.beam_count() >= n, "phase mapper has fewer columns than the beam grid");
    let start = grid.sector_start();
    let index = if theta_b_est >= grid.sector_end() {
        0
    } else if theta_b_est < start {
        n - 1
    } else {
        let width = grid.sector_width() / n as f64;
        (((theta_b_est - start) / width).floor() as usize).min(n - 1)
    };
    (index, mapper.column(index))
}

/// Step the train from `start_position` to `end_position` at constant speed,
/// logging one event per time step. Deterministic for a fixed seed.
pub fn simulate_traversal(
    tc: &TraversalConfig,
    grid: &BeamGrid,
    mapper: &PhaseMapper,
    geom: &DeploymentGeometry,
) -> Vec<TraversalEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let stride = tc.speed * tc.time_step;
    let steps = ((tc.end_position - tc.start_position) / stride + 1e-9).floor() as usize + 1;
    let mut events = Vec::with_capacity(steps);
    let mut previous: Option<usize> = None;
    for k in 0..steps {
        let true_position = tc.start_position + k as f64 * stride;
        let estimated_position = true_position + tc.error.sample(&mut rng);
        let true_angle = angle_of_bs(true_position, geom);
        let estimated_angle = angle_of_bs(estimated_position, geom);
        let (selected_beam, _) = select_beam(estimated_angle, mapper, grid);
        let (true_beam, _) = select_beam(true_angle, mapper, grid);
        events.push(TraversalEvent {
            time: k as f64 * tc.time_step,
            true_position,
            estimated_position,
            true_angle,
            estimated_angle,
            selected_beam,
            true_beam,
            effective: selected_beam == true_beam,
            switched: previous.is_some_and(|p| p != selected_beam),
        });
        previous = Some(selected_beam);
    }
    events
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraversalSummary {
    pub effectiveness_rate: f64,
    pub switch_count: usize,
    /// Seconds spent on each selected beam, indexed by beam.
    pub per_beam_dwell: Vec<f64>,
    pub total_time: f64,
}

/// Aggregate an event log. Each event holds its beam until the next event;
/// the last one holds it for the preceding step length.
pub fn summarize(events: &[TraversalEvent]) -> Result<TraversalSummary> {
    if events.is_empty() {
        return Err(Error::EmptyEvents);
    }
    let beams = events.iter().map(|e| e.selected_beam).max().unwrap_or(0) + 1;
    let mut dwell = vec![0.0; beams];
    let last_step = match events {
        [.., a, b] => b.time - a.time,
        _ => 0.0,
    };
    for (k, e) in events.iter().enumerate() {
        let held = events.get(k + 1).map_or(last_step, |next| next.time - e.time);
        dwell[e.selected_beam] += held;
    }
    let effective = events.iter().filter(|e| e.effective).count();
    Ok(TraversalSummary {
        effectiveness_rate: effective as f64 / events.len() as f64,
        switch_count: events.iter().filter(|e| e.switched).count(),
        total_time: dwell.iter().sum(),
        per_beam_dwell: dwell,
    })
}

/// Event log as a table with the columns
/// `time_s,true_pos_m,est_pos_m,true_angle_rad,est_angle_rad,beam_index,effective,switched`.
pub fn events_table(events: &[TraversalEvent], digits: usize) -> CsvTable {
    let mut table = CsvTable::new([
        "time_s",
        "true_pos_m",
        "est_pos_m",
        "true_angle_rad",
        "est_angle_rad",
        "beam_index",
        "effective",
        "switched",
    ]);
    for e in events {
        table.push(vec![
            format_sig(e.time, digits),
            format_sig(e.true_position, digits),
            format_sig(e.estimated_position, digits),
            format_sig(e.true_angle, digits),
            format_sig(e.estimated_angle, digits),
            e.selected_beam.to_string(),
            e.effective.to_string(),
            e.switched.to_string(),
        ]);
    }
    table
}
