//! Offline beam codebook: the per-element phase excitations of every beam,
//! the steering vectors they produce, and a sampled-pattern measurement used
//! to check the closed-form beamwidth and directivity.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array_model::{directivity, ArrayConfig, BeamGrid};
use crate::error::{invalid, require_positive, Error, Result};

/// `M x N` phase excitations; column `i` steers beam `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMapper {
    phases: Array2<f64>,
    beam_center_angles: Vec<f64>,
}

impl PhaseMapper {
    pub fn element_count(&self) -> usize {
        self.phases.nrows()
    }

    pub fn beam_count(&self) -> usize {
        self.phases.ncols()
    }

    pub fn phases(&self) -> &Array2<f64> {
        &self.phases
    }

    pub fn column(&self, beam: usize) -> ArrayView1<'_, f64> {
        self.phases.column(beam)
    }

    pub fn beam_center_angles(&self) -> &[f64] {
        &self.beam_center_angles
    }
}

/// Wrap to `(-π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Fill column `i` with `-k d cos θ_i` on every element, which cancels the
/// progressive phase of the steering vector at the beam center.
pub fn build_phase_mapper(cfg: &ArrayConfig, grid: &BeamGrid) -> PhaseMapper {
    let m = cfg.elements_for(grid.beam_count());
    let kd = cfg.wavenumber() * cfg.spacing();
    let centers = grid.center_angles().to_vec();
    let phases = Array2::from_shape_fn((m, centers.len()), |(_, i)| wrap_phase(-kd * centers[i].cos()));
    PhaseMapper {
        phases,
        beam_center_angles: centers,
    }
}

fn check_column(column: ArrayView1<'_, f64>, cfg: &ArrayConfig) -> Result<usize> {
    let m = column.len();
    if m == 0 {
        return Err(invalid("mapper_column", "must hold at least one element"));
    }
    if let Some(expected) = cfg.element_count() {
        if expected != m {
            return Err(invalid(
                "mapper_column",
                format!("length {m} does not match element_count {expected}"),
            ));
        }
    }
    Ok(m)
}

fn element_phase(column: ArrayView1<'_, f64>, m: usize, theta: f64, kd: f64) -> f64 {
    m as f64 * (kd * theta.cos() + column[m])
}

/// Element `m` (0-based) is `exp(j m (k d cos θ + β^m))`; element 0 is 1.
pub fn steering_vector(theta: f64, column: ArrayView1<'_, f64>, cfg: &ArrayConfig) -> Result<Vec<Complex64>> {
    let m = check_column(column, cfg)?;
    let kd = cfg.wavenumber() * cfg.spacing();
    Ok((0..m)
        .map(|e| Complex64::from_polar(1.0, element_phase(column, e, theta, kd)))
        .collect())
}

/// `f_i(m) = 1/M` on every element.
pub fn uniform_allocation(element_count: usize) -> Vec<f64> {
    vec![1.0 / element_count as f64; element_count]
}

fn check_allocation(allocation: &[f64]) -> Result<()> {
    if allocation.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(invalid("amplitude_allocation", "entries must be finite and >= 0"));
    }
    Ok(())
}

/// Beam weight `sqrt(f_i D_i)`, with `f_i` the summed amplitude allocation.
///
/// Every beam of the grid shares the same directivity, so `beam_index` and
/// `theta_b` only select which beam is being weighted.
pub fn beam_weight(
    beam_index: usize,
    theta_b: f64,
    cfg: &ArrayConfig,
    grid: &BeamGrid,
    amplitude_allocation: &[f64],
) -> Result<f64> {
    if beam_index >= grid.beam_count() {
        return Err(invalid("beam_index", format!("{beam_index} >= beam count {}", grid.beam_count())));
    }
    if !theta_b.is_finite() {
        return Err(invalid("theta_b", "must be finite"));
    }
    check_allocation(amplitude_allocation)?;
    let power: f64 = amplitude_allocation.iter().sum();
    Ok((power * directivity(cfg, grid.beam_count())?).sqrt())
}

/// Weighted sum of the steering-vector elements at `theta`.
pub fn array_factor(
    column: ArrayView1<'_, f64>,
    theta: f64,
    cfg: &ArrayConfig,
    amplitude_allocation: &[f64],
) -> Result<Complex64> {
    let m = check_column(column, cfg)?;
    if amplitude_allocation.len() != m {
        return Err(invalid(
            "amplitude_allocation",
            format!("length {} does not match {m} elements", amplitude_allocation.len()),
        ));
    }
    check_allocation(amplitude_allocation)?;
    let kd = cfg.wavenumber() * cfg.spacing();
    Ok(amplitude_allocation
        .iter()
        .enumerate()
        .map(|(e, a)| Complex64::from_polar(*a, element_phase(column, e, theta, kd)))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern {
    pub angles: Vec<f64>,
    pub normalized_gain: Vec<f64>,
    pub peak_angle: f64,
    pub measured_hpbw: f64,
    pub measured_directivity: f64,
}

/// Minimum number of samples above half power for the main lobe to count as
/// resolved.
const MIN_LOBE_SAMPLES: usize = 5;

/// Sample `|AF|²` with unit amplitudes over `[0, π]`, then measure the
/// half-power width around the peak (linear interpolation of the crossings)
/// and the directivity `2 / ∫ |AF_n|² sin θ dθ` (trapezoid rule).
///
/// A pattern that never drops to half power reports the full sampled span.
pub fn measure_pattern(column: ArrayView1<'_, f64>, cfg: &ArrayConfig, angular_resolution: f64) -> Result<BeamPattern> {
    let m = check_column(column, cfg)?;
    require_positive("angular_resolution", angular_resolution)?;
    let intervals = (PI / angular_resolution).ceil() as usize;
    if intervals < 2 {
        return Err(Error::UnresolvedMainLobe {
            reason: format!("resolution {angular_resolution} rad gives fewer than 3 samples"),
        });
    }
    let step = PI / intervals as f64;
    let ones = vec![1.0; m];
    let angles: Vec<f64> = (0..=intervals).map(|k| k as f64 * step).collect();
    let power = angles
        .par_iter()
        .map(|&theta| array_factor(column, theta, cfg, &ones).map(|af| af.norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;

    let (peak_idx, peak) = power
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best });
    let gain: Vec<f64> = power.iter().map(|p| p / peak).collect();

    let mut lo = peak_idx;
    while lo > 0 && gain[lo - 1] >= 0.5 {
        lo -= 1;
    }
    let mut hi = peak_idx;
    while hi + 1 < gain.len() && gain[hi + 1] >= 0.5 {
        hi += 1;
    }
    if hi - lo + 1 < MIN_LOBE_SAMPLES && !(lo == 0 && hi + 1 == gain.len()) {
        return Err(Error::UnresolvedMainLobe {
            reason: format!(
                "only {} samples above half power at resolution {angular_resolution} rad",
                hi - lo + 1
            ),
        });
    }
    let crossing = |inside: usize, outside: usize| {
        let (g_in, g_out) = (gain[inside], gain[outside]);
        let t = (g_in - 0.5) / (g_in - g_out);
        angles[inside] + t * (angles[outside] - angles[inside])
    };
    let left = if lo == 0 { angles[0] } else { crossing(lo, lo - 1) };
    let right = if hi + 1 == gain.len() { angles[hi] } else { crossing(hi, hi + 1) };

    let integrand: Vec<f64> = angles.iter().zip(&gain).map(|(t, g)| g * t.sin()).collect();
    let integral = step * (integrand.iter().sum::<f64>() - 0.5 * (integrand[0] + integrand[intervals]));

    Ok(BeamPattern {
        peak_angle: angles[peak_idx],
        measured_hpbw: right - left,
        measured_directivity: 2.0 / integral,
        angles,
        normalized_gain: gain,
    })
}

/// Write the mapper as CSV: a `# center_angles_rad=` line, a header row
/// `beam_0,...`, then one row per element with 17 significant digits.
pub fn write_mapper_csv<W: Write>(mapper: &PhaseMapper, mut out: W) -> std::io::Result<()> {
    let centers: Vec<String> = mapper.beam_center_angles.iter().map(|a| format!("{a:.16e}")).collect();
    writeln!(out, "# center_angles_rad={}", centers.join(";"))?;
    let header: Vec<String> = (0..mapper.beam_count()).map(|i| format!("beam_{i}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in mapper.phases.rows() {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Read a mapper written by [`write_mapper_csv`]. Other `#` lines are ignored.
pub fn read_mapper_csv<R: BufRead>(input: R) -> Result<PhaseMapper> {
    let bad = |msg: String| Error::MalformedMapper(msg);
    let mut centers: Option<Vec<f64>> = None;
    let mut header_seen = false;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some(list) = meta.trim().strip_prefix("center_angles_rad=") {
                let parsed = list
                    .split(';')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
                centers = Some(parsed);
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    let centers = centers.ok_or_else(|| bad("missing center_angles_rad line".into()))?;
    let n = centers.len();
    if rows.is_empty() || rows.iter().any(|r| r.len() != n) {
        return Err(bad(format!("expected at least one row of {n} phases")));
    }
    let m = rows.len();
    let phases = Array2::from_shape_vec((m, n), rows.into_iter().flatten().collect())
        .map_err(|e| bad(e.to_string()))?;
    Ok(PhaseMapper {
        phases,
        beam_center_angles: centers,
    })
}
