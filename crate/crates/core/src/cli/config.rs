//! Run configuration: JSON document, `key=value` overrides, `_deg` keys, and
//! aggregated validation.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::array_model::{ArrayConfig, ArrayType, DEFAULT_BEAMWIDTH_CONSTANT, SPEED_OF_LIGHT};
use crate::beam_optimizer::DEFAULT_MAX_BEAMS;
use crate::error_model::PositioningErrorModel;
use crate::rail_geometry::DeploymentGeometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub array: ArraySection,
    pub geometry: GeometrySection,
    pub error: ErrorSection,
    pub optimizer: OptimizerSection,
    pub sweep: SweepSection,
    pub codebook: CodebookSection,
    pub traversal: TraversalSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    /// `null` ties the element count to the beam count.
    pub element_count: Option<usize>,
    pub spacing_over_lambda: f64,
    pub carrier_frequency_hz: f64,
    /// Overrides `c / carrier_frequency_hz` when set.
    pub wavelength_m: Option<f64>,
    pub array_type: ArrayType,
    pub beamwidth_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub h_m: f64,
    pub rail_origin_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSection {
    pub sigma_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub p_th: f64,
    pub n_max: usize,
    pub theta_b_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub theta_points: usize,
    pub p_th_list: Vec<f64>,
    pub sigma_min_m: f64,
    pub sigma_max_m: f64,
    pub sigma_points: usize,
    pub target_directivity: f64,
    pub theta_h_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSection {
    pub beam_count: usize,
    /// `null` samples at a twentieth of the half-power beamwidth.
    pub angular_resolution_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraversalSection {
    /// `null` uses the optimizer's beam count at `optimizer.theta_b_rad`.
    pub beam_count: Option<usize>,
    pub speed_mps: f64,
    pub time_step_s: f64,
    /// `null` start and end run a full pass over the sector.
    pub start_m: Option<f64>,
    pub end_m: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub precision: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            array: ArraySection {
                element_count: None,
                spacing_over_lambda: 0.5,
                carrier_frequency_hz: 2.4e9,
                wavelength_m: None,
                array_type: ArrayType::Broadside,
                beamwidth_constant: DEFAULT_BEAMWIDTH_CONSTANT,
            },
            geometry: GeometrySection {
                h_m: 50.0,
                rail_origin_m: 0.0,
            },
            error: ErrorSection { sigma_m: 1.0 },
            optimizer: OptimizerSection {
                p_th: 0.8,
                n_max: DEFAULT_MAX_BEAMS,
                theta_b_rad: FRAC_PI_4,
            },
            sweep: SweepSection {
                theta_points: 50,
                p_th_list: vec![0.7, 0.8, 0.9],
                sigma_min_m: 0.1,
                sigma_max_m: 10.0,
                sigma_points: 100,
                target_directivity: 64.0,
                theta_h_points: 100,
            },
            codebook: CodebookSection {
                beam_count: 64,
                angular_resolution_rad: None,
            },
            traversal: TraversalSection {
                beam_count: None,
                speed_mps: 135.0,
                time_step_s: 1e-3,
                start_m: None,
                end_m: None,
                seed: 42,
            },
            output: OutputSection {
                directory: "out".into(),
                precision: 9,
            },
        }
    }
}

/// Every problem found while loading a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.problems.len())?;
        for p in &self.problems {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn single(problem: String) -> ConfigError {
    ConfigError {
        problems: vec![problem],
    }
}

/// Load the file at `path` (or the defaults when `None`), apply `key=value`
/// overrides, convert `_deg` keys, and validate.
pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| single(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| single(format!("malformed JSON in {}: {e}", p.display())))?
        }
        None => serde_json::to_value(RunConfig::default()).expect("default config serializes"),
    };
    if !doc.is_object() {
        return Err(single("configuration must be a JSON object".into()));
    }

    let mut problems = Vec::new();
    for item in overrides {
        if let Err(p) = apply_override(&mut doc, item) {
            problems.push(p);
        }
    }
    convert_degrees(&mut doc, "", &mut problems);
    problems.extend(missing_keys(&doc));
    if !problems.is_empty() {
        return Err(ConfigError { problems });
    }

    let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| single(format!("schema mismatch: {e}")))?;
    let problems = cfg.validate();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { problems })
    }
}

/// `a.b.c=value`; the value is parsed as JSON, falling back to a string.
fn apply_override(doc: &mut Value, item: &str) -> Result<(), String> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| format!("override `{item}` is not of the form key=value"))?;
    let value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (leaf, parents) = parts.split_last().filter(|(l, _)| !l.is_empty()).ok_or_else(|| format!("empty key in `{item}`"))?;
    let mut node = doc;
    for part in parents {
        node = node
            .as_object_mut()
            .ok_or_else(|| format!("`{key}`: `{part}` is not inside a section"))?
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    let section = node.as_object_mut().ok_or_else(|| format!("`{key}` does not name a field inside a section"))?;
    // an override in one unit replaces the field given in the other
    if let Some(stem) = leaf.strip_suffix("_deg") {
        section.remove(&format!("{stem}_rad"));
    } else if let Some(stem) = leaf.strip_suffix("_rad") {
        section.remove(&format!("{stem}_deg"));
    }
    section.insert(leaf.to_string(), value);
    Ok(())
}

fn convert_degrees(node: &mut Value, path: &str, problems: &mut Vec<String>) {
    let Some(map) = node.as_object_mut() else { return };
    let deg_keys: Vec<String> = map.keys().filter(|k| k.ends_with("_deg")).cloned().collect();
    for key in deg_keys {
        let stem = &key[..key.len() - 4];
        let rad_key = format!("{stem}_rad");
        let full = join(path, &key);
        if map.contains_key(&rad_key) {
            problems.push(format!("`{full}` and `{}` are both set", join(path, &rad_key)));
            continue;
        }
        let value = map.remove(&key).unwrap_or(Value::Null);
        match value {
            Value::Null => {
                map.insert(rad_key, Value::Null);
            }
            v => match v.as_f64() {
                Some(deg) => {
                    map.insert(rad_key, Value::from(deg.to_radians()));
                }
                None => problems.push(format!("`{full}` must be a number of degrees")),
            },
        }
    }
    for (key, child) in map.iter_mut() {
        convert_degrees(child, &join(path, key), problems);
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Required keys are the ones whose default is not `null`.
fn missing_keys(doc: &Value) -> Vec<String> {
    let defaults = serde_json::to_value(RunConfig::default()).expect("default config serializes");
    let mut out = Vec::new();
    collect_missing(&defaults, doc, "", &mut out);
    out
}

fn collect_missing(defaults: &Value, doc: &Value, path: &str, out: &mut Vec<String>) {
    let Some(map) = defaults.as_object() else { return };
    for (key, default) in map {
        let full = join(path, key);
        match doc.get(key) {
            Some(child) if default.is_object() => collect_missing(default, child, &full, out),
            Some(_) => {}
            None if default.is_null() => {}
            None => out.push(format!("missing `{full}`")),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut p = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                p.push(format!("`{name}` must be a finite number > 0 (got {v})"));
            }
        };
        positive("array.spacing_over_lambda", self.array.spacing_over_lambda);
        positive("array.carrier_frequency_hz", self.array.carrier_frequency_hz);
        if let Some(w) = self.array.wavelength_m {
            positive("array.wavelength_m", w);
        }
        positive("array.beamwidth_constant", self.array.beamwidth_constant);
        positive("geometry.h_m", self.geometry.h_m);
        positive("sweep.sigma_min_m", self.sweep.sigma_min_m);
        positive("sweep.sigma_max_m", self.sweep.sigma_max_m);
        positive("sweep.target_directivity", self.sweep.target_directivity);
        if let Some(r) = self.codebook.angular_resolution_rad {
            positive("codebook.angular_resolution_rad", r);
        }
        positive("traversal.speed_mps", self.traversal.speed_mps);
        positive("traversal.time_step_s", self.traversal.time_step_s);

        let mut check = |ok: bool, msg: String| {
            if !ok {
                p.push(msg);
            }
        };
        check(self.array.element_count != Some(0), "`array.element_count` must be >= 1".into());
        check(self.geometry.rail_origin_m.is_finite(), "`geometry.rail_origin_m` must be finite".into());
        let s = self.error.sigma_m;
        check(s.is_finite() && s >= 0.0, format!("`error.sigma_m` must be >= 0 (got {s})"));
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        check(in_unit(self.optimizer.p_th), format!("`optimizer.p_th` must lie in (0, 1) (got {})", self.optimizer.p_th));
        check(
            self.optimizer.n_max.is_power_of_two(),
            format!("`optimizer.n_max` must be a power of two >= 1 (got {})", self.optimizer.n_max),
        );
        check(self.optimizer.theta_b_rad.is_finite(), "`optimizer.theta_b_rad` must be finite".into());
        check(self.sweep.theta_points >= 1, "`sweep.theta_points` must be >= 1".into());
        check(!self.sweep.p_th_list.is_empty(), "`sweep.p_th_list` must not be empty".into());
        for v in &self.sweep.p_th_list {
            check(in_unit(*v), format!("`sweep.p_th_list` entries must lie in (0, 1) (got {v})"));
        }
        check(
            self.sweep.sigma_max_m >= self.sweep.sigma_min_m,
            "`sweep.sigma_max_m` must be >= `sweep.sigma_min_m`".into(),
        );
        check(self.sweep.sigma_points >= 1, "`sweep.sigma_points` must be >= 1".into());
        check(self.sweep.theta_h_points >= 1, "`sweep.theta_h_points` must be >= 1".into());
        check(self.codebook.beam_count >= 1, "`codebook.beam_count` must be >= 1".into());
        check(self.traversal.beam_count != Some(0), "`traversal.beam_count` must be >= 1".into());
        for (name, v) in [("traversal.start_m", self.traversal.start_m), ("traversal.end_m", self.traversal.end_m)] {
            if let Some(v) = v {
                check(v.is_finite(), format!("`{name}` must be finite"));
            }
        }
        match (self.traversal.start_m, self.traversal.end_m) {
            (Some(a), Some(b)) => check(a < b, "`traversal.start_m` must be below `traversal.end_m`".into()),
            (None, None) => {}
            _ => check(false, "`traversal.start_m` and `traversal.end_m` must be set together".into()),
        }
        check(
            (1..=17).contains(&self.output.precision),
            format!("`output.precision` must lie in 1..=17 (got {})", self.output.precision),
        );
        p
    }

    pub fn wavelength(&self) -> f64 {
        self.array
            .wavelength_m
            .unwrap_or(SPEED_OF_LIGHT / self.array.carrier_frequency_hz)
    }

    pub fn array_config(&self) -> crate::Result<ArrayConfig> {
        let lambda = self.wavelength();
        let mut cfg = ArrayConfig::new(self.array.spacing_over_lambda * lambda, lambda)?
            .with_array_type(self.array.array_type)
            .with_beamwidth_constant(self.array.beamwidth_constant)?;
        if let Some(m) = self.array.element_count {
            cfg = cfg.with_element_count(m)?;
        }
        Ok(cfg)
    }

    pub fn geometry(&self) -> crate::Result<DeploymentGeometry> {
        DeploymentGeometry::new(self.geometry.h_m)?.with_rail_origin(self.geometry.rail_origin_m)
    }

    pub fn error_model(&self) -> crate::Result<PositioningErrorModel> {
        PositioningErrorModel::new(self.error.sigma_m)
    }
}
