//! Flat key-value configuration files with `[section]` headers. The format
//! is deliberately plain text so experiment configs diff cleanly and seeds
//! are auditable. Unknown sections or keys are errors: a typo must not
//! silently fall back to a default.

// Validation deliberately writes `!(x > 0)` so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rggperc::bounds::{SupplyPmf, SupplyRequirement};

/// Parse or validation failure; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type SectionMap = BTreeMap<String, BTreeMap<String, String>>;

/// Raw parsed file: section -> key -> value.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub sections: SectionMap,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: SectionMap = BTreeMap::new();
        let mut current: Option<String> = None;
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return Err(ConfigError(format!(
                        "line {}: unterminated section header `{raw_line}`",
                        lineno + 1
                    )));
                };
                let name = name.trim().to_string();
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{raw_line}`",
                    lineno + 1
                )));
            };
            let Some(section) = &current else {
                return Err(ConfigError(format!(
                    "line {}: key `{}` appears before any [section]",
                    lineno + 1,
                    key.trim()
                )));
            };
            let prev = sections
                .get_mut(section)
                .unwrap()
                .insert(key.trim().to_string(), value.trim().to_string());
            if prev.is_some() {
                return Err(ConfigError(format!(
                    "line {}: duplicate key `{}` in [{}]",
                    lineno + 1,
                    key.trim(),
                    section
                )));
            }
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.get(name)
    }

    /// Render the config back to JSON for the run manifest.
    pub fn to_json(&self) -> serde_json::Value {
        let mut root = serde_json::Map::new();
        for (section, keys) in &self.sections {
            let mut obj = serde_json::Map::new();
            for (k, v) in keys {
                obj.insert(k.clone(), serde_json::Value::String(v.clone()));
            }
            root.insert(section.clone(), serde_json::Value::Object(obj));
        }
        serde_json::Value::Object(root)
    }
}

/// Typed reader over one section that records which keys were consumed, so
/// leftovers can be reported as errors.
struct SectionReader<'a> {
    name: &'a str,
    keys: Option<&'a BTreeMap<String, String>>,
    seen: Vec<String>,
}

impl<'a> SectionReader<'a> {
    fn new(raw: &'a RawConfig, name: &'a str) -> Self {
        Self {
            name,
            keys: raw.section(name),
            seen: Vec::new(),
        }
    }

    fn exists(&self) -> bool {
        self.keys.is_some()
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.seen.push(key.to_string());
        self.keys.and_then(|m| m.get(key)).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                ConfigError(format!(
                    "[{}] {key} = `{v}` is not a valid {}",
                    self.name,
                    std::any::type_name::<T>()
                ))
            }),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        self.parse(key)?
            .ok_or_else(|| ConfigError(format!("[{}] is missing required key `{key}`", self.name)))
    }

    fn number_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for part in v.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            out.push(part.parse::<f64>().map_err(|_| {
                ConfigError(format!("[{}] {key}: `{part}` is not a number", self.name))
            })?);
        }
        if out.is_empty() {
            return Err(ConfigError(format!("[{}] {key} is empty", self.name)));
        }
        Ok(Some(out))
    }

    /// `value:prob` pairs separated by commas.
    fn pmf(&mut self, key: &str) -> Result<Option<SupplyPmf<f64>>, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let mut entries = Vec::new();
        for part in v.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let Some((val, prob)) = part.split_once(':') else {
                return Err(ConfigError(format!(
                    "[{}] {key}: `{part}` is not `value:probability`",
                    self.name
                )));
            };
            let val: u32 = val.trim().parse().map_err(|_| {
                ConfigError(format!("[{}] {key}: bad value in `{part}`", self.name))
            })?;
            let prob: f64 = prob.trim().parse().map_err(|_| {
                ConfigError(format!(
                    "[{}] {key}: bad probability in `{part}`",
                    self.name
                ))
            })?;
            entries.push((val, prob));
        }
        let pmf = SupplyPmf::new(entries)
            .map_err(|e| ConfigError(format!("[{}] {key}: {e}", self.name)))?;
        Ok(Some(pmf))
    }

    fn finish(self, errors: &mut Vec<String>) {
        if let Some(keys) = self.keys {
            for k in keys.keys() {
                if !self.seen.contains(k) {
                    errors.push(format!("[{}] has unknown key `{k}`", self.name));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Table1,
    Table2,
    AnalyticCurve,
    McInterval,
    Attack,
    Supply,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::AnalyticCurve => "analytic-curve",
            Self::McInterval => "mc-interval",
            Self::Attack => "attack",
            Self::Supply => "supply",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveBound {
    SquareBond,
    OneDependent,
    TriangleSite,
}

#[derive(Debug, Clone)]
pub enum AttackKind {
    Random {
        q1: f64,
        q2: f64,
    },
    Disk {
        center_x: f64,
        center_y: f64,
        radius: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Geometry {
    pub d1: f64,
    pub d2: f64,
    pub dep: f64,
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub raw: RawConfig,

    // table1 / table2 / attack
    pub sim_seeds: u64,
    pub window_side: f64,

    // analytic-curve / mc-interval / supply
    pub geometry: Option<Geometry>,
    pub curve_bound: Option<CurveBound>,
    pub lam2_grid: Vec<f64>,

    // mc-interval
    pub lam1_min: f64,
    pub lam1_max: f64,
    pub lam1_step: f64,
    pub trials: u32,
    pub confidence: f64,
    pub square_side: Option<f64>,
    pub square_side_lower: Option<f64>,
    pub inset: Option<f64>,

    // attack
    pub model_lam1: f64,
    pub model_lam2: f64,
    pub attack: Option<AttackKind>,

    // supply
    pub need_of_g2: Option<SupplyRequirement<f64>>, // k1: first-graph nodes every second-graph node requires
    pub need_of_g1: Option<SupplyRequirement<f64>>, // k2: second-graph nodes every first-graph node requires
    pub supply_mc_trials: u32,
}

impl ExperimentConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let mut errors: Vec<String> = Vec::new();

        let mut exp = SectionReader::new(&raw, "experiment");
        if !exp.exists() {
            return Err(ConfigError("missing [experiment] section".into()));
        }
        let kind_str: String = exp.require("kind")?;
        let kind = match kind_str.as_str() {
            "table1" => ExperimentKind::Table1,
            "table2" => ExperimentKind::Table2,
            "analytic-curve" => ExperimentKind::AnalyticCurve,
            "mc-interval" => ExperimentKind::McInterval,
            "attack" => ExperimentKind::Attack,
            "supply" => ExperimentKind::Supply,
            other => {
                return Err(ConfigError(format!(
                    "unknown experiment kind `{other}` (expected table1, table2, analytic-curve, mc-interval, attack, or supply)"
                )))
            }
        };
        let seed: u64 = exp.parse("seed")?.unwrap_or(0);
        let threads: usize = exp.parse("threads")?.unwrap_or(0);
        exp.finish(&mut errors);

        let mut out = SectionReader::new(&raw, "output");
        let out_dir: PathBuf = out
            .raw("dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("results"));
        out.finish(&mut errors);

        let mut sim = SectionReader::new(&raw, "simulation");
        let sim_seeds: u64 = sim.parse("seeds")?.unwrap_or(5);
        let default_window = match kind {
            ExperimentKind::Table2 => 30.0,
            ExperimentKind::Attack => 20.0,
            _ => 10.0,
        };
        let window_side: f64 = sim.parse("window")?.unwrap_or(default_window);
        sim.finish(&mut errors);
        if sim_seeds == 0 {
            errors.push("[simulation] seeds must be at least 1".into());
        }
        if !(window_side > 0.0) {
            errors.push("[simulation] window must be positive".into());
        }

        let mut geo = SectionReader::new(&raw, "geometry");
        let geometry = if geo.exists() {
            let d1: f64 = geo.require("d1")?;
            let d2: f64 = geo.require("d2")?;
            let dep: f64 = geo.require("dep")?;
            Some(Geometry { d1, d2, dep })
        } else {
            None
        };
        geo.finish(&mut errors);

        let mut curve = SectionReader::new(&raw, "curve");
        let curve_bound = match curve.raw("bound") {
            None => None,
            Some("square-bond") => Some(CurveBound::SquareBond),
            Some("one-dependent") => Some(CurveBound::OneDependent),
            Some("triangle-site") => Some(CurveBound::TriangleSite),
            Some(other) => {
                return Err(ConfigError(format!(
                    "[curve] unknown bound `{other}` (expected square-bond, one-dependent, or triangle-site)"
                )))
            }
        };
        let curve_grid = curve.number_list("lam2_grid")?;
        curve.finish(&mut errors);

        let mut search = SectionReader::new(&raw, "search");
        let search_grid = search.number_list("lam2_grid")?;
        let lam1_min: f64 = search.parse("lam1_min")?.unwrap_or(0.05);
        let lam1_max: f64 = search.parse("lam1_max")?.unwrap_or(10.0);
        let lam1_step: f64 = search.parse("step")?.unwrap_or(0.05);
        let trials: u32 = search.parse("trials")?.unwrap_or(100);
        let confidence: f64 = search.parse("confidence")?.unwrap_or(0.995);
        let square_side_raw: f64 = search.parse("square_side")?.unwrap_or(0.0);
        let square_side_lower_raw: f64 = search.parse("square_side_lower")?.unwrap_or(0.0);
        let inset_raw: f64 = search.parse("inset")?.unwrap_or(-1.0);
        search.finish(&mut errors);
        let square_side = (square_side_raw > 0.0).then_some(square_side_raw);
        let square_side_lower = (square_side_lower_raw > 0.0).then_some(square_side_lower_raw);
        let inset = (inset_raw >= 0.0).then_some(inset_raw);

        let mut model = SectionReader::new(&raw, "model");
        let model_lam1: f64 = model.parse("lam1")?.unwrap_or(0.0);
        let model_lam2: f64 = model.parse("lam2")?.unwrap_or(0.0);
        model.finish(&mut errors);

        let mut atk = SectionReader::new(&raw, "attack");
        let attack = if atk.exists() {
            let akind: String = atk.require("kind")?;
            let parsed = match akind.as_str() {
                "random" => AttackKind::Random {
                    q1: atk.parse("q1")?.unwrap_or(0.0),
                    q2: atk.parse("q2")?.unwrap_or(0.0),
                },
                "disk" => AttackKind::Disk {
                    center_x: atk.require("center_x")?,
                    center_y: atk.require("center_y")?,
                    radius: atk.require("radius")?,
                },
                other => {
                    return Err(ConfigError(format!(
                        "[attack] unknown kind `{other}` (expected random or disk)"
                    )))
                }
            };
            Some(parsed)
        } else {
            None
        };
        atk.finish(&mut errors);

        let mut sup = SectionReader::new(&raw, "supply");
        let k1_fixed: Option<u32> = sup.parse("k1")?;
        let k1_pmf = sup.pmf("k1_pmf")?;
        let k2_fixed: Option<u32> = sup.parse("k2")?;
        let k2_pmf = sup.pmf("k2_pmf")?;
        let supply_mc_trials: u32 = sup.parse("mc_trials")?.unwrap_or(200_000);
        sup.finish(&mut errors);
        let requirement = |fixed: Option<u32>,
                           pmf: Option<SupplyPmf<f64>>,
                           what: &str|
         -> Result<Option<SupplyRequirement<f64>>, ConfigError> {
            match (fixed, pmf) {
                (Some(_), Some(_)) => Err(ConfigError(format!(
                    "[supply] give either {what} or {what}_pmf, not both"
                ))),
                (Some(k), None) => SupplyRequirement::fixed(k)
                    .map(Some)
                    .map_err(|e| ConfigError(format!("[supply] {what}: {e}"))),
                (None, Some(p)) => Ok(Some(SupplyRequirement::Random(p))),
                (None, None) => Ok(None),
            }
        };
        let need_of_g2 = requirement(k1_fixed, k1_pmf, "k1")?;
        let need_of_g1 = requirement(k2_fixed, k2_pmf, "k2")?;

        // Per-kind requirements and cross-field validation.
        let lam2_grid = match kind {
            ExperimentKind::AnalyticCurve | ExperimentKind::Supply => {
                curve_grid.or(search_grid).unwrap_or_default()
            }
            ExperimentKind::McInterval => search_grid.or(curve_grid).unwrap_or_default(),
            _ => Vec::new(),
        };
        match kind {
            ExperimentKind::Table1 | ExperimentKind::Table2 => {}
            ExperimentKind::AnalyticCurve => {
                let Some(g) = &geometry else {
                    return Err(ConfigError(
                        "analytic-curve requires a [geometry] section".into(),
                    ));
                };
                let Some(bound) = curve_bound else {
                    return Err(ConfigError(
                        "analytic-curve requires [curve] bound = ...".into(),
                    ));
                };
                if lam2_grid.is_empty() {
                    errors.push("analytic-curve requires [curve] lam2_grid".into());
                }
                if matches!(bound, CurveBound::SquareBond | CurveBound::OneDependent) {
                    if g.d1 > g.d2 {
                        errors.push(format!(
                            "the lattice-mapping bounds require d1 <= d2, got d1={} > d2={}",
                            g.d1, g.d2
                        ));
                    }
                    if g.dep < g.d2 / 2.0 {
                        errors.push(format!(
                            "the lattice-mapping bounds require dep >= d2/2, got dep={} < {}",
                            g.dep,
                            g.d2 / 2.0
                        ));
                    }
                }
            }
            ExperimentKind::McInterval => {
                if geometry.is_none() {
                    return Err(ConfigError(
                        "mc-interval requires a [geometry] section".into(),
                    ));
                }
                if lam2_grid.is_empty() {
                    errors.push("mc-interval requires [search] lam2_grid".into());
                }
                if !(lam1_min >= 0.0 && lam1_max >= lam1_min && lam1_step > 0.0) {
                    errors.push(format!(
                        "bad [search] density grid: lam1_min={lam1_min}, lam1_max={lam1_max}, step={lam1_step}"
                    ));
                }
                if !(0.5..1.0).contains(&confidence) {
                    errors.push(format!(
                        "[search] confidence must lie in [0.5, 1), got {confidence}"
                    ));
                }
                if trials == 0 {
                    errors.push("[search] trials must be at least 1".into());
                }
                let g = geometry.as_ref().unwrap();
                let side = square_side.unwrap_or(10.0 * g.d1.max(g.d2));
                let inset = g.d1.max(g.d2) + g.dep;
                if 2.0 * inset >= side {
                    errors.push(format!(
                        "square_side {side} too small: the crossing regions need 2*(max(d1,d2)+dep) = {} < side",
                        2.0 * inset
                    ));
                }
            }
            ExperimentKind::Attack => {
                if geometry.is_none() {
                    return Err(ConfigError("attack requires a [geometry] section".into()));
                }
                if attack.is_none() {
                    return Err(ConfigError("attack requires an [attack] section".into()));
                }
                if !(model_lam1 > 0.0 && model_lam2 > 0.0) {
                    errors.push("attack requires [model] lam1 and lam2 to be positive".into());
                }
                if let Some(AttackKind::Random { q1, q2 }) = &attack {
                    for (name, q) in [("q1", q1), ("q2", q2)] {
                        if !(0.0..=1.0).contains(q) {
                            errors.push(format!("[attack] {name} must lie in [0, 1], got {q}"));
                        }
                    }
                }
            }
            ExperimentKind::Supply => {
                if geometry.is_none() {
                    return Err(ConfigError("supply requires a [geometry] section".into()));
                }
                if need_of_g1.is_none() || need_of_g2.is_none() {
                    return Err(ConfigError(
                        "supply requires [supply] k1 (or k1_pmf) and k2 (or k2_pmf)".into(),
                    ));
                }
                if lam2_grid.is_empty() {
                    errors.push("supply requires [curve] lam2_grid".into());
                }
                if !(lam1_min >= 0.0 && lam1_max >= lam1_min && lam1_step > 0.0) {
                    errors.push(format!(
                        "bad [search] density grid: lam1_min={lam1_min}, lam1_max={lam1_max}, step={lam1_step}"
                    ));
                }
            }
        }
        if let Some(g) = &geometry {
            if !(g.d1 > 0.0 && g.d2 > 0.0 && g.dep > 0.0) {
                errors.push(format!(
                    "[geometry] distances must be positive, got d1={}, d2={}, dep={}",
                    g.d1, g.d2, g.dep
                ));
            }
        }

        if !errors.is_empty() {
            let mut msg = String::from("invalid configuration:");
            for e in &errors {
                let _ = write!(msg, "\n  - {e}");
            }
            return Err(ConfigError(msg));
        }

        Ok(Self {
            kind,
            seed,
            threads,
            out_dir,
            raw,
            sim_seeds,
            window_side,
            geometry,
            curve_bound,
            lam2_grid,
            lam1_min,
            lam1_max,
            lam1_step,
            trials,
            confidence,
            square_side,
            square_side_lower,
            inset,
            model_lam1,
            model_lam2,
            attack,
            need_of_g2,
            need_of_g1,
            supply_mc_trials,
        })
    }
}
