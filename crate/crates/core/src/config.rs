//! Scenario configuration documents.
//!
//! A document is JSON. The `fibre`, `scenario` and `filters` sections take
//! either a preset name or an inline object; everything else is optional and
//! falls back to the defaults below.
//!
//! ```json
//! {
//!   "fibre": "smf",
//!   "scenario": "s1_200GHz",
//!   "sweep": { "powers_dbm": { "start": -30, "stop": 0, "step": 1 } }
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::link::{DetectorSpec, FibreSpec, FilterChain, Problem};
use crate::nonlinear::{check_frequencies, ChannelPlan};
use crate::planner::{BandLayout, Environment, Grid};
use crate::presets::{self, Baseline, PresetKind, Scenario};
use crate::qkd::{calibrate_baseline, CowParams};
use crate::spectra::{RamanSpectrum, DEFAULT_TEMPERATURE_K};

/// One problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Dotted path of the offending field, e.g. `fibre.attenuation_db_per_km`.
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("{}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// A preset name or an inline value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Preset(String),
    Inline(T),
}

impl<T: Clone> Source<T> {
    fn resolve(&self, lookup: fn(&str) -> Option<T>) -> Option<T> {
        match self {
            Source::Preset(name) => lookup(name),
            Source::Inline(v) => Some(v.clone()),
        }
    }

    pub fn preset_name(&self) -> Option<&str> {
        match self {
            Source::Preset(name) => Some(name),
            Source::Inline(_) => None,
        }
    }
}

fn default_filters() -> Source<FilterChain> {
    Source::Preset("table1_chain".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanSection {
    /// Two-column table file; relative paths are taken from the config's
    /// directory. The bundled table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE_K
}

impl Default for RamanSection {
    fn default() -> Self {
        Self {
            table: None,
            temperature_k: DEFAULT_TEMPERATURE_K,
        }
    }
}

fn default_power_grid() -> Grid {
    Grid::new(-30.0, 0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_power_grid")]
    pub powers_dbm: Grid,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            powers_dbm: default_power_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSection {
    #[serde(default = "default_placement_power")]
    pub power_dbm: f64,
    #[serde(default = "Grid::default_spacing")]
    pub spacing_ghz: Grid,
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default = "default_pitch")]
    pub pitch_ghz: f64,
}

fn default_placement_power() -> f64 {
    -24.0
}

fn default_channels() -> usize {
    8
}

fn default_pitch() -> f64 {
    50.0
}

impl Default for PlacementSection {
    fn default() -> Self {
        Self {
            power_dbm: default_placement_power(),
            spacing_ghz: Grid::default_spacing(),
            channels: default_channels(),
            pitch_ghz: default_pitch(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizeSection {
    #[serde(default = "default_power_grid")]
    pub powers_dbm: Grid,
    /// Lowers every filter stage's isolation by this much, dB.
    #[serde(default)]
    pub isolation_reduction_db: f64,
}

impl Default for CharacterizeSection {
    fn default() -> Self {
        Self {
            powers_dbm: default_power_grid(),
            isolation_reduction_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverSection {
    #[serde(default = "default_crossover_spacings")]
    pub spacings_ghz: Vec<f64>,
}

fn default_crossover_spacings() -> Vec<f64> {
    vec![200.0]
}

impl Default for CrossoverSection {
    fn default() -> Self {
        Self {
            spacings_ghz: default_crossover_spacings(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Used when no output directory is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub fibre: Source<FibreSpec>,
    pub scenario: Source<Scenario>,
    #[serde(default = "default_filters")]
    pub filters: Source<FilterChain>,
    #[serde(default)]
    pub detector: DetectorSpec,
    /// Template for calibration, or the final parameters when no
    /// calibration target exists.
    #[serde(default)]
    pub cow: CowParams,
    /// Overrides the scenario's baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Baseline>,
    #[serde(default)]
    pub raman: RamanSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub placement: PlacementSection,
    #[serde(default)]
    pub characterize: CharacterizeSection,
    #[serde(default)]
    pub crossover: CrossoverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ScenarioConfig {
    /// A config built from preset names with all other sections defaulted.
    pub fn from_presets(fibre: &str, scenario: &str) -> Self {
        Self {
            fibre: Source::Preset(fibre.into()),
            scenario: Source::Preset(scenario.into()),
            filters: default_filters(),
            detector: DetectorSpec::default(),
            cow: CowParams::default(),
            calibration: None,
            raman: RamanSection::default(),
            sweep: SweepSection::default(),
            placement: PlacementSection::default(),
            characterize: CharacterizeSection::default(),
            crossover: CrossoverSection::default(),
            output: OutputSection::default(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>, preset_overrides: &[String]) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base, preset_overrides).map_err(ConfigError::Invalid)
    }

    /// Parses and fully validates a document. `--preset` style overrides are
    /// applied before validation.
    pub fn parse(text: &str, base_dir: &Path, preset_overrides: &[String]) -> Result<Self, Vec<Diagnostic>> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| vec![Diagnostic::new("", e.to_string())])?;
        let Value::Object(map) = &mut value else {
            return Err(vec![Diagnostic::new("", "document must be a JSON object")]);
        };

        let mut diags = Vec::new();
        for name in preset_overrides {
            let section = match presets::kind_of(name) {
                Some(PresetKind::Fibre) => "fibre",
                Some(PresetKind::Scenario) => "scenario",
                Some(PresetKind::FilterChain) => "filters",
                None => {
                    diags.push(Diagnostic::new("--preset", format!("unknown preset `{name}`")));
                    continue;
                }
            };
            map.insert(section.into(), Value::String(name.clone()));
        }

        for (section, required) in [("fibre", true), ("scenario", true), ("filters", false)] {
            match map.get(section) {
                None if required => diags.push(Diagnostic::new(
                    section,
                    format!("missing {section}: give a preset name or an inline object"),
                )),
                None => {}
                Some(Value::String(name)) => {
                    if !preset_exists(section, name) {
                        diags.push(Diagnostic::new(
                            section,
                            format!(
                                "unknown {section} preset `{name}` (known: {})",
                                known_presets(section).join(", ")
                            ),
                        ));
                    }
                }
                Some(v @ Value::Object(_)) => {
                    let check = match section {
                        "fibre" => typed_check::<FibreSpec>(section, v),
                        "scenario" => typed_check::<Scenario>(section, v),
                        _ => typed_check::<FilterChain>(section, v),
                    };
                    diags.extend(check);
                }
                Some(_) => diags.push(Diagnostic::new(section, "expected a preset name or an object")),
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        let mut config: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(|e| vec![path_error(&e)])?;
        config.base_dir = base_dir.to_path_buf();
        let diags = config.diagnostics();
        if diags.is_empty() {
            Ok(config)
        } else {
            Err(diags)
        }
    }

    /// Semantic checks on an already-parsed config.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();

        match self.fibre_spec() {
            Some(f) => push(&mut out, "fibre", f.problems()),
            None => push_unknown(&mut out, "fibre", &self.fibre),
        }
        match self.filter_chain() {
            Some(chain) => {
                for (i, s) in chain.tx.iter().enumerate() {
                    push(&mut out, &format!("filters.tx[{i}]"), s.problems());
                }
                for (i, s) in chain.rx.iter().enumerate() {
                    push(&mut out, &format!("filters.rx[{i}]"), s.problems());
                }
                push(&mut out, "filters.passband", chain.passband.problems());
            }
            None => push_unknown(&mut out, "filters", &self.filters),
        }
        push(&mut out, "detector", self.detector.problems());
        push(&mut out, "cow", self.cow.problems());

        match self.scenario_spec() {
            Some(s) => {
                if s.classical_thz.is_empty() {
                    out.push(Diagnostic::new(
                        "scenario.classical_thz",
                        "needs at least one classical channel",
                    ));
                } else if let Err(reason) = check_frequencies(s.quantum_thz, &s.classical_thz) {
                    out.push(Diagnostic::new(
                        "scenario.classical_thz",
                        format!("violates the ChannelPlan invariant: {reason}"),
                    ));
                }
                if self.calibration.is_none() {
                    if let Some(b) = &s.baseline {
                        baseline_problems(&mut out, "scenario.baseline", b, self.cow.qber_cutoff);
                    }
                }
            }
            None => push_unknown(&mut out, "scenario", &self.scenario),
        }
        if let Some(b) = &self.calibration {
            baseline_problems(&mut out, "calibration", b, self.cow.qber_cutoff);
        }

        let t = self.raman.temperature_k;
        if !(t.is_finite() && t > 0.0) {
            out.push(Diagnostic::new("raman.temperature_k", format!("must be > 0, got {t}")));
        }
        if let Some(table) = &self.raman.table {
            let path = self.base_dir.join(table);
            let temperature = if t.is_finite() && t > 0.0 {
                t
            } else {
                DEFAULT_TEMPERATURE_K
            };
            if let Err(e) = RamanSpectrum::from_file(&path, temperature) {
                out.push(Diagnostic::new("raman.table", e.to_string()));
            }
        }

        grid_problems(&mut out, "sweep.powers_dbm", &self.sweep.powers_dbm);
        grid_problems(&mut out, "placement.spacing_ghz", &self.placement.spacing_ghz);
        grid_problems(&mut out, "characterize.powers_dbm", &self.characterize.powers_dbm);
        if self.placement.spacing_ghz.start <= 0.0 {
            out.push(Diagnostic::new("placement.spacing_ghz.start", "must be > 0"));
        }
        if self.placement.channels == 0 {
            out.push(Diagnostic::new("placement.channels", "must be at least 1"));
        }
        if !(self.placement.pitch_ghz.is_finite() && self.placement.pitch_ghz > 0.0) {
            out.push(Diagnostic::new("placement.pitch_ghz", "must be > 0"));
        }
        if !self.placement.power_dbm.is_finite() {
            out.push(Diagnostic::new("placement.power_dbm", "must be finite"));
        }
        let r = self.characterize.isolation_reduction_db;
        if !(r.is_finite() && r >= 0.0) {
            out.push(Diagnostic::new("characterize.isolation_reduction_db", "must be >= 0"));
        }
        if self.crossover.spacings_ghz.is_empty() {
            out.push(Diagnostic::new("crossover.spacings_ghz", "needs at least one spacing"));
        }
        for (i, s) in self.crossover.spacings_ghz.iter().enumerate() {
            if !(s.is_finite() && *s > 0.0) {
                out.push(Diagnostic::new(format!("crossover.spacings_ghz[{i}]"), "must be > 0"));
            }
        }
        out
    }

    pub fn fibre_spec(&self) -> Option<FibreSpec> {
        self.fibre.resolve(presets::fibre)
    }

    pub fn scenario_spec(&self) -> Option<Scenario> {
        self.scenario.resolve(presets::scenario)
    }

    pub fn filter_chain(&self) -> Option<FilterChain> {
        self.filters.resolve(presets::filter_chain)
    }

    /// Short label for output files: the fibre and scenario preset names,
    /// or `custom` for inline sections.
    pub fn tag(&self) -> String {
        format!(
            "{}_{}",
            self.fibre.preset_name().unwrap_or("custom"),
            self.scenario.preset_name().unwrap_or("custom")
        )
    }

    /// The calibration target in force, if any.
    pub fn baseline(&self) -> Option<Baseline> {
        self.calibration
            .or_else(|| self.scenario_spec().and_then(|s| s.baseline))
    }

    /// The scenario's channel plan with zero launch power.
    pub fn plan(&self) -> crate::Result<ChannelPlan> {
        let s = self
            .scenario_spec()
            .ok_or_else(|| crate::error::invalid("scenario", "unresolved"))?;
        ChannelPlan::uniform(s.quantum_thz, s.classical_thz, f64::NEG_INFINITY)
    }

    pub fn layout(&self) -> crate::Result<BandLayout> {
        let s = self
            .scenario_spec()
            .ok_or_else(|| crate::error::invalid("scenario", "unresolved"))?;
        Ok(BandLayout {
            quantum_thz: s.quantum_thz,
            channels: self.placement.channels,
            pitch_ghz: self.placement.pitch_ghz,
        })
    }

    pub fn spectrum(&self) -> crate::Result<RamanSpectrum> {
        match &self.raman.table {
            Some(t) => RamanSpectrum::from_file(self.base_dir.join(t), self.raman.temperature_k),
            None => RamanSpectrum::bundled(self.raman.temperature_k),
        }
    }

    /// Builds the evaluation environment, calibrating the COW parameters
    /// against the baseline when one is configured.
    pub fn environment(&self) -> crate::Result<Environment> {
        let plan = self.plan()?;
        let filters = self
            .filter_chain()
            .ok_or_else(|| crate::error::invalid("filters", "unresolved"))?
            .tuned_to(&plan);
        let cow = match self.baseline() {
            Some(b) => calibrate_baseline(b.skr_bps, b.qber, &self.detector, &self.cow)?,
            None => self.cow.clone(),
        };
        Ok(Environment {
            spectrum: self.spectrum()?,
            filters,
            detector: self.detector.clone(),
            cow,
        })
    }

    /// Canonical JSON of the config.
    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }
}

fn push(out: &mut Vec<Diagnostic>, prefix: &str, problems: Vec<Problem>) {
    out.extend(
        problems
            .into_iter()
            .map(|p| Diagnostic::new(format!("{prefix}.{}", p.field), p.reason)),
    );
}

fn preset_exists(section: &str, name: &str) -> bool {
    match section {
        "fibre" => presets::fibre(name).is_some(),
        "scenario" => presets::scenario(name).is_some(),
        _ => presets::filter_chain(name).is_some(),
    }
}

fn known_presets(section: &str) -> Vec<String> {
    match section {
        "fibre" => presets::fibre_names(),
        "scenario" => presets::scenario_names(),
        _ => presets::filter_chain_names(),
    }
}

fn push_unknown<T>(out: &mut Vec<Diagnostic>, section: &str, source: &Source<T>) {
    if let Source::Preset(name) = source {
        out.push(Diagnostic::new(section, format!("unknown {section} preset `{name}`")));
    }
}

fn typed_check<T: DeserializeOwned>(section: &str, v: &Value) -> Option<Diagnostic> {
    serde_path_to_error::deserialize::<_, T>(v.clone()).err().map(|e| {
        let mut d = path_error(&e);
        d.path = if d.path.is_empty() || d.path == "." {
            section.to_owned()
        } else {
            format!("{section}.{}", d.path)
        };
        d
    })
}

fn path_error<E: fmt::Display>(e: &serde_path_to_error::Error<E>) -> Diagnostic {
    let path = e.path().to_string();
    Diagnostic::new(if path == "." { String::new() } else { path }, e.inner().to_string())
}

fn baseline_problems(out: &mut Vec<Diagnostic>, prefix: &str, b: &Baseline, cutoff: f64) {
    if !(b.skr_bps.is_finite() && b.skr_bps > 0.0) {
        out.push(Diagnostic::new(
            format!("{prefix}.skr_bps"),
            format!("must be > 0, got {}", b.skr_bps),
        ));
    }
    if !(b.qber > 0.0 && b.qber < cutoff) {
        out.push(Diagnostic::new(
            format!("{prefix}.qber"),
            format!("must lie in (0, {cutoff}), got {}", b.qber),
        ));
    }
}

fn grid_problems(out: &mut Vec<Diagnostic>, prefix: &str, g: &Grid) {
    if let Err(crate::Error::InvalidParameter { field, reason }) = g.points() {
        out.push(Diagnostic::new(format!("{prefix}.{field}"), reason));
    }
}

/// Significant digits kept by [`canonical_json`].
pub const CANONICAL_DIGITS: usize = 12;

/// Rounds `x` to [`CANONICAL_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", CANONICAL_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Serializes `value` as indented JSON with sorted keys and floats rounded
/// to 12 significant digits. Non-finite floats become `null`.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    use std::fmt::Write;
    let indent = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = round_significant(n.as_f64().unwrap_or(f64::NAN));
                if x.is_finite() {
                    write!(out, "{x:?}").ok();
                } else {
                    out.push_str("null");
                }
            } else {
                write!(out, "{n}").ok();
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], depth + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push('}');
        }
    }
}
