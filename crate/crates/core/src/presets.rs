//! Named presets bundled with the crate as JSON data assets.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::link::{FibreSpec, FilterChain};

const FIBRES: &str = include_str!("../data/presets/fibres.json");
const SCENARIOS: &str = include_str!("../data/presets/scenarios.json");
const FILTER_CHAINS: &str = include_str!("../data/presets/filters.json");

/// Zero-coexistence operating point a scenario is calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub skr_bps: f64,
    pub qber: f64,
}

/// Channel frequencies of a coexistence scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub quantum_thz: f64,
    pub classical_thz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Baseline>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Fibre,
    Scenario,
    FilterChain,
}

fn table<T: DeserializeOwned>(text: &str) -> BTreeMap<String, T> {
    serde_json::from_str(text).expect("bundled preset asset is valid")
}

pub fn fibre(name: &str) -> Option<FibreSpec> {
    table::<FibreSpec>(FIBRES).remove(name)
}

pub fn scenario(name: &str) -> Option<Scenario> {
    table::<Scenario>(SCENARIOS).remove(name)
}

pub fn filter_chain(name: &str) -> Option<FilterChain> {
    table::<FilterChain>(FILTER_CHAINS).remove(name)
}

pub fn fibre_names() -> Vec<String> {
    table::<FibreSpec>(FIBRES).into_keys().collect()
}

pub fn scenario_names() -> Vec<String> {
    table::<Scenario>(SCENARIOS).into_keys().collect()
}

pub fn filter_chain_names() -> Vec<String> {
    table::<FilterChain>(FILTER_CHAINS).into_keys().collect()
}

/// Which section a preset name belongs to. Names are unique across kinds.
pub fn kind_of(name: &str) -> Option<PresetKind> {
    if fibre(name).is_some() {
        Some(PresetKind::Fibre)
    } else if scenario(name).is_some() {
        Some(PresetKind::Scenario)
    } else if filter_chain(name).is_some() {
        Some(PresetKind::FilterChain)
    } else {
        None
    }
}

/// The preset as a JSON value, for dumping.
pub fn to_value(name: &str) -> Option<serde_json::Value> {
    let v = match kind_of(name)? {
        PresetKind::Fibre => serde_json::to_value(fibre(name)?),
        PresetKind::Scenario => serde_json::to_value(scenario(name)?),
        PresetKind::FilterChain => serde_json::to_value(filter_chain(name)?),
    };
    v.ok()
}
