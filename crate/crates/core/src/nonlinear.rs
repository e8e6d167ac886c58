//! Four-wave mixing among the classical channels.
//!
//! Only the `f_i + f_j - f_k` family is modelled: the other sign
//! combinations land far outside the C-band. The quantum channel does not
//! act as a pump. Products with coincident frequencies are kept separate and
//! their powers add incoherently.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::link::{effective_length, FibreSpec, FilterStage};
use crate::units::{db_to_linear, dbm_to_mw, hz_to_thz, mw_to_dbm, thz_to_hz, SPEED_OF_LIGHT};

/// Quantum channel plus the classical channels sharing the fibre.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan {
    pub quantum_thz: f64,
    pub classical_thz: Vec<f64>,
    /// Launch power per classical channel, mW.
    pub powers_mw: Vec<f64>,
}

impl ChannelPlan {
    pub fn new(quantum_thz: f64, classical_thz: Vec<f64>, powers_mw: Vec<f64>) -> Result<Self> {
        if classical_thz.len() != powers_mw.len() {
            return Err(Error::InvalidPlan(format!(
                "{} frequencies but {} powers",
                classical_thz.len(),
                powers_mw.len()
            )));
        }
        if let Some(p) = powers_mw.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(Error::NegativePower(*p));
        }
        check_frequencies(quantum_thz, &classical_thz).map_err(Error::InvalidPlan)?;
        Ok(Self {
            quantum_thz,
            classical_thz,
            powers_mw,
        })
    }

    /// Channels at `classical_thz` sharing `total_dbm` equally.
    pub fn uniform(quantum_thz: f64, classical_thz: Vec<f64>, total_dbm: f64) -> Result<Self> {
        let n = classical_thz.len();
        let each = if n == 0 { 0.0 } else { dbm_to_mw(total_dbm) / n as f64 };
        Self::new(quantum_thz, classical_thz, vec![each; n])
    }

    /// `count` channels on a `pitch_ghz` grid entirely below the quantum
    /// channel, the nearest one `spacing_ghz` away.
    pub fn band_below(
        quantum_thz: f64,
        spacing_ghz: f64,
        count: usize,
        pitch_ghz: f64,
        total_dbm: f64,
    ) -> Result<Self> {
        Self::uniform(
            quantum_thz,
            band_below(quantum_thz, spacing_ghz, count, pitch_ghz),
            total_dbm,
        )
    }

    /// Total coexistence power, mW.
    pub fn coexistence_power_mw(&self) -> f64 {
        self.powers_mw.iter().sum()
    }

    pub fn coexistence_power_dbm(&self) -> f64 {
        mw_to_dbm(self.coexistence_power_mw())
    }

    /// Same frequencies with every channel power multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            powers_mw: self.powers_mw.iter().map(|p| p * factor).collect(),
            ..self.clone()
        }
    }

    /// Same frequencies, `total_dbm` shared equally.
    pub fn with_total_dbm(&self, total_dbm: f64) -> Self {
        let n = self.classical_thz.len().max(1) as f64;
        Self {
            powers_mw: vec![dbm_to_mw(total_dbm) / n; self.classical_thz.len()],
            ..self.clone()
        }
    }
}

/// Grid frequencies for a band below `quantum_thz`, nearest channel first.
/// Computed in integer Hz so results sit exactly on the grid.
pub fn band_below(quantum_thz: f64, spacing_ghz: f64, count: usize, pitch_ghz: f64) -> Vec<f64> {
    let q = thz_to_hz(quantum_thz);
    let spacing = (spacing_ghz * 1e9).round() as i64;
    let pitch = (pitch_ghz * 1e9).round() as i64;
    (0..count as i64).map(|k| hz_to_thz(q - spacing - k * pitch)).collect()
}

/// Checks the plan's frequency invariants, returning a human-readable reason.
pub(crate) fn check_frequencies(quantum_thz: f64, classical_thz: &[f64]) -> std::result::Result<(), String> {
    if !(quantum_thz.is_finite() && quantum_thz > 0.0) {
        return Err(format!("quantum frequency must be positive, got {quantum_thz}"));
    }
    let q = thz_to_hz(quantum_thz);
    let mut seen = std::collections::BTreeSet::new();
    for &f in classical_thz {
        if !(f.is_finite() && f > 0.0) {
            return Err(format!("classical frequency must be positive, got {f}"));
        }
        let hz = thz_to_hz(f);
        if hz == q {
            return Err(format!("classical channel {f} THz coincides with the quantum channel"));
        }
        if !seen.insert(hz) {
            return Err(format!("duplicate classical frequency {f} THz"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FwmProduct {
    /// Exact product frequency on the Hz grid.
    pub freq_hz: i64,
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub degenerate: bool,
    /// mW; zero until evaluated.
    pub power_mw: f64,
}

impl FwmProduct {
    pub fn freq_thz(&self) -> f64 {
        hz_to_thz(self.freq_hz)
    }
}

/// All `f_i + f_j - f_k` products with `i <= j` and `k ∉ {i, j}`.
pub fn enumerate_products(plan: &ChannelPlan) -> Result<Vec<FwmProduct>> {
    if plan.classical_thz.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let hz: Vec<i64> = plan.classical_thz.iter().map(|&f| thz_to_hz(f)).collect();
    let n = hz.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in (0..n).filter(|&k| k != i && k != j) {
                out.push(FwmProduct {
                    freq_hz: hz[i] + hz[j] - hz[k],
                    i,
                    j,
                    k,
                    degenerate: i == j,
                    power_mw: 0.0,
                });
            }
        }
    }
    Ok(out)
}

/// Linear phase mismatch for a product, 1/km.
pub fn phase_mismatch_per_km(plan: &ChannelPlan, fibre: &FibreSpec, prod: &FwmProduct) -> f64 {
    let f = |idx: usize| plan.classical_thz[idx] * 1e12;
    let lambda = SPEED_OF_LIGHT / f(prod.k);
    // ps/(nm·km) -> s/m²
    let d = fibre.dispersion_ps_per_nm_km * 1e-6;
    let per_m = 2.0 * std::f64::consts::PI * lambda * lambda / SPEED_OF_LIGHT
        * d
        * (f(prod.i) - f(prod.k))
        * (f(prod.j) - f(prod.k));
    per_m * 1e3
}

/// FWM phase-matching efficiency for mismatch `dbeta` (1/km).
pub fn phase_matching_efficiency(alpha_np_per_km: f64, length_km: f64, dbeta: f64) -> f64 {
    let a2 = alpha_np_per_km * alpha_np_per_km;
    let loss = (-alpha_np_per_km * length_km).exp();
    let s = (dbeta * length_km / 2.0).sin();
    let denom = -(-alpha_np_per_km * length_km).exp_m1();
    a2 / (a2 + dbeta * dbeta) * (1.0 + 4.0 * loss * s * s / (denom * denom))
}

/// Output power of one FWM product, mW.
pub fn product_power(plan: &ChannelPlan, fibre: &FibreSpec, prod: &FwmProduct) -> Result<f64> {
    let alpha = fibre.alpha_np_per_km();
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::NonPositiveAttenuation(fibre.attenuation_db_per_km));
    }
    let watts = |idx: usize| plan.powers_mw[idx] * 1e-3;
    let degeneracy: f64 = if prod.degenerate { 3.0 } else { 6.0 };
    let gamma = fibre.gamma_per_w_km * fibre.fwm_scale;
    let leff = effective_length(fibre);
    let eta = phase_matching_efficiency(alpha, fibre.length_km, phase_mismatch_per_km(plan, fibre, prod));
    let p_w = (degeneracy / 3.0).powi(2)
        * gamma
        * gamma
        * watts(prod.i)
        * watts(prod.j)
        * watts(prod.k)
        * fibre.span_transmission()
        * leff
        * leff
        * eta;
    Ok(p_w * 1e3)
}

/// Products with their powers filled in.
pub fn evaluate_products(plan: &ChannelPlan, fibre: &FibreSpec) -> Result<Vec<FwmProduct>> {
    enumerate_products(plan)?
        .into_iter()
        .map(|p| {
            Ok(FwmProduct {
                power_mw: product_power(plan, fibre, &p)?,
                ..p
            })
        })
        .collect()
}

/// Total FWM power inside `passband`, each product weighted by the
/// passband transmission at its frequency, mW.
pub fn in_band_fwm_power(plan: &ChannelPlan, fibre: &FibreSpec, passband: &FilterStage) -> Result<f64> {
    if passband.bandwidth_ghz.is_nan() || passband.bandwidth_ghz <= 0.0 {
        return Err(crate::error::invalid(
            "bandwidth_ghz",
            "passband bandwidth must be positive",
        ));
    }
    if plan.classical_thz.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for prod in enumerate_products(plan)? {
        let f = prod.freq_thz();
        if passband.in_band(f) {
            total += product_power(plan, fibre, &prod)? * db_to_linear(passband.transmission_db(f));
        }
    }
    Ok(total)
}
