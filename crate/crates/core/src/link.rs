//! Fibre span, filter cascades and gated single-photon detection.
//!
//! Produces the per-source [`NoiseBudget`] seen by the quantum receiver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinear::{self, ChannelPlan};
use crate::spectra::{Branch, RamanSpectrum};
use crate::units::{db_per_km_to_np, db_to_linear, mw_to_dbm, PLANCK};

/// A field-level validation failure, reported with the field name so the
/// configuration layer can attach a document path.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub field: &'static str,
    pub reason: String,
}

impl Problem {
    pub(crate) fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

pub(crate) fn first_problem(problems: Vec<Problem>) -> Result<()> {
    match problems.into_iter().next() {
        None => Ok(()),
        Some(p) => Err(Error::InvalidParameter {
            field: p.field,
            reason: p.reason,
        }),
    }
}

fn finite_at_least(out: &mut Vec<Problem>, field: &'static str, v: f64, min: f64) {
    if !v.is_finite() || v < min {
        out.push(Problem::new(field, format!("must be >= {min}, got {v}")));
    }
}

fn finite_positive(out: &mut Vec<Problem>, field: &'static str, v: f64) {
    if !v.is_finite() || v <= 0.0 {
        out.push(Problem::new(field, format!("must be > 0, got {v}")));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FibreSpec {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    /// Nonlinear coefficient, 1/(W·km).
    pub gamma_per_w_km: f64,
    /// Chromatic dispersion, ps/(nm·km).
    pub dispersion_ps_per_nm_km: f64,
    /// Multiplier on the spontaneous Raman coefficient.
    pub raman_scale: f64,
    /// Multiplier on gamma for four-wave mixing.
    pub fwm_scale: f64,
}

impl FibreSpec {
    /// Standard single-mode fibre, 2 km.
    pub fn smf() -> Self {
        crate::presets::fibre("smf").expect("bundled smf preset")
    }

    /// Hollow-core nested antiresonant nodeless fibre, 2 km.
    pub fn hcnanf() -> Self {
        crate::presets::fibre("hcnanf").expect("bundled hcnanf preset")
    }

    pub fn problems(&self) -> Vec<Problem> {
        let mut out = Vec::new();
        finite_positive(&mut out, "length_km", self.length_km);
        finite_at_least(&mut out, "attenuation_db_per_km", self.attenuation_db_per_km, 0.0);
        finite_at_least(&mut out, "gamma_per_w_km", self.gamma_per_w_km, 0.0);
        if !self.dispersion_ps_per_nm_km.is_finite() {
            out.push(Problem::new("dispersion_ps_per_nm_km", "must be finite"));
        }
        finite_at_least(&mut out, "raman_scale", self.raman_scale, 0.0);
        finite_at_least(&mut out, "fwm_scale", self.fwm_scale, 0.0);
        out
    }

    pub fn validate(&self) -> Result<()> {
        first_problem(self.problems())
    }

    /// Attenuation in nepers/km.
    pub fn alpha_np_per_km(&self) -> f64 {
        db_per_km_to_np(self.attenuation_db_per_km)
    }

    pub fn span_loss_db(&self) -> f64 {
        self.attenuation_db_per_km * self.length_km
    }

    /// `exp(-αL)`.
    pub fn span_transmission(&self) -> f64 {
        (-self.alpha_np_per_km() * self.length_km).exp()
    }
}

/// Effective nonlinear length `(1 - e^(-αL)) / α`, km.
pub fn effective_length(fibre: &FibreSpec) -> f64 {
    let alpha = fibre.alpha_np_per_km();
    let l = fibre.length_km;
    if alpha == 0.0 {
        return l;
    }
    // expm1 keeps precision in the low-loss limit
    -(-alpha * l).exp_m1() / alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterShape {
    FlatTop,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterStage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub center_thz: f64,
    /// Full width, GHz. For gaussian stages this is the FWHM.
    pub bandwidth_ghz: f64,
    pub shape: FilterShape,
    pub insertion_loss_db: f64,
    /// Out-of-band rejection below the in-band level, dB.
    pub isolation_db: f64,
    /// Re-centred on the classical band when a scenario is applied.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub tunable: bool,
}

impl FilterStage {
    pub fn flat_top(center_thz: f64, bandwidth_ghz: f64, insertion_loss_db: f64, isolation_db: f64) -> Self {
        Self {
            name: None,
            center_thz,
            bandwidth_ghz,
            shape: FilterShape::FlatTop,
            insertion_loss_db,
            isolation_db,
            tunable: false,
        }
    }

    pub fn gaussian(center_thz: f64, bandwidth_ghz: f64, insertion_loss_db: f64, isolation_db: f64) -> Self {
        Self {
            shape: FilterShape::Gaussian,
            ..Self::flat_top(center_thz, bandwidth_ghz, insertion_loss_db, isolation_db)
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_owned());
        self
    }

    pub fn problems(&self) -> Vec<Problem> {
        let mut out = Vec::new();
        finite_positive(&mut out, "center_thz", self.center_thz);
        finite_positive(&mut out, "bandwidth_ghz", self.bandwidth_ghz);
        finite_at_least(&mut out, "insertion_loss_db", self.insertion_loss_db, 0.0);
        finite_at_least(&mut out, "isolation_db", self.isolation_db, 0.0);
        out
    }

    /// Gaussian power-profile width parameter, GHz.
    fn sigma_ghz(&self) -> f64 {
        self.bandwidth_ghz / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }

    /// True when `freq_thz` lies within ±bandwidth/2 of the center
    /// (edges included, 1 Hz slack).
    pub fn in_band(&self, freq_thz: f64) -> bool {
        let offset_hz = ((freq_thz - self.center_thz) * 1e12).abs();
        offset_hz <= self.bandwidth_ghz * 0.5e9 + 1.0
    }

    /// Transmission at `freq_thz`, dB (always <= 0).
    pub fn transmission_db(&self, freq_thz: f64) -> f64 {
        let rolloff = match self.shape {
            FilterShape::FlatTop => {
                if self.in_band(freq_thz) {
                    0.0
                } else {
                    self.isolation_db
                }
            }
            FilterShape::Gaussian => {
                let x = (freq_thz - self.center_thz) * 1e3 / self.sigma_ghz();
                (10.0 * std::f64::consts::LOG10_E * 0.5 * x * x).min(self.isolation_db)
            }
        };
        -self.insertion_loss_db - rolloff
    }

    /// Width of the ideal rectangular filter passing the same white noise, GHz.
    pub fn noise_equivalent_bandwidth_ghz(&self) -> f64 {
        match self.shape {
            FilterShape::FlatTop => self.bandwidth_ghz,
            FilterShape::Gaussian => {
                self.bandwidth_ghz * (std::f64::consts::PI / (4.0 * std::f64::consts::LN_2)).sqrt()
            }
        }
    }
}

/// Sum of per-stage transmissions in dB; an empty cascade is 0 dB.
pub fn cascade_transmission(stages: &[FilterStage], freq_thz: f64) -> f64 {
    stages.iter().map(|s| s.transmission_db(freq_thz)).sum()
}

/// Filters around the quantum channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterChain {
    /// Classical path from the launch reference into the fibre.
    pub tx: Vec<FilterStage>,
    /// Quantum receive path from the fibre output to the detector.
    pub rx: Vec<FilterStage>,
    /// Integration window for in-band Raman and FWM noise.
    pub passband: FilterStage,
}

impl FilterChain {
    pub fn table1() -> Self {
        crate::presets::filter_chain("table1_chain").expect("bundled filter chain")
    }

    /// Linear transmission of the receive cascade inside the quantum band.
    pub fn rx_in_band_transmission(&self) -> f64 {
        db_to_linear(cascade_transmission(&self.rx, self.passband.center_thz))
    }

    /// Tunable stages re-centred on the midpoint of the plan's classical band.
    pub fn tuned_to(&self, plan: &ChannelPlan) -> Self {
        let lo = plan.classical_thz.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = plan.classical_thz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return self.clone();
        }
        let center = 0.5 * (lo + hi);
        let tune = |stages: &[FilterStage]| {
            stages
                .iter()
                .map(|s| FilterStage {
                    center_thz: if s.tunable { center } else { s.center_thz },
                    ..s.clone()
                })
                .collect()
        };
        Self {
            tx: tune(&self.tx),
            rx: tune(&self.rx),
            passband: self.passband.clone(),
        }
    }

    /// The same chain with every stage's isolation lowered by `db`
    /// (floored at zero).
    pub fn with_isolation_reduced(&self, db: f64) -> Self {
        let lower = |s: &FilterStage| FilterStage {
            isolation_db: (s.isolation_db - db).max(0.0),
            ..s.clone()
        };
        Self {
            tx: self.tx.iter().map(lower).collect(),
            rx: self.rx.iter().map(lower).collect(),
            passband: self.passband.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub gate_duration_s: f64,
    pub efficiency: f64,
    pub gate_rate_hz: f64,
    pub dark_count_prob: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            gate_duration_s: 100e-12,
            efficiency: 0.7,
            gate_rate_hz: 1.25e9,
            dark_count_prob: 1e-5,
        }
    }
}

impl DetectorSpec {
    pub fn problems(&self) -> Vec<Problem> {
        let mut out = Vec::new();
        finite_positive(&mut out, "gate_duration_s", self.gate_duration_s);
        if !(0.0..=1.0).contains(&self.efficiency) {
            out.push(Problem::new(
                "efficiency",
                format!("must be in [0, 1], got {}", self.efficiency),
            ));
        }
        finite_at_least(&mut out, "gate_rate_hz", self.gate_rate_hz, 0.0);
        if !(0.0..=1.0).contains(&self.dark_count_prob) {
            out.push(Problem::new(
                "dark_count_prob",
                format!("must be in [0, 1], got {}", self.dark_count_prob),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonRate {
    pub per_gate: f64,
    pub per_second: f64,
}

/// Detected counts for optical power `power_mw` at `freq_thz`.
pub fn photon_rate(power_mw: f64, freq_thz: f64, det: &DetectorSpec) -> Result<PhotonRate> {
    if power_mw.is_nan() || power_mw < 0.0 {
        return Err(Error::NegativePower(power_mw));
    }
    let photon_energy = PLANCK * freq_thz * 1e12;
    let per_gate = power_mw * 1e-3 * det.gate_duration_s * det.efficiency / photon_energy;
    Ok(PhotonRate {
        per_gate,
        per_second: per_gate * det.gate_rate_hz,
    })
}

/// Spontaneous Raman power from all classical channels landing in the
/// quantum passband at the fibre output, mW. Co-propagating, undepleted
/// pumps. Channels below the quantum frequency scatter on the anti-Stokes
/// branch, channels above it on the Stokes branch.
pub fn raman_in_band_power(
    plan: &ChannelPlan,
    fibre: &FibreSpec,
    spectrum: &RamanSpectrum,
    passband: &FilterStage,
) -> Result<f64> {
    let bandwidth = passband.noise_equivalent_bandwidth_ghz();
    let span = fibre.span_transmission() * fibre.length_km;
    let mut total = 0.0;
    for (&f_ch, &p_ch) in plan.classical_thz.iter().zip(&plan.powers_mw) {
        let branch = if plan.quantum_thz >= f_ch {
            Branch::AntiStokes
        } else {
            Branch::Stokes
        };
        let detuning_ghz = (plan.quantum_thz - f_ch).abs() * 1e3;
        let rho = spectrum.coefficient(detuning_ghz, branch)?;
        total += p_ch * rho;
    }
    Ok(total * fibre.raman_scale * bandwidth * span)
}

/// Classical power reaching the quantum receiver directly through the filter
/// cascades, mW. No fibre term.
pub fn leakage_power(plan: &ChannelPlan, tx: &[FilterStage], rx: &[FilterStage]) -> f64 {
    plan.classical_thz
        .iter()
        .zip(&plan.powers_mw)
        .map(|(&f, &p)| p * db_to_linear(cascade_transmission(tx, f) + cascade_transmission(rx, f)))
        .sum()
}

/// Detected noise counts per source at the quantum receiver, counts/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NoiseBudget {
    pub raman_counts: f64,
    pub fwm_counts: f64,
    pub leakage_counts: f64,
    pub total: f64,
}

impl NoiseBudget {
    pub fn new(raman_counts: f64, fwm_counts: f64, leakage_counts: f64) -> Self {
        Self {
            raman_counts,
            fwm_counts,
            leakage_counts,
            total: raman_counts + fwm_counts + leakage_counts,
        }
    }
}

/// Noise budget for a co-propagating link.
///
/// Raman and FWM power are integrated over `filters.passband` and attenuated
/// by the receive cascade's in-band insertion loss; leakage goes through the
/// full tx+rx cascades. All three are converted at the quantum frequency.
pub fn noise_budget(
    plan: &ChannelPlan,
    fibre: &FibreSpec,
    spectrum: &RamanSpectrum,
    filters: &FilterChain,
    det: &DetectorSpec,
) -> Result<NoiseBudget> {
    let rx = filters.rx_in_band_transmission();
    let raman_mw = raman_in_band_power(plan, fibre, spectrum, &filters.passband)? * rx;
    let fwm_mw = if fibre.fwm_scale == 0.0 || fibre.gamma_per_w_km == 0.0 {
        0.0
    } else {
        nonlinear::in_band_fwm_power(plan, fibre, &filters.passband)? * rx
    };
    let leak_mw = leakage_power(plan, &filters.tx, &filters.rx);
    let f = plan.quantum_thz;
    Ok(NoiseBudget::new(
        photon_rate(raman_mw, f, det)?.per_second,
        photon_rate(fwm_mw, f, det)?.per_second,
        photon_rate(leak_mw, f, det)?.per_second,
    ))
}

/// Leakage-only budget used when no fibre is in the path.
pub fn leakage_budget(plan: &ChannelPlan, filters: &FilterChain, det: &DetectorSpec) -> Result<NoiseBudget> {
    let leak_mw = leakage_power(plan, &filters.tx, &filters.rx);
    Ok(NoiseBudget::new(
        0.0,
        0.0,
        photon_rate(leak_mw, plan.quantum_thz, det)?.per_second,
    ))
}

/// Received power minus sensitivity for each classical channel, dB.
/// Negative margins mark channels the receiver cannot close.
pub fn classical_link_margin(
    plan: &ChannelPlan,
    fibre: &FibreSpec,
    rx_losses_db: f64,
    sensitivity_dbm: f64,
) -> Vec<f64> {
    plan.powers_mw
        .iter()
        .map(|&p| mw_to_dbm(p) - fibre.span_loss_db() - rx_losses_db - sensitivity_dbm)
        .collect()
}
