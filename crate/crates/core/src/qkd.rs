//! QBER and secret key rate for a COW link.
//!
//! The key rate is a calibrated surrogate,
//! `R = sifting · (signal + noise + dark) · max(0, 1 - f·h2(Q) - h2(Q))`,
//! with a hard zero at the operational QBER cutoff. Half of all noise and
//! dark counts are counted as errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{first_problem, DetectorSpec, NoiseBudget, Problem};
use crate::units::db_to_linear;

pub const DEFAULT_QBER_CUTOFF: f64 = 0.052;

/// Upper bound on bisection steps during calibration.
pub const MAX_CALIBRATION_ITERATIONS: usize = 200;
/// Relative bracket width at which calibration stops.
pub const CALIBRATION_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CowParams {
    pub pulse_rate_hz: f64,
    pub mean_photon_number: f64,
    pub intrinsic_error: f64,
    pub sifting_ratio: f64,
    /// Effective error-correction / privacy-amplification overhead `f`.
    pub ec_efficiency: f64,
    #[serde(default = "default_cutoff")]
    pub qber_cutoff: f64,
    /// End-to-end quantum channel loss, dB.
    #[serde(default = "default_channel_loss")]
    pub channel_loss_db: f64,
}

fn default_cutoff() -> f64 {
    DEFAULT_QBER_CUTOFF
}

fn default_channel_loss() -> f64 {
    10.5
}

impl Default for CowParams {
    /// Uncalibrated template. `intrinsic_error` and `sifting_ratio` are
    /// placeholders overwritten by [`calibrate_baseline`].
    fn default() -> Self {
        Self {
            pulse_rate_hz: 1.25e9,
            mean_photon_number: 0.005,
            intrinsic_error: 0.01,
            sifting_ratio: 0.05,
            ec_efficiency: 2.5,
            qber_cutoff: DEFAULT_QBER_CUTOFF,
            channel_loss_db: 10.5,
        }
    }
}

impl CowParams {
    pub fn problems(&self) -> Vec<Problem> {
        let mut out = Vec::new();
        let mut check = |field: &'static str, ok: bool, range: &str, v: f64| {
            if !ok {
                out.push(Problem::new(field, format!("must be {range}, got {v}")));
            }
        };
        check(
            "pulse_rate_hz",
            self.pulse_rate_hz.is_finite() && self.pulse_rate_hz >= 0.0,
            ">= 0",
            self.pulse_rate_hz,
        );
        check(
            "mean_photon_number",
            self.mean_photon_number.is_finite() && self.mean_photon_number >= 0.0,
            ">= 0",
            self.mean_photon_number,
        );
        check(
            "intrinsic_error",
            (0.0..=0.5).contains(&self.intrinsic_error),
            "in [0, 0.5]",
            self.intrinsic_error,
        );
        check(
            "sifting_ratio",
            self.sifting_ratio > 0.0 && self.sifting_ratio <= 1.0,
            "in (0, 1]",
            self.sifting_ratio,
        );
        check(
            "ec_efficiency",
            self.ec_efficiency.is_finite() && self.ec_efficiency >= 1.0,
            ">= 1",
            self.ec_efficiency,
        );
        check(
            "qber_cutoff",
            self.qber_cutoff > 0.0 && self.qber_cutoff < 0.5,
            "in (0, 0.5)",
            self.qber_cutoff,
        );
        check(
            "channel_loss_db",
            self.channel_loss_db.is_finite(),
            "finite",
            self.channel_loss_db,
        );
        out
    }

    pub fn validate(&self) -> Result<()> {
        first_problem(self.problems())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionRates {
    pub signal: f64,
    pub noise: f64,
    pub dark: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QkdPrediction {
    pub qber: f64,
    pub skr: f64,
    pub signal_counts: f64,
    pub noise_counts: f64,
    pub dark_counts: f64,
}

/// Signal, noise and dark count rates at Bob, counts/s.
pub fn detection_rates(params: &CowParams, det: &DetectorSpec, budget: &NoiseBudget) -> DetectionRates {
    DetectionRates {
        signal: params.pulse_rate_hz
            * params.mean_photon_number
            * db_to_linear(-params.channel_loss_db)
            * det.efficiency,
        noise: budget.total,
        dark: det.dark_count_prob * det.gate_rate_hz,
    }
}

pub fn qber(signal: f64, noise: f64, dark: f64, intrinsic_error: f64) -> Result<f64> {
    let total = signal + noise + dark;
    if total.is_nan() || total <= 0.0 {
        return Err(Error::AllRatesZero);
    }
    let q = (intrinsic_error * signal + 0.5 * (noise + dark)) / total;
    Ok(q.clamp(0.0, 0.5))
}

/// Binary entropy in bits; `h2(0) = h2(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Fraction of the sifted rate that survives error correction and privacy
/// amplification.
pub fn secret_fraction(q: f64, ec_efficiency: f64) -> f64 {
    let h = binary_entropy(q);
    (1.0 - ec_efficiency * h - h).max(0.0)
}

pub fn secret_key_rate(q: f64, signal: f64, noise: f64, dark: f64, params: &CowParams) -> f64 {
    if q >= params.qber_cutoff {
        return 0.0;
    }
    params.sifting_ratio * (signal + noise + dark) * secret_fraction(q, params.ec_efficiency)
}

pub fn predict(params: &CowParams, det: &DetectorSpec, budget: &NoiseBudget) -> Result<QkdPrediction> {
    let r = detection_rates(params, det, budget);
    let q = qber(r.signal, r.noise, r.dark, params.intrinsic_error)?;
    Ok(QkdPrediction {
        qber: q,
        skr: secret_key_rate(q, r.signal, r.noise, r.dark, params),
        signal_counts: r.signal,
        noise_counts: r.noise,
        dark_counts: r.dark,
    })
}

/// Solves for the intrinsic error and the sifting ratio so that the
/// zero-coexistence prediction hits `target_skr` and `target_qber`.
///
/// Pulse rate and mean photon number come from `template`, so they fix the
/// signal rate; the sifting ratio then carries the
/// `pulse_rate · mean_photon_number · sifting_ratio` product. The intrinsic
/// error follows in closed form from the QBER target, the sifting ratio by
/// bisection on `(0, 1]`.
pub fn calibrate_baseline(
    target_skr: f64,
    target_qber: f64,
    det: &DetectorSpec,
    template: &CowParams,
) -> Result<CowParams> {
    if !(target_skr > 0.0 && target_skr.is_finite()) {
        return Err(Error::NoSolution(format!(
            "target SKR must be positive, got {target_skr}"
        )));
    }
    if !(target_qber > 0.0 && target_qber < template.qber_cutoff) {
        return Err(Error::NoSolution(format!(
            "target QBER {target_qber} is outside (0, cutoff {})",
            template.qber_cutoff
        )));
    }
    let rates = detection_rates(template, det, &NoiseBudget::default());
    if rates.signal.is_nan() || rates.signal <= 0.0 {
        return Err(Error::NoSolution("template gives zero signal rate".into()));
    }
    let total = rates.signal + rates.dark;
    let intrinsic = (target_qber * total - 0.5 * rates.dark) / rates.signal;
    if !(0.0..=0.5).contains(&intrinsic) {
        return Err(Error::NoSolution(format!(
            "dark counts ({:.4e}/s) alone exceed the QBER target at signal {:.4e}/s",
            rates.dark, rates.signal
        )));
    }
    let mut params = CowParams {
        intrinsic_error: intrinsic,
        ..template.clone()
    };
    let skr_at = |sifting: f64, params: &mut CowParams| -> Result<f64> {
        params.sifting_ratio = sifting;
        Ok(predict(params, det, &NoiseBudget::default())?.skr)
    };
    let max_skr = skr_at(1.0, &mut params)?;
    if max_skr < target_skr {
        return Err(Error::NoSolution(format!(
            "maximum reachable SKR is {max_skr:.4e} b/s with sifting ratio 1"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..MAX_CALIBRATION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if skr_at(mid, &mut params)? < target_skr {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= CALIBRATION_REL_TOL * hi {
            break;
        }
    }
    params.sifting_ratio = 0.5 * (lo + hi);
    Ok(params)
}
