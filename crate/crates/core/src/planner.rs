//! Placement of the classical band relative to the quantum channel, and
//! SKR/QBER versus coexistence power.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::link::{noise_budget, DetectorSpec, FibreSpec, FilterChain, NoiseBudget};
use crate::nonlinear::ChannelPlan;
use crate::qkd::{predict, CowParams, QkdPrediction};
use crate::spectra::RamanSpectrum;

/// Everything that stays fixed while a sweep varies spacing or power.
#[derive(Debug, Clone)]
pub struct Environment {
    pub spectrum: RamanSpectrum,
    /// Tunable stages are re-centred on each evaluated plan.
    pub filters: FilterChain,
    pub detector: DetectorSpec,
    /// Calibrated COW parameters.
    pub cow: CowParams,
}

impl Environment {
    pub fn evaluate(&self, plan: &ChannelPlan, fibre: &FibreSpec) -> Result<(NoiseBudget, QkdPrediction)> {
        let budget = noise_budget(
            plan,
            fibre,
            &self.spectrum,
            &self.filters.tuned_to(plan),
            &self.detector,
        )?;
        let prediction = predict(&self.cow, &self.detector, &budget)?;
        Ok((budget, prediction))
    }
}

/// Shape of the classical band: `channels` on a `pitch_ghz` grid below the
/// quantum channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandLayout {
    pub quantum_thz: f64,
    pub channels: usize,
    pub pitch_ghz: f64,
}

impl Default for BandLayout {
    fn default() -> Self {
        Self {
            quantum_thz: 193.70,
            channels: 8,
            pitch_ghz: 50.0,
        }
    }
}

impl BandLayout {
    pub fn plan(&self, spacing_ghz: f64, total_dbm: f64) -> Result<ChannelPlan> {
        ChannelPlan::band_below(self.quantum_thz, spacing_ghz, self.channels, self.pitch_ghz, total_dbm)
    }
}

/// Inclusive arithmetic grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    /// Default placement sweep, GHz.
    pub fn default_spacing() -> Self {
        Self::new(100.0, 3000.0, 50.0)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("step", format!("must be > 0, got {}", self.step)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(invalid(
                "stop",
                format!("must be >= start ({}), got {}", self.start, self.stop),
            ));
        }
        // index-based so points do not accumulate rounding error
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacementPoint {
    pub spacing_ghz: f64,
    pub budget: NoiseBudget,
    pub qber: f64,
    pub skr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementResult {
    pub coexistence_dbm: f64,
    pub points: Vec<PlacementPoint>,
    pub best_spacing_ghz: f64,
    pub worst_spacing_ghz: f64,
    /// Every spacing scored the same; both extrema fall back to the
    /// smallest spacing.
    pub degenerate: bool,
    pub objective: &'static str,
}

impl PlacementResult {
    pub fn spacing_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.spacing_ghz).collect()
    }
}

/// Evaluates every spacing of `grid` and picks the lowest- and highest-QBER
/// placements. Ties go to the smaller spacing.
pub fn best_worst_spacing(
    coexistence_dbm: f64,
    layout: &BandLayout,
    grid: &Grid,
    fibre: &FibreSpec,
    env: &Environment,
) -> Result<PlacementResult> {
    let mut points = Vec::new();
    for spacing in grid.points()? {
        let plan = layout.plan(spacing, coexistence_dbm)?;
        let (budget, pred) = env.evaluate(&plan, fibre)?;
        points.push(PlacementPoint {
            spacing_ghz: spacing,
            budget,
            qber: pred.qber,
            skr: pred.skr,
        });
    }
    let mut best = 0;
    let mut worst = 0;
    for (idx, p) in points.iter().enumerate() {
        if p.qber < points[best].qber {
            best = idx;
        }
        if p.qber > points[worst].qber {
            worst = idx;
        }
    }
    let degenerate = points.iter().all(|p| p.qber == points[0].qber);
    Ok(PlacementResult {
        coexistence_dbm,
        best_spacing_ghz: points[best].spacing_ghz,
        worst_spacing_ghz: points[worst].spacing_ghz,
        degenerate,
        objective: "qber",
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub tag: String,
    pub powers_dbm: Vec<f64>,
    pub skr_bps: Vec<f64>,
    pub qber: Vec<f64>,
    pub budgets: Vec<NoiseBudget>,
}

/// SKR and QBER at each total coexistence power, shared equally over the
/// channels of `plan`.
pub fn power_sweep(
    tag: &str,
    plan: &ChannelPlan,
    powers_dbm: &[f64],
    fibre: &FibreSpec,
    env: &Environment,
) -> Result<SweepCurve> {
    sweep_with(tag, plan, powers_dbm, |p| env.evaluate(p, fibre))
}

/// Like [`power_sweep`] but with no fibre: only filter leakage reaches Bob.
pub fn characterization_sweep(
    tag: &str,
    plan: &ChannelPlan,
    powers_dbm: &[f64],
    env: &Environment,
) -> Result<SweepCurve> {
    sweep_with(tag, plan, powers_dbm, |p| {
        let budget = crate::link::leakage_budget(p, &env.filters.tuned_to(p), &env.detector)?;
        Ok((budget, predict(&env.cow, &env.detector, &budget)?))
    })
}

fn sweep_with(
    tag: &str,
    plan: &ChannelPlan,
    powers_dbm: &[f64],
    eval: impl Fn(&ChannelPlan) -> Result<(NoiseBudget, QkdPrediction)>,
) -> Result<SweepCurve> {
    let mut curve = SweepCurve {
        tag: tag.to_owned(),
        powers_dbm: Vec::with_capacity(powers_dbm.len()),
        skr_bps: Vec::with_capacity(powers_dbm.len()),
        qber: Vec::with_capacity(powers_dbm.len()),
        budgets: Vec::with_capacity(powers_dbm.len()),
    };
    for &p in powers_dbm {
        let (budget, pred) = eval(&plan.with_total_dbm(p))?;
        curve.powers_dbm.push(p);
        curve.skr_bps.push(pred.skr);
        curve.qber.push(pred.qber);
        curve.budgets.push(budget);
    }
    Ok(curve)
}

/// Search bracket for the Raman/FWM crossover, dBm.
pub const CROSSOVER_RANGE_DBM: (f64, f64) = (-40.0, 10.0);
/// Bracket width at which the crossover search stops, dB.
pub const CROSSOVER_TOL_DB: f64 = 1e-3;

/// Total coexistence power at which in-band FWM counts equal Raman counts.
pub fn crossover_power(spacing_ghz: f64, layout: &BandLayout, fibre: &FibreSpec, env: &Environment) -> Result<f64> {
    let (lo_dbm, hi_dbm) = CROSSOVER_RANGE_DBM;
    let no_crossover = Error::NoCrossover { lo_dbm, hi_dbm };
    // FWM cubic, Raman linear: fwm - raman changes sign at most once
    let excess = |dbm: f64| -> Result<f64> {
        let plan = layout.plan(spacing_ghz, dbm)?;
        let b = noise_budget(&plan, fibre, &env.spectrum, &env.filters.tuned_to(&plan), &env.detector)?;
        Ok(b.fwm_counts - b.raman_counts)
    };
    let (mut lo, mut hi) = (lo_dbm, hi_dbm);
    let at_lo = excess(lo)?;
    let at_hi = excess(hi)?;
    if !(at_lo < 0.0 && at_hi >= 0.0) {
        return Err(no_crossover);
    }
    while hi - lo > CROSSOVER_TOL_DB {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
