//! Spontaneous Raman scattering spectrum of the fibre.
//!
//! The table holds the Stokes-branch coefficient as a function of the
//! pump-probe detuning; the anti-Stokes branch follows from detailed balance
//! at the spectrum's temperature.

use std::path::Path;

use crate::error::{Error, Result};
pub use crate::units::{BOLTZMANN, PLANCK};

/// Default operating temperature, K.
pub const DEFAULT_TEMPERATURE_K: f64 = 293.0;

/// Version tag of the bundled table. Bump when the data asset changes.
pub const BUNDLED_TABLE_VERSION: &str = "silica-v1";

const BUNDLED_TABLE: &str = include_str!("../data/raman_silica_v1.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    AntiStokes,
    Stokes,
}

/// Tabulated spontaneous Raman coefficient, 1/(km·GHz): the fraction of
/// launch power scattered per km of fibre into each GHz of receiver
/// bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanSpectrum {
    detunings_ghz: Vec<f64>,
    stokes: Vec<f64>,
    temperature_k: f64,
}

impl RamanSpectrum {
    /// Builds a spectrum from `(detuning GHz, Stokes coefficient)` rows.
    /// Rows may arrive in any order; they are sorted on return.
    pub fn from_table(mut rows: Vec<(f64, f64)>, temperature_k: f64) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::EmptyTable(rows.len()));
        }
        if !(temperature_k.is_finite() && temperature_k > 0.0) {
            return Err(crate::error::invalid(
                "temperature_k",
                format!("must be positive, got {temperature_k}"),
            ));
        }
        for &(d, c) in &rows {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::NegativeDetuning(d));
            }
            if !c.is_finite() || c < 0.0 {
                return Err(Error::NegativeCoefficient {
                    detuning_ghz: d,
                    value: c,
                });
            }
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateDetuning(w[0].0));
        }
        let (detunings_ghz, stokes) = rows.into_iter().unzip();
        Ok(Self {
            detunings_ghz,
            stokes,
            temperature_k,
        })
    }

    /// The bundled silica table at the given temperature.
    pub fn bundled(temperature_k: f64) -> Result<Self> {
        Self::from_table(parse_table(BUNDLED_TABLE)?, temperature_k)
    }

    pub fn from_file(path: impl AsRef<Path>, temperature_k: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::TableParse {
            line: 0,
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_table(parse_table(&text)?, temperature_k)
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn detunings_ghz(&self) -> &[f64] {
        &self.detunings_ghz
    }

    pub fn stokes_coefficients(&self) -> &[f64] {
        &self.stokes
    }

    /// Copy with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            detunings_ghz: self.detunings_ghz.clone(),
            stokes: self.stokes.iter().map(|c| c * factor).collect(),
            temperature_k: self.temperature_k,
        }
    }

    /// Scattering coefficient at `detuning_ghz` for the requested branch.
    ///
    /// Linear interpolation between rows, flat below the first row and zero
    /// beyond the last one.
    pub fn coefficient(&self, detuning_ghz: f64, branch: Branch) -> Result<f64> {
        if detuning_ghz.is_nan() || detuning_ghz < 0.0 {
            return Err(Error::NegativeDetuning(detuning_ghz));
        }
        let stokes = self.interpolate(detuning_ghz);
        Ok(match branch {
            Branch::Stokes => stokes,
            Branch::AntiStokes => stokes * detailed_balance_factor(detuning_ghz, self.temperature_k),
        })
    }

    fn interpolate(&self, x: f64) -> f64 {
        let xs = &self.detunings_ghz;
        let ys = &self.stokes;
        let last = xs.len() - 1;
        if x > xs[last] {
            return 0.0;
        }
        if x <= xs[0] {
            return ys[0];
        }
        // first index with xs[i] >= x; i >= 1 here
        let i = xs.partition_point(|&d| d < x);
        if xs[i] == x {
            return ys[i];
        }
        let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        ys[i - 1] + t * (ys[i] - ys[i - 1])
    }
}

/// Anti-Stokes / Stokes ratio `exp(-h·Δf / (k_B·T))`.
pub fn detailed_balance_factor(detuning_ghz: f64, temperature_k: f64) -> f64 {
    (-PLANCK * detuning_ghz * 1e9 / (BOLTZMANN * temperature_k)).exp()
}

/// Parses the two-column table format: detuning in GHz, Stokes coefficient
/// in 1/(km·GHz), separated by a comma, tab or spaces. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::TableParse {
                line: n + 1,
                reason: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::TableParse {
                line: n + 1,
                reason: format!("`{s}`: {e}"),
            })
        };
        rows.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(rows)
}
