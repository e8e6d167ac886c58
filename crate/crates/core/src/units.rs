//! Physical constants and unit conversions shared by the model.

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Linear power ratio for a gain given in dB (negative for loss).
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// dB/km to nepers/km (power attenuation coefficient).
pub fn db_per_km_to_np(db_per_km: f64) -> f64 {
    db_per_km * std::f64::consts::LN_10 / 10.0
}

/// THz to integer Hz. Channel grids are exact in Hz, which keeps FWM product
/// frequencies exact.
pub fn thz_to_hz(thz: f64) -> i64 {
    (thz * 1e12).round() as i64
}

pub fn hz_to_thz(hz: i64) -> f64 {
    hz as f64 / 1e12
}
