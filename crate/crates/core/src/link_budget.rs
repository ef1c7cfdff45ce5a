//! Physical constants, unit conversions and the link budget.
//!
//! Everything downstream works in linear units (watts, power ratios). The
//! decibel forms only appear in [`LinkBudget`] and in reports.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::rates::NoiseModel;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Lower and upper edge of the L-band allocation used for both link directions, Hz.
pub const BAND_HZ: (f64, f64) = (1616.0e6, 1626.5e6);

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> Result<f64> {
    ensure_finite("decibel value", db)?;
    Ok(10f64.powf(db / 10.0))
}

/// Converts a positive linear power ratio to decibels.
pub fn linear_to_db(ratio: f64) -> Result<f64> {
    ensure_positive("linear ratio", ratio)?;
    Ok(10.0 * ratio.log10())
}

/// Thermal noise power `k·T·B` in watts, with `k` given in dBW/K/Hz.
pub fn noise_power(k_db: f64, temp_k: f64, bandwidth_hz: f64) -> Result<f64> {
    ensure_positive("noise temperature", temp_k)?;
    ensure_positive("bandwidth", bandwidth_hz)?;
    Ok(db_to_linear(k_db)? * temp_k * bandwidth_hz)
}

/// Terrestrial pathloss `10·log10[(4π/λ)²·d^n]` in dB.
///
/// With `exponent = 2` this is the Friis free-space loss.
pub fn ground_pathloss_db(distance_m: f64, carrier_freq_hz: f64, exponent: f64) -> Result<f64> {
    ensure_positive("distance", distance_m)?;
    ensure_positive("carrier frequency", carrier_freq_hz)?;
    ensure_finite("pathloss exponent", exponent)?;
    let wavelength = SPEED_OF_LIGHT / carrier_freq_hz;
    Ok(20.0 * (4.0 * PI / wavelength).log10() + 10.0 * exponent * distance_m.log10())
}

/// Maximum Doppler shift `v·f/c` seen by a terminal moving at `speed_mps`.
pub fn max_doppler_hz(speed_mps: f64, carrier_freq_hz: f64) -> Result<f64> {
    ensure_finite("speed", speed_mps)?;
    if speed_mps < 0.0 {
        return Err(Error::OutOfRange {
            what: "speed",
            value: speed_mps,
            range: "[0, inf)",
        });
    }
    ensure_positive("carrier frequency", carrier_freq_hz)?;
    Ok(speed_mps * carrier_freq_hz / SPEED_OF_LIGHT)
}

/// L-band LEO link budget. Defaults are the reference system parameters.
///
/// The Boltzmann figure of −226.8 dBW/K/Hz is kept as published for the
/// reference system even though the physical constant is −228.6 dBW/K/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub boltzmann_db: f64,
    pub carrier_bandwidth_hz: f64,
    pub sat_noise_temp_k: f64,
    pub terminal_noise_temp_k: f64,
    pub total_sat_power_dbw: f64,
    /// Power budget of the forward-link beamformer(s).
    pub fl_tx_power_dbw: f64,
    pub user_tx_power_dbw: f64,
    pub sat_antenna_gain_dbi: f64,
    pub terminal_antenna_gain_dbi: f64,
    /// Fixed satellite-path loss, used for both link directions.
    pub sat_link_pathloss_db: f64,
    pub rl_freq_hz: f64,
    pub fl_freq_hz: f64,
    pub sat_doppler_hz: f64,
    pub beams: u32,
    pub feeds_total: u32,
    pub carriers_per_beam: u32,
    pub frequency_reuse_factor: u32,
    pub guard_bandwidth_hz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            boltzmann_db: -226.8,
            carrier_bandwidth_hz: 41_670.0,
            sat_noise_temp_k: 290.0,
            terminal_noise_temp_k: 321.0,
            total_sat_power_dbw: 31.46,
            fl_tx_power_dbw: 7.65,
            user_tx_power_dbw: 0.0,
            sat_antenna_gain_dbi: 24.3,
            terminal_antenna_gain_dbi: 3.5,
            sat_link_pathloss_db: 151.0,
            rl_freq_hz: 1616.0e6,
            fl_freq_hz: 1616.0e6,
            sat_doppler_hz: 270.0,
            beams: 48,
            feeds_total: 318,
            carriers_per_beam: 20,
            frequency_reuse_factor: 12,
            guard_bandwidth_hz: 2_000.0,
        }
    }
}

impl LinkBudget {
    /// Reads a JSON object; missing keys keep their default value.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let budget: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("Boltzmann constant", self.boltzmann_db)?;
        ensure_positive("carrier bandwidth", self.carrier_bandwidth_hz)?;
        ensure_positive("satellite noise temperature", self.sat_noise_temp_k)?;
        ensure_positive("terminal noise temperature", self.terminal_noise_temp_k)?;
        for (what, value) in [
            ("total satellite power", self.total_sat_power_dbw),
            ("forward-link power", self.fl_tx_power_dbw),
            ("user transmit power", self.user_tx_power_dbw),
            ("satellite antenna gain", self.sat_antenna_gain_dbi),
            ("terminal antenna gain", self.terminal_antenna_gain_dbi),
            ("satellite pathloss", self.sat_link_pathloss_db),
            ("satellite Doppler", self.sat_doppler_hz),
            ("guard bandwidth", self.guard_bandwidth_hz),
        ] {
            ensure_finite(what, value)?;
        }
        for (what, freq) in [("RL frequency", self.rl_freq_hz), ("FL frequency", self.fl_freq_hz)] {
            ensure_finite(what, freq)?;
            if !(BAND_HZ.0..=BAND_HZ.1).contains(&freq) {
                return Err(Error::OutOfRange {
                    what,
                    value: freq,
                    range: "[1616 MHz, 1626.5 MHz]",
                });
            }
        }
        // Anything that overflows to inf or underflows to zero here is a broken budget.
        for (what, value) in [
            ("satellite noise power", self.sat_noise_power()?),
            ("terminal noise power", self.terminal_noise_power()?),
            ("forward-link power", self.fl_power_w()?),
            ("user transmit power", self.user_power_w()?),
        ] {
            ensure_positive(what, value)?;
        }
        Ok(())
    }

    pub fn sat_noise_power(&self) -> Result<f64> {
        noise_power(self.boltzmann_db, self.sat_noise_temp_k, self.carrier_bandwidth_hz)
    }

    pub fn terminal_noise_power(&self) -> Result<f64> {
        noise_power(self.boltzmann_db, self.terminal_noise_temp_k, self.carrier_bandwidth_hz)
    }

    pub fn fl_power_w(&self) -> Result<f64> {
        db_to_linear(self.fl_tx_power_dbw)
    }

    pub fn total_sat_power_w(&self) -> Result<f64> {
        db_to_linear(self.total_sat_power_dbw)
    }

    pub fn user_power_w(&self) -> Result<f64> {
        db_to_linear(self.user_tx_power_dbw)
    }

    /// Antenna gains on a user/eavesdropper ↔ satellite hop, dB.
    pub fn sat_link_gains_db(&self) -> f64 {
        self.sat_antenna_gain_dbi + self.terminal_antenna_gain_dbi
    }

    /// Antenna gains on a terminal ↔ terminal hop (user to eavesdropper), dB.
    pub fn ground_link_gains_db(&self) -> f64 {
        2.0 * self.terminal_antenna_gain_dbi
    }

    /// Receiver noise of every node: satellite at its own temperature,
    /// users and eavesdroppers at the terminal temperature.
    pub fn noise_model(&self) -> Result<NoiseModel> {
        let sat = self.sat_noise_power()?;
        let terminal = self.terminal_noise_power()?;
        NoiseModel::new(sat, terminal, terminal, terminal, terminal)
    }
}

/// Terrestrial propagation between a user and its eavesdropper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundChannelParams {
    pub pathloss_exponent: f64,
    pub user_speed_mps: f64,
    /// Eavesdropper distances are drawn uniformly from this range, metres.
    pub eve_distance_range_m: (f64, f64),
}

impl Default for GroundChannelParams {
    fn default() -> Self {
        Self {
            pathloss_exponent: 3.7,
            user_speed_mps: 10.0,
            eve_distance_range_m: (2_000.0, 2_500.0),
        }
    }
}

impl GroundChannelParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("pathloss exponent", self.pathloss_exponent)?;
        if self.pathloss_exponent <= 2.0 {
            return Err(Error::OutOfRange {
                what: "pathloss exponent",
                value: self.pathloss_exponent,
                range: "(2, inf)",
            });
        }
        ensure_finite("user speed", self.user_speed_mps)?;
        let (lo, hi) = self.eve_distance_range_m;
        ensure_positive("minimum eavesdropper distance", lo)?;
        ensure_positive("maximum eavesdropper distance", hi)?;
        if lo > hi {
            return Err(Error::Config(format!(
                "eavesdropper distance range is inverted: {lo} > {hi}"
            )));
        }
        Ok(())
    }

    pub fn max_doppler_hz(&self, carrier_freq_hz: f64) -> Result<f64> {
        max_doppler_hz(self.user_speed_mps, carrier_freq_hz)
    }
}
