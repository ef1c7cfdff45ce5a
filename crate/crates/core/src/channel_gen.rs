//! Random channel realizations, one block-fading draw per Monte Carlo trial.
//!
//! Satellite links are Rician. On the forward link the direct-wave envelope
//! is lognormal with a given linear-domain mean and variance and a uniform
//! phase, plus a circular Gaussian diffuse part. The return link uses a
//! fixed K-factor with unit total fading power. Ground links between a user
//! and its eavesdropper are Rayleigh with distance-dependent pathloss.
//!
//! Reproducibility: every trial gets its own ChaCha20 stream, and inside a
//! trial every link reads from its own block of that stream. A channel
//! vector drawn with more feeds therefore extends, rather than replaces, the
//! vector drawn with fewer.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::link_budget::{db_to_linear, ground_pathloss_db, GroundChannelParams, LinkBudget};
use crate::CVector;

/// Identifier written into output headers.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9; stream = trial index; one 2^40-word block per link)";

/// Rician fading parameters of the satellite links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingParams {
    /// Mean of the forward-link direct-wave envelope (linear amplitude).
    pub los_mean: f64,
    /// Variance of the forward-link direct-wave envelope.
    pub los_variance: f64,
    /// Power of the forward-link diffuse component.
    pub diffuse_power: f64,
    /// Return-link Rician K-factor.
    pub rl_k_factor_db: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            los_mean: 0.787,
            los_variance: 0.0671,
            diffuse_power: 0.0456,
            rl_k_factor_db: 15.0,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("direct-wave mean", self.los_mean)?;
        ensure_finite("direct-wave variance", self.los_variance)?;
        if self.los_variance < 0.0 {
            return Err(Error::OutOfRange {
                what: "direct-wave variance",
                value: self.los_variance,
                range: "[0, inf)",
            });
        }
        ensure_positive("diffuse power", self.diffuse_power)?;
        ensure_finite("return-link K-factor", self.rl_k_factor_db)?;
        Ok(())
    }

    /// Mean per-feed fading power of the forward link, `m² + σ² + diffuse`.
    pub fn fl_mean_power(&self) -> f64 {
        self.los_mean * self.los_mean + self.los_variance + self.diffuse_power
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkDirection {
    /// Terminal to satellite.
    Return,
    /// Satellite to terminal.
    Forward,
}

/// One fading coefficient split into its direct and diffuse parts.
pub(crate) fn fading_components<R: Rng + ?Sized>(
    rng: &mut R,
    fading: &FadingParams,
    direction: LinkDirection,
) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    let (amplitude, diffuse_power) = match direction {
        LinkDirection::Forward => {
            let m = fading.los_mean;
            let amp = if fading.los_variance > 0.0 {
                let s2 = (1.0 + fading.los_variance / (m * m)).ln();
                let mu = m.ln() - 0.5 * s2;
                LogNormal::new(mu, s2.sqrt())
                    .expect("lognormal parameters are finite")
                    .sample(rng)
            } else {
                m
            };
            (amp, fading.diffuse_power)
        }
        LinkDirection::Return => {
            let k = 10f64.powf(fading.rl_k_factor_db / 10.0);
            ((k / (k + 1.0)).sqrt(), 1.0 / (k + 1.0))
        }
    };
    let diffuse = if diffuse_power > 0.0 {
        circular_gaussian(rng) * diffuse_power.sqrt()
    } else {
        Complex64::new(0.0, 0.0)
    };
    (phase * amplitude, diffuse)
}

/// `CN(0, 1)`.
fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Per-feed satellite channel, scaled by `gains − pathloss`.
pub fn draw_satellite_channel<R: Rng + ?Sized>(
    rng: &mut R,
    n_feeds: usize,
    fading: &FadingParams,
    pathloss_db: f64,
    gains_db: f64,
    direction: LinkDirection,
) -> Result<CVector> {
    if n_feeds < 2 {
        return Err(Error::TooFew {
            what: "satellite feeds",
            min: 2,
            got: n_feeds,
        });
    }
    let scale = db_to_linear(gains_db - pathloss_db)?.sqrt();
    Ok(CVector::from_fn(n_feeds, |_, _| {
        let (los, diffuse) = fading_components(rng, fading, direction);
        (los + diffuse) * scale
    }))
}

/// Rayleigh user→eavesdropper coefficient at `distance_m`.
pub fn draw_ground_channel<R: Rng + ?Sized>(
    rng: &mut R,
    distance_m: f64,
    carrier_freq_hz: f64,
    params: &GroundChannelParams,
    gains_db: f64,
) -> Result<Complex64> {
    let loss = ground_pathloss_db(distance_m, carrier_freq_hz, params.pathloss_exponent)?;
    let scale = db_to_linear(gains_db - loss)?.sqrt();
    Ok(circular_gaussian(rng) * scale)
}

/// All channel coefficients of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Return link, user 1 → satellite feeds.
    pub h_u1_sat: CVector,
    pub h_u2_sat: CVector,
    /// Forward link, satellite feeds → user 1.
    pub h_sat_u1: CVector,
    pub h_sat_u2: CVector,
    /// Forward link, satellite feeds → eavesdropper 1.
    pub h_sat_e1: CVector,
    pub h_sat_e2: CVector,
    /// Ground link, user 1 → eavesdropper 1.
    pub h_u1_e1: Complex64,
    pub h_u2_e2: Complex64,
    pub eve_distances_m: (f64, f64),
}

impl ChannelSet {
    pub fn n_feeds(&self) -> usize {
        self.h_sat_u1.len()
    }
}

/// Everything needed to synthesize a [`ChannelSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_feeds: usize,
    pub fading: FadingParams,
    pub ground: GroundChannelParams,
    pub sat_pathloss_db: f64,
    pub sat_gains_db: f64,
    pub ground_gains_db: f64,
    pub rl_freq_hz: f64,
}

impl ChannelConfig {
    pub fn from_budget(budget: &LinkBudget, n_feeds: usize, fading: FadingParams, ground: GroundChannelParams) -> Self {
        Self {
            n_feeds,
            fading,
            ground,
            sat_pathloss_db: budget.sat_link_pathloss_db,
            sat_gains_db: budget.sat_link_gains_db(),
            ground_gains_db: budget.ground_link_gains_db(),
            rl_freq_hz: budget.rl_freq_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_feeds < 2 {
            return Err(Error::TooFew {
                what: "satellite feeds",
                min: 2,
                got: self.n_feeds,
            });
        }
        self.fading.validate()?;
        self.ground.validate()?;
        ensure_finite("satellite pathloss", self.sat_pathloss_db)?;
        ensure_finite("satellite link gains", self.sat_gains_db)?;
        ensure_finite("ground link gains", self.ground_gains_db)?;
        ensure_positive("return-link frequency", self.rl_freq_hz)?;
        Ok(())
    }
}

/// Links with their own random stream inside a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Link {
    ReturnU1,
    ReturnU2,
    ForwardU1,
    ForwardU2,
    ForwardE1,
    ForwardE2,
    GroundU1E1,
    GroundU2E2,
    EveDistance,
}

/// `(master_seed, trial_index)`: fully determines a trial's channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialSeed {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl TrialSeed {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self { master_seed, trial_index }
    }

    pub fn link_rng(&self, link: Link) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.trial_index);
        rng.set_word_pos((link as u128) << 40);
        rng
    }
}

/// Draws every link of one trial.
pub fn draw_scenario(seed: TrialSeed, config: &ChannelConfig) -> Result<ChannelSet> {
    config.validate()?;
    let sat = |link: Link, direction: LinkDirection| {
        draw_satellite_channel(
            &mut seed.link_rng(link),
            config.n_feeds,
            &config.fading,
            config.sat_pathloss_db,
            config.sat_gains_db,
            direction,
        )
    };
    let (lo, hi) = config.ground.eve_distance_range_m;
    let mut dist_rng = seed.link_rng(Link::EveDistance);
    let mut distance = || if lo < hi { dist_rng.random_range(lo..=hi) } else { lo };
    let d1 = distance();
    let d2 = distance();
    let ground = |link: Link, d: f64| {
        draw_ground_channel(&mut seed.link_rng(link), d, config.rl_freq_hz, &config.ground, config.ground_gains_db)
    };
    Ok(ChannelSet {
        h_u1_sat: sat(Link::ReturnU1, LinkDirection::Return)?,
        h_u2_sat: sat(Link::ReturnU2, LinkDirection::Return)?,
        h_sat_u1: sat(Link::ForwardU1, LinkDirection::Forward)?,
        h_sat_u2: sat(Link::ForwardU2, LinkDirection::Forward)?,
        h_sat_e1: sat(Link::ForwardE1, LinkDirection::Forward)?,
        h_sat_e2: sat(Link::ForwardE2, LinkDirection::Forward)?,
        h_u1_e1: ground(Link::GroundU1E1, d1)?,
        h_u2_e2: ground(Link::GroundU2E2, d2)?,
        eve_distances_m: (d1, d2),
    })
}
