//! Capacities and secrecy rates for both schemes, in bits per channel use.
//!
//! The carrier bandwidth is left out of every expression, so a rate here is
//! a time fraction times a base-2 log of one plus an SNR.

use serde::{Deserialize, Serialize};

use crate::channel_gen::ChannelSet;
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::CVector;

/// Receiver noise variances, watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma2_sat: f64,
    pub sigma2_u1: f64,
    pub sigma2_u2: f64,
    pub sigma2_e1: f64,
    pub sigma2_e2: f64,
}

impl NoiseModel {
    pub fn new(sat: f64, u1: f64, u2: f64, e1: f64, e2: f64) -> Result<Self> {
        Ok(Self {
            sigma2_sat: ensure_positive("satellite noise", sat)?,
            sigma2_u1: ensure_positive("user 1 noise", u1)?,
            sigma2_u2: ensure_positive("user 2 noise", u2)?,
            sigma2_e1: ensure_positive("eavesdropper 1 noise", e1)?,
            sigma2_e2: ensure_positive("eavesdropper 2 noise", e2)?,
        })
    }

    /// Same variance everywhere; handy in tests.
    pub fn uniform(sigma2: f64) -> Result<Self> {
        Self::new(sigma2, sigma2, sigma2, sigma2, sigma2)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            sigma2_sat: self.sigma2_sat * k,
            sigma2_u1: self.sigma2_u1 * k,
            sigma2_u2: self.sigma2_u2 * k,
            sigma2_e1: self.sigma2_e1 * k,
            sigma2_e2: self.sigma2_e2 * k,
        }
    }
}

/// Transmit powers, watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TxPowers {
    /// Budget of the forward-link beamformer(s).
    pub satellite: f64,
    /// Each user's return-link power.
    pub user: f64,
}

impl TxPowers {
    pub fn new(satellite: f64, user: f64) -> Result<Self> {
        Ok(Self {
            satellite: ensure_positive("satellite power", satellite)?,
            user: ensure_positive("user power", user)?,
        })
    }
}

/// Fractions of the frame given to the return link (`t1`) and to the
/// forward link (`t2`, plus `t3` for the second slot of the reference scheme).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAllocation {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

const TIME_SUM_TOL: f64 = 1e-9;

impl TimeAllocation {
    /// Two-slot split used by XOR network coding; `t3` is zero.
    pub fn two_slot(t1: f64) -> Result<Self> {
        if !(t1 > 0.0 && t1 < 1.0) {
            return Err(Error::TimeAllocation(format!("t1 = {t1} must lie in (0, 1)")));
        }
        Ok(Self { t1, t2: 1.0 - t1, t3: 0.0 })
    }

    /// Three-slot split of the reference scheme, `t3 = 1 − t1 − t2`.
    pub fn three_slot(t1: f64, t2: f64) -> Result<Self> {
        let t3 = 1.0 - t1 - t2;
        let ok = |t: f64| t > 0.0 && t < 1.0;
        if !(ok(t1) && ok(t2) && t3 > 0.0) {
            return Err(Error::TimeAllocation(format!(
                "(t1, t2, t3) = ({t1}, {t2}, {t3}) must all lie in (0, 1)"
            )));
        }
        Ok(Self { t1, t2, t3 })
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.t1, self.t2, self.t3];
        if parts.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::TimeAllocation(format!("{parts:?} outside [0, 1]")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > TIME_SUM_TOL {
            return Err(Error::TimeAllocation(format!("{parts:?} sums to {sum}")));
        }
        Ok(())
    }
}

fn check_fraction(t: f64) -> Result<f64> {
    ensure_finite("time fraction", t)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange {
            what: "time fraction",
            value: t,
            range: "[0, 1]",
        });
    }
    Ok(t)
}

fn log_rate(t: f64, snr: f64) -> f64 {
    t * snr.ln_1p() / std::f64::consts::LN_2
}

/// `t1·log2(1 + p‖h‖²/σ²)`: a user's return link decoded at the gateway.
pub fn rl_capacity(p_user: f64, h: &CVector, sigma2: f64, t1: f64) -> Result<f64> {
    let t1 = check_fraction(t1)?;
    ensure_positive("noise variance", sigma2)?;
    Ok(log_rate(t1, p_user * h.norm_squared() / sigma2))
}

/// `t1·log2(1 + p|h|²/σ²)`: what an eavesdropper overhears from its user.
pub fn eve_rl_capacity(p_user: f64, h: num_complex::Complex64, sigma2: f64, t1: f64) -> Result<f64> {
    let t1 = check_fraction(t1)?;
    ensure_positive("noise variance", sigma2)?;
    Ok(log_rate(t1, p_user * h.norm_sqr() / sigma2))
}

/// Received SNR `|hᵀw|²/σ²` of a forward-link beam.
pub fn fl_snr(w: &CVector, h: &CVector, sigma2: f64) -> f64 {
    // nalgebra's `dot` does not conjugate, which is the hᵀw we want.
    h.dot(w).norm_sqr() / sigma2
}

/// `t·log2(1 + |hᵀw|²/σ²)` for forward-link beamformer `w`.
pub fn fl_rate(w: &CVector, h: &CVector, sigma2: f64, t: f64) -> Result<f64> {
    let t = check_fraction(t)?;
    ensure_positive("noise variance", sigma2)?;
    if w.len() != h.len() {
        return Err(Error::Dimension(format!(
            "beamformer has {} entries, channel {}",
            w.len(),
            h.len()
        )));
    }
    let snr = fl_snr(w, h, sigma2);
    ensure_finite("forward-link SNR", snr)?;
    Ok(log_rate(t, snr))
}

/// Secrecy rate of a return link; zero when the eavesdropper hears at least as well.
pub fn rl_secrecy(i_user: f64, i_eve: f64) -> f64 {
    (i_user - i_eve).max(0.0)
}

/// Which return links carry a secure message. Determines the forward-link
/// secrecy of the XOR broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecureLinks {
    /// Both return links are secure; the broadcast must reach both users.
    Both,
    /// Only user 2's return link is secure; the broadcast only has to reach user 1.
    OnlyU2,
    /// Only user 1's return link is secure; the broadcast only has to reach user 2.
    OnlyU1,
    /// Nothing secure to relay.
    None,
}

impl SecureLinks {
    pub fn classify(sr_rl_u1: f64, sr_rl_u2: f64) -> Self {
        match (sr_rl_u1 > 0.0, sr_rl_u2 > 0.0) {
            (true, true) => Self::Both,
            (false, true) => Self::OnlyU2,
            (true, false) => Self::OnlyU1,
            (false, false) => Self::None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Both => "case-1",
            Self::OnlyU2 => "case-2",
            Self::OnlyU1 => "case-3",
            Self::None => "all-blocked",
        }
    }
}

/// Forward-link secrecy of the XOR broadcast.
///
/// Neither eavesdropper can strip the XOR without the partner bits, so the
/// broadcast is fully secret; only the users that still expect a message
/// limit its rate.
pub fn fl_secrecy_xor(sr_rl_u1: f64, sr_rl_u2: f64, i_fl_u1: f64, i_fl_u2: f64) -> Result<f64> {
    for (what, v) in [
        ("user 1 RL secrecy", sr_rl_u1),
        ("user 2 RL secrecy", sr_rl_u2),
        ("user 1 FL rate", i_fl_u1),
        ("user 2 FL rate", i_fl_u2),
    ] {
        ensure_finite(what, v)?;
        if v < 0.0 {
            return Err(Error::OutOfRange {
                what,
                value: v,
                range: "[0, inf)",
            });
        }
    }
    Ok(match SecureLinks::classify(sr_rl_u1, sr_rl_u2) {
        SecureLinks::Both => i_fl_u1.min(i_fl_u2),
        SecureLinks::OnlyU2 => i_fl_u1,
        SecureLinks::OnlyU1 => i_fl_u2,
        SecureLinks::None => 0.0,
    })
}

/// Return-link secrecy of both users for return-link time `t1`.
pub fn rl_secrecy_pair(ch: &ChannelSet, noise: &NoiseModel, p_user: f64, t1: f64) -> Result<(f64, f64)> {
    let sr1 = rl_secrecy(
        rl_capacity(p_user, &ch.h_u1_sat, noise.sigma2_sat, t1)?,
        eve_rl_capacity(p_user, ch.h_u1_e1, noise.sigma2_e1, t1)?,
    );
    let sr2 = rl_secrecy(
        rl_capacity(p_user, &ch.h_u2_sat, noise.sigma2_sat, t1)?,
        eve_rl_capacity(p_user, ch.h_u2_e2, noise.sigma2_e2, t1)?,
    );
    Ok((sr1, sr2))
}

/// A relayed message is only as secret as its weakest hop.
pub fn end_to_end_xor(sr_rl: f64, sr_fl: f64) -> f64 {
    sr_rl.min(sr_fl)
}

pub fn sum_secrecy_xor(sr_u1: f64, sr_u2: f64) -> f64 {
    sr_u1 + sr_u2
}

/// Forward-link secrecy of one dedicated slot in the reference scheme.
pub fn fl_secrecy_con(i_fl_user: f64, i_fl_eve: f64) -> f64 {
    (i_fl_user - i_fl_eve).max(0.0)
}

/// `own_rl` is the sender's return-link secrecy, `delivering_fl` the secrecy
/// of the forward slot that carries the message to the partner.
pub fn end_to_end_con(own_rl: f64, delivering_fl: f64) -> f64 {
    own_rl.min(delivering_fl)
}

pub fn sum_secrecy_con(sr_u1: f64, sr_u2: f64) -> f64 {
    sr_u1 + sr_u2
}
