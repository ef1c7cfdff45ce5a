//! Bidirectional relaying with XOR network coding.
//!
//! Both users send in the return-link slot `t1`; the gateway decodes, XORs
//! the two messages and broadcasts the result with one beamformer in the
//! forward-link slot `t2 = 1 − t1`. The beamformer maximizes the weaker
//! user's forward-link rate, capped at the larger return-link secrecy rate
//! (more is never useful), and the power is trimmed to meet the cap exactly.
//!
//! The beam only depends on the channels and the power budget, not on the
//! time split, so [`optimize_time_xor`] designs it once per channel set and
//! reuses it across the whole `t1` grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel_gen::ChannelSet;
use crate::error::{ensure_positive, Error, Result};
use crate::rates::{
    end_to_end_xor, fl_rate, fl_secrecy_xor, rl_secrecy_pair, sum_secrecy_xor, NoiseModel, SecureLinks,
    TimeAllocation, TxPowers,
};
use crate::solvers::{maxmin_sdp_factors, outer, rank_one_extract};
use crate::CVector;

/// Grid sizes of the one-dimensional searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// `m`: interior points `k/(m+1)` of the `t1` grid.
    pub time_bins: usize,
    /// Interior points of the `β` grid of the reference scheme.
    pub beta_bins: usize,
    /// Slack allowed when checking invariants of a solution.
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            time_bins: 100,
            beta_bins: 100,
            tolerance: 1e-9,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        for (what, bins) in [("time bins", self.time_bins), ("beta bins", self.beta_bins)] {
            if bins < 2 {
                return Err(Error::TooFew { what, min: 2, got: bins });
            }
        }
        ensure_positive("search tolerance", self.tolerance)?;
        Ok(())
    }

    /// `k/(m+1)` for `k = 1..=m`, plus `0.5`, ascending and without duplicates.
    pub fn time_grid(&self) -> Vec<f64> {
        open_grid(self.time_bins)
    }

    pub fn beta_grid(&self) -> Vec<f64> {
        open_grid(self.beta_bins)
    }
}

/// Interior grid of `(0, 1)` that always contains the midpoint.
pub(crate) fn open_grid(bins: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=bins).map(|k| k as f64 / (bins + 1) as f64).collect();
    if !grid.contains(&0.5) {
        let at = grid.partition_point(|&t| t < 0.5);
        grid.insert(at, 0.5);
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct XorSolution {
    /// `t3` is always zero.
    pub time: TimeAllocation,
    pub beamformer: CVector,
    /// Common forward-link rate actually provisioned, after the cap.
    pub u_star: f64,
    pub sum_secrecy: f64,
    pub rl_secrecy: (f64, f64),
    pub end_to_end: (f64, f64),
    pub branch: SecureLinks,
}

/// Full-power beams of one channel set. Independent of the time split.
#[derive(Debug, Clone)]
pub struct XorBeams {
    /// Max-min beam serving both users, and its common SNR.
    pub both: (CVector, f64),
    /// Matched beam toward user 1 and its SNR.
    pub to_u1: (CVector, f64),
    pub to_u2: (CVector, f64),
}

/// Beam `w` with `hᵀw = √p·‖h‖`, i.e. `w ∝ h*`.
fn matched_beam(h: &CVector, sigma2: f64, p: f64) -> (CVector, f64) {
    let norm = h.norm();
    if norm == 0.0 {
        return (CVector::zeros(h.len()), 0.0);
    }
    let w = h.map(|z| z.conj()) * Complex64::new(p.sqrt() / norm, 0.0);
    (w, p * h.norm_squared() / sigma2)
}

impl XorBeams {
    pub fn design(ch: &ChannelSet, noise: &NoiseModel, p_s: f64) -> Result<Self> {
        ensure_positive("satellite power", p_s)?;
        // |hᵀw|² = |gᴴw|² with g = h*, so A = h*hᵀ = g·gᴴ.
        let g1 = ch.h_sat_u1.map(|z| z.conj());
        let g2 = ch.h_sat_u2.map(|z| z.conj());
        let sdp = maxmin_sdp_factors(&g1, &g2, noise.sigma2_u1, noise.sigma2_u2, p_s)?;
        let w = rank_one_extract(&sdp, &outer(&g1), &outer(&g2), p_s)?;
        Ok(Self {
            both: (w, sdp.gamma_star),
            to_u1: matched_beam(&ch.h_sat_u1, noise.sigma2_u1, p_s),
            to_u2: matched_beam(&ch.h_sat_u2, noise.sigma2_u2, p_s),
        })
    }
}

/// Trims `w` so that `t2·log2(1 + γ)` drops to `cap_u` when it exceeds it.
///
/// SNR is linear in transmit power, so scaling by `√(γ_cap/γ*)` lands on the
/// cap exactly while keeping the beam direction.
pub fn rl_cap_power_scaling(w: &CVector, gamma_star: f64, cap_u: f64, t2: f64) -> CVector {
    if !(gamma_star > 0.0 && t2 > 0.0) {
        return w.clone();
    }
    let rate = t2 * gamma_star.ln_1p() / std::f64::consts::LN_2;
    if rate <= cap_u {
        return w.clone();
    }
    let gamma_cap = (cap_u.max(0.0) / t2).exp2() - 1.0;
    w * Complex64::new((gamma_cap / gamma_star).sqrt(), 0.0)
}

/// Evaluates the XOR scheme at one time split using precomputed beams.
pub fn solve_with_beams(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    beams: &XorBeams,
    t1: f64,
    t2: f64,
) -> Result<XorSolution> {
    let time = TimeAllocation::two_slot(t1)?;
    if (t1 + t2 - 1.0).abs() > 1e-12 {
        return Err(Error::TimeAllocation(format!("t1 + t2 = {} must be 1", t1 + t2)));
    }
    let time = TimeAllocation { t2, ..time };
    let (sr1, sr2) = rl_secrecy_pair(ch, noise, powers.user, t1)?;
    let branch = SecureLinks::classify(sr1, sr2);
    let (beam, gamma) = match branch {
        SecureLinks::Both => &beams.both,
        // User 2's message is the only one in flight: it must reach user 1.
        SecureLinks::OnlyU2 => &beams.to_u1,
        SecureLinks::OnlyU1 => &beams.to_u2,
        SecureLinks::None => {
            return Ok(XorSolution {
                time,
                beamformer: CVector::zeros(ch.n_feeds()),
                u_star: 0.0,
                sum_secrecy: 0.0,
                rl_secrecy: (sr1, sr2),
                end_to_end: (0.0, 0.0),
                branch,
            })
        }
    };
    let cap = sr1.max(sr2);
    let fl_capability = t2 * gamma.ln_1p() / std::f64::consts::LN_2;
    let u_star = fl_capability.min(cap);
    let w = rl_cap_power_scaling(beam, *gamma, cap, t2);
    let i1 = fl_rate(&w, &ch.h_sat_u1, noise.sigma2_u1, t2)?;
    let i2 = fl_rate(&w, &ch.h_sat_u2, noise.sigma2_u2, t2)?;
    let fl = fl_secrecy_xor(sr1, sr2, i1, i2)?;
    let e1 = end_to_end_xor(sr1, fl);
    let e2 = end_to_end_xor(sr2, fl);
    Ok(XorSolution {
        time,
        beamformer: w,
        u_star,
        sum_secrecy: sum_secrecy_xor(e1, e2),
        rl_secrecy: (sr1, sr2),
        end_to_end: (e1, e2),
        branch,
    })
}

/// Designs the broadcast beam for a fixed split `t1 + t2 = 1`.
pub fn design_beamformer_xor(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    t1: f64,
    t2: f64,
) -> Result<XorSolution> {
    let beams = XorBeams::design(ch, noise, powers.satellite)?;
    solve_with_beams(ch, noise, powers, &beams, t1, t2)
}

/// Best sum secrecy over the `t1` grid. Ties go to the point closest to
/// the equal split, so all-blocked trials report `t1 = 0.5`.
pub fn optimize_time_xor(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    search: &SearchConfig,
) -> Result<XorSolution> {
    search.validate()?;
    let beams = XorBeams::design(ch, noise, powers.satellite)?;
    optimize_time_with_beams(ch, noise, powers, &beams, search)
}

pub fn optimize_time_with_beams(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    beams: &XorBeams,
    search: &SearchConfig,
) -> Result<XorSolution> {
    let mut best = solve_with_beams(ch, noise, powers, beams, 0.5, 0.5)?;
    for t1 in search.time_grid() {
        let s = solve_with_beams(ch, noise, powers, beams, t1, 1.0 - t1)?;
        if s.sum_secrecy > best.sum_secrecy
            || (s.sum_secrecy == best.sum_secrecy && (t1 - 0.5).abs() < (best.time.t1 - 0.5).abs())
        {
            best = s;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{fl_snr, rl_capacity};
    use crate::testutil::random_cvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis(n: usize, i: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    /// Channel set with unit-variance noise in mind and silent eavesdroppers.
    fn channels(fl1: CVector, fl2: CVector, rl_gain: f64) -> ChannelSet {
        let n = fl1.len();
        let rl = CVector::from_element(n, Complex64::new(rl_gain, 0.0));
        ChannelSet {
            h_u1_sat: rl.clone(),
            h_u2_sat: rl,
            h_sat_e1: CVector::zeros(n),
            h_sat_e2: CVector::zeros(n),
            h_sat_u1: fl1,
            h_sat_u2: fl2,
            h_u1_e1: Complex64::new(0.0, 0.0),
            h_u2_e2: Complex64::new(0.0, 0.0),
            eve_distances_m: (2000.0, 2000.0),
        }
    }

    fn random_channels(rng: &mut ChaCha8Rng, n: usize) -> ChannelSet {
        ChannelSet {
            h_u1_sat: random_cvector(rng, n),
            h_u2_sat: random_cvector(rng, n),
            h_sat_u1: random_cvector(rng, n),
            h_sat_u2: random_cvector(rng, n),
            h_sat_e1: random_cvector(rng, n),
            h_sat_e2: random_cvector(rng, n),
            h_u1_e1: random_cvector(rng, 1)[0] * 0.5,
            h_u2_e2: random_cvector(rng, 1)[0] * 0.5,
            eve_distances_m: (2000.0, 2000.0),
        }
    }

    fn unit_noise() -> NoiseModel {
        NoiseModel::uniform(1.0).unwrap()
    }

    #[test]
    fn orthogonal_users_share_power() {
        let ch = channels(basis(3, 0), basis(3, 1), 1e3);
        let powers = TxPowers::new(4.0, 1.0).unwrap();
        let s = design_beamformer_xor(&ch, &unit_noise(), &powers, 0.5, 0.5).unwrap();
        assert_eq!(s.branch, SecureLinks::Both);
        assert!((s.u_star - 0.5 * 3f64.log2()).abs() < 1e-12);
        assert!((s.beamformer.norm_squared() - 4.0).abs() < 1e-9);
        assert!((s.sum_secrecy - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn all_blocked_gives_zero() {
        let mut ch = channels(basis(3, 0), basis(3, 1), 1.0);
        ch.h_u1_e1 = Complex64::new(10.0, 0.0);
        ch.h_u2_e2 = Complex64::new(0.0, 10.0);
        let powers = TxPowers::new(4.0, 1.0).unwrap();
        let s = design_beamformer_xor(&ch, &unit_noise(), &powers, 0.5, 0.5).unwrap();
        assert_eq!(s.branch, SecureLinks::None);
        assert_eq!(s.sum_secrecy, 0.0);
        assert_eq!(s.beamformer.norm(), 0.0);
    }

    #[test]
    fn cap_binding_trims_power() {
        // RL secrecy t1·log2(1 + 3·g²): pick g so that it is 0.1 at t1 = 0.5.
        let g2 = ((0.2f64).exp2() - 1.0) / 3.0;
        let ch = channels(basis(3, 0) * Complex64::new(10.0, 0.0), basis(3, 1) * Complex64::new(10.0, 0.0), g2.sqrt());
        let powers = TxPowers::new(4.0, 1.0).unwrap();
        let s = design_beamformer_xor(&ch, &unit_noise(), &powers, 0.5, 0.5).unwrap();
        assert!((s.rl_secrecy.0 - 0.1).abs() < 1e-12);
        assert!((s.u_star - 0.1).abs() < 1e-12);
        assert!(s.beamformer.norm_squared() < 4.0);
        let min_rate = fl_rate(&s.beamformer, &ch.h_sat_u1, 1.0, 0.5)
            .unwrap()
            .min(fl_rate(&s.beamformer, &ch.h_sat_u2, 1.0, 0.5).unwrap());
        assert!((min_rate - 0.1).abs() < 1e-9);
    }

    #[test]
    fn scaling_contract() {
        let w = CVector::from_element(2, Complex64::new(1.0, 1.0));
        assert_eq!(rl_cap_power_scaling(&w, 4.0, 10.0, 0.5), w);
        // γ* = 4, γ_cap = 1: u = t2·log2(2) = t2.
        let scaled = rl_cap_power_scaling(&w, 4.0, 0.5, 0.5);
        assert!((scaled.norm_squared() - w.norm_squared() / 4.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let ch = random_channels(&mut rng, 4);
            let beams = XorBeams::design(&ch, &unit_noise(), 10.0).unwrap();
            let (w, gamma) = &beams.both;
            let cap = 0.3;
            let w2 = rl_cap_power_scaling(w, *gamma, cap, 0.6);
            let gamma_cap = (cap / 0.6f64).exp2() - 1.0;
            let snr = fl_snr(&w2, &ch.h_sat_u1, 1.0).min(fl_snr(&w2, &ch.h_sat_u2, 1.0));
            assert!((snr - gamma_cap).abs() < 1e-9 * gamma_cap.max(1.0));
        }
    }

    #[test]
    fn rejects_bad_split() {
        let ch = channels(basis(2, 0), basis(2, 1), 1.0);
        let powers = TxPowers::new(1.0, 1.0).unwrap();
        assert!(design_beamformer_xor(&ch, &unit_noise(), &powers, 0.0, 1.0).is_err());
        assert!(design_beamformer_xor(&ch, &unit_noise(), &powers, 0.3, 0.6).is_err());
    }

    #[test]
    fn grid_contains_midpoint() {
        for bins in [2, 3, 100, 101] {
            let g = SearchConfig { time_bins: bins, ..SearchConfig::default() }.time_grid();
            assert!(g.contains(&0.5));
            assert!(g.windows(2).all(|p| p[0] < p[1]));
            assert!(g[0] > 0.0 && *g.last().unwrap() < 1.0);
        }
        assert!(SearchConfig { time_bins: 1, ..SearchConfig::default() }.validate().is_err());
    }

    #[test]
    fn solution_invariants_and_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let search = SearchConfig::default();
        for _ in 0..30 {
            let ch = random_channels(&mut rng, 4);
            let noise = unit_noise();
            let powers = TxPowers::new(3.0, 2.0).unwrap();
            let best = optimize_time_xor(&ch, &noise, &powers, &search).unwrap();
            let eta = design_beamformer_xor(&ch, &noise, &powers, 0.5, 0.5).unwrap();
            assert!(best.sum_secrecy >= eta.sum_secrecy);
            for s in [&best, &eta] {
                assert!(s.beamformer.norm_squared() <= 3.0 * (1.0 + 1e-9));
                assert!(s.u_star <= s.rl_secrecy.0.max(s.rl_secrecy.1) + 1e-9);
                assert!(s.sum_secrecy >= 0.0);
                if s.branch == SecureLinks::Both {
                    // Recompute the end-to-end rates from scratch.
                    let t1 = s.time.t1;
                    let rl1 = rl_capacity(2.0, &ch.h_u1_sat, 1.0, t1).unwrap()
                        - crate::rates::eve_rl_capacity(2.0, ch.h_u1_e1, 1.0, t1).unwrap();
                    assert!((s.end_to_end.0 - rl1.max(0.0).min(s.u_star)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn beam_reuse_matches_per_point_design() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let search = SearchConfig { time_bins: 20, ..SearchConfig::default() };
        for _ in 0..5 {
            let ch = random_channels(&mut rng, 5);
            let noise = unit_noise();
            let powers = TxPowers::new(2.0, 1.0).unwrap();
            let fast = optimize_time_xor(&ch, &noise, &powers, &search).unwrap();
            let mut slow = design_beamformer_xor(&ch, &noise, &powers, 0.5, 0.5).unwrap();
            for t1 in search.time_grid() {
                let s = design_beamformer_xor(&ch, &noise, &powers, t1, 1.0 - t1).unwrap();
                if s.sum_secrecy > slow.sum_secrecy
                    || (s.sum_secrecy == slow.sum_secrecy && (t1 - 0.5).abs() < (slow.time.t1 - 0.5).abs())
                {
                    slow = s;
                }
            }
            assert_eq!(fast, slow);
        }
    }

    /// Exhaustive search over a fine `t1` grid.
    fn fine_search(ch: &ChannelSet, noise: &NoiseModel, powers: &TxPowers, bins: usize) -> (f64, f64) {
        let beams = XorBeams::design(ch, noise, powers.satellite).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 1..=bins {
            let t1 = k as f64 / (bins + 1) as f64;
            let s = solve_with_beams(ch, noise, powers, &beams, t1, 1.0 - t1).unwrap();
            if s.sum_secrecy > best.0 {
                best = (s.sum_secrecy, t1);
            }
        }
        best
    }

    #[test]
    fn return_link_limited_prefers_long_return_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = random_channels(&mut rng, 4);
        let noise = unit_noise();
        let powers = TxPowers::new(100.0, 1e-3).unwrap();
        let s = optimize_time_xor(&ch, &noise, &powers, &SearchConfig::default()).unwrap();
        let (value, t1) = fine_search(&ch, &noise, &powers, 10_000);
        assert!(s.time.t1 >= 0.9, "t1 = {}", s.time.t1);
        assert!((s.time.t1 - t1).abs() <= 1.0 / 101.0);
        assert!(s.sum_secrecy <= value + 1e-12 && s.sum_secrecy >= value * 0.98);
    }

    #[test]
    fn forward_link_limited_prefers_long_forward_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ch = random_channels(&mut rng, 4);
        let noise = unit_noise();
        let powers = TxPowers::new(1e-3, 1e3).unwrap();
        let s = optimize_time_xor(&ch, &noise, &powers, &SearchConfig::default()).unwrap();
        let (value, t1) = fine_search(&ch, &noise, &powers, 10_000);
        assert!(s.time.t1 <= 0.1, "t1 = {}", s.time.t1);
        assert!((s.time.t1 - t1).abs() <= 1.0 / 101.0);
        assert!(s.sum_secrecy <= value + 1e-12 && s.sum_secrecy >= value * 0.98);
    }

    #[test]
    fn single_secure_user_uses_matched_beam() {
        let mut ch = channels(basis(3, 0), basis(3, 1), 1.0);
        // User 1's eavesdropper hears everything: only user 2's message flows.
        ch.h_u1_e1 = Complex64::new(100.0, 0.0);
        let powers = TxPowers::new(4.0, 1.0).unwrap();
        let s = design_beamformer_xor(&ch, &unit_noise(), &powers, 0.5, 0.5).unwrap();
        assert_eq!(s.branch, SecureLinks::OnlyU2);
        assert_eq!(s.end_to_end.0, 0.0);
        // The beam points at user 1 only.
        assert!(fl_snr(&s.beamformer, &ch.h_sat_u2, 1.0) < 1e-20);
        assert!(s.sum_secrecy > 0.0);
    }
}
