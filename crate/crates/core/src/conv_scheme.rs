//! Reference scheme without network coding.
//!
//! After the shared return-link slot `t1` the gateway forwards each message
//! in its own slot: `w1` (power `βP`) carries user 1's message to user 2 in
//! slot `t2`, `w2` (power `(1−β)P`) carries user 2's message to user 1 in
//! slot `t3`. Each beam maximizes a ratio of loaded quadratic forms, which
//! is a generalized eigenproblem; the times then follow from a tiny LP, and
//! `β` is found by grid search.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel_gen::ChannelSet;
use crate::error::{ensure_positive, Error, Result};
use crate::rates::{
    end_to_end_con, fl_rate, fl_secrecy_con, rl_secrecy_pair, sum_secrecy_con, NoiseModel, TimeAllocation,
    TxPowers,
};
use crate::solvers::{gen_eig_max_loaded_rank_one, outer, tiny_lp, LpResult};
use crate::xor_scheme::SearchConfig;
use crate::{CMatrix, CVector};

/// Everything derived from the channels for one power split `β`.
///
/// The pencils are `U₂ = σ²_U2/(βP)·I + g_U2·g_U2ᴴ` against
/// `E₂ = σ²_E2/(βP)·I + g_E2·g_E2ᴴ` for `w1`, and the `(1−β)P` loaded pair
/// `(U₁, E₁)` for `w2`, with `g = h*` so that `gᴴw = hᵀw`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvDesignIntermediates {
    pub beta: f64,
    pub p_s: f64,
    pub g_u1: CVector,
    pub g_u2: CVector,
    pub g_e1: CVector,
    pub g_e2: CVector,
    pub load_u1: f64,
    pub load_u2: f64,
    pub load_e1: f64,
    pub load_e2: f64,
    /// Top eigenvalue of the pencil `(U₂, E₂)`, served by `w1`.
    pub lambda_w1: f64,
    /// Top eigenvalue of the pencil `(U₁, E₁)`, served by `w2`.
    pub lambda_w2: f64,
    pub dir_w1: CVector,
    pub dir_w2: CVector,
    /// Return-link secrecy of user 1 per unit of `t1` (may be negative).
    pub c_const: f64,
    pub d_const: f64,
    /// Forward-link secrecy toward user 2 per unit of `t2` (may be negative).
    pub a_coef: f64,
    pub b_coef: f64,
}

fn loaded(load: f64, g: &CVector) -> CMatrix {
    let n = g.len();
    CMatrix::identity(n, n) * Complex64::new(load, 0.0) + outer(g)
}

impl ConvDesignIntermediates {
    pub fn u1_mat(&self) -> CMatrix {
        loaded(self.load_u1, &self.g_u1)
    }

    pub fn u2_mat(&self) -> CMatrix {
        loaded(self.load_u2, &self.g_u2)
    }

    pub fn e1_mat(&self) -> CMatrix {
        loaded(self.load_e1, &self.g_e1)
    }

    pub fn e2_mat(&self) -> CMatrix {
        loaded(self.load_e2, &self.g_e2)
    }
}

/// Per-unit-time return-link secrecy `log2((1 + SNR_user)/(1 + SNR_eve))` of both users.
fn rl_constants(ch: &ChannelSet, noise: &NoiseModel, p_user: f64) -> (f64, f64) {
    let term = |h: &CVector, g: Complex64, sigma2_e: f64| {
        let user = (p_user * h.norm_squared() / noise.sigma2_sat).ln_1p();
        let eve = (p_user * g.norm_sqr() / sigma2_e).ln_1p();
        (user - eve) / std::f64::consts::LN_2
    };
    (
        term(&ch.h_u1_sat, ch.h_u1_e1, noise.sigma2_e1),
        term(&ch.h_u2_sat, ch.h_u2_e2, noise.sigma2_e2),
    )
}

pub fn build_intermediates(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    beta: f64,
) -> Result<ConvDesignIntermediates> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::OutOfRange {
            what: "power split",
            value: beta,
            range: "(0, 1)",
        });
    }
    let p_s = ensure_positive("satellite power", powers.satellite)?;
    let conj = |h: &CVector| h.map(|z| z.conj());
    let (g_u1, g_u2, g_e1, g_e2) = (conj(&ch.h_sat_u1), conj(&ch.h_sat_u2), conj(&ch.h_sat_e1), conj(&ch.h_sat_e2));
    let p1 = beta * p_s;
    let p2 = (1.0 - beta) * p_s;
    let (load_u1, load_e1) = (noise.sigma2_u1 / p2, noise.sigma2_e1 / p2);
    let (load_u2, load_e2) = (noise.sigma2_u2 / p1, noise.sigma2_e2 / p1);
    let (lambda_w1, dir_w1) = gen_eig_max_loaded_rank_one(load_u2, &g_u2, load_e2, &g_e2)?;
    let (lambda_w2, dir_w2) = gen_eig_max_loaded_rank_one(load_u1, &g_u1, load_e1, &g_e1)?;
    let (c_const, d_const) = rl_constants(ch, noise, powers.user);
    let a_coef = (noise.sigma2_e2 / noise.sigma2_u2 * lambda_w1).log2();
    let b_coef = (noise.sigma2_e1 / noise.sigma2_u1 * lambda_w2).log2();
    Ok(ConvDesignIntermediates {
        beta,
        p_s,
        g_u1,
        g_u2,
        g_e1,
        g_e2,
        load_u1,
        load_u2,
        load_e1,
        load_e2,
        lambda_w1,
        lambda_w2,
        dir_w1,
        dir_w2,
        c_const,
        d_const,
        a_coef,
        b_coef,
    })
}

/// The two beams at full power: `‖w1‖² = βP`, `‖w2‖² = (1−β)P`.
pub fn design_beamformers_con(inter: &ConvDesignIntermediates) -> (CVector, CVector) {
    let w1 = &inter.dir_w1 * Complex64::new((inter.beta * inter.p_s).sqrt(), 0.0);
    let w2 = &inter.dir_w2 * Complex64::new(((1.0 - inter.beta) * inter.p_s).sqrt(), 0.0);
    (w1, w2)
}

/// Optimal times for the beams of `inter`; negative coefficients count as zero.
pub fn allocate_time_con(inter: &ConvDesignIntermediates) -> Result<LpResult> {
    tiny_lp(inter.c_const, inter.d_const, inter.a_coef, inter.b_coef)
}

/// How the three slots are chosen for each `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvTimeMode {
    /// `(0.5, 0.25, 0.25)`: half the frame for each direction.
    Equal,
    /// Times from the LP.
    Optimized,
    Fixed { t1: f64, t2: f64 },
}

impl ConvTimeMode {
    pub const EQUAL_TIMES: TimeAllocation = TimeAllocation { t1: 0.5, t2: 0.25, t3: 0.25 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvSolution {
    pub beta: f64,
    pub w1: CVector,
    pub w2: CVector,
    pub time: TimeAllocation,
    /// End-to-end secrecy of user 1's and user 2's message.
    pub u1: f64,
    pub u2: f64,
    pub sum_secrecy: f64,
}

/// Sum secrecy of given beams and times, computed from the rate expressions.
pub fn evaluate_con(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    w1: &CVector,
    w2: &CVector,
    time: &TimeAllocation,
) -> Result<(f64, f64, f64)> {
    time.validate()?;
    let (sr1, sr2) = rl_secrecy_pair(ch, noise, powers.user, time.t1)?;
    let fl_to_u2 = fl_secrecy_con(
        fl_rate(w1, &ch.h_sat_u2, noise.sigma2_u2, time.t2)?,
        fl_rate(w1, &ch.h_sat_e2, noise.sigma2_e2, time.t2)?,
    );
    let fl_to_u1 = fl_secrecy_con(
        fl_rate(w2, &ch.h_sat_u1, noise.sigma2_u1, time.t3)?,
        fl_rate(w2, &ch.h_sat_e1, noise.sigma2_e1, time.t3)?,
    );
    let u1 = end_to_end_con(sr1, fl_to_u2);
    let u2 = end_to_end_con(sr2, fl_to_u1);
    Ok((u1, u2, sum_secrecy_con(u1, u2)))
}

fn solve_at_beta(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    inter: &ConvDesignIntermediates,
    mode: ConvTimeMode,
) -> Result<ConvSolution> {
    let (w1, w2) = design_beamformers_con(inter);
    let candidates = match mode {
        ConvTimeMode::Equal => vec![ConvTimeMode::EQUAL_TIMES],
        ConvTimeMode::Fixed { t1, t2 } => vec![TimeAllocation::three_slot(t1, t2)?],
        ConvTimeMode::Optimized => {
            let lp = allocate_time_con(inter)?;
            // The LP optimum can only beat the equal split; keeping both
            // makes that hold bit for bit after rounding.
            vec![TimeAllocation { t1: lp.t1, t2: lp.t2, t3: lp.t3 }, ConvTimeMode::EQUAL_TIMES]
        }
    };
    let mut best: Option<ConvSolution> = None;
    for time in candidates {
        let (u1, u2, sum) = evaluate_con(ch, noise, powers, &w1, &w2, &time)?;
        if best.as_ref().is_none_or(|b| sum > b.sum_secrecy) {
            best = Some(ConvSolution { beta: inter.beta, w1: w1.clone(), w2: w2.clone(), time, u1, u2, sum_secrecy: sum });
        }
    }
    Ok(best.expect("at least one candidate time allocation"))
}

/// Best solution over the `β` grid for every requested time mode, sharing
/// the per-`β` eigen solves. Ties go to the `β` closest to an even split.
pub fn optimize_beta_modes(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    search: &SearchConfig,
    modes: &[ConvTimeMode],
) -> Result<Vec<ConvSolution>> {
    search.validate()?;
    let mut best: Vec<Option<ConvSolution>> = vec![None; modes.len()];
    for beta in search.beta_grid() {
        let inter = build_intermediates(ch, noise, powers, beta)?;
        for (slot, &mode) in best.iter_mut().zip(modes) {
            let s = solve_at_beta(ch, noise, powers, &inter, mode)?;
            let better = match slot {
                None => true,
                Some(b) => {
                    s.sum_secrecy > b.sum_secrecy
                        || (s.sum_secrecy == b.sum_secrecy && (beta - 0.5).abs() < (b.beta - 0.5).abs())
                }
            };
            if better {
                *slot = Some(s);
            }
        }
    }
    Ok(best.into_iter().map(|s| s.expect("beta grid is never empty")).collect())
}

pub fn optimize_beta(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    search: &SearchConfig,
    mode: ConvTimeMode,
) -> Result<ConvSolution> {
    Ok(optimize_beta_modes(ch, noise, powers, search, &[mode])?.remove(0))
}

/// `t·log2(σ²_E/σ²_U · (σ²_U + |h_uᵀw|²)/(σ²_E + |h_eᵀw|²))`.
pub fn fl_secrecy_term(t: f64, w: &CVector, h_user: &CVector, h_eve: &CVector, sigma2_u: f64, sigma2_e: f64) -> f64 {
    let x = h_user.dot(w).norm_sqr();
    let y = h_eve.dot(w).norm_sqr();
    t * (sigma2_e / sigma2_u * (sigma2_u + x) / (sigma2_e + y)).log2()
}

/// Outcome of [`fl_monotonicity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Monotonicity {
    Monotone,
    /// First grid point where a secrecy term decreased.
    NotMonotone { alpha: f64 },
    /// The instance gives an eavesdropper the edge, so the property makes no claim.
    Skipped,
}

/// Scales both beams by `α` along `alpha_grid` and checks that neither
/// forward-link secrecy term decreases.
///
/// The base beams point in the optimal directions with power reduced by
/// `α_max²`, so the largest grid point restores the full budget. Instances
/// where a user does not hear its beam better than its eavesdropper
/// (noise-weighted) are skipped.
pub fn fl_monotonicity_check(
    ch: &ChannelSet,
    noise: &NoiseModel,
    powers: &TxPowers,
    beta: f64,
    time: &TimeAllocation,
    alpha_grid: &[f64],
) -> Result<Monotonicity> {
    let inter = build_intermediates(ch, noise, powers, beta)?;
    let alpha_max = alpha_grid.iter().copied().fold(1.0, f64::max);
    let (w1, w2) = design_beamformers_con(&inter);
    let shrink = Complex64::new(1.0 / alpha_max, 0.0);
    let (w1, w2) = (w1 * shrink, w2 * shrink);
    let favours_user = |w: &CVector, h_u: &CVector, h_e: &CVector, su: f64, se: f64| {
        se * h_u.dot(w).norm_sqr() > su * h_e.dot(w).norm_sqr()
    };
    if !favours_user(&w1, &ch.h_sat_u2, &ch.h_sat_e2, noise.sigma2_u2, noise.sigma2_e2)
        || !favours_user(&w2, &ch.h_sat_u1, &ch.h_sat_e1, noise.sigma2_u1, noise.sigma2_e1)
    {
        return Ok(Monotonicity::Skipped);
    }
    let f = |alpha: f64| {
        let k = Complex64::new(alpha, 0.0);
        (
            fl_secrecy_term(time.t2, &(&w1 * k), &ch.h_sat_u2, &ch.h_sat_e2, noise.sigma2_u2, noise.sigma2_e2),
            fl_secrecy_term(time.t3, &(&w2 * k), &ch.h_sat_u1, &ch.h_sat_e1, noise.sigma2_u1, noise.sigma2_e1),
        )
    };
    let mut sorted = alpha_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut prev: Option<(f64, f64)> = None;
    for alpha in sorted {
        let cur = f(alpha);
        if let Some((p1, p2)) = prev {
            let slack = |v: f64| 1e-12 * v.abs().max(1e-300);
            if cur.0 < p1 - slack(p1) || cur.1 < p2 - slack(p2) {
                return Ok(Monotonicity::NotMonotone { alpha });
            }
        }
        prev = Some(cur);
    }
    Ok(Monotonicity::Monotone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::complex_gaussian;
    use crate::solvers::{gen_eig_max, hermitian_defect};
    use crate::testutil::random_cvector;
    use crate::xor_scheme::{design_beamformer_xor, XorBeams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_channels(rng: &mut ChaCha8Rng, n: usize) -> ChannelSet {
        ChannelSet {
            h_u1_sat: random_cvector(rng, n),
            h_u2_sat: random_cvector(rng, n),
            h_sat_u1: random_cvector(rng, n),
            h_sat_u2: random_cvector(rng, n),
            h_sat_e1: random_cvector(rng, n) * Complex64::new(0.5, 0.0),
            h_sat_e2: random_cvector(rng, n) * Complex64::new(0.5, 0.0),
            h_u1_e1: random_cvector(rng, 1)[0] * 0.3,
            h_u2_e2: random_cvector(rng, 1)[0] * 0.3,
            eve_distances_m: (2000.0, 2000.0),
        }
    }

    fn noise() -> NoiseModel {
        NoiseModel::new(1.0, 0.8, 1.1, 0.9, 1.2).unwrap()
    }

    fn powers() -> TxPowers {
        TxPowers::new(5.0, 2.0).unwrap()
    }

    #[test]
    fn symmetric_loading_at_even_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = random_channels(&mut rng, 4);
        let inter = build_intermediates(&ch, &NoiseModel::uniform(1.0).unwrap(), &powers(), 0.5).unwrap();
        let diff = inter.u1_mat() - inter.u2_mat();
        let outer_diff = outer(&inter.g_u1) - outer(&inter.g_u2);
        assert!((diff - outer_diff).norm() < 1e-12);
        for m in [inter.u1_mat(), inter.u2_mat(), inter.e1_mat(), inter.e2_mat()] {
            assert!(hermitian_defect(&m) < 1e-15);
        }
    }

    #[test]
    fn silent_eavesdroppers_give_scaled_identity_and_matched_beams() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ch = random_channels(&mut rng, 4);
        ch.h_sat_e1 = CVector::zeros(4);
        ch.h_sat_e2 = CVector::zeros(4);
        let inter = build_intermediates(&ch, &noise(), &powers(), 0.3).unwrap();
        let e2 = inter.e2_mat();
        let expected = CMatrix::identity(4, 4) * Complex64::new(noise().sigma2_e2 / (0.3 * 5.0), 0.0);
        assert!((e2 - expected).norm() < 1e-12);
        let (w1, _) = design_beamformers_con(&inter);
        // w1 ∝ h_{S,U2}*: |h_{S,U2}ᵀ w1| = ‖h‖‖w1‖.
        let gain = ch.h_sat_u2.dot(&w1).norm();
        assert!((gain - ch.h_sat_u2.norm() * w1.norm()).abs() < 1e-10 * gain);
    }

    #[test]
    fn equal_rl_snr_gives_zero_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ch = random_channels(&mut rng, 3);
        let n = NoiseModel::uniform(1.0).unwrap();
        ch.h_u1_e1 = Complex64::new(ch.h_u1_sat.norm(), 0.0);
        let inter = build_intermediates(&ch, &n, &powers(), 0.5).unwrap();
        assert!(inter.c_const.abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = random_channels(&mut rng, 3);
        assert!(build_intermediates(&ch, &noise(), &powers(), 0.0).is_err());
        assert!(build_intermediates(&ch, &noise(), &powers(), 1.0).is_err());
    }

    #[test]
    fn fast_pencil_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=6 {
            let ch = random_channels(&mut rng, n);
            let inter = build_intermediates(&ch, &noise(), &powers(), 0.37).unwrap();
            let (l1, v1) = gen_eig_max(&inter.u2_mat(), &inter.e2_mat()).unwrap();
            assert!((l1 - inter.lambda_w1).abs() < 1e-9 * l1);
            assert!((v1.dotc(&inter.dir_w1).norm() - 1.0).abs() < 1e-8);
            let (l2, _) = gen_eig_max(&inter.u1_mat(), &inter.e1_mat()).unwrap();
            assert!((l2 - inter.lambda_w2).abs() < 1e-9 * l2);
        }
    }

    #[test]
    fn power_activity_and_lp_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let search = SearchConfig { beta_bins: 30, ..SearchConfig::default() };
        for _ in 0..20 {
            let ch = random_channels(&mut rng, 4);
            let s = optimize_beta(&ch, &noise(), &powers(), &search, ConvTimeMode::Optimized).unwrap();
            let p = powers().satellite;
            assert!((s.w1.norm_squared() - s.beta * p).abs() <= 1e-9 * s.beta * p);
            assert!((s.w2.norm_squared() - (1.0 - s.beta) * p).abs() <= 1e-9 * (1.0 - s.beta) * p);
            let inter = build_intermediates(&ch, &noise(), &powers(), s.beta).unwrap();
            let lp = allocate_time_con(&inter).unwrap();
            assert!((lp.objective - s.sum_secrecy).abs() < 1e-9 * lp.objective.max(1.0));
            let eta = optimize_beta(&ch, &noise(), &powers(), &search, ConvTimeMode::Equal).unwrap();
            assert!(s.sum_secrecy >= eta.sum_secrecy);
        }
    }

    #[test]
    fn shared_modes_match_separate_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = random_channels(&mut rng, 5);
        let search = SearchConfig { beta_bins: 15, ..SearchConfig::default() };
        let modes = [ConvTimeMode::Equal, ConvTimeMode::Optimized, ConvTimeMode::Fixed { t1: 0.4, t2: 0.3 }];
        let joint = optimize_beta_modes(&ch, &noise(), &powers(), &search, &modes).unwrap();
        for (mode, s) in modes.iter().zip(&joint) {
            assert_eq!(&optimize_beta(&ch, &noise(), &powers(), &search, *mode).unwrap(), s);
        }
    }

    #[test]
    fn beats_random_beams() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let ch = random_channels(&mut rng, 4);
            let inter = build_intermediates(&ch, &noise(), &powers(), 0.6).unwrap();
            let (w1, w2) = design_beamformers_con(&inter);
            let time = TimeAllocation { t1: 0.2, t2: 0.4, t3: 0.4 };
            let (_, _, best) = evaluate_con(&ch, &noise(), &powers(), &w1, &w2, &time).unwrap();
            for _ in 0..1000 {
                let r1 = complex_gaussian(&mut rng, 4);
                let r2 = complex_gaussian(&mut rng, 4);
                let r1 = &r1 * Complex64::new(w1.norm() / r1.norm(), 0.0);
                let r2 = &r2 * Complex64::new(w2.norm() / r2.norm(), 0.0);
                let (_, _, v) = evaluate_con(&ch, &noise(), &powers(), &r1, &r2, &time).unwrap();
                assert!(v <= best + 1e-12);
            }
        }
    }

    #[test]
    fn phase_rotations_do_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let search = SearchConfig { beta_bins: 20, ..SearchConfig::default() };
        for _ in 0..5 {
            let ch = random_channels(&mut rng, 4);
            let base = optimize_beta(&ch, &noise(), &powers(), &search, ConvTimeMode::Optimized).unwrap();
            let mut rotated = ch.clone();
            for v in [&mut rotated.h_sat_u1, &mut rotated.h_sat_u2, &mut rotated.h_sat_e1, &mut rotated.h_sat_e2] {
                let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
                *v *= phase;
            }
            let r = optimize_beta(&rotated, &noise(), &powers(), &search, ConvTimeMode::Optimized).unwrap();
            assert!((r.sum_secrecy - base.sum_secrecy).abs() < 1e-9 * base.sum_secrecy.max(1.0));
        }
    }

    #[test]
    fn single_user_link_matches_xor_broadcast() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ch = random_channels(&mut rng, 4);
        ch.h_sat_e1 = CVector::zeros(4);
        ch.h_sat_e2 = CVector::zeros(4);
        // User 2's return link is insecure: XOR only serves user 2.
        ch.h_u2_e2 = Complex64::new(100.0, 0.0);
        let n = noise();
        let beta = 0.35;
        let inter = build_intermediates(&ch, &n, &powers(), beta).unwrap();
        let (w1, _) = design_beamformers_con(&inter);
        let xor_powers = TxPowers::new(beta * powers().satellite, powers().user).unwrap();
        let xor = design_beamformer_xor(&ch, &n, &xor_powers, 0.5, 0.5).unwrap();
        let beams = XorBeams::design(&ch, &n, xor_powers.satellite).unwrap();
        let conv_rate = fl_rate(&w1, &ch.h_sat_u2, n.sigma2_u2, 0.5).unwrap();
        let xor_rate = fl_rate(&beams.to_u2.0, &ch.h_sat_u2, n.sigma2_u2, 0.5).unwrap();
        assert!((conv_rate - xor_rate).abs() < 1e-9 * xor_rate);
        assert!(xor.beamformer.norm_squared() <= xor_powers.satellite * (1.0 + 1e-12));
    }

    #[test]
    fn symmetric_users_split_power_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut ch = random_channels(&mut rng, 4);
        ch.h_u2_sat = ch.h_u1_sat.clone();
        ch.h_sat_u2 = ch.h_sat_u1.clone();
        ch.h_sat_e2 = ch.h_sat_e1.clone();
        ch.h_u2_e2 = ch.h_u1_e1;
        let n = NoiseModel::uniform(1.0).unwrap();
        let search = SearchConfig::default();
        let s = optimize_beta(&ch, &n, &powers(), &search, ConvTimeMode::Optimized).unwrap();
        assert!((s.beta - 0.5).abs() <= 1.0 / 101.0 + 1e-12, "beta = {}", s.beta);
    }

    #[test]
    fn blocked_forward_link_sends_power_to_other_beam() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ch = random_channels(&mut rng, 4);
        // Eavesdropper 2 sees a stronger copy of user 2's channel.
        ch.h_sat_e2 = &ch.h_sat_u2 * Complex64::new(0.0, 1.5);
        let n = NoiseModel::uniform(1.0).unwrap();
        let p = TxPowers::new(0.5, 50.0).unwrap();
        let s = optimize_beta(&ch, &n, &p, &SearchConfig::default(), ConvTimeMode::Optimized).unwrap();
        assert!(build_intermediates(&ch, &n, &p, s.beta).unwrap().a_coef.max(0.0) < 1e-9);
        // Exhaustive fine grid over β.
        let fine = SearchConfig { beta_bins: 1000, ..SearchConfig::default() };
        let f = optimize_beta(&ch, &n, &p, &fine, ConvTimeMode::Optimized).unwrap();
        assert!(f.beta < 0.01 && s.beta < 0.02, "{} {}", f.beta, s.beta);
    }

    #[test]
    fn monotonicity_check_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let alphas: Vec<f64> = (0..50).map(|k| 1.0 + k as f64 / 49.0).collect();
        let time = TimeAllocation { t1: 0.4, t2: 0.3, t3: 0.3 };
        let mut checked = 0;
        for _ in 0..50 {
            let ch = random_channels(&mut rng, 4);
            match fl_monotonicity_check(&ch, &noise(), &powers(), 0.4, &time, &alphas).unwrap() {
                Monotonicity::Monotone => checked += 1,
                Monotonicity::Skipped => {}
                Monotonicity::NotMonotone { alpha } => panic!("decrease at α = {alpha}"),
            }
        }
        assert!(checked > 40);

        // Eavesdroppers hear a stronger copy of each user: nothing to check.
        let mut ch = random_channels(&mut rng, 4);
        ch.h_sat_e1 = &ch.h_sat_u1 * Complex64::new(2.0, 0.0);
        ch.h_sat_e2 = &ch.h_sat_u2 * Complex64::new(2.0, 0.0);
        let n = NoiseModel::uniform(1.0).unwrap();
        assert_eq!(
            fl_monotonicity_check(&ch, &n, &powers(), 0.4, &time, &alphas).unwrap(),
            Monotonicity::Skipped
        );
    }

    #[test]
    fn unit_scale_reproduces_secrecy_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ch = random_channels(&mut rng, 3);
        let n = noise();
        let inter = build_intermediates(&ch, &n, &powers(), 0.5).unwrap();
        let (w1, _) = design_beamformers_con(&inter);
        let term = fl_secrecy_term(0.25, &w1, &ch.h_sat_u2, &ch.h_sat_e2, n.sigma2_u2, n.sigma2_e2);
        let direct = fl_rate(&w1, &ch.h_sat_u2, n.sigma2_u2, 0.25).unwrap()
            - fl_rate(&w1, &ch.h_sat_e2, n.sigma2_e2, 0.25).unwrap();
        assert!((term - direct).abs() < 1e-12);
        assert!((term - 0.25 * inter.a_coef).abs() < 1e-9 * term.abs().max(1e-3));
    }
}
