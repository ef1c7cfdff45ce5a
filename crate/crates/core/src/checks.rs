//! Oracle comparisons and invariant checks, shared by `satsec oracle`,
//! `satsec selftest` and the acceptance tests.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel_gen::{draw_scenario, ChannelConfig, FadingParams, TrialSeed};
use crate::conv_scheme::{optimize_beta, fl_monotonicity_check, ConvTimeMode, Monotonicity};
use crate::error::Result;
use crate::link_budget::{GroundChannelParams, LinkBudget};
use crate::montecarlo::{run_experiment_with_workers, ScenarioConfig};
use crate::oracle::{complex_gaussian, lp_grid_oracle, lp_vertex_oracle, rayleigh_sampling_max, sdp_grid_oracle};
use crate::rates::TxPowers;
use crate::solvers::{gen_eig_max, gen_eig_max_loaded_rank_one, maxmin_sdp, min_snr, outer, rank_one_extract, tiny_lp};
use crate::xor_scheme::SearchConfig;
use crate::CMatrix;

/// Outcome of one check: the worst error seen against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: worst {:.3e} (tolerance {:.1e}) over {} instances",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.instances
        )?;
        if !self.detail.is_empty() {
            write!(f, "; {}", self.detail)?;
        }
        Ok(())
    }
}

/// Max-min beamformer (closed form + rank-one extraction) against the
/// subspace grid search. Error is `|ours − grid| / grid` of the min SNR.
pub fn sdp_oracle_check(per_feed_count: usize, feeds: &[usize], grid: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut count, mut below, mut over_power) = (0.0f64, 0, 0, 0);
    for &n in feeds {
        for _ in 0..per_feed_count {
            let g1 = complex_gaussian(&mut rng, n);
            let g2 = complex_gaussian(&mut rng, n);
            let s1 = rng.random_range(0.5..2.0);
            let s2 = rng.random_range(0.5..2.0);
            let p = rng.random_range(0.5..5.0);
            let (a, b) = (outer(&g1), outer(&g2));
            let res = maxmin_sdp(&a, &b, s1, s2, p)?;
            let w = rank_one_extract(&res, &a, &b, p)?;
            if w.norm_squared() > p * (1.0 + 1e-9) {
                over_power += 1;
            }
            let ours = min_snr(&w, &a, &b, s1, s2);
            let oracle = sdp_grid_oracle(&g1, &g2, s1, s2, p, grid);
            if ours < oracle * (1.0 - 1e-9) {
                below += 1;
            }
            worst = worst.max((ours - oracle).abs() / oracle);
            count += 1;
        }
    }
    let tolerance = 1e-2;
    Ok(CheckReport {
        name: "max-min beamformer vs subspace grid".into(),
        instances: count,
        worst,
        tolerance,
        passed: worst <= tolerance && below == 0 && over_power == 0,
        detail: format!("{below} below the grid, {over_power} over budget, grid {grid}x{grid}"),
    })
}

/// Time-allocation LP against brute force. Error is the absolute gap to
/// vertex enumeration; a plain `grid × grid` search must never beat the LP
/// and must trail it by no more than its own resolution allows.
pub fn lp_oracle_check(sets: usize, grid: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut beaten, mut infeasible, mut worst_grid_gap) = (0.0f64, 0, 0, 0.0f64);
    for _ in 0..sets {
        let mut coef = || rng.random_range(-2.0..10.0);
        let (c, d, a, b) = (coef(), coef(), coef(), coef());
        let lp = tiny_lp(c, d, a, b)?;
        if lp.max_violation(c, d, a, b) > 1e-12 {
            infeasible += 1;
        }
        let gridded = lp_grid_oracle(c, d, a, b, grid);
        if gridded > lp.objective + 1e-12 {
            beaten += 1;
        }
        // Moving a vertex to the nearest lattice point costs at most
        // 3/grid of time in each of the four rate bounds.
        let bound = 3.0 * (c.max(0.0) + d.max(0.0) + a.max(0.0) + b.max(0.0)) / grid as f64;
        worst_grid_gap = worst_grid_gap.max((lp.objective - gridded) / bound.max(f64::MIN_POSITIVE));
        worst = worst.max((lp.objective - lp_vertex_oracle(c, d, a, b)).abs());
    }
    let tolerance = 1e-6;
    Ok(CheckReport {
        name: "time-allocation LP vs grid".into(),
        instances: sets,
        worst,
        tolerance,
        passed: worst <= tolerance && beaten == 0 && infeasible == 0 && worst_grid_gap <= 1.0,
        detail: format!(
            "{grid}x{grid} grid beat the LP {beaten} times, grid gap at most {worst_grid_gap:.2} of its resolution bound, {infeasible} infeasible"
        ),
    })
}

fn random_psd<R: Rng>(rng: &mut R, n: usize, ridge: f64) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng, 1)[0]);
    &m * m.adjoint() + CMatrix::identity(n, n) * Complex64::new(ridge, 0.0)
}

/// Top generalized eigenpair against random sampling of the Rayleigh
/// quotient. Error is the relative residual `‖Uv − λEv‖ / (‖Uv‖ + |λ|‖Ev‖)`;
/// the returned quotient must also beat every sample.
pub fn gen_eig_oracle_check(pairs: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut beaten) = (0.0f64, 0);
    for k in 0..pairs {
        let n = 2 + k % 4;
        // Alternate dense pencils and the loaded rank-one pencils of the reference scheme.
        let (u, e, lambda, v) = if k % 2 == 0 {
            let u = random_psd(&mut rng, n, 0.0);
            let e = random_psd(&mut rng, n, 0.1);
            let (lambda, v) = gen_eig_max(&u, &e)?;
            (u, e, lambda, v)
        } else {
            let gu = complex_gaussian(&mut rng, n);
            let ge = complex_gaussian(&mut rng, n);
            let la = rng.random_range(0.05..2.0);
            let lb = rng.random_range(0.05..2.0);
            let (lambda, v) = gen_eig_max_loaded_rank_one(la, &gu, lb, &ge)?;
            let id = CMatrix::identity(n, n);
            (&id * Complex64::new(la, 0.0) + outer(&gu), &id * Complex64::new(lb, 0.0) + outer(&ge), lambda, v)
        };
        let uv = &u * &v;
        let ev = &e * &v;
        let residual = (&uv - &ev * Complex64::new(lambda, 0.0)).norm() / (uv.norm() + lambda.abs() * ev.norm());
        worst = worst.max(residual);
        let quotient = v.dotc(&uv).re / v.dotc(&ev).re;
        let sampled = rayleigh_sampling_max(&u, &e, samples, &mut rng);
        if quotient < sampled * (1.0 - 1e-12) {
            beaten += 1;
        }
    }
    let tolerance = 1e-8;
    Ok(CheckReport {
        name: "generalized eigenpair vs sampling".into(),
        instances: pairs,
        worst,
        tolerance,
        passed: worst <= tolerance && beaten == 0,
        detail: format!("{beaten} pencils where a sample beat the eigenvector, {samples} samples each"),
    })
}

/// Power activity and forward-link monotonicity of reference-scheme
/// solutions on default-budget channels. Returns `(activity, monotonicity)`.
pub fn power_split_check(trials: usize, feeds: usize, alpha_points: usize, seed: u64) -> Result<(CheckReport, CheckReport)> {
    let budget = LinkBudget::default();
    let config = ChannelConfig::from_budget(&budget, feeds, FadingParams::default(), GroundChannelParams::default());
    let noise = budget.noise_model()?;
    let powers = TxPowers::new(budget.fl_power_w()?, budget.user_power_w()?)?;
    let search = SearchConfig::default();
    let alphas: Vec<f64> = (0..alpha_points)
        .map(|k| 1.0 + k as f64 / (alpha_points.max(2) - 1) as f64)
        .collect();
    let (mut worst_power, mut solutions) = (0.0f64, 0);
    let (mut checked, mut skipped, mut failed) = (0, 0, 0);
    for t in 0..trials as u64 {
        let ch = draw_scenario(TrialSeed::new(seed, t), &config)?;
        for mode in [ConvTimeMode::Optimized, ConvTimeMode::Equal] {
            let s = optimize_beta(&ch, &noise, &powers, &search, mode)?;
            let p1 = s.beta * powers.satellite;
            let p2 = (1.0 - s.beta) * powers.satellite;
            worst_power = worst_power
                .max((s.w1.norm_squared() - p1).abs() / p1)
                .max((s.w2.norm_squared() - p2).abs() / p2);
            solutions += 1;
            match fl_monotonicity_check(&ch, &noise, &powers, s.beta, &s.time, &alphas)? {
                Monotonicity::Monotone => checked += 1,
                Monotonicity::Skipped => skipped += 1,
                Monotonicity::NotMonotone { .. } => failed += 1,
            }
        }
    }
    let activity = CheckReport {
        name: "reference beams use their full power split".into(),
        instances: solutions,
        worst: worst_power,
        tolerance: 1e-9,
        passed: worst_power <= 1e-9,
        detail: String::new(),
    };
    let fraction_failed = if checked + failed > 0 { failed as f64 / (checked + failed) as f64 } else { 0.0 };
    let monotone = CheckReport {
        name: "forward-link secrecy nondecreasing in beam scale".into(),
        instances: checked + failed,
        worst: fraction_failed,
        tolerance: 0.0,
        passed: failed == 0 && checked > 0,
        detail: format!("{checked} monotone, {failed} not, {skipped} skipped, {alpha_points}-point scale grid"),
    };
    Ok((activity, monotone))
}

/// Per-trial `OTA ≥ ETA` for both schemes at every sweep point.
pub fn dominance_check(configs: &[ScenarioConfig]) -> Result<CheckReport> {
    let (mut violations, mut points) = (0, 0);
    for c in configs {
        let s = run_experiment_with_workers(c, None)?;
        violations += s.dominance_violations;
        points += c.sweep.len() * c.trials;
    }
    Ok(CheckReport {
        name: "optimized times never lose to equal times".into(),
        instances: points,
        worst: violations as f64,
        tolerance: 0.0,
        passed: violations == 0,
        detail: "paired trials, every sweep point".into(),
    })
}

/// Byte-identical CSV for each listed worker count.
pub fn determinism_check(config: &ScenarioConfig, workers: &[usize]) -> Result<CheckReport> {
    let mut outputs = Vec::new();
    for &w in workers {
        outputs.push(run_experiment_with_workers(config, Some(w))?.to_csv(config));
    }
    let mismatches = outputs.windows(2).filter(|p| p[0] != p[1]).count();
    Ok(CheckReport {
        name: format!("{} CSV identical across worker counts {:?}", config.name, workers),
        instances: workers.len(),
        worst: mismatches as f64,
        tolerance: 0.0,
        passed: mismatches == 0,
        detail: String::new(),
    })
}

/// Smaller versions of the three oracle comparisons.
pub fn oracle_suite(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        sdp_oracle_check(25, &[3, 4, 5, 6], 401, seed)?,
        lp_oracle_check(200, 400, seed)?,
        gen_eig_oracle_check(100, 10_000, seed)?,
    ])
}

/// Quick invariant checks over every scenario builder.
pub fn selftest_suite(seed: u64) -> Result<Vec<CheckReport>> {
    let mut reports = oracle_suite(seed)?;
    let (activity, monotone) = power_split_check(30, 5, 50, seed)?;
    reports.push(activity);
    reports.push(monotone);
    let mut configs = Vec::new();
    for name in ["fig2", "fig3", "fig4", "fig5", "fig7"] {
        let mut c = crate::montecarlo::scenario_by_name(name)?;
        c.trials = 8;
        c.master_seed = seed;
        c.search = SearchConfig { time_bins: 20, beta_bins: 20, ..SearchConfig::default() };
        configs.push(c);
    }
    reports.push(dominance_check(&configs)?);
    reports.push(determinism_check(&configs[0], &[1, 2])?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for r in oracle_suite(3).unwrap() {
            assert!(r.passed, "{r}");
        }
        let (a, m) = power_split_check(5, 4, 20, 1).unwrap();
        assert!(a.passed, "{a}");
        assert!(m.passed, "{m}");
    }

    #[test]
    fn report_formatting() {
        let r = CheckReport {
            name: "x".into(),
            instances: 3,
            worst: 0.5,
            tolerance: 1.0,
            passed: true,
            detail: "d".into(),
        };
        assert_eq!(r.to_string(), "[PASS] x: worst 5.000e-1 (tolerance 1.0e0) over 3 instances; d");
    }
}
