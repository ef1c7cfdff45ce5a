//! Seeded Monte Carlo sweeps over feeds, times, power and eavesdropper distance.
//!
//! Every sweep point reuses the same trial seeds, so all schemes and all
//! sweep values see the same underlying random draws (paired samples).
//! Trials run on a rayon pool; results are merged in trial order, which
//! keeps every number independent of the worker count.

mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_gen::{draw_scenario, ChannelConfig, FadingParams, TrialSeed};
use crate::conv_scheme::{optimize_beta_modes, ConvTimeMode};
use crate::error::{Error, Result};
use crate::link_budget::{GroundChannelParams, LinkBudget};
use crate::rates::{TimeAllocation, TxPowers};
use crate::xor_scheme::{optimize_time_with_beams, solve_with_beams, SearchConfig, XorBeams};

pub use output::{config_hash, write_atomic, Manifest};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "SATSEC_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "XOR-ETA")]
    XorEta,
    #[serde(rename = "XOR-OTA")]
    XorOta,
    #[serde(rename = "Con-ETA")]
    ConEta,
    #[serde(rename = "Con-OTA")]
    ConOta,
    /// XOR at a fixed `t1` (the swept one, or [`ScenarioConfig::xor_fixed_t1`]).
    #[serde(rename = "XOR-FIXED")]
    XorFixed,
    /// Reference scheme at fixed `(t1, t2)`, `β` still optimized.
    #[serde(rename = "Con-FIXED")]
    ConFixed,
}

impl Scheme {
    pub const MAIN: [Scheme; 4] = [Scheme::XorEta, Scheme::XorOta, Scheme::ConEta, Scheme::ConOta];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::XorEta => "XOR-ETA",
            Scheme::XorOta => "XOR-OTA",
            Scheme::ConEta => "Con-ETA",
            Scheme::ConOta => "Con-OTA",
            Scheme::XorFixed => "XOR-FIXED",
            Scheme::ConFixed => "Con-FIXED",
        }
    }

    pub fn is_xor(&self) -> bool {
        matches!(self, Scheme::XorEta | Scheme::XorOta | Scheme::XorFixed)
    }
}

/// The swept quantity and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Feeds(Vec<usize>),
    /// Fixed return-link time of the XOR scheme.
    RlTime(Vec<f64>),
    /// Fixed `(t1, t2)` of the reference scheme.
    TimeGrid(Vec<(f64, f64)>),
    FlPowerDbw(Vec<f64>),
    EveDistanceM(Vec<f64>),
}

impl Sweep {
    pub fn label(&self) -> &'static str {
        match self {
            Sweep::Feeds(_) => "feeds",
            Sweep::RlTime(_) => "t1",
            Sweep::TimeGrid(_) => "t1:t2",
            Sweep::FlPowerDbw(_) => "fl_power_dbw",
            Sweep::EveDistanceM(_) => "eve_distance_m",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::Feeds(v) => v.len(),
            Sweep::RlTime(v) | Sweep::FlPowerDbw(v) | Sweep::EveDistanceM(v) => v.len(),
            Sweep::TimeGrid(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> SweepValue {
        match self {
            Sweep::Feeds(v) => SweepValue::Feeds(v[i]),
            Sweep::RlTime(v) => SweepValue::RlTime(v[i]),
            Sweep::TimeGrid(v) => SweepValue::TimeGrid(v[i].0, v[i].1),
            Sweep::FlPowerDbw(v) => SweepValue::FlPowerDbw(v[i]),
            Sweep::EveDistanceM(v) => SweepValue::EveDistanceM(v[i]),
        }
    }
}

/// One point of a [`Sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepValue {
    Feeds(usize),
    RlTime(f64),
    TimeGrid(f64, f64),
    FlPowerDbw(f64),
    EveDistanceM(f64),
}

impl SweepValue {
    /// The value as a plain number; the `t1` of a time pair.
    pub fn as_f64(&self) -> f64 {
        match *self {
            SweepValue::Feeds(n) => n as f64,
            SweepValue::RlTime(v) | SweepValue::FlPowerDbw(v) | SweepValue::EveDistanceM(v) => v,
            SweepValue::TimeGrid(t1, _) => t1,
        }
    }
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            SweepValue::Feeds(n) => write!(f, "{n}"),
            SweepValue::RlTime(v) | SweepValue::FlPowerDbw(v) | SweepValue::EveDistanceM(v) => write!(f, "{v}"),
            SweepValue::TimeGrid(t1, t2) => write!(f, "{t1}:{t2}"),
        }
    }
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    pub trials: usize,
    pub master_seed: u64,
    /// Feed count when feeds are not swept.
    pub feeds: usize,
    pub budget: LinkBudget,
    pub fading: FadingParams,
    pub ground: GroundChannelParams,
    pub search: SearchConfig,
    /// `t1` of `XOR-FIXED` when `t1` is not swept.
    pub xor_fixed_t1: f64,
    /// `(t1, t2)` of `Con-FIXED` when the times are not swept.
    pub con_fixed_times: (f64, f64),
    /// `t1` values at which the XOR sum secrecy is also averaged per sweep point.
    pub time_profile: Vec<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            schemes: Scheme::MAIN.to_vec(),
            sweep: Sweep::Feeds(vec![5]),
            trials: 2000,
            master_seed: 42,
            feeds: 5,
            budget: LinkBudget::default(),
            fading: FadingParams::default(),
            ground: GroundChannelParams::default(),
            search: SearchConfig::default(),
            xor_fixed_t1: 0.5,
            con_fixed_times: (0.5, 0.25),
            time_profile: Vec::new(),
        }
    }
}

fn ensure_feeds(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFew { what: "satellite feeds", min: 2, got: n });
    }
    Ok(())
}

fn ensure_open_unit(what: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfRange { what, value: t, range: "(0, 1)" });
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::TooFew { what: "trials", min: 1, got: 0 });
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes requested".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Config("empty sweep".into()));
        }
        ensure_feeds(self.feeds)?;
        self.budget.validate()?;
        self.fading.validate()?;
        self.ground.validate()?;
        self.search.validate()?;
        ensure_open_unit("XOR fixed t1", self.xor_fixed_t1)?;
        TimeAllocation::three_slot(self.con_fixed_times.0, self.con_fixed_times.1)?;
        for &t in &self.time_profile {
            ensure_open_unit("profile t1", t)?;
        }
        match &self.sweep {
            Sweep::Feeds(v) => v.iter().try_for_each(|&n| ensure_feeds(n))?,
            Sweep::RlTime(v) => v.iter().try_for_each(|&t| ensure_open_unit("swept t1", t))?,
            Sweep::TimeGrid(v) => v.iter().try_for_each(|&(t1, t2)| TimeAllocation::three_slot(t1, t2).map(|_| ()))?,
            Sweep::FlPowerDbw(v) => v.iter().try_for_each(|&p| crate::error::ensure_finite("swept FL power", p).map(|_| ()))?,
            Sweep::EveDistanceM(v) => {
                v.iter().try_for_each(|&d| crate::error::ensure_positive("swept distance", d).map(|_| ()))?
            }
        }
        Ok(())
    }

    /// Channel statistics and powers in force at one sweep point.
    fn point_setup(&self, value: SweepValue) -> Result<PointSetup> {
        let mut budget = self.budget.clone();
        let mut ground = self.ground.clone();
        let mut feeds = self.feeds;
        let mut xor_t1 = self.xor_fixed_t1;
        let mut con_times = self.con_fixed_times;
        match value {
            SweepValue::Feeds(n) => feeds = n,
            SweepValue::RlTime(t1) => xor_t1 = t1,
            SweepValue::TimeGrid(t1, t2) => con_times = (t1, t2),
            SweepValue::FlPowerDbw(p) => budget.fl_tx_power_dbw = p,
            SweepValue::EveDistanceM(d) => ground.eve_distance_range_m = (d, d),
        }
        Ok(PointSetup {
            channels: ChannelConfig::from_budget(&budget, feeds, self.fading.clone(), ground),
            noise: budget.noise_model()?,
            powers: TxPowers::new(budget.fl_power_w()?, budget.user_power_w()?)?,
            xor_t1,
            con_times,
        })
    }
}

struct PointSetup {
    channels: ChannelConfig,
    noise: crate::rates::NoiseModel,
    powers: TxPowers,
    xor_t1: f64,
    con_times: (f64, f64),
}

/// One scheme's result in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub sum_secrecy: f64,
    pub t1: f64,
    pub beta: Option<f64>,
}

/// All schemes of one trial at one sweep point, plus the XOR time profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub outcomes: Vec<TrialOutcome>,
    pub profile: Vec<f64>,
}

/// Evaluates every requested scheme on one trial's channels.
pub fn run_trial(config: &ScenarioConfig, value: SweepValue, trial_index: u64) -> Result<TrialResult> {
    let setup = config.point_setup(value)?;
    run_trial_with(config, &setup, trial_index)
}

fn run_trial_with(config: &ScenarioConfig, setup: &PointSetup, trial_index: u64) -> Result<TrialResult> {
    let ch = draw_scenario(TrialSeed::new(config.master_seed, trial_index), &setup.channels)?;
    let (noise, powers) = (&setup.noise, &setup.powers);
    let needs_xor = config.schemes.iter().any(Scheme::is_xor) || !config.time_profile.is_empty();
    let beams = if needs_xor { Some(XorBeams::design(&ch, noise, powers.satellite)?) } else { None };

    let con_modes: Vec<ConvTimeMode> = config
        .schemes
        .iter()
        .filter_map(|s| match s {
            Scheme::ConEta => Some(ConvTimeMode::Equal),
            Scheme::ConOta => Some(ConvTimeMode::Optimized),
            Scheme::ConFixed => Some(ConvTimeMode::Fixed { t1: setup.con_times.0, t2: setup.con_times.1 }),
            _ => None,
        })
        .collect();
    let mut con = if con_modes.is_empty() {
        Vec::new()
    } else {
        optimize_beta_modes(&ch, noise, powers, &config.search, &con_modes)?
    }
    .into_iter();

    let mut outcomes = Vec::with_capacity(config.schemes.len());
    for scheme in &config.schemes {
        let outcome = if scheme.is_xor() {
            let beams = beams.as_ref().expect("XOR beams designed");
            let s = match scheme {
                Scheme::XorEta => solve_with_beams(&ch, noise, powers, beams, 0.5, 0.5)?,
                Scheme::XorOta => optimize_time_with_beams(&ch, noise, powers, beams, &config.search)?,
                _ => solve_with_beams(&ch, noise, powers, beams, setup.xor_t1, 1.0 - setup.xor_t1)?,
            };
            TrialOutcome { sum_secrecy: s.sum_secrecy, t1: s.time.t1, beta: None }
        } else {
            let s = con.next().expect("one reference solution per mode");
            TrialOutcome { sum_secrecy: s.sum_secrecy, t1: s.time.t1, beta: Some(s.beta) }
        };
        outcomes.push(outcome);
    }

    let mut profile = Vec::with_capacity(config.time_profile.len());
    if let Some(beams) = &beams {
        for &t1 in &config.time_profile {
            profile.push(solve_with_beams(&ch, noise, powers, beams, t1, 1.0 - t1)?.sum_secrecy);
        }
    }
    Ok(TrialResult { outcomes, profile })
}

/// Aggregate of one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sweep_value: SweepValue,
    pub scheme: Scheme,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub mean_t1: f64,
    pub stderr_t1: f64,
    pub mean_beta: Option<f64>,
}

/// Mean XOR sum secrecy at a fixed `t1`, per sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub sweep_value: SweepValue,
    pub t1: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecrecySummary {
    pub scenario: String,
    pub sweep_label: String,
    pub master_seed: u64,
    pub rows: Vec<SummaryRow>,
    pub profile: Vec<ProfileRow>,
    /// Trials where an optimized-time scheme fell below its equal-time
    /// counterpart. Always zero unless something is broken.
    pub dominance_violations: usize,
}

impl SecrecySummary {
    pub fn row(&self, scheme: Scheme, point: usize) -> Option<&SummaryRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).nth(point)
    }

    /// Rows of one scheme in sweep order.
    pub fn series(&self, scheme: Scheme) -> Vec<&SummaryRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        },
    }
}

/// Runs the experiment on a pool sized by [`WORKERS_ENV`].
pub fn run_experiment(config: &ScenarioConfig) -> Result<SecrecySummary> {
    run_experiment_with_workers(config, workers_from_env()?)
}

/// Runs the experiment on `workers` threads (rayon's default when `None`).
pub fn run_experiment_with_workers(config: &ScenarioConfig, workers: Option<usize>) -> Result<SecrecySummary> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut rows = Vec::new();
    let mut profile = Vec::new();
    let mut dominance_violations = 0;
    for i in 0..config.sweep.len() {
        let value = config.sweep.point(i);
        let setup = config.point_setup(value)?;
        let trials: Vec<TrialResult> = pool.install(|| {
            (0..config.trials as u64)
                .into_par_iter()
                .map(|t| run_trial_with(config, &setup, t))
                .collect::<Result<Vec<_>>>()
        })?;
        dominance_violations += count_dominance_violations(&config.schemes, &trials);
        for (k, &scheme) in config.schemes.iter().enumerate() {
            let sums: Vec<f64> = trials.iter().map(|t| t.outcomes[k].sum_secrecy).collect();
            let t1s: Vec<f64> = trials.iter().map(|t| t.outcomes[k].t1).collect();
            let betas: Vec<f64> = trials.iter().filter_map(|t| t.outcomes[k].beta).collect();
            let (mean, stderr) = mean_stderr(&sums);
            let (mean_t1, stderr_t1) = mean_stderr(&t1s);
            rows.push(SummaryRow {
                sweep_value: value,
                scheme,
                mean,
                stderr,
                trials: trials.len(),
                mean_t1,
                stderr_t1,
                mean_beta: (!betas.is_empty()).then(|| mean_stderr(&betas).0),
            });
        }
        for (k, &t1) in config.time_profile.iter().enumerate() {
            let sums: Vec<f64> = trials.iter().map(|t| t.profile[k]).collect();
            let (mean, stderr) = mean_stderr(&sums);
            profile.push(ProfileRow { sweep_value: value, t1, mean, stderr });
        }
    }
    Ok(SecrecySummary {
        scenario: config.name.clone(),
        sweep_label: config.sweep.label().into(),
        master_seed: config.master_seed,
        rows,
        profile,
        dominance_violations,
    })
}

/// Counts trials where `XOR-OTA < XOR-ETA` or `Con-OTA < Con-ETA`.
pub fn count_dominance_violations(schemes: &[Scheme], trials: &[TrialResult]) -> usize {
    let pos = |s: Scheme| schemes.iter().position(|&x| x == s);
    let pairs = [(Scheme::XorOta, Scheme::XorEta), (Scheme::ConOta, Scheme::ConEta)];
    let mut count = 0;
    for (ota, eta) in pairs {
        if let (Some(o), Some(e)) = (pos(ota), pos(eta)) {
            count += trials
                .iter()
                .filter(|t| t.outcomes[o].sum_secrecy < t.outcomes[e].sum_secrecy)
                .count();
        }
    }
    count
}

/// Scenario names understood by [`scenario_by_name`].
pub const SCENARIOS: [&str; 7] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

/// Looks up a scenario builder; `fig6` and `fig8` are the time profiles
/// produced by the `fig5` and `fig7` runs.
pub fn scenario_by_name(name: &str) -> Result<ScenarioConfig> {
    match name {
        "fig2" => Ok(scenario_fig2()),
        "fig3" => Ok(scenario_fig3()),
        "fig4" => Ok(scenario_fig4()),
        "fig5" | "fig6" => Ok(scenario_fig5()),
        "fig7" | "fig8" => Ok(scenario_fig7()),
        other => Err(Error::UnknownScenario(other.into())),
    }
}

/// Sum secrecy of all four schemes against the feed count, 3 to 10.
pub fn scenario_fig2() -> ScenarioConfig {
    ScenarioConfig {
        name: "fig2".into(),
        sweep: Sweep::Feeds((3..=10).collect()),
        ..ScenarioConfig::default()
    }
}

fn profile_grid() -> Vec<f64> {
    (1..20).map(|k| k as f64 / 20.0).collect()
}

/// XOR sum secrecy against a fixed return-link time.
pub fn scenario_fig3() -> ScenarioConfig {
    ScenarioConfig {
        name: "fig3".into(),
        schemes: vec![Scheme::XorFixed],
        sweep: Sweep::RlTime(profile_grid()),
        ..ScenarioConfig::default()
    }
}

/// Reference-scheme sum secrecy over a lattice of `(t1, t2)` with step 0.1.
pub fn scenario_fig4() -> ScenarioConfig {
    let mut grid = Vec::new();
    for i in 1..10 {
        for j in 1..10 {
            if i + j < 10 {
                grid.push((i as f64 / 10.0, j as f64 / 10.0));
            }
        }
    }
    ScenarioConfig {
        name: "fig4".into(),
        schemes: vec![Scheme::ConFixed],
        sweep: Sweep::TimeGrid(grid),
        ..ScenarioConfig::default()
    }
}

/// Forward-link power in 3 dB steps, so neighbouring points differ by a doubling.
pub fn scenario_fig5() -> ScenarioConfig {
    ScenarioConfig {
        name: "fig5".into(),
        sweep: Sweep::FlPowerDbw((0..12).map(|k| -21.0 + 3.0 * k as f64).collect()),
        time_profile: profile_grid(),
        ..ScenarioConfig::default()
    }
}

/// Fixed eavesdropper distances instead of the random 2 to 2.5 km draw.
pub fn scenario_fig7() -> ScenarioConfig {
    ScenarioConfig {
        name: "fig7".into(),
        sweep: Sweep::EveDistanceM(vec![200.0, 300.0, 500.0, 700.0, 1000.0, 1500.0, 2000.0, 3000.0, 5000.0]),
        time_profile: profile_grid(),
        ..ScenarioConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mut c: ScenarioConfig, trials: usize) -> ScenarioConfig {
        c.trials = trials;
        c.search = SearchConfig { time_bins: 10, beta_bins: 10, ..SearchConfig::default() };
        c
    }

    #[test]
    fn builders_validate() {
        for name in SCENARIOS {
            scenario_by_name(name).unwrap().validate().unwrap();
        }
        assert!(matches!(scenario_by_name("fig9"), Err(Error::UnknownScenario(_))));
        assert_eq!(scenario_fig2().sweep, Sweep::Feeds(vec![3, 4, 5, 6, 7, 8, 9, 10]));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = scenario_fig2();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = scenario_fig2();
        c.sweep = Sweep::Feeds(vec![1]);
        assert!(c.validate().is_err());
        let mut c = scenario_fig2();
        c.sweep = Sweep::TimeGrid(vec![(0.6, 0.5)]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_trial_is_deterministic() {
        let c = small(scenario_fig2(), 1);
        let a = run_experiment_with_workers(&c, Some(1)).unwrap();
        let b = run_experiment_with_workers(&c, Some(1)).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.iter().all(|r| r.stderr == 0.0 && r.mean >= 0.0));
    }

    #[test]
    fn paired_dominance_and_worker_independence() {
        let mut c = small(scenario_fig7(), 12);
        c.sweep = Sweep::EveDistanceM(vec![300.0, 2000.0]);
        let one = run_experiment_with_workers(&c, Some(1)).unwrap();
        let three = run_experiment_with_workers(&c, Some(3)).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.dominance_violations, 0);
        for i in 0..2 {
            assert!(one.row(Scheme::XorOta, i).unwrap().mean >= one.row(Scheme::XorEta, i).unwrap().mean);
            assert!(one.row(Scheme::ConOta, i).unwrap().mean >= one.row(Scheme::ConEta, i).unwrap().mean);
        }
        assert_eq!(one.profile.len(), 2 * 19);
    }

    #[test]
    fn mean_stderr_basics() {
        assert_eq!(mean_stderr(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
