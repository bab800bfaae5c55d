//! Seeded Monte Carlo experiments.
//!
//! Every replication produces one numeric row; the aggregates of a report are
//! always computed from those rows by [`aggregate`], so a report carrying its
//! per-replication table can be re-aggregated and must agree with itself.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::exec::{replicate, Execution};
use super::stats::{ks_distance, mean, quantile, std_error};
use crate::changepoint::{analyze, estimate_change_point, Direction, ScenarioAnalytics};
use crate::decision::{critical_value, kolmogorov_cdf, Parameter, Side};
use crate::error::{invalid, Result};
use crate::estimator::lse_full;
use crate::model::{conditional_mean, conditional_second_moment, CirParams};
use crate::pathfun::{compute_functionals, SigmaSq};
use crate::rng::RandomSource;
use crate::sampler::{simulate_change_path, ChangeScenario, Start, TransitionKernel};
use crate::testprocess::{raw_score, test_trajectory, Component};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Null-hypothesis rejection rates and the law of the sup statistics.
    Size,
    /// Rejection rates under a change.
    Power,
    /// Extremes of the raw score over `T` against `ψ` and `φ`.
    Drift,
    /// Change-point localization error.
    Changepoint,
    /// One-step moments of the exact transition.
    SamplerMoments,
}

fn default_dt() -> f64 {
    0.01
}

fn default_alpha() -> f64 {
    0.05
}

fn default_param() -> Parameter {
    Parameter::A
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Model for `size` and `sampler-moments`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<CirParams>,
    /// Change scenario for `power`, `drift` and `changepoint`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ChangeScenario>,
    /// Horizon `T` for `size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub replications: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Test-trajectory grid size; one point per path step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Component used by `changepoint`.
    #[serde(default = "default_param")]
    pub param: Parameter,
    #[serde(default)]
    pub master_seed: u64,
    /// Initial state; stationary draw when absent. Required for
    /// `sampler-moments`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default)]
    pub sigma_sq: SigmaSq,
    /// Include the per-replication table in the report.
    #[serde(default)]
    pub per_replication: bool,
    /// Record wall-clock time (makes reports non-reproducible byte-wise).
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Config with defaults for everything except what the kind requires.
    pub fn new(kind: ExperimentKind, replications: u64) -> Self {
        ExperimentConfig {
            kind,
            params: None,
            scenario: None,
            horizon: None,
            replications,
            dt: default_dt(),
            grid_size: None,
            alpha: default_alpha(),
            param: default_param(),
            master_seed: 0,
            x0: None,
            sigma_sq: SigmaSq::Auto,
            per_replication: false,
            record_timing: false,
            output: None,
        }
    }

    fn start(&self) -> Start {
        self.x0.map_or(Start::Stationary, Start::Fixed)
    }

    fn params(&self) -> Result<CirParams> {
        let p = self
            .params
            .ok_or_else(|| invalid(format!("{:?} experiment needs `params`", self.kind)))?;
        p.validate()?;
        Ok(p)
    }

    fn scenario(&self) -> Result<ChangeScenario> {
        let s = self
            .scenario
            .ok_or_else(|| invalid(format!("{:?} experiment needs `scenario`", self.kind)))?;
        s.validate()?;
        Ok(s)
    }

    fn null_scenario(&self) -> Result<ChangeScenario> {
        let horizon = self
            .horizon
            .ok_or_else(|| invalid("size experiment needs `horizon`"))?;
        ChangeScenario::null(&self.params()?, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(invalid("replications must be >= 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if let Some(x) = self.x0 {
            if !(x.is_finite() && x >= 0.0) {
                return Err(invalid(format!("x0 must be >= 0, got {x}")));
            }
        }
        match self.kind {
            ExperimentKind::Size => {
                self.null_scenario()?;
            }
            ExperimentKind::SamplerMoments => {
                self.params()?;
                if self.x0.is_none() {
                    return Err(invalid("sampler-moments experiment needs `x0`"));
                }
            }
            ExperimentKind::Power | ExperimentKind::Drift => {
                self.scenario()?;
            }
            ExperimentKind::Changepoint => {
                let s = self.scenario()?;
                changepoint_target(&s, self.param)?;
            }
        }
        Ok(())
    }
}

/// Per-replication rows with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Vec<f64> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| r[k]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeAggregates {
    pub critical_value_two_sided: f64,
    pub rejection_rate_a: f64,
    pub rejection_rate_b: f64,
    /// Either component rejecting at `alpha/2`.
    pub rejection_rate_both: f64,
    pub rejection_rate_a_upper: f64,
    pub rejection_rate_a_lower: f64,
    /// KS distance of `sup |component|` to the Kolmogorov law.
    pub ks_distance_a: f64,
    pub ks_distance_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAggregates {
    pub rejection_rate_two_sided_a: f64,
    /// One-sided test on the side implied by the true change in `a`;
    /// absent when `a` does not change.
    pub rejection_rate_oriented_a: Option<f64>,
    pub rejection_rate_two_sided_b: f64,
    pub rejection_rate_oriented_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftAggregates {
    pub psi: f64,
    /// Mean of the first component's extreme over `T` (sup if `ψ >= 0`,
    /// else inf).
    pub mean_extreme_a_over_t: f64,
    /// Absent when `ψ = 0`.
    pub relative_error_psi: Option<f64>,
    /// Fraction of replications whose extreme has the sign of `ψ`.
    pub sign_agreement_a: f64,
    pub phi: f64,
    pub mean_extreme_b_over_t: f64,
    pub relative_error_phi: Option<f64>,
    pub sign_agreement_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointAggregates {
    pub tau: f64,
    pub tau_grid: f64,
    pub mean_abs_error: f64,
    pub median_abs_error: f64,
    pub q90_abs_error: f64,
    pub q95_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentAggregates {
    pub mean: f64,
    pub mean_std_error: f64,
    pub mean_oracle: f64,
    pub mean_z: f64,
    pub second_moment: f64,
    pub second_moment_std_error: f64,
    pub second_moment_oracle: f64,
    pub second_moment_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregates {
    Size(SizeAggregates),
    Power(PowerAggregates),
    Drift(DriftAggregates),
    Changepoint(ChangepointAggregates),
    SamplerMoments(MomentAggregates),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytics: Option<ScenarioAnalytics>,
    pub aggregates: Aggregates,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_replication: Option<Table>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| invalid(e.to_string()))
    }
}

fn changepoint_target(s: &ChangeScenario, param: Parameter) -> Result<(Component, Direction)> {
    let (component, k) = match param {
        Parameter::A => (Component::A, 0),
        Parameter::B => (Component::B, 1),
        Parameter::Both => return Err(invalid("changepoint experiment needs param a or b")),
    };
    let dir = Direction::of_change(s.theta_pre[k], s.theta_post[k])
        .ok_or_else(|| invalid(format!("scenario has no change in parameter {param:?}")))?;
    Ok((component, dir))
}

fn columns(kind: ExperimentKind) -> Vec<String> {
    let names: &[&str] = match kind {
        ExperimentKind::Size | ExperimentKind::Power => &[
            "sup_a", "inf_a", "sup_abs_a", "sup_b", "inf_b", "sup_abs_b", "a_hat", "b_hat",
            "sigma_sq_hat",
        ],
        ExperimentKind::Drift => &[
            "raw_sup_a", "raw_inf_a", "raw_sup_b", "raw_inf_b", "horizon",
        ],
        ExperimentKind::Changepoint => &["tau_hat", "abs_error"],
        ExperimentKind::SamplerMoments => &["draw"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

fn extremes(values: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    values.fold((f64::NEG_INFINITY, f64::INFINITY, 0.0f64), |(hi, lo, ab), v| {
        (hi.max(v), lo.min(v), ab.max(v.abs()))
    })
}

fn trajectory_row(
    cfg: &ExperimentConfig,
    scenario: &ChangeScenario,
    rng: &mut RandomSource,
) -> Result<Vec<f64>> {
    let path = simulate_change_path(scenario, cfg.start(), cfg.dt, rng)?.path;
    let fun = compute_functionals(&path, cfg.sigma_sq)?;
    let theta = lse_full(&fun)?;
    let traj = test_trajectory(&fun, cfg.grid_size)?;
    let (sa, ia, aa) = extremes(traj.component(Component::A));
    let (sb, ib, ab) = extremes(traj.component(Component::B));
    Ok(vec![sa, ia, aa, sb, ib, ab, theta.a_hat, theta.b_hat, fun.sigma_sq()])
}

fn run_rows(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<Vec<f64>>> {
    let n = cfg.replications;
    let seed = cfg.master_seed;
    match cfg.kind {
        ExperimentKind::Size => {
            let s = cfg.null_scenario()?;
            replicate(n, seed, exec, |_, rng| trajectory_row(cfg, &s, rng))
        }
        ExperimentKind::Power => {
            let s = cfg.scenario()?;
            replicate(n, seed, exec, |_, rng| trajectory_row(cfg, &s, rng))
        }
        ExperimentKind::Drift => {
            let s = cfg.scenario()?;
            replicate(n, seed, exec, |_, rng| {
                let path = simulate_change_path(&s, cfg.start(), cfg.dt, rng)?.path;
                let fun = compute_functionals(&path, cfg.sigma_sq)?;
                let raw = raw_score(&fun, &lse_full(&fun)?);
                let (sa, ia, _) = extremes(raw.component(Component::A));
                let (sb, ib, _) = extremes(raw.component(Component::B));
                Ok(vec![sa, ia, sb, ib, fun.horizon()])
            })
        }
        ExperimentKind::Changepoint => {
            let s = cfg.scenario()?;
            let (component, direction) = changepoint_target(&s, cfg.param)?;
            replicate(n, seed, exec, |_, rng| {
                let cp = simulate_change_path(&s, cfg.start(), cfg.dt, rng)?;
                let fun = compute_functionals(&cp.path, cfg.sigma_sq)?;
                let raw = raw_score(&fun, &lse_full(&fun)?);
                let est = estimate_change_point(&raw, component, direction);
                Ok(vec![est.tau_hat, (est.tau_hat - cp.tau).abs()])
            })
        }
        ExperimentKind::SamplerMoments => {
            let p = cfg.params()?;
            let x0 = cfg.x0.ok_or_else(|| invalid("sampler-moments needs `x0`"))?;
            let kernel = TransitionKernel::new(&p, cfg.dt)?;
            replicate(n, seed, exec, |_, rng| Ok(vec![kernel.sample(x0, rng)]))
        }
    }
}

fn rate(flags: impl Iterator<Item = bool>) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for f in flags {
        hit += usize::from(f);
        total += 1;
    }
    hit as f64 / total as f64
}

/// Aggregates for a per-replication table.
pub fn aggregate(cfg: &ExperimentConfig, table: &Table) -> Result<Aggregates> {
    let alpha = cfg.alpha;
    Ok(match cfg.kind {
        ExperimentKind::Size => {
            let c2 = critical_value(alpha, Side::TwoSided)?;
            let c2_half = critical_value(0.5 * alpha, Side::TwoSided)?;
            let c1 = critical_value(alpha, Side::Upper)?;
            let abs_a = table.column("sup_abs_a");
            let abs_b = table.column("sup_abs_b");
            let sup_a = table.column("sup_a");
            let inf_a = table.column("inf_a");
            Aggregates::Size(SizeAggregates {
                critical_value_two_sided: c2,
                rejection_rate_a: rate(abs_a.iter().map(|&s| s > c2)),
                rejection_rate_b: rate(abs_b.iter().map(|&s| s > c2)),
                rejection_rate_both: rate(
                    abs_a.iter().zip(&abs_b).map(|(&a, &b)| a > c2_half || b > c2_half),
                ),
                rejection_rate_a_upper: rate(sup_a.iter().map(|&s| s > c1)),
                rejection_rate_a_lower: rate(inf_a.iter().map(|&s| s < -c1)),
                ks_distance_a: ks_distance(&abs_a, kolmogorov_cdf),
                ks_distance_b: ks_distance(&abs_b, kolmogorov_cdf),
            })
        }
        ExperimentKind::Power => {
            let s = cfg.scenario()?;
            let c2 = critical_value(alpha, Side::TwoSided)?;
            let c1 = critical_value(alpha, Side::Upper)?;
            let oriented = |k: usize, comp: &str| -> Option<f64> {
                let sup = table.column(&format!("sup_{comp}"));
                let inf = table.column(&format!("inf_{comp}"));
                Direction::of_change(s.theta_pre[k], s.theta_post[k]).map(|d| match d {
                    Direction::Down => rate(sup.iter().map(|&v| v > c1)),
                    Direction::Up => rate(inf.iter().map(|&v| v < -c1)),
                })
            };
            Aggregates::Power(PowerAggregates {
                rejection_rate_two_sided_a: rate(table.column("sup_abs_a").iter().map(|&v| v > c2)),
                rejection_rate_oriented_a: oriented(0, "a"),
                rejection_rate_two_sided_b: rate(table.column("sup_abs_b").iter().map(|&v| v > c2)),
                rejection_rate_oriented_b: oriented(1, "b"),
            })
        }
        ExperimentKind::Drift => {
            let analytics = analyze(&cfg.scenario()?)?;
            let horizon = table.column("horizon");
            let summarize = |target: f64, comp: &str| -> (f64, Option<f64>, f64) {
                let col = if target >= 0.0 {
                    format!("raw_sup_{comp}")
                } else {
                    format!("raw_inf_{comp}")
                };
                let scaled: Vec<f64> = table
                    .column(&col)
                    .iter()
                    .zip(&horizon)
                    .map(|(v, t)| v / t)
                    .collect();
                let m = mean(&scaled);
                let sign = rate(scaled.iter().map(|v| v.signum() == target.signum() && *v != 0.0));
                let rel = (target != 0.0).then(|| (m - target).abs() / target.abs());
                (m, rel, sign)
            };
            let (ma, ea, sa) = summarize(analytics.psi, "a");
            let (mb, eb, sb) = summarize(analytics.phi, "b");
            Aggregates::Drift(DriftAggregates {
                psi: analytics.psi,
                mean_extreme_a_over_t: ma,
                relative_error_psi: ea,
                sign_agreement_a: sa,
                phi: analytics.phi,
                mean_extreme_b_over_t: mb,
                relative_error_phi: eb,
                sign_agreement_b: sb,
            })
        }
        ExperimentKind::Changepoint => {
            let s = cfg.scenario()?;
            let err = table.column("abs_error");
            Aggregates::Changepoint(ChangepointAggregates {
                tau: s.tau(),
                tau_grid: (s.tau() / cfg.dt).round() * cfg.dt,
                mean_abs_error: mean(&err),
                median_abs_error: quantile(&err, 0.5),
                q90_abs_error: quantile(&err, 0.9),
                q95_abs_error: quantile(&err, 0.95),
            })
        }
        ExperimentKind::SamplerMoments => {
            let p = cfg.params()?;
            let x0 = cfg.x0.ok_or_else(|| invalid("sampler-moments needs `x0`"))?;
            let draws = table.column("draw");
            let squares: Vec<f64> = draws.iter().map(|x| x * x).collect();
            let (m1, se1) = (mean(&draws), std_error(&draws));
            let (m2, se2) = (mean(&squares), std_error(&squares));
            let o1 = conditional_mean(&p, x0, cfg.dt)?;
            let o2 = conditional_second_moment(&p, x0, cfg.dt)?;
            Aggregates::SamplerMoments(MomentAggregates {
                mean: m1,
                mean_std_error: se1,
                mean_oracle: o1,
                mean_z: (m1 - o1) / se1,
                second_moment: m2,
                second_moment_std_error: se2,
                second_moment_oracle: o2,
                second_moment_z: (m2 - o2) / se2,
            })
        }
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(cfg, Execution::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let table = Table {
        columns: columns(cfg.kind),
        rows: run_rows(cfg, exec)?,
    };
    let aggregates = aggregate(cfg, &table)?;
    let analytics = match cfg.kind {
        ExperimentKind::Power | ExperimentKind::Drift | ExperimentKind::Changepoint => {
            Some(analyze(&cfg.scenario()?)?)
        }
        _ => None,
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        seed: cfg.master_seed,
        analytics,
        aggregates,
        per_replication: cfg.per_replication.then_some(table),
        wall_clock_seconds: cfg
            .record_timing
            .then(|| started.elapsed().as_secs_f64()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size_cfg() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::Size, 4);
        c.params = Some(CirParams::new(1.0, 1.0, 0.5).unwrap());
        c.horizon = Some(20.0);
        c.master_seed = 42;
        c.per_replication = true;
        c
    }

    #[test]
    fn reports_are_byte_identical() {
        let mut c = size_cfg();
        c.replications = 1;
        let a = run_experiment(&c).unwrap().to_json().unwrap();
        let b = run_experiment(&c).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_matches_sequential() {
        let c = size_cfg();
        let a = run_experiment_with(&c, Execution::Sequential).unwrap();
        let b = run_experiment_with(&c, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aggregates_recompute_from_emitted_rows() {
        let mut s = ChangeScenario::new([2.0, 1.0], [1.0, 1.0], 0.5, 0.5, 20.0).unwrap();
        for kind in [
            ExperimentKind::Size,
            ExperimentKind::Power,
            ExperimentKind::Drift,
            ExperimentKind::Changepoint,
        ] {
            let mut c = size_cfg();
            c.kind = kind;
            if kind != ExperimentKind::Size {
                c.scenario = Some(s);
            }
            let report = run_experiment(&c).unwrap();
            let json = report.to_json().unwrap();
            let parsed: ExperimentReport = serde_json::from_str(&json).unwrap();
            let again = aggregate(&parsed.config, parsed.per_replication.as_ref().unwrap()).unwrap();
            assert_eq!(again, report.aggregates, "{kind:?}");
            s.horizon += 1.0;
        }
    }

    #[test]
    fn config_validation() {
        let mut c = size_cfg();
        c.replications = 0;
        assert!(run_experiment(&c).is_err());
        let mut c = size_cfg();
        c.horizon = None;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(ExperimentKind::Changepoint, 3);
        c.scenario = Some(ChangeScenario::new([1.0, 1.0], [1.0, 2.0], 0.5, 0.5, 10.0).unwrap());
        assert!(c.validate().is_err(), "no change in a");
        c.param = Parameter::B;
        assert!(c.validate().is_ok());
        let mut c = ExperimentConfig::new(ExperimentKind::SamplerMoments, 3);
        c.params = Some(CirParams::new(1.0, 1.0, 0.5).unwrap());
        assert!(c.validate().is_err(), "x0 required");
    }

    #[test]
    fn timing_only_when_requested() {
        let mut c = size_cfg();
        c.replications = 1;
        assert!(run_experiment(&c).unwrap().wall_clock_seconds.is_none());
        c.record_timing = true;
        assert!(run_experiment(&c).unwrap().wall_clock_seconds.is_some());
    }

    #[test]
    fn sampler_moments_small() {
        let mut c = ExperimentConfig::new(ExperimentKind::SamplerMoments, 20_000);
        c.params = Some(CirParams::new(1.0, 1.0, 0.5).unwrap());
        c.x0 = Some(1.0);
        c.dt = 0.1;
        let r = run_experiment(&c).unwrap();
        match r.aggregates {
            Aggregates::SamplerMoments(m) => {
                assert!(m.mean_z.abs() < 4.0 && m.second_moment_z.abs() < 4.0, "{m:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
