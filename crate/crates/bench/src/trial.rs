//! One trial: build a matcher, stream the online points, compare with the
//! offline optimum.

use std::time::Instant;

use ipmatch::matching::{bound_satisfied, match_init, MatcherKind};
use ipmatch::oracle::{optimal_matching, WeightMatrix};
use ipmatch::Result;

use crate::config::ExperimentConfig;
use crate::generate::generate_dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trial: usize,
    pub matcher: MatcherKind,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub eps: f64,
    pub tau: f64,
    pub delta: f64,
    pub seed: u64,
    /// The matcher's own running total.
    pub tracked_s: f64,
    /// Exact value of the matcher's assignment.
    pub realized_alg: f64,
    /// Omitted above the optimum size limit.
    pub opt: Option<f64>,
    /// Undefined when `opt` is 0 or omitted.
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub bound_id: &'static str,
    pub bound_satisfied: Option<bool>,
    pub flagged: bool,
    pub p50_us: Option<f64>,
    pub p99_us: Option<f64>,
}

impl TrialReport {
    /// An unflagged trial whose realized value is below its bound.
    pub fn is_violation(&self) -> bool {
        !self.flagged && self.bound_satisfied == Some(false)
    }
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialReport> {
    cfg.validate()?;
    let seed = trial_seed(cfg.seed, trial);
    let ds = generate_dataset(cfg, cfg.n_offline, seed)?;
    let params = cfg.match_params(seed);
    let bound_formula = params.bound(cfg.matcher);
    let mut matcher = match_init(cfg.matcher, ds.offline.clone(), &params)?;

    let mut latencies = Vec::with_capacity(if cfg.timing { ds.online.len() } else { 0 });
    for y in &ds.online {
        if cfg.timing {
            let start = Instant::now();
            matcher.update(y.clone())?;
            latencies.push(start.elapsed().as_secs_f64() * 1e6);
        } else {
            matcher.update(y.clone())?;
        }
    }
    latencies.sort_by(f64::total_cmp);

    let state = matcher.state();
    let realized = state.realized_value();
    let m = ds.online.len();
    let opt = (cfg.n_offline <= cfg.opt_limit && m <= cfg.opt_limit).then(|| {
        let w = WeightMatrix::from_points(ds.offline.points(), &ds.online, cfg.matcher.weight_kind())
            .expect("generated weights are valid");
        optimal_matching(&w).value
    });
    let bound = opt.map(|o| bound_formula.value(o, m));
    Ok(TrialReport {
        trial,
        matcher: cfg.matcher,
        n: cfg.n_offline,
        m,
        d: cfg.dim,
        eps: cfg.epsilon,
        tau: cfg.tau,
        delta: cfg.delta,
        seed,
        tracked_s: matcher.query(),
        realized_alg: realized,
        opt,
        ratio: opt.filter(|o| *o > 0.0).map(|o| realized / o),
        bound,
        bound_id: bound_formula.id(),
        bound_satisfied: bound.map(|b| bound_satisfied(realized, b)),
        flagged: state.flagged(),
        p50_us: percentile(&latencies, 0.5),
        p99_us: percentile(&latencies, 0.99),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialReport>> {
    (0..cfg.trials).map(|t| run_trial(cfg, t)).collect()
}
