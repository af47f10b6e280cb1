//! Per-update latency as a function of the offline set size.

use std::time::Instant;

use ipmatch::matching::{match_init, MatcherKind};
use ipmatch::maxip::{maxip_exponent, ExponentRegime};
use ipmatch::{Error, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::generate::generate_dataset;
use crate::trial::percentile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub matcher: String,
    pub n: usize,
    pub median_us: f64,
    pub p99_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSlope {
    pub matcher: String,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub slopes: Vec<SweepSlope>,
    /// Closed-form time-optimal exponent at the index's `(c, tau)`, for
    /// reference only.
    pub reference_exponent: Option<f64>,
}

impl SweepResult {
    pub fn slope(&self, kind: MatcherKind) -> Option<f64> {
        self.slopes.iter().find(|s| s.matcher == kind.name()).map(|s| s.slope)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Times `cfg.m_online` updates at every `n` for the LSH matcher, the exact
/// greedy matcher and `cfg.matcher`. Instrumentation and the optimum are
/// skipped so only the update path is measured.
pub fn scaling_sweep(cfg: &ExperimentConfig, n_values: &[usize]) -> Result<SweepResult> {
    cfg.validate()?;
    if n_values.len() < 2 || n_values.windows(2).any(|w| w[0] >= w[1]) || n_values[0] == 0 {
        return Err(Error::Config("sweep needs at least two ascending sizes".into()));
    }
    let mut kinds = vec![MatcherKind::FasterInnerProductMatching, MatcherKind::GreedyExactIp];
    if !kinds.contains(&cfg.matcher) {
        kinds.push(cfg.matcher);
    }
    let mut run = cfg.clone();
    run.instrument = false;

    let mut points = Vec::new();
    let mut slopes = Vec::new();
    for kind in kinds {
        let mut medians = Vec::new();
        for &n in n_values {
            let ds = generate_dataset(&run, n, cfg.seed)?;
            let mut matcher = match_init(kind, ds.offline, &run.match_params(cfg.seed))?;
            let mut t = Vec::with_capacity(ds.online.len());
            for y in ds.online {
                let start = Instant::now();
                matcher.update(y)?;
                t.push(start.elapsed().as_secs_f64() * 1e6);
            }
            t.sort_by(f64::total_cmp);
            let median = percentile(&t, 0.5).ok_or_else(|| Error::Config("sweep needs m >= 1".into()))?;
            medians.push(median);
            points.push(SweepPoint {
                matcher: kind.name().into(),
                n,
                median_us: median,
                p99_us: percentile(&t, 0.99).unwrap_or(median),
            });
        }
        let xs: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
        slopes.push(SweepSlope {
            matcher: kind.name().into(),
            slope: fit_loglog_slope(&xs, &medians),
        });
    }
    let reference_exponent = maxip_exponent(
        1.0 - cfg.epsilon,
        cfg.tau / (2.0 * cfg.norm_bound),
        ExponentRegime::TimeOptimal,
    )
    .ok();
    Ok(SweepResult {
        points,
        slopes,
        reference_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 100.0, 1000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.7)).collect();
        assert!((fit_loglog_slope(&xs, &ys) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted_sizes() {
        let cfg = ExperimentConfig::default();
        assert!(scaling_sweep(&cfg, &[100]).is_err());
        assert!(scaling_sweep(&cfg, &[200, 100]).is_err());
    }

    #[test]
    fn small_sweep_runs() {
        let cfg = ExperimentConfig {
            m_online: 5,
            dim: 4,
            ..ExperimentConfig::default()
        };
        let r = scaling_sweep(&cfg, &[16, 64]).unwrap();
        assert_eq!(r.points.len(), 4);
        assert!(r.slope(MatcherKind::GreedyExactIp).unwrap().is_finite());
    }
}
