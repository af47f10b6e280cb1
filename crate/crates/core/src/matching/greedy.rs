use crate::error::{Error, Result};
use crate::matching::{argmax, MatchState, Matcher, MatcherKind, Step};
use crate::rng::SeededRng;
use crate::vector::{PointSet, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMode {
    Exact,
    /// `(1 - eps) w <= w~ <= (1 + eps) w`
    Multiplicative(f64),
    /// `w - eps <= w~ <= w + eps`
    Additive(f64),
    /// Chosen increment within `(1 - eps)` of the best or within `tau` of it.
    /// Realized by the LSH matcher; cannot be injected.
    MaxIp { epsilon: f64, tau: f64 },
}

/// Wraps exact weights with noise at the full allowed magnitude and a
/// seeded random sign per estimate.
#[derive(Debug, Clone)]
pub struct IncrementOracle {
    mode: OracleMode,
    rng: SeededRng,
}

pub fn inject_noise_oracle(mode: OracleMode, seed: u64) -> Result<IncrementOracle> {
    match mode {
        OracleMode::Exact => {}
        OracleMode::Multiplicative(e) | OracleMode::Additive(e) => {
            if !(0.0..1.0).contains(&e) {
                return Err(Error::config(format!("noise epsilon must lie in [0, 1), got {e}")));
            }
        }
        OracleMode::MaxIp { .. } => {
            return Err(Error::config(
                "max-IP oracle mode comes from the LSH matcher and cannot be injected",
            ))
        }
    }
    Ok(IncrementOracle {
        mode,
        rng: SeededRng::new(seed).fork(1),
    })
}

impl IncrementOracle {
    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn estimate(&mut self, w: f64) -> f64 {
        match self.mode {
            OracleMode::Exact | OracleMode::MaxIp { .. } => w,
            OracleMode::Multiplicative(e) => {
                let sign = if self.rng.coin() { 1.0 } else { -1.0 };
                w * (1.0 + sign * e)
            }
            OracleMode::Additive(e) => {
                let sign = if self.rng.coin() { 1.0 } else { -1.0 };
                w + sign * e
            }
        }
    }
}

/// Scans every offline point. The chosen index maximizes the (estimated)
/// marginal gain `max(w~ - w_i, 0)`.
#[derive(Debug, Clone)]
pub struct GreedyMatcher {
    kind: MatcherKind,
    state: MatchState,
    oracle: IncrementOracle,
}

impl GreedyMatcher {
    pub fn new(kind: MatcherKind, offline: PointSet) -> Result<Self> {
        Self::with_oracle(kind, offline, inject_noise_oracle(OracleMode::Exact, 0)?)
    }

    pub fn with_oracle(kind: MatcherKind, offline: PointSet, oracle: IncrementOracle) -> Result<Self> {
        if !matches!(kind, MatcherKind::GreedyExactIp | MatcherKind::GreedyExactDist) {
            return Err(Error::config(format!("{kind} is not an exact greedy matcher")));
        }
        Ok(GreedyMatcher {
            kind,
            state: MatchState::new(offline, kind.weight_kind()),
            oracle,
        })
    }

    pub fn oracle(&self) -> &IncrementOracle {
        &self.oracle
    }
}

impl Matcher for GreedyMatcher {
    fn kind(&self) -> MatcherKind {
        self.kind
    }

    fn state(&self) -> &MatchState {
        &self.state
    }

    fn update(&mut self, y: Vector) -> Result<Step> {
        self.state.check_dim(&y)?;
        let estimates: Vec<f64> = self
            .state
            .exact_weights(&y)
            .into_iter()
            .map(|w| self.oracle.estimate(w))
            .collect();
        let acc = self.state.accumulated();
        let i0 = argmax(estimates.iter().zip(acc).map(|(e, w)| (e - w).max(0.0)));
        Ok(self.state.record(i0, y, estimates[i0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::WeightKind;

    fn set(rows: &[&[f64]]) -> PointSet {
        PointSet::with_tight_bound(rows.iter().map(|r| Vector::new(r.to_vec()).unwrap()).collect())
            .unwrap()
    }

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn axis_arrivals() {
        let mut g = GreedyMatcher::new(MatcherKind::GreedyExactIp, set(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(g.query(), 0.0);
        assert_eq!(g.update(v(&[1.0, 0.0])).unwrap(), Step { chosen: 0, increment: 1.0 });
        assert_eq!(g.update(v(&[0.0, 1.0])).unwrap(), Step { chosen: 1, increment: 1.0 });
        assert_eq!(g.query(), 2.0);
        assert_eq!(g.state().realized_value(), 2.0);
    }

    #[test]
    fn single_offline_point_takes_the_max() {
        let mut g = GreedyMatcher::new(MatcherKind::GreedyExactIp, set(&[&[1.0, 0.0]])).unwrap();
        for x in [0.2, 0.7, 0.4, -0.3] {
            assert_eq!(g.update(v(&[x, 0.0])).unwrap().chosen, 0);
        }
        assert!((g.query() - 0.7).abs() < 1e-15);
        assert_eq!(g.state().assignments(0).len(), 4);
    }

    #[test]
    fn tight_instance_approaches_half() {
        let off = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let mut g = GreedyMatcher::new(MatcherKind::GreedyExactIp, off).unwrap();
        // w(u1,v1) = 1, w(u2,v1) = 1 - 1e-6; w(u1,v2) = 1, w(u2,v2) = 0
        g.update(v(&[1.0, 1.0 - 1e-6])).unwrap();
        g.update(v(&[1.0, 0.0])).unwrap();
        assert_eq!(g.state().choices(), &[0, 0]);
        assert!((g.state().realized_value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_weights_use_raw_vectors() {
        let mut g = GreedyMatcher::new(MatcherKind::GreedyExactDist, set(&[&[0.0, 0.0], &[3.0, 0.0]])).unwrap();
        let s = g.update(v(&[0.0, 4.0])).unwrap();
        assert_eq!(s, Step { chosen: 1, increment: 5.0 });
        assert_eq!(g.state().weight_kind(), WeightKind::Distance);
    }

    #[test]
    fn rejects_non_greedy_kind_and_bad_dims() {
        assert!(GreedyMatcher::new(MatcherKind::DistanceMatching, set(&[&[1.0]])).is_err());
        let mut g = GreedyMatcher::new(MatcherKind::GreedyExactIp, set(&[&[1.0]])).unwrap();
        assert!(g.update(v(&[1.0, 0.0])).is_err());
        assert_eq!(g.state().online_count(), 0);
    }

    #[test]
    fn noise_magnitudes() {
        let mut o = inject_noise_oracle(OracleMode::Multiplicative(0.1), 3).unwrap();
        let mut seen = (false, false);
        for _ in 0..200 {
            let e = o.estimate(1.0);
            assert!((0.9 - 1e-15..=1.1 + 1e-15).contains(&e));
            seen.0 |= e < 1.0;
            seen.1 |= e > 1.0;
        }
        assert!(seen.0 && seen.1);
        let mut o = inject_noise_oracle(OracleMode::Additive(0.05), 3).unwrap();
        for _ in 0..200 {
            assert!(o.estimate(0.0).abs() <= 0.05);
        }
        let mut o = inject_noise_oracle(OracleMode::Additive(0.0), 3).unwrap();
        assert_eq!(o.estimate(0.37), 0.37);
        assert!(inject_noise_oracle(OracleMode::MaxIp { epsilon: 0.1, tau: 0.1 }, 0).is_err());
        assert!(inject_noise_oracle(OracleMode::Additive(1.5), 0).is_err());
    }
}
