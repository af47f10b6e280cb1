use crate::ade::{AdeConfig, SketchBank};
use crate::error::Result;
use crate::ipe::{IpeConfig, IpeState};
use crate::matching::{argmax, per_structure_delta, MatchParams, MatchState, Matcher, MatcherKind, Step, WeightKind};
use crate::vector::{dot, PointSet, Vector};

const CHECK_SLACK: f64 = 1e-12;

/// Greedy over distance sketches: `i0 = argmax(d~_i - w_i)`.
#[derive(Debug, Clone)]
pub struct DistanceMatcher {
    state: MatchState,
    bank: SketchBank,
    epsilon: f64,
    instrument: bool,
}

impl DistanceMatcher {
    pub fn new(offline: PointSet, params: &MatchParams) -> Result<Self> {
        let cfg = AdeConfig {
            epsilon: params.epsilon,
            delta: per_structure_delta(params.delta, offline.len())?,
            seed: params.seed,
            constants: params.sketch,
        };
        let bank = SketchBank::build(offline.points().to_vec(), &cfg)?;
        Ok(DistanceMatcher {
            state: MatchState::new(offline, WeightKind::Distance),
            bank,
            epsilon: params.epsilon,
            instrument: params.instrument,
        })
    }

    pub fn bank(&self) -> &SketchBank {
        &self.bank
    }
}

impl Matcher for DistanceMatcher {
    fn kind(&self) -> MatcherKind {
        MatcherKind::DistanceMatching
    }

    fn state(&self) -> &MatchState {
        &self.state
    }

    fn update(&mut self, y: Vector) -> Result<Step> {
        self.state.check_dim(&y)?;
        let est = self.bank.query(&y)?.into_vec();
        if self.instrument {
            let exact = self.state.exact_weights(&y);
            let eps = self.epsilon;
            if est.iter().zip(&exact).any(|(e, d)| (e - d).abs() > eps * d + CHECK_SLACK) {
                self.state.flag();
            }
        }
        let i0 = argmax(est.iter().zip(self.state.accumulated()).map(|(e, w)| e - w));
        Ok(self.state.record(i0, y, est[i0]))
    }
}

/// Greedy over inner-product sketches: `i0 = argmax(w~_i - w_i)`.
#[derive(Debug, Clone)]
pub struct InnerProductMatcher {
    state: MatchState,
    ipe: IpeState,
    instrument: bool,
}

impl InnerProductMatcher {
    pub fn new(offline: PointSet, params: &MatchParams) -> Result<Self> {
        let cfg = IpeConfig::new(
            params.epsilon,
            per_structure_delta(params.delta, offline.len())?,
            params.seed,
        )
        .with_constants(params.sketch);
        let ipe = IpeState::init_with(&offline, &cfg)?;
        Ok(InnerProductMatcher {
            state: MatchState::new(offline, WeightKind::InnerProduct),
            ipe,
            instrument: params.instrument,
        })
    }

    pub fn estimator(&self) -> &IpeState {
        &self.ipe
    }
}

impl Matcher for InnerProductMatcher {
    fn kind(&self) -> MatcherKind {
        MatcherKind::InnerProductMatching
    }

    fn state(&self) -> &MatchState {
        &self.state
    }

    fn update(&mut self, y: Vector) -> Result<Step> {
        self.state.check_dim(&y)?;
        let est = self.ipe.query(&y)?.into_vec();
        if self.instrument {
            let eps = self.ipe.epsilon();
            let bad = est
                .iter()
                .zip(self.state.offline().points())
                .any(|(e, x)| (e - dot(x.as_slice(), y.as_slice())).abs() > eps + CHECK_SLACK);
            if bad {
                self.state.flag();
            }
        }
        let i0 = argmax(est.iter().zip(self.state.accumulated()).map(|(e, w)| e - w));
        Ok(self.state.record(i0, y, est[i0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ade::SketchConstants;
    use crate::rng::SeededRng;

    fn params(eps: f64) -> MatchParams {
        let mut p = MatchParams::new(eps, 0.1, 0.1, 5);
        p.sketch = SketchConstants { rows: 4.0, groups: 1.0 };
        p.instrument = true;
        p
    }

    fn ball(seed: u64, n: usize, d: usize, radius: f64) -> Vec<Vector> {
        let mut rng = SeededRng::new(seed);
        (0..n)
            .map(|_| rng.unit_sphere_vector(d).scaled(radius * rng.uniform()))
            .collect()
    }

    #[test]
    fn init_splits_delta() {
        let off = PointSet::new(ball(1, 10, 3, 1.0), 1.0).unwrap();
        let m = DistanceMatcher::new(off, &params(0.05)).unwrap();
        assert!((m.bank().plan().delta - 0.01).abs() < 1e-15);
        assert_eq!(m.state().accumulated(), &[0.0; 10]);
    }

    #[test]
    fn accounting_holds_each_step() {
        let off = PointSet::new(ball(2, 12, 4, 1.0), 1.0).unwrap();
        let mut dm = DistanceMatcher::new(off.clone(), &params(0.09)).unwrap();
        let mut im = InnerProductMatcher::new(off, &params(0.1)).unwrap();
        for y in ball(3, 30, 4, 1.0) {
            for m in [&mut dm as &mut dyn Matcher, &mut im as &mut dyn Matcher] {
                let before = m.state().accumulated().to_vec();
                m.update(y.clone()).unwrap();
                let after = m.state().accumulated();
                let changed = before.iter().zip(after).filter(|(a, b)| a != b).count();
                assert!(changed <= 1);
                assert!(before.iter().zip(after).all(|(a, b)| b >= a));
                let sum: f64 = after.iter().sum();
                assert!((m.query() - sum).abs() <= 1e-9 * sum.max(1.0));
            }
        }
        assert_eq!(im.state().online_count(), 30);
    }

    #[test]
    fn inner_product_matcher_rejects_long_queries() {
        let off = PointSet::new(ball(4, 5, 3, 1.0), 1.0).unwrap();
        let mut im = InnerProductMatcher::new(off, &params(0.1)).unwrap();
        assert!(im.update(Vector::new(vec![2.0, 0.0, 0.0]).unwrap()).is_err());
        assert_eq!(im.state().online_count(), 0);
    }

    #[test]
    fn distance_matcher_rejects_large_epsilon() {
        let off = PointSet::new(ball(4, 5, 3, 1.0), 1.0).unwrap();
        assert!(DistanceMatcher::new(off, &params(0.2)).is_err());
    }
}
