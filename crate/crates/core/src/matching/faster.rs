//! Greedy via a single max-inner-product query per arrival.
//!
//! Offline point `x_i` with accumulated weight `w_i` is stored as
//! `X_i = (x_i, w_i)` and the arrival as `Y = (y, -1)`, so
//! `<X_i, Y> = <x_i, y> - w_i` is exactly the increment of matching `y` to
//! `x_i`. With `|x_i| <= D`, `w_i <= D` and `|y| <= 1`, `X_i / (sqrt(2) D)`
//! and `Y / sqrt(2)` fit in the unit ball; after the asymmetric transform the
//! sphere inner product is the increment divided by `2D`, so an increment of
//! `tau` maps to the index threshold `tau / (2D)`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::matching::{per_structure_delta, MatchParams, MatchState, Matcher, MatcherKind, Step, WeightKind};
use crate::maxip::{LshIndex, MaxIpResult};
use crate::rng::SeededRng;
use crate::vector::{dot, transform_data, transform_query, PointSet, TransformedPoint, Vector, NORM_SLACK};

const CHECK_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FasterInnerProductMatcher {
    state: MatchState,
    index: LshIndex,
    scale: f64,
    epsilon: f64,
    tau: f64,
    rng: SeededRng,
    instrument: bool,
    misses: usize,
}

impl FasterInnerProductMatcher {
    pub fn new(offline: PointSet, params: &MatchParams) -> Result<Self> {
        let (eps, tau) = (params.epsilon, params.tau);
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::config(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        let d = offline.norm_bound();
        let threshold = tau / (2.0 * d);
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::config(format!(
                "tau / (2D) must lie in (0, 1), got {threshold}"
            )));
        }
        let scale = SQRT_2 * d;
        let points = offline
            .points()
            .iter()
            .map(|x| Self::data_point(scale, x, 0.0))
            .collect::<Result<Vec<_>>>()?;
        let index = LshIndex::init_with(
            points,
            1.0 - eps,
            threshold,
            per_structure_delta(params.delta, offline.len())?,
            params.seed,
            &params.lsh,
        )?;
        Ok(FasterInnerProductMatcher {
            state: MatchState::new(offline, WeightKind::InnerProduct),
            index,
            scale,
            epsilon: eps,
            tau,
            rng: SeededRng::new(params.seed).fork(2),
            instrument: params.instrument,
            misses: 0,
        })
    }

    fn data_point(scale: f64, x: &Vector, w: f64) -> Result<TransformedPoint> {
        transform_data(&x.extended(&[w]).scaled(1.0 / scale))
    }

    fn query_point(y: &Vector) -> Result<TransformedPoint> {
        transform_query(&y.extended(&[-1.0]), SQRT_2)
    }

    pub fn index(&self) -> &LshIndex {
        &self.index
    }

    /// Arrivals on which the index returned no candidate and a random offline
    /// point was used instead.
    pub fn misses(&self) -> usize {
        self.misses
    }

    /// The chosen increment must be within `(1 - eps)` of the best one or
    /// within `tau` of it.
    fn step_ok(&self, y: &Vector, chosen: f64) -> bool {
        let best = self
            .state
            .exact_weights(y)
            .iter()
            .zip(self.state.accumulated())
            .map(|(w, acc)| (w - acc).max(0.0))
            .fold(0.0, f64::max);
        chosen >= (1.0 - self.epsilon) * best - CHECK_SLACK || chosen >= best - self.tau - CHECK_SLACK
    }
}

impl Matcher for FasterInnerProductMatcher {
    fn kind(&self) -> MatcherKind {
        MatcherKind::FasterInnerProductMatching
    }

    fn state(&self) -> &MatchState {
        &self.state
    }

    fn update(&mut self, y: Vector) -> Result<Step> {
        self.state.check_dim(&y)?;
        let norm = y.norm();
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::NormViolation { norm, bound: 1.0 });
        }
        let q = Self::query_point(&y)?;
        let i = match self.index.query(&q)? {
            MaxIpResult::Found { index, .. } => index,
            MaxIpResult::Fail => {
                self.misses += 1;
                self.rng.below(self.state.offline().len())
            }
        };
        let x = &self.state.offline().points()[i];
        let z = dot(x.as_slice(), y.as_slice()) - self.state.accumulated()[i];
        if self.instrument && !self.step_ok(&y, z.max(0.0)) {
            self.state.flag();
        }
        let step = self.state.credit(i, y, z);
        if z > 0.0 {
            let x = &self.state.offline().points()[i];
            let p = Self::data_point(self.scale, x, self.state.accumulated()[i])?;
            self.index.update(i, p)?;
        }
        Ok(step)
    }
}
