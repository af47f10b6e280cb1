//! Online matchers.
//!
//! Every matcher keeps a [`MatchState`]: per-offline accumulated weight `w_i`
//! (the best edge it believes is assigned to `x_i`), the assignment lists, and
//! the running total `s = sum w_i`. An offline point may take many online
//! points; only the heaviest one counts, so a later, better arrival lets it
//! "regret" an earlier one.
//!
//! The matchers differ only in how they find the arrival's best increment:
//!
//! | kind | increment source |
//! |------|------------------|
//! | [`MatcherKind::GreedyExactIp`], [`MatcherKind::GreedyExactDist`] | exact scan, optionally perturbed by an [`IncrementOracle`] |
//! | [`MatcherKind::DistanceMatching`] | distance sketches |
//! | [`MatcherKind::InnerProductMatching`] | inner-product sketches |
//! | [`MatcherKind::FasterInnerProductMatching`] | one LSH max-inner-product query |

mod faster;
mod greedy;
mod sketched;

use std::fmt;
use std::str::FromStr;

pub use faster::FasterInnerProductMatcher;
pub use greedy::{inject_noise_oracle, GreedyMatcher, IncrementOracle, OracleMode};
pub use sketched::{DistanceMatcher, InnerProductMatcher};

use crate::ade::SketchConstants;
use crate::error::{Error, Result};
use crate::maxip::LshConfig;
use crate::vector::{dot, squared_distance, PointSet, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// `max(<u, v>, 0)`; the problem requires nonnegative weights.
    InnerProduct,
    Distance,
}

impl WeightKind {
    pub fn weight(self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            WeightKind::InnerProduct => dot(u, v).max(0.0),
            WeightKind::Distance => squared_distance(u, v).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatcherKind {
    GreedyExactIp,
    GreedyExactDist,
    DistanceMatching,
    InnerProductMatching,
    FasterInnerProductMatching,
}

impl MatcherKind {
    pub const ALL: [MatcherKind; 5] = [
        MatcherKind::GreedyExactIp,
        MatcherKind::GreedyExactDist,
        MatcherKind::DistanceMatching,
        MatcherKind::InnerProductMatching,
        MatcherKind::FasterInnerProductMatching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatcherKind::GreedyExactIp => "greedy-ip",
            MatcherKind::GreedyExactDist => "greedy-dist",
            MatcherKind::DistanceMatching => "distance",
            MatcherKind::InnerProductMatching => "inner-product",
            MatcherKind::FasterInnerProductMatching => "faster-ip",
        }
    }

    pub fn weight_kind(self) -> WeightKind {
        match self {
            MatcherKind::GreedyExactDist | MatcherKind::DistanceMatching => WeightKind::Distance,
            _ => WeightKind::InnerProduct,
        }
    }
}

impl fmt::Display for MatcherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatcherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatcherKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = MatcherKind::ALL.iter().map(|k| k.name()).collect();
                Error::config(format!("unknown matcher `{s}`, expected one of {}", names.join(", ")))
            })
    }
}

/// Lower bound on the realized value that a matcher's guarantee promises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundFormula {
    /// `opt / 2`
    Half,
    /// `(1 - 2 eps) opt / 2`
    Multiplicative { epsilon: f64 },
    /// `opt / 2 - 1.5 m eps`
    Additive { epsilon: f64 },
    /// `min((1 - eps) opt, opt - m tau) / 2`
    Oracle { epsilon: f64, tau: f64 },
}

impl BoundFormula {
    pub fn value(&self, opt: f64, online: usize) -> f64 {
        let m = online as f64;
        match *self {
            BoundFormula::Half => 0.5 * opt,
            BoundFormula::Multiplicative { epsilon } => 0.5 * (1.0 - 2.0 * epsilon) * opt,
            BoundFormula::Additive { epsilon } => 0.5 * opt - 1.5 * m * epsilon,
            BoundFormula::Oracle { epsilon, tau } => {
                0.5 * ((1.0 - epsilon) * opt).min(opt - m * tau)
            }
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            BoundFormula::Half => "half",
            BoundFormula::Multiplicative { .. } => "half-1-2eps",
            BoundFormula::Additive { .. } => "half-minus-1.5m-eps",
            BoundFormula::Oracle { .. } => "half-min-1-eps-or-m-tau",
        }
    }
}

/// Slack used when comparing a realized value against its bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;

pub fn bound_satisfied(realized: f64, bound: f64) -> bool {
    realized >= bound - BOUND_TOLERANCE
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchParams {
    pub epsilon: f64,
    pub tau: f64,
    pub delta: f64,
    pub seed: u64,
    pub sketch: SketchConstants,
    pub lsh: LshConfig,
    /// Perturbation applied by the exact greedy matchers.
    pub noise: OracleMode,
    /// Check each step against the backing structure's contract (costs a
    /// full exact scan per update).
    pub instrument: bool,
}

impl MatchParams {
    pub fn new(epsilon: f64, tau: f64, delta: f64, seed: u64) -> Self {
        MatchParams {
            epsilon,
            tau,
            delta,
            seed,
            sketch: SketchConstants::default(),
            lsh: LshConfig::default(),
            noise: OracleMode::Exact,
            instrument: false,
        }
    }

    pub fn bound(&self, kind: MatcherKind) -> BoundFormula {
        match kind {
            MatcherKind::GreedyExactIp | MatcherKind::GreedyExactDist => match self.noise {
                OracleMode::Exact => BoundFormula::Half,
                OracleMode::Multiplicative(epsilon) => BoundFormula::Multiplicative { epsilon },
                OracleMode::Additive(epsilon) => BoundFormula::Additive { epsilon },
                OracleMode::MaxIp { epsilon, tau } => BoundFormula::Oracle { epsilon, tau },
            },
            MatcherKind::DistanceMatching => BoundFormula::Multiplicative {
                epsilon: self.epsilon,
            },
            MatcherKind::InnerProductMatching => BoundFormula::Additive {
                epsilon: self.epsilon,
            },
            MatcherKind::FasterInnerProductMatching => BoundFormula::Oracle {
                epsilon: self.epsilon,
                tau: self.tau,
            },
        }
    }
}

/// Outcome of one arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub chosen: usize,
    /// Amount added to `s`.
    pub increment: f64,
}

#[derive(Debug, Clone)]
pub struct MatchState {
    offline: PointSet,
    weight: WeightKind,
    accumulated: Vec<f64>,
    assignments: Vec<Vec<usize>>,
    online: Vec<Vector>,
    choices: Vec<usize>,
    tracked: f64,
    flagged_steps: usize,
}

impl MatchState {
    pub fn new(offline: PointSet, weight: WeightKind) -> Self {
        let n = offline.len();
        MatchState {
            offline,
            weight,
            accumulated: vec![0.0; n],
            assignments: vec![Vec::new(); n],
            online: Vec::new(),
            choices: Vec::new(),
            tracked: 0.0,
            flagged_steps: 0,
        }
    }

    pub fn offline(&self) -> &PointSet {
        &self.offline
    }

    pub fn weight_kind(&self) -> WeightKind {
        self.weight
    }

    pub fn accumulated(&self) -> &[f64] {
        &self.accumulated
    }

    /// Online arrivals assigned to offline point `i`, as arrival indices.
    pub fn assignments(&self, i: usize) -> &[usize] {
        &self.assignments[i]
    }

    pub fn online(&self) -> &[Vector] {
        &self.online
    }

    /// Offline index chosen for each arrival, in order.
    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn tracked_value(&self) -> f64 {
        self.tracked
    }

    pub fn online_count(&self) -> usize {
        self.online.len()
    }

    /// Whether any step broke the backing structure's guarantee. Only
    /// detected when instrumentation is on.
    pub fn flagged(&self) -> bool {
        self.flagged_steps > 0
    }

    pub fn flagged_steps(&self) -> usize {
        self.flagged_steps
    }

    pub(crate) fn flag(&mut self) {
        self.flagged_steps += 1;
    }

    /// Exact weight of every offline point against `y`.
    pub fn exact_weights(&self, y: &Vector) -> Vec<f64> {
        self.offline
            .points()
            .iter()
            .map(|x| self.weight.weight(x.as_slice(), y.as_slice()))
            .collect()
    }

    pub(crate) fn check_dim(&self, y: &Vector) -> Result<()> {
        if y.dim() != self.offline.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.offline.dim(),
                found: y.dim(),
            });
        }
        Ok(())
    }

    fn assign(&mut self, i: usize, y: Vector) {
        self.assignments[i].push(self.online.len());
        self.choices.push(i);
        self.online.push(y);
    }

    /// Assigns `y` to `i` and raises `w_i` to `estimate` if that is larger.
    pub(crate) fn record(&mut self, i: usize, y: Vector, estimate: f64) -> Step {
        self.assign(i, y);
        let increment = (estimate - self.accumulated[i]).max(0.0);
        if increment > 0.0 {
            self.accumulated[i] = estimate;
            self.tracked += increment;
        }
        Step {
            chosen: i,
            increment,
        }
    }

    /// Assigns `y` to `i` and adds `z` to `w_i` when positive.
    pub(crate) fn credit(&mut self, i: usize, y: Vector, z: f64) -> Step {
        self.assign(i, y);
        let increment = z.max(0.0);
        if increment > 0.0 {
            self.accumulated[i] += increment;
            self.tracked += increment;
        }
        Step {
            chosen: i,
            increment,
        }
    }

    /// Sum over offline points of the heaviest exact weight assigned to it.
    pub fn realized_value(&self) -> f64 {
        self.realized_value_with(self.weight)
    }

    pub fn realized_value_with(&self, weight: WeightKind) -> f64 {
        self.assignments
            .iter()
            .zip(self.offline.points())
            .map(|(list, x)| {
                list.iter()
                    .map(|&j| weight.weight(x.as_slice(), self.online[j].as_slice()))
                    .fold(0.0, f64::max)
            })
            .sum()
    }
}

/// Index of the largest value; lowest index on ties.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub trait Matcher {
    fn kind(&self) -> MatcherKind;

    fn state(&self) -> &MatchState;

    /// Assigns one arrival. Errors leave the state untouched.
    fn update(&mut self, y: Vector) -> Result<Step>;

    fn query(&self) -> f64 {
        self.state().tracked_value()
    }
}

/// Builds the matcher of `kind` over `offline`. Backing structures receive the
/// failure budget `delta / n`.
pub fn match_init(
    kind: MatcherKind,
    offline: PointSet,
    params: &MatchParams,
) -> Result<Box<dyn Matcher>> {
    Ok(match kind {
        MatcherKind::GreedyExactIp | MatcherKind::GreedyExactDist => Box::new(
            GreedyMatcher::with_oracle(
                kind,
                offline,
                inject_noise_oracle(params.noise, params.seed)?,
            )?,
        ),
        MatcherKind::DistanceMatching => Box::new(DistanceMatcher::new(offline, params)?),
        MatcherKind::InnerProductMatching => Box::new(InnerProductMatcher::new(offline, params)?),
        MatcherKind::FasterInnerProductMatching => {
            Box::new(FasterInnerProductMatcher::new(offline, params)?)
        }
    })
}

pub(crate) fn per_structure_delta(delta: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(delta / n as f64)
}
