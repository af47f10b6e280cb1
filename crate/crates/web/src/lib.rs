//! wasm-bindgen entry points for the page in `www/`.
//!
//! Each export wraps a plain Rust function so the logic can be tested on the
//! host; errors cross the boundary as JS exceptions.

use ipmatch::ade::SketchConstants;
use ipmatch::matching::{bound_satisfied, match_init, MatchParams, MatcherKind};
use ipmatch::maxip::{maxip_exponent, ExponentRegime};
use ipmatch::oracle::{optimal_matching, WeightMatrix};
use ipmatch::sampler::PrefixTree;
use ipmatch::{PointSet, SeededRng, Vector};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Much smaller than the library default so the sketched matchers answer in
/// well under a second; their estimates are correspondingly rougher.
const DEMO_SKETCH: SketchConstants = SketchConstants { rows: 2.0, groups: 1.0 };
const MAX_SIDE: usize = 400;
const MAX_DRAWS: u32 = 10_000_000;

fn regime(name: &str) -> Result<ExponentRegime, String> {
    match name {
        "time" => Ok(ExponentRegime::TimeOptimal),
        "space" => Ok(ExponentRegime::SpaceOptimal),
        other => Err(format!("unknown regime `{other}`, expected time or space")),
    }
}

/// `rho` at `points` evenly spaced `tau` in (0, 1); NaN where undefined.
pub fn exponent_curve_values(c: f64, regime_name: &str, points: usize) -> Result<Vec<f64>, String> {
    let regime = regime(regime_name)?;
    if !(c > 0.0 && c < 1.0) {
        return Err(format!("c must lie in (0, 1), got {c}"));
    }
    Ok((1..=points)
        .map(|k| {
            let tau = k as f64 / (points + 1) as f64;
            maxip_exponent(c, tau, regime).unwrap_or(f64::NAN)
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct MatcherRow {
    pub matcher: &'static str,
    pub realized: f64,
    pub opt: f64,
    pub ratio: Option<f64>,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub flagged: bool,
}

fn ball(rng: &mut SeededRng, count: usize, dim: usize) -> Vec<Vector> {
    (0..count)
        .map(|_| {
            let r = rng.uniform();
            rng.unit_sphere_vector(dim).scaled(r)
        })
        .collect()
}

/// Runs every matcher on one random instance in the unit ball.
pub fn compare(n: usize, m: usize, dim: usize, eps: f64, tau: f64, seed: u64) -> Result<Vec<MatcherRow>, String> {
    if n == 0 || dim == 0 || n > MAX_SIDE || m > MAX_SIDE {
        return Err(format!("need 1 <= n, m <= {MAX_SIDE} and dim >= 1"));
    }
    let mut rng = SeededRng::new(seed);
    let offline = ball(&mut rng, n, dim);
    let online = ball(&mut rng, m, dim);
    let params = MatchParams {
        sketch: DEMO_SKETCH,
        instrument: true,
        ..MatchParams::new(eps, tau, 0.1, seed)
    };
    MatcherKind::ALL
        .iter()
        .map(|&kind| {
            let set = PointSet::new(offline.clone(), 1.0).map_err(|e| e.to_string())?;
            let mut matcher = match_init(kind, set, &params).map_err(|e| e.to_string())?;
            for y in &online {
                matcher.update(y.clone()).map_err(|e| e.to_string())?;
            }
            let realized = matcher.state().realized_value();
            let w = WeightMatrix::from_points(&offline, &online, kind.weight_kind()).map_err(|e| e.to_string())?;
            let opt = optimal_matching(&w).value;
            let bound = params.bound(kind).value(opt, m);
            Ok(MatcherRow {
                matcher: kind.name(),
                realized,
                opt,
                ratio: (opt > 0.0).then(|| realized / opt),
                bound,
                bound_satisfied: bound_satisfied(realized, bound),
                flagged: matcher.state().flagged(),
            })
        })
        .collect()
}

/// Draw counts per index.
pub fn histogram(weights: Vec<f64>, draws: u32, seed: u64) -> Result<Vec<u32>, String> {
    if draws > MAX_DRAWS {
        return Err(format!("at most {MAX_DRAWS} draws"));
    }
    let tree = PrefixTree::new(weights).map_err(|e| e.to_string())?;
    let mut rng = SeededRng::new(seed);
    let mut counts = vec![0; tree.len()];
    for _ in 0..draws {
        counts[tree.sample(&mut rng)] += 1;
    }
    Ok(counts)
}

#[wasm_bindgen]
pub fn exponent_curve(c: f64, regime: &str, points: usize) -> Result<Vec<f64>, JsError> {
    exponent_curve_values(c, regime, points).map_err(|e| JsError::new(&e))
}

/// JSON array with one object per matcher.
#[wasm_bindgen]
pub fn compare_matchers(n: usize, m: usize, dim: usize, eps: f64, tau: f64, seed: u32) -> Result<String, JsError> {
    let rows = compare(n, m, dim, eps, tau, seed.into()).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&rows).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn sample_histogram(weights: Vec<f64>, draws: u32, seed: u32) -> Result<Vec<u32>, JsError> {
    histogram(weights, draws, seed.into()).map_err(|e| JsError::new(&e))
}
