//! `(c, tau)` maximum-inner-product search over unit vectors.
//!
//! Random-hyperplane LSH: each of `L` tables keys a point by the `K` sign bits
//! of its projections onto random unit normals. Two unit vectors at inner
//! product `t` share one bit with probability `1 - arccos(t) / pi`, so the
//! near/far collision rates at `tau` and `c * tau` give `rho`, `K` and `L`
//! directly.
//!
//! When the table count from the formula exceeds [`LshConfig::max_tables`],
//! `L` is clamped and `K` is lowered until `L * p1^K >= ln(1/delta)`, which
//! keeps the recall guarantee and shifts cost onto candidate checks (bounded
//! by the candidate cap).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::vector::{dot, TransformedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentRegime {
    /// `f(c, tau) = (1 - tau) / (1 - 2 c tau + tau)`
    TimeOptimal,
    /// `f(c, tau) = 2(1-tau)^2/(1-c tau)^2 - (1-tau)^4/(1-c tau)^4`
    SpaceOptimal,
    /// `rho = 1 / (2 c^2 - 1)` for `(c, r)`-ANN on the sphere, `c > 1`.
    Ann,
}

/// Closed-form query exponent. `tau` is ignored for [`ExponentRegime::Ann`].
pub fn maxip_exponent(c: f64, tau: f64, regime: ExponentRegime) -> Result<f64> {
    let in_unit = |x: f64| x > 0.0 && x < 1.0;
    match regime {
        ExponentRegime::TimeOptimal | ExponentRegime::SpaceOptimal => {
            if !in_unit(c) || !in_unit(tau) {
                return Err(Error::config(format!(
                    "c and tau must lie in (0, 1), got c={c}, tau={tau}"
                )));
            }
        }
        ExponentRegime::Ann => {
            if !(c > 1.0 && c.is_finite()) {
                return Err(Error::config(format!("ANN approximation needs c > 1, got {c}")));
            }
        }
    }
    match regime {
        ExponentRegime::TimeOptimal => {
            let denom = 1.0 - 2.0 * c * tau + tau;
            if denom <= 0.0 {
                return Err(Error::config(format!(
                    "exponent undefined: 1 - 2c*tau + tau = {denom} <= 0"
                )));
            }
            Ok((1.0 - tau) / denom)
        }
        ExponentRegime::SpaceOptimal => {
            let r = (1.0 - tau) / (1.0 - c * tau);
            Ok(2.0 * r * r - r.powi(4))
        }
        ExponentRegime::Ann => Ok(1.0 / (2.0 * c * c - 1.0)),
    }
}

/// Single-bit collision probability of two unit vectors at distance `dist`.
pub fn collision_probability(dist: f64) -> f64 {
    let cos = (1.0 - dist * dist / 2.0).clamp(-1.0, 1.0);
    1.0 - cos.acos() / PI
}

/// Distance between unit vectors with inner product `ip`.
pub fn sphere_distance(ip: f64) -> f64 {
    (2.0 - 2.0 * ip).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshConfig {
    pub max_tables: usize,
    /// A query examines at most `candidate_factor * L` distinct points.
    pub candidate_factor: usize,
    pub max_bits: usize,
}

impl Default for LshConfig {
    fn default() -> Self {
        LshConfig {
            max_tables: 256,
            candidate_factor: 10,
            max_bits: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshParams {
    pub c: f64,
    pub tau: f64,
    pub delta: f64,
    pub n: usize,
    pub bits: usize,
    pub tables: usize,
    pub p1: f64,
    pub p2: f64,
    pub rho: f64,
    pub candidate_cap: usize,
}

impl LshParams {
    pub fn derive(c: f64, tau: f64, delta: f64, n: usize, cfg: &LshConfig) -> Result<Self> {
        for (name, x) in [("c", c), ("tau", tau), ("delta", delta)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1), got {x}")));
            }
        }
        if n == 0 {
            return Err(Error::Empty);
        }
        if cfg.max_tables == 0 || cfg.max_bits == 0 || cfg.max_bits > 64 || cfg.candidate_factor == 0 {
            return Err(Error::config(
                "max_tables and candidate_factor must be positive and max_bits in 1..=64",
            ));
        }
        let p1 = collision_probability(sphere_distance(tau));
        let p2 = collision_probability(sphere_distance(c * tau));
        let rho = (1.0 / p1).ln() / (1.0 / p2).ln();
        let ln_fail = (1.0 / delta).ln();

        let formula_bits = ((n as f64).ln() / (1.0 / p2).ln()).ceil().max(1.0) as usize;
        let formula_bits = formula_bits.min(cfg.max_bits);
        let formula_tables = ((n as f64).powf(rho) * ln_fail).ceil().max(1.0);

        let (bits, tables) = if formula_tables <= cfg.max_tables as f64 {
            (formula_bits, formula_tables as usize)
        } else {
            let tables = cfg.max_tables;
            let fit = ((tables as f64 / ln_fail).ln() / (1.0 / p1).ln()).floor();
            let fit = if fit.is_finite() && fit >= 1.0 { fit as usize } else { 1 };
            (formula_bits.min(fit).max(1), tables)
        };
        Ok(LshParams {
            c,
            tau,
            delta,
            n,
            bits,
            tables,
            p1,
            p2,
            rho,
            candidate_cap: cfg.candidate_factor * tables,
        })
    }

    /// Probability that a point at inner product `ip` shares a bucket with
    /// the query in at least one table.
    pub fn recall_at(&self, ip: f64) -> f64 {
        let per_table = collision_probability(sphere_distance(ip)).powi(self.bits as i32);
        1.0 - (1.0 - per_table).powi(self.tables as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxIpResult {
    Found { index: usize, value: f64 },
    Fail,
}

impl MaxIpResult {
    pub fn is_found(&self) -> bool {
        matches!(self, MaxIpResult::Found { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueryStats {
    pub tables_probed: usize,
    pub candidates: usize,
}

/// Hyperplanes are projected in blocks of this many, stored interleaved.
const LANES: usize = 8;

#[derive(Debug, Clone)]
pub struct LshIndex {
    params: LshParams,
    dim: usize,
    /// `tables * bits` unit normals, table-major, in blocks of [`LANES`]:
    /// component `j` of normal `b * LANES + l` sits at `(b * dim + j) * LANES + l`.
    /// The last block is zero-padded.
    hyperplanes: Vec<f32>,
    tables: Vec<FxHashMap<u64, Vec<u32>>>,
    /// bucket key of point `i` in table `t` at `i * L + t`
    keys: Vec<u64>,
    /// position of point `i` inside that bucket
    slots: Vec<u32>,
    stored: Vec<TransformedPoint>,
}

impl LshIndex {
    pub fn init(
        points: Vec<TransformedPoint>,
        c: f64,
        tau: f64,
        delta: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::init_with(points, c, tau, delta, seed, &LshConfig::default())
    }

    pub fn init_with(
        points: Vec<TransformedPoint>,
        c: f64,
        tau: f64,
        delta: f64,
        seed: u64,
        cfg: &LshConfig,
    ) -> Result<Self> {
        let dim = points.first().ok_or(Error::Empty)?.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        if points.len() > u32::MAX as usize {
            return Err(Error::config("too many points for a 32-bit bucket index"));
        }
        let params = LshParams::derive(c, tau, delta, points.len(), cfg)?;
        let mut rng = SeededRng::new(seed);
        let total = params.tables * params.bits;
        let mut hyperplanes = vec![0f32; total.div_ceil(LANES) * dim * LANES];
        for h in 0..total {
            let v = rng.unit_sphere_vector(dim);
            let (b, l) = (h / LANES, h % LANES);
            for (j, &x) in v.as_slice().iter().enumerate() {
                hyperplanes[(b * dim + j) * LANES + l] = x as f32;
            }
        }
        let n = points.len();
        let l = params.tables;
        let mut index = LshIndex {
            params,
            dim,
            hyperplanes,
            tables: vec![FxHashMap::default(); l],
            keys: vec![0; n * l],
            slots: vec![0; n * l],
            stored: points,
        };
        let mut keys = vec![0u64; n * l];
        for (i, sig) in keys.chunks_exact_mut(l).enumerate() {
            index.signatures_into(index.stored[i].as_slice(), sig);
        }
        // one table at a time keeps a single map hot
        for t in 0..l {
            for i in 0..n {
                index.insert(i, t, keys[i * l + t]);
            }
        }
        Ok(index)
    }

    pub fn params(&self) -> &LshParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stored(&self) -> &[TransformedPoint] {
        &self.stored
    }

    fn signatures_into(&self, point: &[f64], out: &mut [u64]) {
        let p: Vec<f32> = point.iter().map(|&x| x as f32).collect();
        let (bits, dim) = (self.params.bits, self.dim);
        let total = self.params.tables * bits;
        out.fill(0);
        for (b, block) in self.hyperplanes.chunks_exact(dim * LANES).enumerate() {
            let mut acc = [0f32; LANES];
            for (row, &x) in block.chunks_exact(LANES).zip(&p) {
                for l in 0..LANES {
                    acc[l] += row[l] * x;
                }
            }
            for (l, v) in acc.into_iter().enumerate() {
                let h = b * LANES + l;
                if h < total && v >= 0.0 {
                    out[h / bits] |= 1 << (h % bits);
                }
            }
        }
    }

    /// Signature of `point` in table `t`.
    pub fn signature(&self, point: &TransformedPoint, t: usize) -> u64 {
        let mut out = vec![0u64; self.params.tables];
        self.signatures_into(point.as_slice(), &mut out);
        out[t]
    }

    /// The bucket key recorded for stored point `i` in table `t`.
    pub fn bucket_key(&self, i: usize, t: usize) -> u64 {
        self.keys[i * self.params.tables + t]
    }

    fn insert(&mut self, i: usize, t: usize, key: u64) {
        let bucket = self.tables[t].entry(key).or_default();
        let at = i * self.params.tables + t;
        self.keys[at] = key;
        self.slots[at] = bucket.len() as u32;
        bucket.push(i as u32);
    }

    fn remove(&mut self, i: usize, t: usize) {
        let l = self.params.tables;
        let at = i * l + t;
        let key = self.keys[at];
        let pos = self.slots[at] as usize;
        let bucket = self.tables[t]
            .get_mut(&key)
            .expect("memoized bucket exists");
        bucket.swap_remove(pos);
        if let Some(&moved) = bucket.get(pos) {
            self.slots[moved as usize * l + t] = pos as u32;
        }
        if bucket.is_empty() {
            self.tables[t].remove(&key);
        }
    }

    /// Table `t` with bucket members sorted, for comparisons.
    pub fn table_snapshot(&self, t: usize) -> BTreeMap<u64, Vec<u32>> {
        self.tables[t]
            .iter()
            .map(|(&k, v)| {
                let mut v = v.clone();
                v.sort_unstable();
                (k, v)
            })
            .collect()
    }

    pub fn query(&self, q: &TransformedPoint) -> Result<MaxIpResult> {
        self.query_with_stats(q).map(|(r, _)| r)
    }

    /// Probes every table's matching bucket (up to the candidate cap) and
    /// returns the best examined point if it reaches `c * tau`.
    pub fn query_with_stats(&self, q: &TransformedPoint) -> Result<(MaxIpResult, QueryStats)> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: q.dim(),
            });
        }
        let mut sig = vec![0u64; self.params.tables];
        self.signatures_into(q.as_slice(), &mut sig);
        let mut seen = FxHashSet::default();
        let mut best: Option<(usize, f64)> = None;
        let mut stats = QueryStats::default();
        'tables: for (t, key) in sig.iter().enumerate() {
            stats.tables_probed = t + 1;
            let Some(bucket) = self.tables[t].get(key) else {
                continue;
            };
            for &idx in bucket {
                if !seen.insert(idx) {
                    continue;
                }
                let value = dot(q.as_slice(), self.stored[idx as usize].as_slice());
                if best.is_none_or(|(_, b)| value > b) {
                    best = Some((idx as usize, value));
                }
                stats.candidates += 1;
                if stats.candidates >= self.params.candidate_cap {
                    break 'tables;
                }
            }
        }
        let threshold = self.params.c * self.params.tau;
        let result = match best {
            Some((index, value)) if value >= threshold => MaxIpResult::Found { index, value },
            _ => MaxIpResult::Fail,
        };
        Ok((result, stats))
    }

    /// Moves point `i` to `point`, rehashing it in every table.
    pub fn update(&mut self, i: usize, point: TransformedPoint) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        if point.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.dim(),
            });
        }
        let mut sig = vec![0u64; self.params.tables];
        self.signatures_into(point.as_slice(), &mut sig);
        for (t, &key) in sig.iter().enumerate() {
            if self.bucket_key(i, t) != key {
                self.remove(i, t);
                self.insert(i, t, key);
            }
        }
        self.stored[i] = point;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::Vector;

    fn unit(seed: u64, n: usize, d: usize) -> Vec<TransformedPoint> {
        let mut rng = SeededRng::new(seed);
        (0..n)
            .map(|_| TransformedPoint::from_unit(rng.unit_sphere_vector(d)).unwrap())
            .collect()
    }

    #[test]
    fn time_optimal_exponent_values() {
        let f = |c, t| maxip_exponent(c, t, ExponentRegime::TimeOptimal).unwrap();
        assert!((f(0.25, 0.75) - 0.181818).abs() < 1e-6);
        assert!((f(0.5, 0.5) - 0.5).abs() < 1e-6);
        assert!((f(0.75, 0.25) - 0.857143).abs() < 1e-6);
        let ann = maxip_exponent(2.0, 0.0, ExponentRegime::Ann).unwrap();
        assert!((ann - 1.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn space_optimal_formula() {
        let (c, t) = (0.5, 0.5);
        let r: f64 = 0.5 / 0.75;
        let expect = 2.0 * r * r - r.powi(4);
        let got = maxip_exponent(c, t, ExponentRegime::SpaceOptimal).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!(got > maxip_exponent(c, t, ExponentRegime::TimeOptimal).unwrap());
    }

    #[test]
    fn exponent_domain_errors() {
        assert!(maxip_exponent(1.5, 0.5, ExponentRegime::TimeOptimal).is_err());
        assert!(maxip_exponent(0.5, 0.0, ExponentRegime::TimeOptimal).is_err());
        assert!(maxip_exponent(0.9, 0.5, ExponentRegime::Ann).is_err());
    }

    #[test]
    fn derived_collision_probabilities() {
        let p = LshParams::derive(0.5, 0.5, 0.1, 1000, &LshConfig::default()).unwrap();
        assert!((p.p1 - 2.0 / 3.0).abs() < 1e-12);
        let p2 = 1.0 - 0.25f64.acos() / PI;
        assert!((p.p2 - p2).abs() < 1e-12);
        assert!((p.p2 - 0.5804).abs() < 1e-4);
        assert!(0.0 < p.p2 && p.p2 < p.p1 && p.p1 < 1.0);
        assert!(0.0 < p.rho && p.rho < 1.0);
    }

    #[test]
    fn formula_parameters_when_uncapped() {
        let cfg = LshConfig {
            max_tables: 100_000,
            ..LshConfig::default()
        };
        let p = LshParams::derive(0.5, 0.8, 0.1, 1000, &cfg).unwrap();
        let k = ((1000f64).ln() / (1.0 / p.p2).ln()).ceil() as usize;
        let l = ((1000f64).powf(p.rho) * 10f64.ln()).ceil() as usize;
        assert_eq!((p.bits, p.tables), (k, l));
    }

    #[test]
    fn capped_tables_keep_recall() {
        let p = LshParams::derive(0.9, 0.5, 0.1, 10_000, &LshConfig::default()).unwrap();
        assert_eq!(p.tables, 256);
        assert!(p.tables as f64 * p.p1.powi(p.bits as i32) >= 10f64.ln());
        assert!(p.recall_at(0.5) >= 0.9);
        assert_eq!(p.candidate_cap, 2560);
    }

    #[test]
    fn single_point_index() {
        let pts = unit(1, 1, 5);
        let idx = LshIndex::init(pts.clone(), 0.5, 0.5, 0.1, 3).unwrap();
        assert_eq!(idx.params().bits, 1);
        for t in 0..idx.params().tables {
            let snap = idx.table_snapshot(t);
            assert_eq!(snap.len(), 1);
            assert_eq!(snap.values().next().unwrap(), &vec![0]);
        }
        match idx.query(&pts[0]).unwrap() {
            MaxIpResult::Found { index, value } => {
                assert_eq!(index, 0);
                assert!((value - 1.0).abs() < 1e-12);
            }
            MaxIpResult::Fail => panic!("self query failed"),
        }
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(matches!(LshIndex::init(vec![], 0.5, 0.5, 0.1, 0), Err(Error::Empty)));
        let idx = LshIndex::init(unit(2, 10, 4), 0.5, 0.5, 0.1, 0).unwrap();
        assert!(idx.query(&unit(3, 1, 5)[0]).is_err());
        let mut idx = idx;
        assert!(matches!(
            idx.update(10, unit(3, 1, 4)[0].clone()),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn deterministic_tables() {
        let pts = unit(4, 200, 8);
        let a = LshIndex::init(pts.clone(), 0.8, 0.5, 0.1, 9).unwrap();
        let b = LshIndex::init(pts, 0.8, 0.5, 0.1, 9).unwrap();
        for t in 0..a.params().tables {
            assert_eq!(a.tables[t], b.tables[t]);
        }
    }

    #[test]
    fn signatures_match_bucket_keys_after_updates() {
        let pts = unit(5, 150, 6);
        let mut idx = LshIndex::init(pts, 0.7, 0.4, 0.1, 1).unwrap();
        let mut rng = SeededRng::new(6);
        for _ in 0..300 {
            let i = rng.below(150);
            idx.update(i, TransformedPoint::from_unit(rng.unit_sphere_vector(6)).unwrap())
                .unwrap();
        }
        let mut members = vec![0usize; 150];
        for t in 0..idx.params().tables {
            for (key, bucket) in &idx.tables[t] {
                for &i in bucket {
                    members[i as usize] += 1;
                    assert_eq!(*key, idx.bucket_key(i as usize, t));
                }
            }
            for i in 0..150 {
                assert_eq!(idx.signature(&idx.stored()[i], t), idx.bucket_key(i, t));
            }
        }
        assert!(members.iter().all(|&m| m == idx.params().tables));
    }

    #[test]
    fn update_matches_rebuild() {
        let mut pts = unit(7, 120, 5);
        let mut idx = LshIndex::init(pts.clone(), 0.6, 0.5, 0.2, 2).unwrap();
        let before: Vec<_> = (0..idx.params().tables).map(|t| idx.table_snapshot(t)).collect();
        idx.update(11, pts[11].clone()).unwrap();
        let same: Vec<_> = (0..idx.params().tables).map(|t| idx.table_snapshot(t)).collect();
        assert_eq!(before, same);
        for t in 0..idx.params().tables {
            assert_eq!(idx.tables[t], LshIndex::init(pts.clone(), 0.6, 0.5, 0.2, 2).unwrap().tables[t]);
        }

        let replacements = unit(8, 10, 5);
        for (k, p) in replacements.into_iter().enumerate() {
            let i = (k * 13) % 120;
            idx.update(i, p.clone()).unwrap();
            pts[i] = p;
        }
        let rebuilt = LshIndex::init(pts, 0.6, 0.5, 0.2, 2).unwrap();
        for t in 0..idx.params().tables {
            assert_eq!(idx.table_snapshot(t), rebuilt.table_snapshot(t));
        }
    }

    #[test]
    fn found_values_are_exact_and_above_threshold() {
        let pts = unit(9, 500, 10);
        let idx = LshIndex::init(pts.clone(), 0.8, 0.3, 0.1, 4).unwrap();
        let queries = unit(10, 200, 10);
        for q in &queries {
            if let MaxIpResult::Found { index, value } = idx.query(q).unwrap() {
                assert_eq!(value, dot(q.as_slice(), pts[index].as_slice()));
                assert!(value >= 0.8 * 0.3);
            }
        }
    }

    #[test]
    fn near_orthogonal_data_never_returns_below_threshold() {
        // coordinate axes: every pairwise inner product is 0 < c*tau
        let d = 64;
        let pts: Vec<TransformedPoint> = (0..d)
            .map(|i| {
                let mut v = vec![0.0; d];
                v[i] = 1.0;
                TransformedPoint::from_unit(Vector::new(v).unwrap()).unwrap()
            })
            .collect();
        let idx = LshIndex::init(pts[1..].to_vec(), 0.5, 0.5, 0.1, 0).unwrap();
        assert_eq!(idx.query(&pts[0]).unwrap(), MaxIpResult::Fail);
    }

    #[test]
    fn update_to_query_is_found() {
        let pts = unit(11, 300, 8);
        let q = unit(12, 1, 8).remove(0);
        let mut found = 0;
        for seed in 0..50 {
            let mut idx = LshIndex::init(pts.clone(), 0.9, 0.5, 0.1, seed).unwrap();
            idx.update(17, q.clone()).unwrap();
            if let MaxIpResult::Found { index: 17, value } = idx.query(&q).unwrap() {
                assert!((value - 1.0).abs() < 1e-12);
                found += 1;
            }
        }
        assert!(found >= 45, "{found}/50");
    }
}
