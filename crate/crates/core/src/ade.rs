//! Dynamic Euclidean distance estimation.
//!
//! `m` independent groups of `k`-row random sign projections (entries
//! `±1/sqrt(k)`). A query is sketched once per group; the estimate for point
//! `i` is the median over groups of the sketched distance. With
//! `k = ceil(C_k / eps^2)` and `m = ceil(C_m ln(n / delta))` (rounded up to
//! odd) every estimate lands in `(1 ± eps) |q - x_i|` with probability at
//! least `1 - delta` for a query chosen independently of the sketches.
//!
//! Sign matrices are stored bit-packed, one bit per entry.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::vector::{PointSet, Vector};
use rand::RngCore;

/// Multipliers in the sketch-size formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchConstants {
    /// `C_k` in `k = ceil(C_k / eps^2)`.
    pub rows: f64,
    /// `C_m` in `m = ceil(C_m ln(n / delta))`.
    pub groups: f64,
}

impl Default for SketchConstants {
    fn default() -> Self {
        SketchConstants {
            rows: 16.0,
            groups: 9.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdeConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub constants: SketchConstants,
}

impl AdeConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        AdeConfig {
            epsilon,
            delta,
            seed,
            constants: SketchConstants::default(),
        }
    }

    pub fn with_constants(mut self, constants: SketchConstants) -> Self {
        self.constants = constants;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchPlan {
    pub groups: usize,
    pub rows_per_group: usize,
    pub dim: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

impl SketchPlan {
    pub fn new(n_points: usize, dim: usize, cfg: &AdeConfig) -> Result<Self> {
        let AdeConfig {
            epsilon,
            delta,
            seed,
            constants,
        } = *cfg;
        if !(epsilon > 0.0 && epsilon < 0.1) {
            return Err(Error::config(format!(
                "distance-estimation accuracy must lie in (0, 0.1), got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::config(format!(
                "failure probability must lie in (0, 1), got {delta}"
            )));
        }
        if !(constants.rows > 0.0 && constants.groups > 0.0) {
            return Err(Error::config("sketch constants must be positive"));
        }
        if n_points == 0 {
            return Err(Error::Empty);
        }
        if dim == 0 {
            return Err(Error::config("dimension must be positive"));
        }
        // the 1e-9 keeps exact quotients such as 16 / 0.05^2 from rounding up
        let rows = ((constants.rows / (epsilon * epsilon)) - 1e-9).ceil().max(1.0) as usize;
        let mut groups = (constants.groups * (n_points as f64 / delta).ln() - 1e-9)
            .ceil()
            .max(1.0) as usize;
        if groups.is_multiple_of(2) {
            groups += 1;
        }
        Ok(SketchPlan {
            groups,
            rows_per_group: rows,
            dim,
            epsilon,
            delta,
            seed,
        })
    }
}

/// One estimate `d_i` per stored point.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEstimates(Vec<f64>);

impl DistanceEstimates {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchBank {
    plan: SketchPlan,
    words_per_row: usize,
    scale: f64,
    /// `groups * rows * words_per_row` sign words, group-major.
    signs: Vec<u64>,
    /// `n * groups * rows` sketch entries, point-major.
    sketches: Vec<f64>,
    originals: Vec<Vector>,
}

impl SketchBank {
    pub fn init(points: &PointSet, epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        Self::build(points.points().to_vec(), &AdeConfig::new(epsilon, delta, seed))
    }

    pub fn build(points: Vec<Vector>, cfg: &AdeConfig) -> Result<Self> {
        let dim = points.first().ok_or(Error::Empty)?.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        let plan = SketchPlan::new(points.len(), dim, cfg)?;
        let words_per_row = dim.div_ceil(64);
        let mut rng = SeededRng::new(plan.seed);
        let signs = (0..plan.groups * plan.rows_per_group * words_per_row)
            .map(|_| rng.next_u64())
            .collect();
        let mut bank = SketchBank {
            plan,
            words_per_row,
            scale: 1.0 / (plan.rows_per_group as f64).sqrt(),
            signs,
            sketches: vec![0.0; points.len() * plan.groups * plan.rows_per_group],
            originals: points,
        };
        for i in 0..bank.originals.len() {
            bank.resketch(i);
        }
        Ok(bank)
    }

    pub fn plan(&self) -> &SketchPlan {
        &self.plan
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    pub fn originals(&self) -> &[Vector] {
        &self.originals
    }

    fn block(&self) -> usize {
        self.plan.groups * self.plan.rows_per_group
    }

    /// Stored sketch of point `i` under group `g`.
    pub fn sketch_of(&self, i: usize, g: usize) -> &[f64] {
        let k = self.plan.rows_per_group;
        let start = i * self.block() + g * k;
        &self.sketches[start..start + k]
    }

    /// Applies group `g`'s projection to `x`.
    pub fn project(&self, g: usize, x: &Vector) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.plan.rows_per_group];
        self.project_into(g, x.as_slice(), &mut out);
        Ok(out)
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.dim() != self.plan.dim {
            return Err(Error::DimensionMismatch {
                expected: self.plan.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }

    fn project_into(&self, g: usize, x: &[f64], out: &mut [f64]) {
        let w = self.words_per_row;
        let base = g * self.plan.rows_per_group * w;
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.signs[base + r * w..base + (r + 1) * w];
            let mut acc = 0.0;
            for (chunk, &word) in x.chunks(64).zip(row) {
                for (j, &xj) in chunk.iter().enumerate() {
                    let flip = ((word >> j) & 1) << 63;
                    acc += f64::from_bits(xj.to_bits() ^ flip);
                }
            }
            *slot = acc * self.scale;
        }
    }

    fn resketch(&mut self, i: usize) {
        let k = self.plan.rows_per_group;
        let block = self.block();
        let mut buf = vec![0.0; block];
        for g in 0..self.plan.groups {
            self.project_into(g, self.originals[i].as_slice(), &mut buf[g * k..(g + 1) * k]);
        }
        self.sketches[i * block..(i + 1) * block].copy_from_slice(&buf);
    }

    /// Replaces point `i` by `z` and re-sketches it.
    pub fn update(&mut self, i: usize, z: Vector) -> Result<()> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        self.check_dim(&z)?;
        self.originals[i] = z;
        self.resketch(i);
        Ok(())
    }

    pub fn query(&self, q: &Vector) -> Result<DistanceEstimates> {
        self.check_dim(q)?;
        let k = self.plan.rows_per_group;
        let m = self.plan.groups;
        let block = self.block();
        let mut sq = vec![0.0; block];
        for g in 0..m {
            self.project_into(g, q.as_slice(), &mut sq[g * k..(g + 1) * k]);
        }
        let mut per_group = vec![0.0; m];
        let estimates = (0..self.len())
            .map(|i| {
                let stored = &self.sketches[i * block..(i + 1) * block];
                for (g, d) in per_group.iter_mut().enumerate() {
                    let a = &sq[g * k..(g + 1) * k];
                    let b = &stored[g * k..(g + 1) * k];
                    *d = crate::vector::squared_distance(a, b).sqrt();
                }
                let mid = m / 2;
                *per_group.select_nth_unstable_by(mid, f64::total_cmp).1
            })
            .collect();
        Ok(DistanceEstimates(estimates))
    }
}
