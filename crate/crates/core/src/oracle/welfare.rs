use crate::error::{Error, Result};
use crate::oracle::WeightMatrix;

/// Pick at most one element from each part to maximize `f`. Sets are passed
/// to `f` as sorted element ids.
pub struct WelfareInstance<F> {
    parts: Vec<Vec<usize>>,
    f: F,
}

impl<F: Fn(&[usize]) -> f64> WelfareInstance<F> {
    pub fn new(parts: Vec<Vec<usize>>, f: F) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (k, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(Error::config(format!("part {k} is empty")));
            }
            if let Some(e) = part.iter().find(|e| !seen.insert(**e)) {
                return Err(Error::config(format!("element {e} appears in more than one part")));
            }
        }
        Ok(WelfareInstance { parts, f })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn ground_size(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    pub fn eval(&self, set: &[usize]) -> f64 {
        let mut s = set.to_vec();
        s.sort_unstable();
        (self.f)(&s)
    }
}

fn with(set: &[usize], e: usize) -> Vec<usize> {
    let mut s = set.to_vec();
    let at = s.partition_point(|&x| x < e);
    s.insert(at, e);
    s
}

/// Processes parts in order, adding each part's element of largest marginal
/// gain (first in the part on ties). Returns the chosen elements, one per
/// part, and the final value.
pub fn welfare_greedy<F: Fn(&[usize]) -> f64>(inst: &WelfareInstance<F>) -> (Vec<usize>, f64) {
    let mut set: Vec<usize> = Vec::new();
    let mut chosen = Vec::with_capacity(inst.parts.len());
    let mut value = (inst.f)(&set);
    for part in &inst.parts {
        let mut best: Option<(usize, f64, f64)> = None;
        for &u in part {
            let v = (inst.f)(&with(&set, u));
            let gain = v - value;
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((u, gain, v));
            }
        }
        let (u, _, v) = best.expect("parts are nonempty");
        set = with(&set, u);
        chosen.push(u);
        value = v;
    }
    (chosen, value)
}

/// Best value over all sets with at most one element per part.
pub fn exhaustive_welfare<F: Fn(&[usize]) -> f64>(inst: &WelfareInstance<F>) -> Result<(Vec<usize>, f64)> {
    let count: f64 = inst.parts.iter().map(|p| (p.len() + 1) as f64).product();
    if count > super::EXHAUSTIVE_CAP {
        return Err(Error::TooLarge(format!("{count:.3e} candidate sets")));
    }
    let mut best = (Vec::new(), (inst.f)(&[]));
    let mut pick = vec![0usize; inst.parts.len()];
    // odometer over (none | element) per part
    loop {
        let mut set: Vec<usize> = pick
            .iter()
            .zip(&inst.parts)
            .filter(|(k, _)| **k > 0)
            .map(|(k, p)| p[k - 1])
            .collect();
        set.sort_unstable();
        let v = (inst.f)(&set);
        if v > best.1 {
            best = (set, v);
        }
        let mut k = 0;
        loop {
            if k == pick.len() {
                return Ok(best);
            }
            pick[k] += 1;
            if pick[k] <= inst.parts[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// The matching value as a set function over (offline, online) pairs: element
/// `j * n + i` assigns online `j` to offline `i`, and a set is worth the sum
/// over offline points of their heaviest assigned edge.
#[derive(Debug, Clone)]
pub struct MatchingSetFunction {
    w: WeightMatrix,
}

impl MatchingSetFunction {
    pub fn new(w: WeightMatrix) -> Self {
        MatchingSetFunction { w }
    }

    pub fn ground_size(&self) -> usize {
        self.w.rows() * self.w.cols()
    }

    pub fn element(&self, offline: usize, online: usize) -> usize {
        online * self.w.rows() + offline
    }

    /// `(offline, online)` of an element id.
    pub fn pair(&self, e: usize) -> (usize, usize) {
        (e % self.w.rows(), e / self.w.rows())
    }

    pub fn eval(&self, set: &[usize]) -> f64 {
        let mut best = vec![0.0f64; self.w.rows()];
        for &e in set {
            let (i, j) = self.pair(e);
            best[i] = best[i].max(self.w.get(i, j));
        }
        best.iter().sum()
    }

    /// One part per online point, listing its offline choices in order.
    pub fn instance(&self) -> WelfareInstance<impl Fn(&[usize]) -> f64 + '_> {
        let parts = (0..self.w.cols())
            .map(|j| (0..self.w.rows()).map(|i| self.element(i, j)).collect())
            .collect();
        WelfareInstance::new(parts, move |s: &[usize]| self.eval(s)).expect("parts are disjoint")
    }
}
