use crate::error::{Error, Result};
use crate::oracle::{OptimalMatching, WeightMatrix};

/// Most partial injections [`exhaustive_opt`] will enumerate.
pub const EXHAUSTIVE_CAP: f64 = 1e7;

/// Maximum-weight one-to-one matching.
///
/// Because weights are nonnegative, giving a surplus online point to an
/// already-matched offline point never helps and giving it to a free one
/// never hurts, so this is also the optimum when offline points may take
/// several online points and keep only the best.
pub fn optimal_matching(w: &WeightMatrix) -> OptimalMatching {
    let (n, m) = (w.rows(), w.cols());
    let mut assignment = vec![None; m];
    if n == 0 || m == 0 {
        return OptimalMatching::from_assignment(w, assignment);
    }
    if n <= m {
        for (i, j) in hungarian(n, m, |i, j| -w.get(i, j)).into_iter().enumerate() {
            assignment[j] = Some(i);
        }
    } else {
        for (j, i) in hungarian(m, n, |j, i| -w.get(i, j)).into_iter().enumerate() {
            assignment[j] = Some(i);
        }
    }
    OptimalMatching::from_assignment(w, assignment)
}

/// Minimum-cost assignment of every row to a distinct column, `rows <= cols`.
/// Shortest augmenting paths with potentials, `O(rows^2 cols)`.
fn hungarian(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let inf = f64::INFINITY;
    // 1-based; column 0 is the virtual start
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

fn partial_injections(small: usize, large: usize) -> f64 {
    // sum_k C(small, k) * large! / (large - k)!
    let mut total = 0.0;
    let mut choose = 1.0;
    let mut falling = 1.0;
    for k in 0..=small.min(large) {
        total += choose * falling;
        choose = choose * (small - k) as f64 / (k + 1) as f64;
        falling *= (large - k) as f64;
    }
    total
}

/// Optimum by enumerating every partial injection of the smaller side into
/// the larger one.
pub fn exhaustive_opt(w: &WeightMatrix) -> Result<OptimalMatching> {
    let (n, m) = (w.rows(), w.cols());
    let transposed = n > m;
    let (small, large) = if transposed { (m, n) } else { (n, m) };
    let count = partial_injections(small, large);
    if count > EXHAUSTIVE_CAP {
        return Err(Error::TooLarge(format!(
            "{n}x{m} has {count:.3e} partial matchings, above the cap of {EXHAUSTIVE_CAP:.0e}"
        )));
    }
    let get = |s: usize, l: usize| if transposed { w.get(l, s) } else { w.get(s, l) };

    struct Search<'a> {
        get: &'a dyn Fn(usize, usize) -> f64,
        small: usize,
        large: usize,
        used: Vec<bool>,
        current: Vec<Option<usize>>,
        best: (f64, Vec<Option<usize>>),
    }

    impl Search<'_> {
        fn go(&mut self, s: usize, value: f64) {
            if s == self.small {
                if value > self.best.0 {
                    self.best = (value, self.current.clone());
                }
                return;
            }
            self.current[s] = None;
            self.go(s + 1, value);
            for l in 0..self.large {
                if !self.used[l] {
                    self.used[l] = true;
                    self.current[s] = Some(l);
                    self.go(s + 1, value + (self.get)(s, l));
                    self.used[l] = false;
                }
            }
            self.current[s] = None;
        }
    }

    let mut search = Search {
        get: &get,
        small,
        large,
        used: vec![false; large],
        current: vec![None; small],
        best: (0.0, vec![None; small]),
    };
    search.go(0, 0.0);
    let chosen = search.best.1;

    let mut assignment = vec![None; m];
    for (s, l) in chosen.into_iter().enumerate() {
        if let Some(l) = l {
            if transposed {
                assignment[s] = Some(l);
            } else {
                assignment[l] = Some(s);
            }
        }
    }
    Ok(OptimalMatching::from_assignment(w, assignment))
}
