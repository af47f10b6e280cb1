use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubmodularConfig {
    /// Ground sets up to this size are checked over every `(S, v, u)`.
    pub exhaustive_limit: usize,
    /// Random `(S, T, u)` triples drawn for larger ground sets.
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SubmodularConfig {
    fn default() -> Self {
        SubmodularConfig {
            exhaustive_limit: 12,
            samples: 20_000,
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

/// `f(S + u) - f(S) < f(T + u) - f(T)` with `S ⊆ T`, `u ∉ T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub u: usize,
    pub gain_s: f64,
    pub gain_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularCheck {
    pub holds: bool,
    pub exhaustive: bool,
    pub checked: usize,
    pub violation: Option<Violation>,
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// Tests diminishing returns over a ground set `0..ground_size`.
///
/// Small ground sets use the equivalent local form
/// `f(S + u) - f(S) >= f(S + v + u) - f(S + v)` for every `S` and distinct
/// `u, v ∉ S`, scanning `S` by bitmask, then `v`, then `u`; the first failure
/// is reported as `(S, S + v, u)`.
pub fn check_submodular(
    f: impl Fn(&[usize]) -> f64,
    ground_size: usize,
    cfg: &SubmodularConfig,
) -> SubmodularCheck {
    let tol = |x: f64| cfg.tolerance * (1.0 + x.abs());
    if ground_size <= cfg.exhaustive_limit.min(20) {
        let g = ground_size;
        let values: Vec<f64> = (0..1u64 << g).map(|mask| f(&members(mask))).collect();
        let mut checked = 0;
        for s in 0..1u64 << g {
            for v in (0..g).filter(|v| s >> v & 1 == 0) {
                let t = s | 1 << v;
                for u in (0..g).filter(|&u| u != v && s >> u & 1 == 0) {
                    checked += 1;
                    let gain_s = values[(s | 1 << u) as usize] - values[s as usize];
                    let gain_t = values[(t | 1 << u) as usize] - values[t as usize];
                    if gain_s < gain_t - tol(gain_t) {
                        return SubmodularCheck {
                            holds: false,
                            exhaustive: true,
                            checked,
                            violation: Some(Violation {
                                s: members(s),
                                t: members(t),
                                u,
                                gain_s,
                                gain_t,
                            }),
                        };
                    }
                }
            }
        }
        return SubmodularCheck {
            holds: true,
            exhaustive: true,
            checked,
            violation: None,
        };
    }

    let mut rng = SeededRng::new(cfg.seed);
    let mut checked = 0;
    for _ in 0..cfg.samples {
        let (mut s, mut t, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for e in 0..ground_size {
            match rng.below(3) {
                0 => {
                    s.push(e);
                    t.push(e);
                }
                1 => t.push(e),
                _ => rest.push(e),
            }
        }
        if rest.is_empty() {
            continue;
        }
        let u = rest[rng.below(rest.len())];
        let plus = |set: &[usize]| {
            let mut x = set.to_vec();
            let at = x.partition_point(|&e| e < u);
            x.insert(at, u);
            x
        };
        checked += 1;
        let gain_s = f(&plus(&s)) - f(&s);
        let gain_t = f(&plus(&t)) - f(&t);
        if gain_s < gain_t - tol(gain_t) {
            return SubmodularCheck {
                holds: false,
                exhaustive: false,
                checked,
                violation: Some(Violation {
                    s,
                    t,
                    u,
                    gain_s,
                    gain_t,
                }),
            };
        }
    }
    SubmodularCheck {
        holds: true,
        exhaustive: false,
        checked,
        violation: None,
    }
}
