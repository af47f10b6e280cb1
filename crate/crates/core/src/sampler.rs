//! Static weighted sampling by a root-to-leaf walk over a balanced tree of
//! index ranges.
//!
//! Every node covers `lo..=hi` and stores the total weight of that range; a
//! draw steps left with probability `w_left / (w_left + w_right)`. Zero-weight
//! leaves stay in the tree but are never reached.

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub lo: usize,
    pub hi: usize,
    pub weight: f64,
    /// Arena indices of the two children; `None` for leaves.
    pub children: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixTree {
    weights: Vec<f64>,
    nodes: Vec<Node>,
}

impl PrefixTree {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidWeight {
                row: i,
                col: 0,
                value: weights[i],
            });
        }
        let mut tree = PrefixTree {
            nodes: Vec::with_capacity(2 * weights.len() - 1),
            weights,
        };
        let root = tree.build(0, tree.weights.len() - 1);
        debug_assert_eq!(root, 0);
        if tree.nodes[0].weight <= 0.0 {
            return Err(Error::config("weights sum to zero"));
        }
        Ok(tree)
    }

    // Node weights are summed from the children, which equals the partial-sum
    // difference s[hi] - s[lo - 1] without its cancellation error.
    fn build(&mut self, lo: usize, hi: usize) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            weight: self.weights[lo],
            children: None,
        });
        if lo < hi {
            let mid = (lo + hi) / 2;
            let left = self.build(lo, mid);
            let right = self.build(mid + 1, hi);
            self.nodes[at].weight = self.nodes[left].weight + self.nodes[right].weight;
            self.nodes[at].children = Some((left, right));
        }
        at
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn total(&self) -> f64 {
        self.nodes[0].weight
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at].children {
                None => 1,
                Some((l, r)) => 1 + go(nodes, l).max(go(nodes, r)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Draws an index with probability proportional to its weight.
    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        let mut at = 0;
        while let Some((l, r)) = self.nodes[at].children {
            let (p1, p2) = (self.nodes[l].weight, self.nodes[r].weight);
            at = if rng.uniform() < p1 / (p1 + p2) { l } else { r };
        }
        self.nodes[at].lo
    }

    /// Product of the branch probabilities on the path to leaf `i`.
    pub fn path_probability(&self, i: usize) -> f64 {
        let mut at = 0;
        let mut p = 1.0;
        while let Some((l, r)) = self.nodes[at].children {
            let (p1, p2) = (self.nodes[l].weight, self.nodes[r].weight);
            if i <= self.nodes[l].hi {
                p *= p1 / (p1 + p2);
                at = l;
            } else {
                p *= p2 / (p1 + p2);
                at = r;
            }
        }
        p
    }
}
