//! Online weighted bipartite matching with sublinear per-arrival weight
//! computation.
//!
//! Offline points are known up front; online points arrive one at a time and
//! are assigned greedily to the offline point with the largest increase in
//! matched value. The increase is computed exactly ([`matching::GreedyExact`]),
//! through distance sketches ([`ade`]), through inner-product sketches
//! ([`ipe`]) or through an LSH maximum-inner-product index ([`maxip`]).
//! [`oracle`] supplies the exact offline optimum used to check ratios.

pub mod ade;
pub mod dataset;
pub mod error;
pub mod ipe;
pub mod matching;
pub mod maxip;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod vector;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use vector::{
    distance, inner_product, transform_data, transform_query, PointSet, TransformedPoint, Vector,
};
