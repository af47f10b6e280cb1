//! Dynamic inner-product estimation on top of [`SketchBank`].
//!
//! Data points are scaled by `1/D` and given the data-side padding; queries
//! (`|q| <= 1`) get the query-side padding at scale 1. The transformed
//! distance then satisfies `d_i^2 = 2 - (2/D) <x_i, q>`, so each distance
//! estimate converts to `w_i = D - (D/2) d_i^2`. The distance structure runs
//! at accuracy `eps0 = 2 eps / (3 D)`.

use crate::ade::{AdeConfig, SketchBank, SketchConstants};
use crate::error::{Error, Result};
use crate::vector::{transform_data, transform_query, PointSet, Vector, NORM_SLACK};

pub fn epsilon0(epsilon: f64, norm_bound: f64) -> f64 {
    2.0 * epsilon / (3.0 * norm_bound)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpeConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub constants: SketchConstants,
}

impl IpeConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        IpeConfig {
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

#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductEstimates(Vec<f64>);

impl InnerProductEstimates {
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
pub struct IpeState {
    bank: SketchBank,
    norm_bound: f64,
    epsilon: f64,
    epsilon0: f64,
    delta: f64,
}

impl IpeState {
    pub fn init(points: &PointSet, epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        Self::init_with(points, &IpeConfig::new(epsilon, delta, seed))
    }

    pub fn init_with(points: &PointSet, cfg: &IpeConfig) -> Result<Self> {
        if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
            return Err(Error::config(format!(
                "epsilon must lie in (0, 1), got {}",
                cfg.epsilon
            )));
        }
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
            return Err(Error::config(format!(
                "delta must lie in (0, 1), got {}",
                cfg.delta
            )));
        }
        let norm_bound = points.norm_bound();
        let eps0 = epsilon0(cfg.epsilon, norm_bound);
        // compared unscaled so the exact boundary eps = 0.15 D is rejected
        if 2.0 * cfg.epsilon >= 0.3 * norm_bound {
            return Err(Error::config(format!(
                "derived distance accuracy 2*eps/(3*D) = {eps0} must be below 0.1; \
                 use a smaller epsilon or a larger norm bound"
            )));
        }
        let transformed = points
            .points()
            .iter()
            .map(|x| Self::to_data(x, norm_bound))
            .collect::<Result<Vec<_>>>()?;
        let ade = AdeConfig {
            epsilon: eps0,
            delta: cfg.delta,
            seed: cfg.seed,
            constants: cfg.constants,
        };
        Ok(IpeState {
            bank: SketchBank::build(transformed, &ade)?,
            norm_bound,
            epsilon: cfg.epsilon,
            epsilon0: eps0,
            delta: cfg.delta,
        })
    }

    fn to_data(x: &Vector, norm_bound: f64) -> Result<Vector> {
        let norm = x.norm();
        if norm > norm_bound + NORM_SLACK {
            return Err(Error::NormViolation {
                norm,
                bound: norm_bound,
            });
        }
        Ok(transform_data(&x.scaled(1.0 / norm_bound))?.into_vector())
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bank(&self) -> &SketchBank {
        &self.bank
    }

    pub fn len(&self) -> usize {
        self.bank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bank.is_empty()
    }

    pub fn update(&mut self, i: usize, z: &Vector) -> Result<()> {
        let t = Self::to_data(z, self.norm_bound)?;
        self.bank.update(i, t)
    }

    /// The query-side transform used internally; exposed for checking.
    pub fn transform_query_point(q: &Vector) -> Result<Vector> {
        let norm = q.norm();
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::NormViolation { norm, bound: 1.0 });
        }
        let q = if norm > 1.0 { q.scaled(1.0 / norm) } else { q.clone() };
        Ok(transform_query(&q, 1.0)?.into_vector())
    }

    pub fn query(&self, q: &Vector) -> Result<InnerProductEstimates> {
        let tq = Self::transform_query_point(q)?;
        let d = self.bank.query(&tq)?;
        let big_d = self.norm_bound;
        Ok(InnerProductEstimates(
            d.as_slice()
                .iter()
                .map(|di| big_d - 0.5 * big_d * di * di)
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::vector::{inner_product, squared_distance};

    const SMALL: SketchConstants = SketchConstants {
        rows: 4.0,
        groups: 1.0,
    };

    fn ball_points(seed: u64, n: usize, d: usize, radius: f64) -> PointSet {
        let mut rng = SeededRng::new(seed);
        let pts = (0..n)
            .map(|_| rng.unit_sphere_vector(d).scaled(radius * rng.uniform()))
            .collect();
        PointSet::new(pts, radius).unwrap()
    }

    #[test]
    fn epsilon0_formula() {
        assert!((epsilon0(0.06, 1.0) - 0.04).abs() < 1e-15);
        assert!((epsilon0(0.06, 2.0) - 0.02).abs() < 1e-15);
        let st = IpeState::init_with(&ball_points(1, 4, 3, 2.0), &IpeConfig::new(0.06, 0.1, 0).with_constants(SMALL)).unwrap();
        assert_eq!(st.epsilon0(), 2.0 * 0.06 / (3.0 * 2.0));
    }

    #[test]
    fn rejects_large_epsilon0() {
        let pts = ball_points(1, 4, 3, 1.0);
        assert!(matches!(IpeState::init(&pts, 0.15, 0.1, 0), Err(Error::Config(_))));
        assert!(IpeState::init(&pts, 0.0, 0.1, 0).is_err());
        assert!(IpeState::init(&pts, 0.05, 1.0, 0).is_err());
    }

    #[test]
    fn stored_points_are_unit() {
        let st = IpeState::init_with(&ball_points(2, 30, 6, 2.0), &IpeConfig::new(0.1, 0.1, 0).with_constants(SMALL)).unwrap();
        for p in st.bank().originals() {
            assert!((p.norm() - 1.0).abs() < 1e-9);
            assert_eq!(p.dim(), 8);
        }
    }

    #[test]
    fn exact_conversion_identity() {
        let big_d = 2.5;
        let pts = ball_points(3, 50, 5, big_d);
        let mut rng = SeededRng::new(4);
        for x in pts.points() {
            let q = rng.unit_sphere_vector(5).scaled(rng.uniform());
            let data = IpeState::to_data(x, big_d).unwrap();
            let query = IpeState::transform_query_point(&q).unwrap();
            let d2 = squared_distance(data.as_slice(), query.as_slice());
            let w = big_d - 0.5 * big_d * d2;
            assert!((w - inner_product(x, &q).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn error_budget_at_unit_transformed_distance() {
        // the relative-to-additive conversion stays inside eps while d_i <= 1
        for big_d in [0.5, 1.0, 2.0, 7.0] {
            for eps in [0.01, 0.05, 0.1] {
                let e0 = epsilon0(eps, big_d);
                let d2 = 1.0;
                let low = big_d / 2.0 * (2.0 * e0 - e0 * e0) * d2;
                let high = big_d / 2.0 * (2.0 * e0 + e0 * e0) * d2;
                assert!(low <= big_d * e0 + 1e-15);
                assert!(low <= eps + 1e-15);
                assert!(high <= 1.5 * big_d * e0 + 1e-15);
                assert!(high <= eps + 1e-15);
            }
        }
    }

    #[test]
    fn error_budget_at_transformed_diameter_exceeds_eps() {
        // at d_i = 2 the worst-case conversion error is ~(8/3) eps, so the
        // additive guarantee there depends on the estimator beating eps0
        let big_d = 1.0;
        let eps = 0.1;
        let e0 = epsilon0(eps, big_d);
        let high = big_d / 2.0 * (2.0 * e0 + e0 * e0) * 4.0;
        assert!(high > eps);
        assert!((high / eps - 8.0 / 3.0).abs() < 0.1);
    }

    #[test]
    fn query_norm_handling() {
        let st = IpeState::init_with(&ball_points(5, 5, 3, 1.0), &IpeConfig::new(0.1, 0.1, 0).with_constants(SMALL)).unwrap();
        let over = Vector::new(vec![1.0 + 5e-10, 0.0, 0.0]).unwrap();
        assert!(st.query(&over).is_ok());
        let bad = Vector::new(vec![1.1, 0.0, 0.0]).unwrap();
        assert!(matches!(st.query(&bad), Err(Error::NormViolation { .. })));
    }

    #[test]
    fn zero_query_is_near_zero() {
        let st = IpeState::init_with(&ball_points(6, 20, 4, 1.0), &IpeConfig::new(0.1, 0.05, 3).with_constants(SMALL)).unwrap();
        let w = st.query(&Vector::zeros(4)).unwrap();
        for wi in w.as_slice() {
            assert!(wi.abs() <= 0.1, "{wi}");
        }
    }

    #[test]
    fn update_semantics() {
        let big_d = 2.0;
        let pts = ball_points(7, 10, 4, big_d);
        let cfg = IpeConfig::new(0.1, 0.05, 21).with_constants(SMALL);
        let mut st = IpeState::init_with(&pts, &cfg).unwrap();
        let q = SeededRng::new(8).unit_sphere_vector(4);
        let before = st.query(&q).unwrap();
        st.update(4, &pts.points()[4]).unwrap();
        assert_eq!(st.query(&q).unwrap(), before);

        // x_4 := D q / |q| so the true inner product is D
        let z = q.scaled(big_d);
        st.update(4, &z).unwrap();
        let w = st.query(&q).unwrap();
        assert!((w.as_slice()[4] - big_d).abs() <= 0.1);

        let mut rebuilt = pts.clone().into_points();
        rebuilt[4] = z;
        let rebuilt = IpeState::init_with(&PointSet::new(rebuilt, big_d).unwrap(), &cfg).unwrap();
        assert_eq!(rebuilt.query(&q).unwrap(), w);

        assert!(matches!(
            st.update(0, &Vector::new(vec![3.0, 0.0, 0.0, 0.0]).unwrap()),
            Err(Error::NormViolation { .. })
        ));
    }

    #[test]
    fn monte_carlo_aligned_and_orthogonal() {
        let big_d = 2.0;
        let eps = 0.1;
        let delta = 0.05;
        let e1 = Vector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let pts = PointSet::new(
            vec![e1.scaled(big_d), Vector::new(vec![0.0, big_d, 0.0]).unwrap()],
            big_d,
        )
        .unwrap();
        let mut bad = 0;
        for seed in 0..1000 {
            let st = IpeState::init_with(&pts, &IpeConfig::new(eps, delta, seed).with_constants(SMALL)).unwrap();
            let w = st.query(&e1).unwrap();
            if (w.as_slice()[0] - big_d).abs() > eps || w.as_slice()[1].abs() > eps {
                bad += 1;
            }
        }
        assert!(bad as f64 <= 2.0 * delta * 1000.0, "{bad} violations");
    }
}
