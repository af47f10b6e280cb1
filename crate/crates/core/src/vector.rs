//! Dense vectors, bounded point sets and the asymmetric sphere transform.
//!
//! The transform pair maps bounded vectors onto the unit sphere so that
//! inner-product search becomes nearest-neighbour search:
//!
//! ```text
//! data(b)     = [b, sqrt(1 - |b|^2), 0]
//! query(a, C) = [a / C, 0, sqrt(1 - |a / C|^2)]
//! |query(a, C) - data(b)|^2 = 2 - 2 <a, b> / C
//! ```

use crate::error::{Error, Result};

/// Slack applied to every norm-bound and unit-norm check.
pub const NORM_SLACK: f64 = 1e-9;

/// A finite, fixed-dimension real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(pos) = components.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * factor).collect())
    }

    /// Returns `[self, extra]`.
    pub fn extended(&self, extra: &[f64]) -> Vector {
        let mut out = Vec::with_capacity(self.0.len() + extra.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(extra);
        Vector(out)
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Vector::new(value)
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

fn check_dims(a: &Vector, b: &Vector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

pub fn inner_product(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a, b)?;
    Ok(dot(a.as_slice(), b.as_slice()))
}

pub fn distance(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a, b)?;
    Ok(squared_distance(a.as_slice(), b.as_slice()).sqrt())
}

/// The offline dataset: non-empty, one dimension, every norm within `norm_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vector>,
    norm_bound: f64,
}

impl PointSet {
    pub fn new(points: Vec<Vector>, norm_bound: f64) -> Result<Self> {
        if !(norm_bound.is_finite() && norm_bound > 0.0) {
            return Err(Error::config(format!(
                "norm bound must be positive, got {norm_bound}"
            )));
        }
        let first = points.first().ok_or(Error::Empty)?;
        let dim = first.dim();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            let norm = p.norm();
            if norm > norm_bound + NORM_SLACK {
                return Err(Error::NormViolation {
                    norm,
                    bound: norm_bound,
                });
            }
        }
        Ok(PointSet { points, norm_bound })
    }

    /// Uses the largest point norm as the bound (1 for an all-zero set).
    pub fn with_tight_bound(points: Vec<Vector>) -> Result<Self> {
        let max = points.iter().map(Vector::norm).fold(0.0, f64::max);
        let bound = if max > 0.0 { max } else { 1.0 };
        PointSet::new(points, bound)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn get(&self, i: usize) -> Option<&Vector> {
        self.points.get(i)
    }

    pub fn into_points(self) -> Vec<Vector> {
        self.points
    }
}

/// A vector on the unit sphere, produced by one of the transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPoint(Vector);

impl TransformedPoint {
    /// Wraps a vector that is already unit-norm.
    pub fn from_unit(v: Vector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_SLACK {
            return Err(Error::NormViolation { norm, bound: 1.0 });
        }
        Ok(TransformedPoint(v))
    }

    pub fn vector(&self) -> &Vector {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn into_vector(self) -> Vector {
        self.0
    }
}

fn padding(norm_sq: f64) -> f64 {
    (1.0 - norm_sq).max(0.0).sqrt()
}

/// `[b, sqrt(1 - |b|^2), 0]` for `|b| <= 1`.
pub fn transform_data(b: &Vector) -> Result<TransformedPoint> {
    let norm_sq = dot(b.as_slice(), b.as_slice());
    let norm = norm_sq.sqrt();
    if norm > 1.0 + NORM_SLACK {
        return Err(Error::NormViolation { norm, bound: 1.0 });
    }
    Ok(TransformedPoint(b.extended(&[padding(norm_sq), 0.0])))
}

/// `[a / scale, 0, sqrt(1 - |a / scale|^2)]` for `|a| <= scale`.
pub fn transform_query(a: &Vector, scale: f64) -> Result<TransformedPoint> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::config(format!(
            "query scale must be positive, got {scale}"
        )));
    }
    let norm = a.norm();
    if norm > scale + NORM_SLACK {
        return Err(Error::NormViolation { norm, bound: scale });
    }
    let shrunk = a.scaled(1.0 / scale);
    let pad = padding(dot(shrunk.as_slice(), shrunk.as_slice()));
    Ok(TransformedPoint(shrunk.extended(&[0.0, pad])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(Vector::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1))));
        assert!(matches!(
            Vector::new(vec![f64::INFINITY]),
            Err(Error::NonFinite(0))
        ));
    }

    #[test]
    fn dot_and_distance_by_hand() {
        assert_eq!(inner_product(&v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap(), 11.0);
        let e = v(&[0.6, 0.8]);
        assert!((inner_product(&e, &e).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(distance(&e, &e).unwrap(), 0.0);
        let d = distance(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = v(&[1.0, 2.0]);
        let b = v(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        assert!(distance(&a, &b).is_err());
    }

    #[test]
    fn random_pairs_match_naive_summation() {
        let mut rng = SeededRng::new(11);
        for _ in 0..100 {
            let a = rng.gaussian_vector(17);
            let b = rng.gaussian_vector(17);
            let mut ip = 0.0;
            let mut sq = 0.0;
            for k in 0..17 {
                ip += a.as_slice()[k] * b.as_slice()[k];
                sq += (a.as_slice()[k] - b.as_slice()[k]).powi(2);
            }
            assert!((inner_product(&a, &b).unwrap() - ip).abs() < 1e-12);
            assert!((distance(&a, &b).unwrap() - sq.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn point_set_checks() {
        assert!(matches!(PointSet::new(vec![], 1.0), Err(Error::Empty)));
        assert!(matches!(
            PointSet::new(vec![v(&[2.0, 0.0])], 1.0),
            Err(Error::NormViolation { .. })
        ));
        assert!(PointSet::new(vec![v(&[1.0 + 5e-10, 0.0])], 1.0).is_ok());
        assert!(matches!(
            PointSet::new(vec![v(&[1.0]), v(&[0.0, 0.0])], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        let tight = PointSet::with_tight_bound(vec![v(&[3.0, 4.0]), v(&[1.0, 0.0])]).unwrap();
        assert_eq!(tight.norm_bound(), 5.0);
    }

    #[test]
    fn transform_data_edge_cases() {
        let zero = transform_data(&v(&[0.0, 0.0])).unwrap();
        assert_eq!(zero.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
        let unit = transform_data(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(unit.as_slice(), &[1.0, 0.0, 0.0, 0.0]);

        let mut rng = SeededRng::new(3);
        let b = rng.unit_sphere_vector(5).scaled(0.6);
        let t = transform_data(&b).unwrap();
        assert_eq!(t.dim(), 7);
        assert!((t.vector().norm() - 1.0).abs() < 1e-12);

        assert!(matches!(
            transform_data(&v(&[1.1, 0.0])),
            Err(Error::NormViolation { .. })
        ));
        // boundary input must not produce NaN
        let edge = transform_data(&v(&[1.0 + 1e-10, 0.0])).unwrap();
        assert_eq!(edge.as_slice()[2], 0.0);
    }

    #[test]
    fn transform_query_hand_cases() {
        let qa = transform_query(&v(&[1.0, 0.0]), 1.0).unwrap();
        let pb = transform_data(&v(&[1.0, 0.0])).unwrap();
        assert!(squared_distance(qa.as_slice(), pb.as_slice()).abs() < 1e-15);

        let qa = transform_query(&v(&[0.0, 1.0]), 1.0).unwrap();
        assert!((squared_distance(qa.as_slice(), pb.as_slice()) - 2.0).abs() < 1e-15);

        assert!(matches!(
            transform_query(&v(&[3.0, 0.0]), 2.0),
            Err(Error::NormViolation { .. })
        ));
        assert!(transform_query(&v(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn transform_identity_ten_thousand_pairs() {
        let mut rng = SeededRng::new(2024);
        let scale = 3.0;
        for _ in 0..10_000 {
            let a = rng.unit_sphere_vector(6).scaled(scale * rng.uniform());
            let b = rng.unit_sphere_vector(6).scaled(rng.uniform());
            let q = transform_query(&a, scale).unwrap();
            let p = transform_data(&b).unwrap();
            let lhs = squared_distance(q.as_slice(), p.as_slice());
            let rhs = 2.0 - 2.0 / scale * inner_product(&a, &b).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn argmax_inner_product_is_argmin_transformed_distance() {
        let mut rng = SeededRng::new(99);
        for _ in 0..200 {
            let set: Vec<Vector> = (0..20)
                .map(|_| rng.unit_sphere_vector(4).scaled(rng.uniform()))
                .collect();
            let a = rng.unit_sphere_vector(4).scaled(2.0 * rng.uniform());
            let ips: Vec<f64> = set.iter().map(|b| inner_product(&a, b).unwrap()).collect();
            let mut sorted = ips.clone();
            sorted.sort_by(|x, y| y.total_cmp(x));
            if sorted[0] - sorted[1] <= 1e-6 {
                continue;
            }
            let argmax = ips.iter().position(|&x| x == sorted[0]).unwrap();
            let q = transform_query(&a, 2.0).unwrap();
            let argmin = set
                .iter()
                .map(|b| squared_distance(q.as_slice(), transform_data(b).unwrap().as_slice()))
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap()
                .0;
            assert_eq!(argmax, argmin);
        }
    }

    proptest! {
        #[test]
        fn transformed_points_are_unit(
            raw in prop::collection::vec(-1.0f64..1.0, 1..12),
            shrink in 0.0f64..1.0,
        ) {
            let b = Vector::new(raw).unwrap();
            let n = b.norm();
            let b = if n > 0.0 { b.scaled(shrink / n) } else { b };
            let t = transform_data(&b).unwrap();
            prop_assert!((t.vector().norm() - 1.0).abs() < 1e-9);
            let q = transform_query(&b, 1.0).unwrap();
            prop_assert!((q.vector().norm() - 1.0).abs() < 1e-9);
        }
    }
}
