//! Synthetic datasets. Offline points respect the norm bound `D`, online
//! points lie in the unit ball.

use ipmatch::{PointSet, Result, SeededRng, Vector};

use crate::config::{Distribution, ExperimentConfig};

#[derive(Debug, Clone)]
pub struct Dataset {
    pub offline: PointSet,
    pub online: Vec<Vector>,
    /// Cluster of each offline point; empty unless clustered.
    pub offline_labels: Vec<usize>,
    pub online_labels: Vec<usize>,
}

/// Draws `count` raw vectors (not yet scaled to their final radius) and their
/// cluster labels.
fn draw(
    rng: &mut SeededRng,
    dist: Distribution,
    centers: &[Vector],
    count: usize,
    dim: usize,
) -> (Vec<Vector>, Vec<usize>) {
    let mut labels = Vec::new();
    let points = (0..count)
        .map(|_| match dist {
            Distribution::UniformSphere => rng.unit_sphere_vector(dim),
            Distribution::GaussianNormalized => rng.gaussian_vector(dim),
            Distribution::Clustered { spread, .. } => {
                let c = rng.below(centers.len());
                labels.push(c);
                let noisy: Vec<f64> = centers[c]
                    .as_slice()
                    .iter()
                    .map(|x| x + spread * rng.gaussian())
                    .collect();
                let v = Vector::new(noisy).expect("finite");
                let n = v.norm();
                if n > 1e-12 {
                    v.scaled(1.0 / n)
                } else {
                    centers[c].clone()
                }
            }
        })
        .collect();
    (points, labels)
}

/// Gaussian draws are scaled by the largest norm in the batch, so the batch
/// fills the ball of the target radius without being normalized pointwise.
fn fit_radius(points: Vec<Vector>, radius: f64, dist: Distribution) -> Vec<Vector> {
    match dist {
        Distribution::GaussianNormalized => {
            let max = points.iter().map(Vector::norm).fold(0.0, f64::max);
            let k = if max > 0.0 { radius / max } else { 0.0 };
            points.into_iter().map(|p| p.scaled(k)).collect()
        }
        _ if radius == 1.0 => points,
        _ => points.into_iter().map(|p| p.scaled(radius)).collect(),
    }
}

/// Offline and online points for one trial, deterministic in `seed`.
pub fn generate_dataset(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<Dataset> {
    let root = SeededRng::new(seed);
    let mut center_rng = root.fork(10);
    let centers: Vec<Vector> = match cfg.distribution {
        Distribution::Clustered { k, .. } => (0..k).map(|_| center_rng.unit_sphere_vector(cfg.dim)).collect(),
        _ => Vec::new(),
    };
    let (off, offline_labels) = draw(&mut root.fork(11), cfg.distribution, &centers, n, cfg.dim);
    let (on, online_labels) = draw(&mut root.fork(12), cfg.distribution, &centers, cfg.m_online, cfg.dim);
    let offline = PointSet::new(fit_radius(off, cfg.norm_bound, cfg.distribution), cfg.norm_bound)?;
    Ok(Dataset {
        offline,
        online: fit_radius(on, 1.0, cfg.distribution),
        offline_labels,
        online_labels,
    })
}
