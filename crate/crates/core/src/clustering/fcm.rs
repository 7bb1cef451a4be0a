use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ops::{
    max_shift, objective_fcm, pairwise_distances, update_centroids_fcm, update_membership_fcm,
};
use super::{initial_centroids, ClusterConfig, ClusterResult, Dataset};
use crate::error::{Error, Result};

/// Classical fuzzy c-means with a single exponent `m`.
///
/// Starts from `c` distinct data rows drawn with the seed, then alternates the
/// membership and centroid updates until no centroid coordinate moves by
/// `epsilon` or `max_iter` iterations have run.
pub fn run_fcm(
    data: &Dataset,
    clusters: usize,
    m: f64,
    epsilon: f64,
    max_iter: usize,
    seed: u64,
) -> Result<ClusterResult> {
    let config = ClusterConfig {
        clusters,
        m_min: m,
        m_max: m,
        epsilon,
        max_iter,
        seed,
        ..ClusterConfig::default()
    };
    config.validate(data.n())?;
    if !m.is_finite() {
        return Err(Error::Config(format!("exponent {m} must be finite")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = initial_centroids(data, clusters, &mut rng)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut membership = None;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let distances = pairwise_distances(data, centroids.view())?;
        let u = update_membership_fcm(distances.view(), m)?;
        trace.push(objective_fcm(&u, distances.view(), m));
        let (next, _) = update_centroids_fcm(data, &u, m, &mut rng)?;
        let shift = max_shift(next.view(), centroids.view());
        centroids = next;
        membership = Some(u);
        if shift < epsilon {
            converged = true;
            break;
        }
    }

    let membership = membership.expect("at least one iteration runs");
    Ok(ClusterResult {
        labels: membership.labels(),
        centroids,
        membership,
        objective_trace: trace,
        iterations,
        converged,
        final_ha_params: None,
        ha_trace: Vec::new(),
        guard_iteration: None,
        exponent_fuzzy_set: Vec::new(),
    })
}
