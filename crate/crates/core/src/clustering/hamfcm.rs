use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ops::{
    coincident, max_shift, normalize_with_range, objective, pairwise_distances,
    relative_distances, update_centroids_hamfcm, update_exponent_state, update_membership_hamfcm,
};
use super::{
    exponent_fuzzy_set, initial_centroids, ClusterConfig, ClusterResult, Dataset, ExponentState,
};
use crate::error::Result;
use crate::hedge_algebra::{HedgeAlgebra, ParamDelta};

/// Smallest hedge or generator measure kept after an update pass.
pub const PARAM_FLOOR: f64 = 1e-6;

/// Fuzzy c-means with a per-entry exponent matrix steered by a hedge algebra.
///
/// Each iteration:
/// 1. distances to the current centroids; rows sitting on a centroid keep
///    their exponent row and get a one-hot membership;
/// 2. relative distances, min-max normalized over the matrix, become the
///    target positions `Q*`; the algebra's confidence in each target decides
///    how far `Q` moves towards it, and `M` follows `Q` linearly;
/// 3. memberships and the objective under the new `M`; an objective increase
///    restores the parameters of the previous iteration and freezes them;
/// 4. while adapting, every entry's mapping error is added to the measures of
///    the hedges and generator of its nearest term, then the parameters are
///    renormalized once;
/// 5. weighted centroid update, stopping once the largest coordinate shift
///    drops below `epsilon`.
pub fn run_hamfcm(data: &Dataset, config: &ClusterConfig) -> Result<ClusterResult> {
    config.validate(data.n())?;
    let n = data.n();
    let c = config.clusters;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = initial_centroids(data, c, &mut rng)?;
    let mut state = ExponentState::new(n, c, config.m_min, config.m_max);
    let mut params = config.ha_params;
    let mut previous_top = params;
    let mut adapting = true;
    let mut guard_iteration = None;
    let mut j_old = f64::INFINITY;

    let mut trace = Vec::new();
    let mut ha_trace = Vec::new();
    let mut membership = None;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        let top = params;
        let algebra = HedgeAlgebra::with_order(params, Default::default())?;

        let distances = pairwise_distances(data, centroids.view())?;
        let skip: Vec<bool> = distances.outer_iter().map(|row| coincident(row).is_some()).collect();
        let t = relative_distances(distances.view());
        let (lo, hi) = t
            .outer_iter()
            .zip(&skip)
            .filter(|(_, &s)| !s)
            .flat_map(|(row, _)| row.to_vec())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo.is_finite() {
            let target = normalize_with_range(t.view(), lo, hi)
                .mapv(|q| q.clamp(0.0, 1.0));
            update_exponent_state(&mut state, target.view(), &algebra, &skip)?;
        }
        state.t = t;

        let u = update_membership_hamfcm(distances.view(), state.m.view())?;
        let j = objective(&u, distances.view(), state.m.view());
        trace.push(j);
        if adapting && j > j_old {
            debug!("objective rose at iteration {iterations}: {j_old} -> {j}; freezing parameters");
            adapting = false;
            params = previous_top;
            guard_iteration = Some(iterations);
        }
        j_old = j;

        if adapting && config.ha_update_cap.is_some_and(|cap| iterations > cap) {
            adapting = false;
        }
        if adapting {
            let mut delta = ParamDelta::default();
            for &q in &state.q {
                let nearest = algebra.inverse_quantify(q.clamp(0.0, 1.0))?;
                delta.add(&nearest.term, (nearest.v - q).abs());
            }
            if !delta.is_zero() {
                params = params.with_delta(&delta).normalized_with_floor(PARAM_FLOOR)?;
            }
        }
        ha_trace.push(params);
        previous_top = top;

        let (next, _) = update_centroids_hamfcm(data, &u, state.m.view(), &mut rng)?;
        let shift = max_shift(next.view(), centroids.view());
        centroids = next;
        membership = Some(u);
        if shift < config.epsilon {
            converged = true;
            break;
        }
    }

    let membership = membership.expect("at least one iteration runs");
    let fuzzy_set = exponent_fuzzy_set(state.m.view(), state.r.view())?;
    Ok(ClusterResult {
        labels: membership.labels(),
        centroids,
        membership,
        objective_trace: trace,
        iterations,
        converged,
        final_ha_params: Some(params),
        ha_trace,
        guard_iteration,
        exponent_fuzzy_set: fuzzy_set,
    })
}
