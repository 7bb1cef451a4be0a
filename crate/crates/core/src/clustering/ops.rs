//! Per-iteration building blocks shared by both engines.

use log::warn;
use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use super::{Dataset, MembershipMatrix};
use crate::error::{Error, Result};
use crate::hedge_algebra::HedgeAlgebra;

/// Squared Euclidean distance between every row and every centroid.
pub fn pairwise_distances(data: &Dataset, centroids: ArrayView2<f64>) -> Result<Array2<f64>> {
    let x = data.values();
    if centroids.ncols() != x.ncols() {
        return Err(Error::Shape(format!(
            "data has {} columns, centroids have {}",
            x.ncols(),
            centroids.ncols()
        )));
    }
    let mut out = Array2::zeros((x.nrows(), centroids.nrows()));
    for (i, row) in x.outer_iter().enumerate() {
        for (k, c) in centroids.outer_iter().enumerate() {
            out[[i, k]] = row
                .iter()
                .zip(c.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }
    }
    Ok(out)
}

/// Indices of the centroids a row coincides with, or `None` if it touches none.
pub(crate) fn coincident(row: ndarray::ArrayView1<f64>) -> Option<Vec<usize>> {
    let hits: Vec<usize> = row
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0.0)
        .map(|(k, _)| k)
        .collect();
    (!hits.is_empty()).then_some(hits)
}

fn one_hot_split(u: &mut Array2<f64>, i: usize, hits: &[usize]) {
    let share = 1.0 / hits.len() as f64;
    u.row_mut(i).fill(0.0);
    for &k in hits {
        u[[i, k]] = share;
    }
}

/// `T(i,k) = D(i,k) / sum_j D(i,j)`. Rows with a zero sum are left at zero;
/// callers route such rows through the coincident-centroid rule instead.
pub fn relative_distances(distances: ArrayView2<f64>) -> Array2<f64> {
    let mut t = distances.to_owned();
    for mut row in t.axis_iter_mut(Axis(0)) {
        let total: f64 = row.sum();
        if total > 0.0 {
            row.mapv_inplace(|d| d / total);
        } else {
            row.fill(0.0);
        }
    }
    t
}

/// Min-max rescaling over the whole matrix; a flat matrix maps to 0.5.
pub fn normalize_relative(t: ArrayView2<f64>) -> Array2<f64> {
    let (lo, hi) = t
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    normalize_with_range(t, lo, hi)
}

pub(crate) fn normalize_with_range(t: ArrayView2<f64>, lo: f64, hi: f64) -> Array2<f64> {
    if hi > lo {
        t.mapv(|v| (v - lo) / (hi - lo))
    } else {
        t.mapv(|_| 0.5)
    }
}

/// Membership with a per-entry exponent:
/// `U(i,k) = 1 / sum_j (|x_i - c_k| / |x_i - c_j|)^(2/(M(i,k)-1))`.
///
/// `distances` holds squared norms, so the ratio is raised to `1/(M-1)`.
/// With a constant exponent this is the exact minimizer of the objective for
/// fixed centroids.
pub fn update_membership_hamfcm(
    distances: ArrayView2<f64>,
    exponents: ArrayView2<f64>,
) -> Result<MembershipMatrix> {
    if distances.dim() != exponents.dim() {
        return Err(Error::Shape(format!(
            "distances {:?} vs exponents {:?}",
            distances.dim(),
            exponents.dim()
        )));
    }
    if let Some(&bad) = exponents.iter().find(|&&m| m.is_nan() || m <= 1.0) {
        return Err(Error::Domain(format!("exponent {bad} must exceed 1")));
    }
    let (n, c) = distances.dim();
    let mut u = Array2::zeros((n, c));
    for i in 0..n {
        let row = distances.row(i);
        if let Some(hits) = coincident(row) {
            one_hot_split(&mut u, i, &hits);
            continue;
        }
        for k in 0..c {
            let power = 1.0 / (exponents[[i, k]] - 1.0);
            let dik = row[k];
            let total: f64 = row.iter().map(|&dij| (dik / dij).powf(power)).sum();
            u[[i, k]] = 1.0 / total;
        }
    }
    Ok(MembershipMatrix::from_array(u))
}

/// Classical membership update with a single exponent.
pub fn update_membership_fcm(distances: ArrayView2<f64>, m: f64) -> Result<MembershipMatrix> {
    if m.is_nan() || m <= 1.0 {
        return Err(Error::Domain(format!("exponent {m} must exceed 1")));
    }
    let (n, c) = distances.dim();
    let power = 1.0 / (m - 1.0);
    let mut u = Array2::zeros((n, c));
    for i in 0..n {
        let row = distances.row(i);
        if let Some(hits) = coincident(row) {
            one_hot_split(&mut u, i, &hits);
            continue;
        }
        for k in 0..c {
            let dik = row[k];
            let total: f64 = row.iter().map(|&dij| (dik / dij).powf(power)).sum();
            u[[i, k]] = 1.0 / total;
        }
    }
    Ok(MembershipMatrix::from_array(u))
}

/// Weighted means with weights `U(i,k)^M(i,k)`. A cluster whose weights all
/// vanish is reseeded at a random data row; its index is returned.
pub fn update_centroids_hamfcm<R: Rng + ?Sized>(
    data: &Dataset,
    membership: &MembershipMatrix,
    exponents: ArrayView2<f64>,
    rng: &mut R,
) -> Result<(Array2<f64>, Vec<usize>)> {
    let u = membership.as_array();
    if u.dim() != exponents.dim() || u.nrows() != data.n() {
        return Err(Error::Shape(format!(
            "membership {:?}, exponents {:?}, data rows {}",
            u.dim(),
            exponents.dim(),
            data.n()
        )));
    }
    let weights = ndarray::Zip::from(u).and(exponents).map_collect(|&uk, &mk| uk.powf(mk));
    Ok(weighted_means(data, weights.view(), rng))
}

pub fn update_centroids_fcm<R: Rng + ?Sized>(
    data: &Dataset,
    membership: &MembershipMatrix,
    m: f64,
    rng: &mut R,
) -> Result<(Array2<f64>, Vec<usize>)> {
    let u = membership.as_array();
    if u.nrows() != data.n() {
        return Err(Error::Shape(format!(
            "membership has {} rows, data has {}",
            u.nrows(),
            data.n()
        )));
    }
    let weights = u.mapv(|uk| uk.powf(m));
    Ok(weighted_means(data, weights.view(), rng))
}

fn weighted_means<R: Rng + ?Sized>(
    data: &Dataset,
    weights: ArrayView2<f64>,
    rng: &mut R,
) -> (Array2<f64>, Vec<usize>) {
    let x = data.values();
    let (n, c) = weights.dim();
    let d = x.ncols();
    let mut centroids = Array2::zeros((c, d));
    let mut reseeded = Vec::new();
    for k in 0..c {
        let mut total = 0.0;
        let mut acc = vec![0.0; d];
        for i in 0..n {
            let w = weights[[i, k]];
            total += w;
            for (a, &xv) in acc.iter_mut().zip(x.row(i)) {
                *a += w * xv;
            }
        }
        if total > 0.0 && total.is_finite() {
            for (dst, a) in centroids.row_mut(k).iter_mut().zip(acc) {
                *dst = a / total;
            }
        } else {
            let pick = rng.random_range(0..n);
            warn!("cluster {k} lost all weight; reseeding at row {pick}");
            centroids.row_mut(k).assign(&x.row(pick));
            reseeded.push(k);
        }
    }
    (centroids, reseeded)
}

/// `J = sum_i sum_k U(i,k)^M(i,k) * D(i,k)`
pub fn objective(
    membership: &MembershipMatrix,
    distances: ArrayView2<f64>,
    exponents: ArrayView2<f64>,
) -> f64 {
    let u = membership.as_array();
    let mut j = 0.0;
    for i in 0..u.nrows() {
        for k in 0..u.ncols() {
            j += u[[i, k]].powf(exponents[[i, k]]) * distances[[i, k]];
        }
    }
    j
}

pub fn objective_fcm(membership: &MembershipMatrix, distances: ArrayView2<f64>, m: f64) -> f64 {
    let u = membership.as_array();
    let mut j = 0.0;
    for i in 0..u.nrows() {
        for k in 0..u.ncols() {
            j += u[[i, k]].powf(m) * distances[[i, k]];
        }
    }
    j
}

/// Largest absolute coordinate change between two centroid sets.
pub fn max_shift(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Refreshes `Q`, `R` and `M` from a target `Q*`, entry by entry:
/// `R = fm(v^-1(Q*))`, `Q <- Q + R (Q* - Q)`, `M = Q (m_max - m_min) + m_min`.
/// Rows flagged in `skip` keep their previous state.
pub fn update_exponent_state(
    state: &mut super::ExponentState,
    target: ArrayView2<f64>,
    algebra: &HedgeAlgebra,
    skip: &[bool],
) -> Result<()> {
    if target.dim() != state.q.dim() {
        return Err(Error::Shape(format!(
            "target {:?} vs state {:?}",
            target.dim(),
            state.q.dim()
        )));
    }
    let span = state.m_max - state.m_min;
    for ((i, k), &q_star) in target.indexed_iter() {
        if skip.get(i).copied().unwrap_or(false) {
            continue;
        }
        if !(0.0..=1.0).contains(&q_star) {
            return Err(Error::Domain(format!("Q*({i},{k}) = {q_star} is outside [0, 1]")));
        }
        let r = algebra.confidence(q_star)?;
        let (q, m) = blend_exponent(state.q[[i, k]], r, q_star, state.m_min, span);
        state.r[[i, k]] = r;
        state.q[[i, k]] = q;
        state.m[[i, k]] = m.clamp(state.m_min, state.m_max);
    }
    Ok(())
}

/// Moves `q_prev` towards `q_star` by the fraction `confidence` and maps the
/// result linearly onto the exponent range starting at `m_min`.
pub fn blend_exponent(q_prev: f64, confidence: f64, q_star: f64, m_min: f64, span: f64) -> (f64, f64) {
    let q = q_prev + confidence * (q_star - q_prev);
    (q, q * span + m_min)
}
