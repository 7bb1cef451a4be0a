//! Fuzzy c-means and its hedge-algebra variant with a per-entry exponent.

mod fcm;
mod hamfcm;
pub mod ops;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hedge_algebra::HedgeParams;

pub use fcm::run_fcm;
pub use hamfcm::run_hamfcm;
pub use ops::{
    normalize_relative, objective, objective_fcm, pairwise_distances, relative_distances,
    update_centroids_fcm, update_centroids_hamfcm, update_exponent_state, update_membership_fcm,
    update_membership_hamfcm,
};

/// `n x d` matrix of finite values; row `i` is one element.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
}

impl Dataset {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Shape(format!(
                "dataset must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("entry ({i}, {j}) = {v} is not finite")));
        }
        Ok(Dataset { values })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Shape(format!(
                "row {i} has {} values, expected {d}",
                rows[i].len()
            )));
        }
        let n = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let values = Array2::from_shape_vec((n, d), flat).map_err(|e| Error::Shape(e.to_string()))?;
        Dataset::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.outer_iter().map(|r| r.to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix(Array2<f64>);

impl MembershipMatrix {
    pub fn from_array(u: Array2<f64>) -> Self {
        MembershipMatrix(u)
    }

    pub fn as_array(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    /// Row-wise argmax; ties go to the lowest cluster index.
    pub fn labels(&self) -> Vec<usize> {
        self.0
            .outer_iter()
            .map(|row| {
                let mut best = 0;
                for (k, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub clusters: usize,
    pub m_min: f64,
    pub m_max: f64,
    /// Stop once no centroid coordinate moves by this much.
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub ha_params: HedgeParams,
    /// Iteration after which the hedge-algebra parameters stop adapting.
    pub ha_update_cap: Option<usize>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            clusters: 2,
            m_min: 1.5,
            m_max: 20.0,
            epsilon: 1e-6,
            max_iter: 300,
            seed: 1,
            ha_params: HedgeParams::default(),
            ha_update_cap: Some(20),
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.clusters < 2 {
            return Err(Error::Config(format!("need at least 2 clusters, got {}", self.clusters)));
        }
        if self.clusters > n {
            return Err(Error::Config(format!(
                "{} clusters requested for {n} elements",
                self.clusters
            )));
        }
        if !(self.m_min > 1.0 && self.m_min <= self.m_max && self.m_max.is_finite()) {
            return Err(Error::Config(format!(
                "exponent range [{}, {}] must satisfy 1 < m_min <= m_max",
                self.m_min, self.m_max
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        self.ha_params.validate()
    }
}

/// Exponent matrix `M` with its normalized position `Q` and confidence `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentState {
    pub m: Array2<f64>,
    pub q: Array2<f64>,
    pub r: Array2<f64>,
    /// Relative distances of the latest iteration.
    pub t: Array2<f64>,
    pub m_min: f64,
    pub m_max: f64,
}

impl ExponentState {
    pub fn new(n: usize, c: usize, m_min: f64, m_max: f64) -> Self {
        ExponentState {
            m: Array2::from_elem((n, c), m_min),
            q: Array2::zeros((n, c)),
            r: Array2::zeros((n, c)),
            t: Array2::zeros((n, c)),
            m_min,
            m_max,
        }
    }
}

/// One point of the discrete exponent fuzzy set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentGrade {
    pub m: f64,
    pub membership: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub centroids: Array2<f64>,
    pub membership: MembershipMatrix,
    pub labels: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `None` for plain FCM.
    pub final_ha_params: Option<HedgeParams>,
    /// Parameters in force at the end of each iteration.
    pub ha_trace: Vec<HedgeParams>,
    /// Iteration (1-based) at which the objective guard froze the parameters.
    pub guard_iteration: Option<usize>,
    pub exponent_fuzzy_set: Vec<ExponentGrade>,
}

/// Serialized form of a [`ClusterResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub ha_params: Option<HedgeParams>,
    pub exponent_fuzzy_set: Vec<ExponentGrade>,
}

impl ClusterResult {
    pub fn to_document(&self) -> ResultDocument {
        ResultDocument {
            centroids: self.centroids.outer_iter().map(|r| r.to_vec()).collect(),
            labels: self.labels.clone(),
            objective_trace: self.objective_trace.clone(),
            iterations: self.iterations,
            converged: self.converged,
            ha_params: self.final_ha_params,
            exponent_fuzzy_set: self.exponent_fuzzy_set.clone(),
        }
    }
}

/// Flattens `(M, R)` pairs into a discrete fuzzy set over the exponent range:
/// zero grades dropped, one entry per distinct `M` keeping the largest grade,
/// ascending by `M`.
pub fn exponent_fuzzy_set(m: ArrayView2<f64>, r: ArrayView2<f64>) -> Result<Vec<ExponentGrade>> {
    if m.dim() != r.dim() {
        return Err(Error::Shape(format!("M {:?} vs R {:?}", m.dim(), r.dim())));
    }
    let mut grades: Vec<ExponentGrade> = m
        .iter()
        .zip(r.iter())
        .filter(|(_, &g)| g > 0.0)
        .map(|(&m, &g)| ExponentGrade { m, membership: g })
        .collect();
    grades.sort_by(|a, b| a.m.total_cmp(&b.m).then(b.membership.total_cmp(&a.membership)));
    grades.dedup_by(|later, first| later.m == first.m);
    Ok(grades)
}

/// Picks `c` rows with pairwise distinct values in seeded random order.
pub(crate) fn initial_centroids<R: Rng + ?Sized>(
    data: &Dataset,
    c: usize,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let x = data.values();
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.shuffle(rng);
    let mut chosen: Vec<usize> = Vec::with_capacity(c);
    for i in order {
        if chosen.iter().all(|&j| x.row(j) != x.row(i)) {
            chosen.push(i);
            if chosen.len() == c {
                break;
            }
        }
    }
    if chosen.len() < c {
        return Err(Error::Initialization(format!(
            "{c} clusters requested but only {} distinct rows exist",
            chosen.len()
        )));
    }
    Ok(x.select(ndarray::Axis(0), &chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dataset_rejects_bad_input() {
        assert!(Dataset::from_rows(vec![]).is_err());
        assert!(Dataset::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Dataset::from_rows(vec![vec![f64::NAN]]).is_err());
        assert_eq!(Dataset::from_rows(vec![vec![1.0, 2.0, 3.0]]).unwrap().d(), 3);
    }

    #[test]
    fn labels_prefer_lowest_index_on_ties() {
        let u = MembershipMatrix::from_array(array![[0.5, 0.5], [0.2, 0.8], [0.4, 0.4]]);
        assert_eq!(u.labels(), vec![0, 1, 0]);
    }

    #[test]
    fn fuzzy_set_collapse_and_dedup() {
        let m = array![[2.0, 2.0, 5.0]];
        let r = array![[0.3, 0.7, 0.4]];
        let set = exponent_fuzzy_set(m.view(), r.view()).unwrap();
        assert_eq!(
            set,
            vec![
                ExponentGrade { m: 2.0, membership: 0.7 },
                ExponentGrade { m: 5.0, membership: 0.4 }
            ]
        );
        let m = Array2::from_elem((3, 2), 1.5);
        let r = array![[0.1, 0.2], [0.6, 0.3], [0.05, 0.5]];
        let set = exponent_fuzzy_set(m.view(), r.view()).unwrap();
        assert_eq!(set, vec![ExponentGrade { m: 1.5, membership: 0.6 }]);
        assert_eq!(set, exponent_fuzzy_set(m.view(), r.view()).unwrap());
    }

    #[test]
    fn init_requires_enough_distinct_rows() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let data = Dataset::from_rows(vec![vec![1.0], vec![1.0], vec![1.0], vec![2.0]]).unwrap();
        let c = initial_centroids(&data, 2, &mut rng).unwrap();
        let mut picked = c.column(0).to_vec();
        picked.sort_by(f64::total_cmp);
        assert_eq!(picked, vec![1.0, 2.0]);
        assert!(matches!(initial_centroids(&data, 3, &mut rng), Err(Error::Initialization(_))));
    }

    #[test]
    fn config_validation() {
        let ok = ClusterConfig { clusters: 3, ..ClusterConfig::default() };
        assert!(ok.validate(10).is_ok());
        assert!(ok.validate(2).is_err());
        assert!(ClusterConfig { m_min: 1.0, ..ok.clone() }.validate(10).is_err());
        assert!(ClusterConfig { m_min: 5.0, m_max: 2.0, ..ok.clone() }.validate(10).is_err());
        assert!(ClusterConfig { epsilon: 0.0, ..ok.clone() }.validate(10).is_err());
        assert!(ClusterConfig { max_iter: 0, ..ok }.validate(10).is_err());
    }
}
