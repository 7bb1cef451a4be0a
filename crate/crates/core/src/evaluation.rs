//! Dataset loading, scaling, label-matched accuracy and the multi-seed
//! benchmark harness.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::clustering::{run_fcm, run_hamfcm, ClusterConfig, ClusterResult, Dataset, ExponentGrade};
use crate::error::{Error, Result};
use crate::hedge_algebra::HedgeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelColumn {
    First,
    Last,
    None,
    /// No label column unless the first or last column fails to parse as
    /// numbers, in which case that column is taken as the label.
    Auto,
}

impl std::str::FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(LabelColumn::First),
            "last" => Ok(LabelColumn::Last),
            "none" => Ok(LabelColumn::None),
            "auto" => Ok(LabelColumn::Auto),
            other => Err(Error::Config(format!(
                "label column must be first|last|none|auto, got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: Dataset,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(data: Dataset, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != data.n() {
            return Err(Error::Shape(format!(
                "{} labels for {} elements",
                labels.len(),
                data.n()
            )));
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        if classes < 2 {
            return Err(Error::Format("a labeled dataset needs at least 2 classes".into()));
        }
        Ok(LabeledDataset { data, labels, class_names })
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn with_data(&self, data: Dataset) -> Result<Self> {
        LabeledDataset::new(data, self.labels.clone(), self.class_names.clone())
    }
}

/// Features plus, when a label column was requested, factor-encoded labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub data: Dataset,
    pub labels: Option<Vec<usize>>,
    pub class_names: Vec<String>,
}

impl LoadedData {
    pub fn into_labeled(self) -> Result<LabeledDataset> {
        let labels = self
            .labels
            .ok_or_else(|| Error::Config("file was loaded without a label column".into()))?;
        LabeledDataset::new(self.data, labels, self.class_names)
    }
}

pub fn load_dataset(path: impl AsRef<Path>, label_column: LabelColumn, delimiter: u8) -> Result<LoadedData> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, label_column, delimiter)
}

/// Parses delimiter-separated numeric text. A first line whose feature cells
/// are not all numeric is taken as a header. Labels are numbered in order of
/// first appearance. Row and column numbers in errors are 1-based and count
/// lines of the file.
pub fn parse_dataset(text: &str, label_column: LabelColumn, delimiter: u8) -> Result<LoadedData> {
    if label_column == LabelColumn::Auto {
        return match parse_dataset(text, LabelColumn::None, delimiter) {
            Err(err @ Error::Parse { .. }) => parse_dataset(text, LabelColumn::Last, delimiter)
                .or_else(|_| parse_dataset(text, LabelColumn::First, delimiter))
                .map_err(|_| err),
            other => other,
        };
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(delimiter)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("line {}: {e}", idx + 1)))?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }

    let feature_range = |width: usize| match label_column {
        LabelColumn::First => (1, width, Some(0)),
        LabelColumn::Last => (0, width.saturating_sub(1), width.checked_sub(1)),
        LabelColumn::None | LabelColumn::Auto => (0, width, None),
    };

    let first = &records[0].1;
    let (lo, hi, _) = feature_range(first.len());
    let is_header = first
        .iter()
        .skip(lo)
        .take(hi.saturating_sub(lo))
        .any(|cell| cell.parse::<f64>().is_err());
    if is_header {
        records.remove(0);
    }
    let width = records
        .first()
        .map(|(_, r)| r.len())
        .ok_or_else(|| Error::Format("header present but no data rows".into()))?;
    let (lo, hi, label_idx) = feature_range(width);
    if hi <= lo {
        return Err(Error::Format("rows have no feature columns".into()));
    }

    let mut values = Vec::with_capacity(records.len() * (hi - lo));
    let mut labels = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(Error::Format(format!(
                "line {line} has {} fields, expected {width}",
                rec.len()
            )));
        }
        for col in lo..hi {
            let cell = &rec[col];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: *line,
                column: col + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: *line,
                    column: col + 1,
                    message: format!("'{cell}' is not finite"),
                });
            }
            values.push(v);
        }
        if let Some(li) = label_idx {
            let name = rec[li].to_string();
            let next = class_ids.len();
            let id = *class_ids.entry(name.clone()).or_insert_with(|| {
                class_names.push(name);
                next
            });
            labels.push(id);
        }
    }
    let matrix = Array2::from_shape_vec((records.len(), hi - lo), values)
        .map_err(|e| Error::Shape(e.to_string()))?;
    Ok(LoadedData {
        data: Dataset::new(matrix)?,
        labels: label_idx.map(|_| labels),
        class_names,
    })
}

/// Maps every column affinely onto `[0, 1]`; constant columns become 0.5.
pub fn minmax_normalize(data: &Dataset) -> Dataset {
    let mut x = data.values().to_owned();
    for mut col in x.columns_mut() {
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if hi > lo {
            col.mapv_inplace(|v| (v - lo) / (hi - lo));
        } else {
            col.fill(0.5);
        }
    }
    Dataset::new(x).expect("scaled values stay finite")
}

/// Counts `table[p][t]` of elements with predicted id `p` and true id `t`.
fn contingency(predicted: &[usize], truth: &[usize]) -> Vec<Vec<usize>> {
    let kp = predicted.iter().max().map_or(0, |m| m + 1);
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let size = kp.max(kt);
    let mut table = vec![vec![0usize; size]; size];
    for (&p, &t) in predicted.iter().zip(truth) {
        table[p][t] += 1;
    }
    table
}

/// Fraction of elements whose predicted cluster maps to their class under
/// the best one-to-one cluster-to-class assignment.
pub fn clustering_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Shape("no labels to compare".into()));
    }
    let table = contingency(predicted, truth);
    let matched = if table.len() <= 10 {
        best_assignment_exhaustive(&table)
    } else {
        best_assignment_hungarian(&table)
    };
    Ok(matched as f64 / predicted.len() as f64)
}

/// Maximum total weight over all permutations of a square table.
pub fn best_assignment_exhaustive(table: &[Vec<usize>]) -> usize {
    fn go(table: &[Vec<usize>], row: usize, used: &mut [bool], acc: usize, best: &mut usize) {
        if row == table.len() {
            *best = (*best).max(acc);
            return;
        }
        for col in 0..table.len() {
            if !used[col] {
                used[col] = true;
                go(table, row + 1, used, acc + table[row][col], best);
                used[col] = false;
            }
        }
    }
    let mut best = 0;
    go(table, 0, &mut vec![false; table.len()], 0, &mut best);
    best
}

/// Maximum-weight perfect matching on a square table (Kuhn-Munkres with
/// potentials, minimizing the negated weights).
pub fn best_assignment_hungarian(table: &[Vec<usize>]) -> usize {
    let n = table.len();
    if n == 0 {
        return 0;
    }
    let cost = |i: usize, j: usize| -(table[i - 1][j - 1] as i64);
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| table[p[j] - 1][j - 1]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Algorithm {
    Fcm { m: f64 },
    Hamfcm { m_min: f64, m_max: f64 },
}

impl Algorithm {
    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Fcm { .. } => "fcm",
            Algorithm::Hamfcm { .. } => "hamfcm",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Algorithm::Fcm { m } => format!("m={m}"),
            Algorithm::Hamfcm { m_min, m_max } => format!("m={m_min}-{m_max}"),
        }
    }
}

/// Engine choice plus the knobs shared by every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub algorithm: Algorithm,
    pub clusters: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    pub ha_params: HedgeParams,
    pub ha_update_cap: Option<usize>,
}

impl EngineParams {
    pub fn new(algorithm: Algorithm, clusters: usize) -> Self {
        let defaults = ClusterConfig::default();
        EngineParams {
            algorithm,
            clusters,
            epsilon: defaults.epsilon,
            max_iter: defaults.max_iter,
            ha_params: defaults.ha_params,
            ha_update_cap: defaults.ha_update_cap,
        }
    }

    pub fn config(&self, seed: u64) -> ClusterConfig {
        let (m_min, m_max) = match self.algorithm {
            Algorithm::Fcm { m } => (m, m),
            Algorithm::Hamfcm { m_min, m_max } => (m_min, m_max),
        };
        ClusterConfig {
            clusters: self.clusters,
            m_min,
            m_max,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            seed,
            ha_params: self.ha_params,
            ha_update_cap: self.ha_update_cap,
        }
    }

    pub fn run(&self, data: &Dataset, seed: u64) -> Result<ClusterResult> {
        match self.algorithm {
            Algorithm::Fcm { m } => run_fcm(data, self.clusters, m, self.epsilon, self.max_iter, seed),
            Algorithm::Hamfcm { .. } => run_hamfcm(data, &self.config(seed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub accuracy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub algorithm: String,
    pub parameters: String,
    pub engine: EngineParams,
    pub runs: Vec<RunRecord>,
    pub best_accuracy: f64,
    pub mean_accuracy: f64,
    pub mean_iterations: f64,
    pub mean_time_s: f64,
    pub best_seed: u64,
    pub best_ha_params: Option<HedgeParams>,
    pub best_exponent_fuzzy_set: Vec<ExponentGrade>,
}

/// Seeds `1..=runs`.
pub fn default_seeds(runs: usize) -> Vec<u64> {
    (1..=runs as u64).collect()
}

pub fn run_benchmark(dataset: &LabeledDataset, params: &EngineParams, seeds: &[u64]) -> Result<BenchmarkReport> {
    Ok(run_benchmark_detailed(dataset, params, seeds)?.0)
}

/// Like [`run_benchmark`] but also hands back every run's full result, in
/// seed order.
pub fn run_benchmark_detailed(
    dataset: &LabeledDataset,
    params: &EngineParams,
    seeds: &[u64],
) -> Result<(BenchmarkReport, Vec<ClusterResult>)> {
    if seeds.is_empty() {
        return Err(Error::Config("a benchmark needs at least one run".into()));
    }
    let mut records = Vec::with_capacity(seeds.len());
    let mut results = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let start = Instant::now();
        let result = params
            .run(&dataset.data, seed)
            .map_err(|e| Error::Run { seed, source: Box::new(e) })?;
        let wall_time_s = start.elapsed().as_secs_f64();
        let accuracy = clustering_accuracy(&result.labels, &dataset.labels)?;
        records.push(RunRecord {
            seed,
            accuracy,
            iterations: result.iterations,
            converged: result.converged,
            wall_time_s,
        });
        results.push(result);
    }

    let count = records.len() as f64;
    // First run with the top accuracy wins ties.
    let best = records
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.accuracy > records[b].accuracy { i } else { b });
    let report = BenchmarkReport {
        algorithm: params.algorithm.id().to_string(),
        parameters: params.algorithm.describe(),
        engine: params.clone(),
        best_accuracy: records[best].accuracy,
        mean_accuracy: records.iter().map(|r| r.accuracy).sum::<f64>() / count,
        mean_iterations: records.iter().map(|r| r.iterations as f64).sum::<f64>() / count,
        mean_time_s: records.iter().map(|r| r.wall_time_s).sum::<f64>() / count,
        best_seed: records[best].seed,
        best_ha_params: results[best].final_ha_params,
        best_exponent_fuzzy_set: results[best].exponent_fuzzy_set.clone(),
        runs: records,
    };
    Ok((report, results))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

pub fn write_report(report: &BenchmarkReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let body = match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => serde_json::to_string_pretty(report)
            .map_err(|e| Error::Format(e.to_string()))?,
    };
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// CSV rendering: `#`-titled sections separated by blank lines, each with
/// its own header row.
pub fn render_csv(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    out.push_str("# aggregate\n");
    out.push_str("algorithm,parameters,runs,best_accuracy,mean_accuracy,mean_iterations,mean_time_s,best_seed\n");
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        report.algorithm,
        report.parameters,
        report.runs.len(),
        report.best_accuracy,
        report.mean_accuracy,
        report.mean_iterations,
        report.mean_time_s,
        report.best_seed
    ));
    out.push_str("\n# runs\nseed,accuracy,iterations,converged,wall_time_s\n");
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.seed, r.accuracy, r.iterations, r.converged, r.wall_time_s
        ));
    }
    if let Some(params) = &report.best_ha_params {
        out.push_str("\n# ha_params\nparameter,value\n");
        for (name, value) in params.named() {
            out.push_str(&format!("{name},{value}\n"));
        }
    }
    if !report.best_exponent_fuzzy_set.is_empty() {
        out.push_str("\n# exponent_fuzzy_set\nm,membership\n");
        for g in &report.best_exponent_fuzzy_set {
            out.push_str(&format!("{},{}\n", g.m, g.membership));
        }
    }
    out
}

/// Aggregate row of a CSV report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub algorithm: String,
    pub parameters: String,
    pub runs: usize,
    pub best_accuracy: f64,
    pub mean_accuracy: f64,
    pub mean_iterations: f64,
    pub mean_time_s: f64,
    pub best_seed: u64,
    pub ha_params: Vec<(String, f64)>,
    pub exponent_fuzzy_set: Vec<(f64, f64)>,
}

pub fn parse_report_csv(text: &str) -> Result<ReportSummary> {
    let mut sections: HashMap<&str, Vec<Vec<&str>>> = HashMap::new();
    let mut current = None;
    for line in text.lines() {
        if let Some(title) = line.strip_prefix("# ") {
            current = Some(title.trim());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let key = current.ok_or_else(|| Error::Format("row before any section".into()))?;
        sections.entry(key).or_default().push(line.split(',').collect());
    }
    let bad = |what: &str| Error::Format(format!("report: {what}"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
    let agg = sections
        .get("aggregate")
        .and_then(|rows| rows.get(1))
        .ok_or_else(|| bad("missing aggregate section"))?;
    if agg.len() != 8 {
        return Err(bad("aggregate row has the wrong width"));
    }
    let pairs = |name: &str| -> Result<Vec<(String, f64)>> {
        sections.get(name).map_or(Ok(Vec::new()), |rows| {
            rows.iter()
                .skip(1)
                .map(|r| match r.as_slice() {
                    [a, b] => Ok((a.to_string(), num(b)?)),
                    _ => Err(bad(&format!("{name} row has the wrong width"))),
                })
                .collect()
        })
    };
    Ok(ReportSummary {
        algorithm: agg[0].to_string(),
        parameters: agg[1].to_string(),
        runs: agg[2].parse().map_err(|_| bad("run count"))?,
        best_accuracy: num(agg[3])?,
        mean_accuracy: num(agg[4])?,
        mean_iterations: num(agg[5])?,
        mean_time_s: num(agg[6])?,
        best_seed: agg[7].parse().map_err(|_| bad("seed"))?,
        ha_params: pairs("ha_params")?,
        exponent_fuzzy_set: pairs("exponent_fuzzy_set")?
            .into_iter()
            .map(|(m, g)| Ok((num(&m)?, g)))
            .collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_label_last_with_header() {
        let text = "a,b,class\n1,2,x\n3,4,y\n5,6,x\n";
        let loaded = parse_dataset(text, LabelColumn::Last, b',').unwrap();
        assert_eq!(loaded.data.n(), 3);
        assert_eq!(loaded.data.d(), 2);
        assert_eq!(loaded.labels, Some(vec![0, 1, 0]));
        assert_eq!(loaded.class_names, vec!["x", "y"]);
    }

    #[test]
    fn parses_label_first_without_header() {
        let text = "3;1.5;2\n1;0.5;7\n";
        let loaded = parse_dataset(text, LabelColumn::First, b';').unwrap();
        assert_eq!(loaded.data.values()[[1, 1]], 7.0);
        assert_eq!(loaded.labels, Some(vec![0, 1]));
    }

    #[test]
    fn auto_label_column_detection() {
        let last = parse_dataset("a,b,class\n1,2,x\n3,4,y\n", LabelColumn::Auto, b',').unwrap();
        assert_eq!((last.data.d(), last.labels), (2, Some(vec![0, 1])));
        let first = parse_dataset("x,1,2\ny,3,4\n", LabelColumn::Auto, b',').unwrap();
        assert_eq!(first.data.values()[[1, 0]], 3.0);
        let none = parse_dataset("1,2\n3,4\n", LabelColumn::Auto, b',').unwrap();
        assert!(none.labels.is_none());
        let bad = parse_dataset("1,2,3\n4,oops,6\n", LabelColumn::Auto, b',').unwrap_err();
        assert!(matches!(bad, Error::Parse { row: 2, column: 2, .. }));
    }

    #[test]
    fn single_row_is_a_valid_dataset() {
        let loaded = parse_dataset("1,2,3\n", LabelColumn::None, b',').unwrap();
        assert_eq!((loaded.data.n(), loaded.data.d()), (1, 3));
        assert!(loaded.labels.is_none());
    }

    #[test]
    fn bad_cell_names_its_location() {
        let err = parse_dataset("1,2\n3,abc\n", LabelColumn::None, b',').unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = parse_dataset("1,2,3\n4,5\n", LabelColumn::None, b',').unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn minmax_examples() {
        let data = Dataset::from_rows(vec![vec![2.0, 7.0, 0.0], vec![4.0, 7.0, 1.0], vec![6.0, 7.0, 0.5]]).unwrap();
        let scaled = minmax_normalize(&data);
        let x = scaled.values();
        assert_eq!(x.column(0).to_vec(), vec![0.0, 0.5, 1.0]);
        assert_eq!(x.column(1).to_vec(), vec![0.5, 0.5, 0.5]);
        assert_eq!(x.column(2).to_vec(), vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(clustering_accuracy(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[2, 0, 1, 0], &[0, 1, 2, 1]).unwrap(), 1.0);
        assert_abs_diff_eq!(clustering_accuracy(&[1, 1, 1, 0], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert!(clustering_accuracy(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn hungarian_agrees_with_exhaustive_search() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for size in 1..=7 {
            for _ in 0..20 {
                let table: Vec<Vec<usize>> = (0..size)
                    .map(|_| (0..size).map(|_| rng.random_range(0..30)).collect())
                    .collect();
                assert_eq!(best_assignment_hungarian(&table), best_assignment_exhaustive(&table));
            }
        }
    }

    #[test]
    fn many_clusters_use_matching() {
        let truth: Vec<usize> = (0..120).map(|i| i % 12).collect();
        let predicted: Vec<usize> = truth.iter().map(|t| (t * 5 + 3) % 12).collect();
        assert_eq!(clustering_accuracy(&predicted, &truth).unwrap(), 1.0);
    }

    fn tiny_labeled() -> LabeledDataset {
        let rows = vec![vec![0.0], vec![0.2], vec![5.0], vec![5.1], vec![0.1], vec![5.3]];
        LabeledDataset::new(Dataset::from_rows(rows).unwrap(), vec![0, 0, 1, 1, 0, 1], vec![]).unwrap()
    }

    #[test]
    fn benchmark_is_deterministic() {
        let params = EngineParams::new(Algorithm::Hamfcm { m_min: 1.5, m_max: 20.0 }, 2);
        let a = run_benchmark(&tiny_labeled(), &params, &[4]).unwrap();
        let b = run_benchmark(&tiny_labeled(), &params, &[4]).unwrap();
        assert_eq!(a.runs[0].accuracy, b.runs[0].accuracy);
        assert_eq!(a.runs[0].iterations, b.runs[0].iterations);
        assert_eq!(a.best_ha_params, b.best_ha_params);
        assert!(a.best_accuracy >= a.mean_accuracy);
    }

    #[test]
    fn csv_report_round_trips_aggregates() {
        let params = EngineParams::new(Algorithm::Hamfcm { m_min: 1.5, m_max: 20.0 }, 2);
        let report = run_benchmark(&tiny_labeled(), &params, &default_seeds(3)).unwrap();
        let parsed = parse_report_csv(&render_csv(&report)).unwrap();
        assert_eq!(parsed.runs, 3);
        assert_eq!(parsed.best_accuracy, report.best_accuracy);
        assert_eq!(parsed.mean_accuracy, report.mean_accuracy);
        assert_eq!(parsed.mean_iterations, report.mean_iterations);
        assert_eq!(parsed.best_seed, report.best_seed);
        let names: Vec<&str> = parsed.ha_params.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["fm_small", "fm_big", "mu_less", "mu_possibly", "mu_more", "mu_very"]);
        assert_eq!(parsed.exponent_fuzzy_set.len(), report.best_exponent_fuzzy_set.len());
    }

    #[test]
    fn fcm_report_omits_fuzzy_set() {
        let params = EngineParams::new(Algorithm::Fcm { m: 2.0 }, 2);
        let report = run_benchmark(&tiny_labeled(), &params, &[1]).unwrap();
        let text = render_csv(&report);
        assert!(!text.contains("exponent_fuzzy_set"));
        assert!(!text.contains("ha_params"));
    }

    #[test]
    fn failing_run_names_its_seed() {
        let params = EngineParams::new(Algorithm::Fcm { m: 2.0 }, 7);
        match run_benchmark(&tiny_labeled(), &params, &[9]) {
            Err(Error::Run { seed, .. }) => assert_eq!(seed, 9),
            other => panic!("unexpected {other:?}"),
        }
    }
}
