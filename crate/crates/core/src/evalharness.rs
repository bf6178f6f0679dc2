//! Top-k accuracy, precision/recall curves, the reference-count sweep and
//! per-measure timing over a labelled dataset.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::distances::{Measure, Metric, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::retrieval::{
    extract_all, rank, scan_dataset, score_leaves, FeatureIndex, FeatureParams, FeatureVector, RankedResult, Weights,
};

/// Fraction of queries whose true species is among the first `k` ranked species.
pub fn accuracy<S: AsRef<str>>(results: &[RankedResult], truths: &[S], k: usize) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Evaluation("accuracy over an empty query set".into()));
    }
    if results.len() != truths.len() {
        return Err(Error::Evaluation(format!(
            "{} results but {} truth labels",
            results.len(),
            truths.len()
        )));
    }
    let hits = results
        .iter()
        .zip(truths)
        .filter(|(r, t)| r.top_k(k).contains(&t.as_ref()))
        .count();
    Ok(hits as f64 / results.len() as f64)
}

/// `(r / retrieved.len(), r / relevant_in_db)` where `r` counts retrieved items labelled `truth`.
pub fn precision_recall<S: AsRef<str>>(retrieved: &[S], truth: &str, relevant_in_db: usize) -> Result<(f64, f64)> {
    if retrieved.is_empty() {
        return Err(Error::Evaluation("precision over an empty retrieval".into()));
    }
    if relevant_in_db == 0 {
        return Err(Error::Evaluation(format!("no relevant items for `{truth}` in the database")));
    }
    let r = retrieved.iter().filter(|s| s.as_ref() == truth).count();
    Ok((r as f64 / retrieved.len() as f64, r as f64 / relevant_in_db as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RppPoint {
    pub depth: usize,
    pub recall: f64,
    pub precision: f64,
}

/// Recall and precision at every leaf-retrieval depth `1..=depth_max`, averaged over queries.
pub fn average_rpp(
    queries: &[FeatureVector],
    index: &FeatureIndex,
    metric: Metric<f64>,
    depth_max: usize,
) -> Result<Vec<RppPoint>> {
    if queries.is_empty() {
        return Err(Error::Evaluation("precision/recall over an empty query set".into()));
    }
    let depth_max = depth_max.min(index.len());
    let mut sums = vec![(0.0, 0.0); depth_max];
    for q in queries {
        let leaves = score_leaves(q, index, metric)?;
        let labels: Vec<&str> = leaves.iter().map(|l| l.species.as_str()).collect();
        let relevant = index.species_count(&q.species);
        for (d, acc) in sums.iter_mut().enumerate() {
            let (p, r) = precision_recall(&labels[..=d], &q.species, relevant)?;
            acc.0 += r;
            acc.1 += p;
        }
    }
    let n = queries.len() as f64;
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(d, (r, p))| RppPoint {
            depth: d + 1,
            recall: r / n,
            precision: p / n,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub measures: Vec<Measure>,
    pub weights: Weights,
    pub refs_per_class: Vec<usize>,
    /// Held out from the end of each class's file list.
    pub queries_per_class: usize,
    pub params: FeatureParams,
    pub epsilon: f64,
    /// Deepest leaf-retrieval depth of the RPP curves; defaults to the largest reference count.
    pub rpp_depth: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            measures: Measure::ALL.to_vec(),
            weights: Weights::default(),
            refs_per_class: (1..=10).map(|i| 5 * i).collect(),
            queries_per_class: 20,
            params: FeatureParams::default(),
            epsilon: DEFAULT_EPSILON,
            rpp_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub measure: Measure,
    pub refs_per_class: usize,
    pub top1: f64,
    pub top3: f64,
    pub top5: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    /// One row per (reference count, measure), in that nesting order.
    pub rows: Vec<ReportRow>,
    /// Averaged RPP curve per measure at the largest reference count.
    pub rpp: BTreeMap<Measure, Vec<RppPoint>>,
    /// Images dropped because they could not be read or featurized.
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn row(&self, measure: Measure, refs_per_class: usize) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.measure == measure && r.refs_per_class == refs_per_class)
    }

    /// Writes `report.csv` and one `rpp_<measure>.csv` per measure into `dir`.
    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_rows(&dir.join("report.csv"), &self.rows)?;
        for (m, curve) in &self.rpp {
            write_rows(&dir.join(format!("rpp_{}.csv", m.name())), curve)?;
        }
        Ok(())
    }
}

fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Evaluation(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-class feature vectors in file order.
pub type ClassFeatures = Vec<(String, Vec<FeatureVector>)>;

/// First `refs` vectors of each class as references, last `queries` as queries.
pub fn split(classes: &ClassFeatures, refs: usize, queries: usize) -> Result<(Vec<FeatureVector>, Vec<FeatureVector>)> {
    let mut r = Vec::new();
    let mut q = Vec::new();
    for (species, vs) in classes {
        if vs.len() < refs + queries {
            return Err(Error::InsufficientImages {
                class: species.clone(),
                needed: refs + queries,
                found: vs.len(),
            });
        }
        r.extend_from_slice(&vs[..refs]);
        q.extend_from_slice(&vs[vs.len() - queries..]);
    }
    Ok((r, q))
}

/// Times the single-threaded ranking of every query and scores top-1/3/5.
fn evaluate_measure(
    queries: &[FeatureVector],
    index: &FeatureIndex,
    metric: Metric<f64>,
    refs_per_class: usize,
) -> Result<ReportRow> {
    let start = Instant::now();
    let results = queries
        .iter()
        .map(|q| rank(q, index, metric))
        .collect::<Result<Vec<_>>>()?;
    let seconds = start.elapsed().as_secs_f64();
    let truths: Vec<&str> = queries.iter().map(|q| q.species.as_str()).collect();
    Ok(ReportRow {
        measure: metric.measure,
        refs_per_class,
        top1: accuracy(&results, &truths, 1)?,
        top3: accuracy(&results, &truths, 3)?,
        top5: accuracy(&results, &truths, 5)?,
        seconds,
    })
}

/// Runs the protocol over already extracted features; every measure sees the same split.
pub fn evaluate_features(classes: &ClassFeatures, config: &ExperimentConfig) -> Result<EvalReport> {
    if config.measures.is_empty() || config.refs_per_class.is_empty() {
        return Err(Error::Evaluation("no measures or reference counts configured".into()));
    }
    if config.queries_per_class == 0 || config.refs_per_class.contains(&0) {
        return Err(Error::Evaluation("reference and query counts must be positive".into()));
    }
    if classes.is_empty() {
        return Err(Error::Evaluation("dataset has no classes".into()));
    }
    let max_refs = *config.refs_per_class.iter().max().expect("non-empty");
    split(classes, max_refs, config.queries_per_class)?;

    let mut report = EvalReport::default();
    for &n in &config.refs_per_class {
        let (refs, queries) = split(classes, n, config.queries_per_class)?;
        let index = FeatureIndex::from_records(refs, config.params, config.weights)?;
        for &m in &config.measures {
            let metric = Metric::with_epsilon(m, config.epsilon)?;
            report.rows.push(evaluate_measure(&queries, &index, metric, n)?);
            if n == max_refs && !report.rpp.contains_key(&m) {
                let depth = config.rpp_depth.unwrap_or(max_refs);
                report.rpp.insert(m, average_rpp(&queries, &index, metric, depth)?);
            }
        }
    }
    Ok(report)
}

/// Extracts features once for the whole dataset, then runs [`evaluate_features`].
pub fn run_experiment(dataset_dir: impl AsRef<Path>, config: &ExperimentConfig) -> Result<EvalReport> {
    let scanned = scan_dataset(dataset_dir)?;
    let mut classes = ClassFeatures::new();
    let mut warnings = Vec::new();
    for (species, entries) in &scanned {
        let mut vs = Vec::new();
        for (entry, res) in entries.iter().zip(extract_all(entries, &config.params)) {
            match res {
                Ok(v) => vs.push(v),
                Err(e) => warnings.push(format!("skipping {}: {e}", entry.path.display())),
            }
        }
        classes.push((species.clone(), vs));
    }
    let mut report = evaluate_features(&classes, config)?;
    report.warnings = warnings;
    Ok(report)
}

/// Wall time of `evaluations` distance computations per measure on one shared batch
/// of random vectors in `[0, 1]^dim`.
pub fn time_distance_batch(measures: &[Measure], evaluations: usize, dim: usize, seed: u64) -> Vec<(Measure, f64)> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pool = 256.min(evaluations.max(2));
    let vectors: Vec<Vec<f64>> = (0..pool)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    measures
        .iter()
        .map(|&m| {
            let metric = Metric::<f64>::new(m);
            let start = Instant::now();
            let mut acc = 0.0;
            for i in 0..evaluations {
                let a = &vectors[i % pool];
                let b = &vectors[(i * 7 + 1) % pool];
                acc += metric.eval(black_box(a), black_box(b));
            }
            black_box(acc);
            (m, start.elapsed().as_secs_f64())
        })
        .collect()
}
