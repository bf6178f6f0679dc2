use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{extract_features, FeatureGroup, FeatureParams, FeatureVector, FEATURE_LEN};
use crate::error::{Error, Result};
use crate::imgproc::RasterImage;

pub const INDEX_FORMAT: &str = "foliage-index";
pub const INDEX_VERSION: u32 = 1;

/// Per-group fusion weights `(k_s, k_c, k_t, k_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub shape: f64,
    pub color: f64,
    pub texture: f64,
    pub vein: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            shape: 0.1612,
            color: 0.4839,
            texture: 0.1936,
            vein: 0.1613,
        }
    }
}

impl Weights {
    pub fn new(shape: f64, color: f64, texture: f64, vein: f64) -> Result<Self> {
        let w = Self {
            shape,
            color,
            texture,
            vein,
        };
        w.validate()?;
        Ok(w)
    }

    /// All weight on one group.
    pub fn only(group: FeatureGroup) -> Self {
        let mut w = [0.0; 4];
        w[group as usize] = 1.0;
        Self::from_array(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("weights must be nonnegative finite numbers, got {self}")))
        }
    }

    pub fn get(&self, group: FeatureGroup) -> f64 {
        self.to_array()[group as usize]
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.shape, self.color, self.texture, self.vein]
    }

    pub fn from_array(w: [f64; 4]) -> Self {
        Self {
            shape: w[0],
            color: w[1],
            texture: w[2],
            vein: w[3],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_array(self.to_array().map(|w| w * c))
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.shape, self.color, self.texture, self.vein)
    }
}

/// Parses `ks,kc,kt,kv`.
impl FromStr for Weights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "expected four comma-separated weights, got `{s}`"
            )));
        }
        let mut w = [0.0; 4];
        for (slot, p) in w.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::InvalidInput(format!("weight `{p}` is not a number")))?;
        }
        Self::new(w[0], w[1], w[2], w[3])
    }
}

/// Per-feature `(min, max)` over the reference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormStats {
    pub bounds: Vec<(f64, f64)>,
}

impl NormStats {
    pub fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>) -> Self {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); FEATURE_LEN];
        for v in vectors {
            for (b, x) in bounds.iter_mut().zip(v.flatten()) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        Self { bounds }
    }

    /// `(x − min)/(max − min)` clamped to `[0, 1]`; 0 for a constant feature.
    pub fn normalize_value(&self, i: usize, x: f64) -> f64 {
        let (lo, hi) = self.bounds[i];
        if hi > lo {
            ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn normalize(&self, v: &FeatureVector) -> FeatureVector {
        let mut out = v.clone();
        for g in FeatureGroup::ALL {
            let dst = match g {
                FeatureGroup::Shape => &mut out.shape,
                FeatureGroup::Color => &mut out.color,
                FeatureGroup::Texture => &mut out.texture,
                FeatureGroup::Vein => &mut out.vein,
            };
            for (j, x) in dst.iter_mut().enumerate() {
                *x = self.normalize_value(g.offset() + j, *x);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.bounds.len() != FEATURE_LEN {
            return Err(Error::IndexFormat(format!(
                "expected {FEATURE_LEN} normalization pairs, found {}",
                self.bounds.len()
            )));
        }
        if let Some(i) = self.bounds.iter().position(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo > hi) {
            return Err(Error::IndexFormat(format!("normalization pair {i} has min > max")));
        }
        Ok(())
    }
}

/// Hex SHA-256 of the feature layout (group names, lengths and labels).
pub fn layout_hash() -> String {
    let mut h = Sha256::new();
    for g in FeatureGroup::ALL {
        h.update(format!("{}:{};", g.name(), g.len()));
        for l in g.labels() {
            h.update(l.as_bytes());
            h.update(b",");
        }
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    layout_hash: String,
    params: FeatureParams,
    weights: Weights,
    norm_stats: NormStats,
    records: usize,
}

/// Immutable reference set with its normalization statistics and fusion weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureIndex {
    params: FeatureParams,
    weights: Weights,
    norm_stats: NormStats,
    records: Vec<FeatureVector>,
    normalized: Vec<FeatureVector>,
}

impl FeatureIndex {
    /// Computes normalization statistics over `records` (raw features).
    pub fn from_records(records: Vec<FeatureVector>, params: FeatureParams, weights: Weights) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Build("an index needs at least one reference leaf".into()));
        }
        for r in &records {
            r.validate()?;
        }
        weights.validate()?;
        let norm_stats = NormStats::from_vectors(&records);
        Ok(Self::assemble(params, weights, norm_stats, records))
    }

    fn assemble(params: FeatureParams, weights: Weights, norm_stats: NormStats, records: Vec<FeatureVector>) -> Self {
        let normalized = records.iter().map(|r| norm_stats.normalize(r)).collect();
        Self {
            params,
            weights,
            norm_stats,
            records,
            normalized,
        }
    }

    pub fn params(&self) -> &FeatureParams {
        &self.params
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    pub fn set_weights(&mut self, weights: Weights) -> Result<()> {
        weights.validate()?;
        self.weights = weights;
        Ok(())
    }

    pub fn norm_stats(&self) -> &NormStats {
        &self.norm_stats
    }

    /// Raw reference features in index order.
    pub fn records(&self) -> &[FeatureVector] {
        &self.records
    }

    /// Normalized reference features, parallel to [`records`](Self::records).
    pub fn normalized(&self) -> &[FeatureVector] {
        &self.normalized
    }

    pub fn normalize(&self, v: &FeatureVector) -> FeatureVector {
        self.norm_stats.normalize(v)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct species labels, sorted.
    pub fn species(&self) -> Vec<&str> {
        let mut s: Vec<&str> = self.records.iter().map(|r| r.species.as_str()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Number of references labelled `species`.
    pub fn species_count(&self, species: &str) -> usize {
        self.records.iter().filter(|r| r.species == species).count()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = Header {
            format: INDEX_FORMAT.into(),
            version: INDEX_VERSION,
            layout_hash: layout_hash(),
            params: self.params,
            weights: self.weights,
            norm_stats: self.norm_stats.clone(),
            records: self.records.len(),
        };
        let io = |e: std::io::Error| Error::io("<index stream>", e);
        serde_json::to_writer(&mut w, &header).map_err(|e| Error::IndexFormat(e.to_string()))?;
        w.write_all(b"\n").map_err(io)?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r).map_err(|e| Error::IndexFormat(e.to_string()))?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let mut next_line = || -> Result<Option<String>> {
            lines
                .next()
                .transpose()
                .map_err(|e| Error::io("<index stream>", e))
        };
        let first = next_line()?.ok_or_else(|| Error::IndexFormat("empty index file".into()))?;
        let header: Header =
            serde_json::from_str(&first).map_err(|e| Error::IndexFormat(format!("bad header: {e}")))?;
        if header.format != INDEX_FORMAT || header.version != INDEX_VERSION {
            return Err(Error::IndexFormat(format!(
                "unsupported index {} v{}",
                header.format, header.version
            )));
        }
        if header.layout_hash != layout_hash() {
            return Err(Error::IndexFormat("feature layout differs from this build".into()));
        }
        header.norm_stats.validate()?;
        header.weights.validate()?;
        let mut records = Vec::with_capacity(header.records);
        while let Some(line) = next_line()? {
            if line.trim().is_empty() {
                continue;
            }
            let rec: FeatureVector = serde_json::from_str(&line)
                .map_err(|e| Error::IndexFormat(format!("bad record {}: {e}", records.len() + 1)))?;
            rec.validate()?;
            records.push(rec);
        }
        if records.len() != header.records || records.is_empty() {
            return Err(Error::IndexFormat(format!(
                "header announces {} records, found {}",
                header.records,
                records.len()
            )));
        }
        Ok(Self::assemble(header.params, header.weights, header.norm_stats, records))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}

/// One image file of a labelled dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub species: String,
    /// `<species>/<file name>`; unique within the dataset.
    pub leaf_id: String,
    pub path: PathBuf,
}

fn sorted_children(dir: &Path) -> Result<Vec<(String, PathBuf, bool)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        let path = entry.path();
        let is_dir = path.is_dir();
        out.push((name, path, is_dir));
    }
    out.sort();
    Ok(out)
}

/// Lists `<root>/<species>/<files>` grouped by species, both levels in lexicographic order.
pub fn scan_dataset(root: impl AsRef<Path>) -> Result<Vec<(String, Vec<DatasetEntry>)>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let mut classes = Vec::new();
    for (species, dir, is_dir) in sorted_children(root)? {
        if !is_dir {
            continue;
        }
        let files = sorted_children(&dir)?
            .into_iter()
            .filter(|(_, _, d)| !d)
            .map(|(name, path, _)| DatasetEntry {
                leaf_id: format!("{species}/{name}"),
                species: species.clone(),
                path,
            })
            .collect();
        classes.push((species, files));
    }
    if classes.is_empty() {
        return Err(Error::Build(format!(
            "{} contains no species directories",
            root.display()
        )));
    }
    Ok(classes)
}

/// Loads and featurizes every entry in parallel; order of the output matches the input.
pub fn extract_all(entries: &[DatasetEntry], params: &FeatureParams) -> Vec<Result<FeatureVector>> {
    entries
        .par_iter()
        .map(|e| {
            let img = RasterImage::load(&e.path)?;
            Ok(extract_features(&img, params)?.with_identity(e.leaf_id.clone(), e.species.clone()))
        })
        .collect()
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub index: FeatureIndex,
    /// One message per image that could not be read or featurized.
    pub warnings: Vec<String>,
}

/// Featurizes a `<root>/<species>/<images>` tree into an index with default weights.
pub fn build_index(dataset_dir: impl AsRef<Path>, params: &FeatureParams) -> Result<BuildOutcome> {
    let classes = scan_dataset(dataset_dir)?;
    let entries: Vec<DatasetEntry> = classes.iter().flat_map(|(_, e)| e.iter().cloned()).collect();
    let results = extract_all(&entries, params);
    let mut warnings = Vec::new();
    let mut records = Vec::with_capacity(entries.len());
    for (entry, res) in entries.iter().zip(results) {
        match res {
            Ok(v) => records.push(v),
            Err(e) => warnings.push(format!("skipping {}: {e}", entry.path.display())),
        }
    }
    for (species, _) in &classes {
        if !records.iter().any(|r| &r.species == species) {
            return Err(Error::Build(format!("species `{species}` has no usable images")));
        }
    }
    let index = FeatureIndex::from_records(records, *params, Weights::default())?;
    Ok(BuildOutcome { index, warnings })
}
