use std::fs;
use std::path::Path;

use foliage::distances::{distance, Measure, Metric};
use foliage::evalharness::{run_experiment, ExperimentConfig};
use foliage::imgproc::RasterImage;
use foliage::retrieval::{
    build_index, extract_features, rank, FeatureIndex, FeatureParams, FeatureVector, FEATURE_LEN,
};
use foliage::synth::{default_styles, write_dataset, Jitter};
use foliage::Error;

const SIZE: usize = 96;

fn dataset(root: &Path, classes: usize, per_class: usize, jitter: Jitter) {
    write_dataset(root, &default_styles(classes), per_class, SIZE, jitter, 7).unwrap();
}

#[test]
fn build_counts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 3, 2, Jitter::MILD);
    let params = FeatureParams::default();
    let out = build_index(dir.path(), &params).unwrap();
    assert!(out.warnings.is_empty(), "{:?}", out.warnings);
    assert_eq!(out.index.len(), 6);
    assert_eq!(out.index.norm_stats().bounds.len(), FEATURE_LEN);
    assert_eq!(out.index.species(), ["species_00", "species_01", "species_02"]);
    for v in out.index.normalized() {
        assert!(v.flatten().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    let a = dir.path().join("a.idx");
    let b = dir.path().join("b.idx");
    out.index.save(&a).unwrap();
    build_index(dir.path(), &params).unwrap().index.save(&b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(FeatureIndex::load(&a).unwrap(), out.index);
}

#[test]
fn unreadable_files_warn_and_empty_species_fail() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 2, 2, Jitter::NONE);
    fs::write(dir.path().join("species_00/broken.png"), b"not an image").unwrap();
    let out = build_index(dir.path(), &FeatureParams::default()).unwrap();
    assert_eq!(out.index.len(), 4);
    assert_eq!(out.warnings.len(), 1);
    assert!(out.warnings[0].contains("broken.png"));

    fs::create_dir(dir.path().join("species_99")).unwrap();
    fs::write(dir.path().join("species_99/junk.png"), b"junk").unwrap();
    assert!(matches!(
        build_index(dir.path(), &FeatureParams::default()),
        Err(Error::Build(_))
    ));

    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(build_index(empty.path(), &FeatureParams::default()), Err(Error::Build(_))));
    assert!(matches!(
        build_index(empty.path().join("missing"), &FeatureParams::default()),
        Err(Error::Io { .. })
    ));
}

#[test]
fn constant_feature_column_has_equal_bounds() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 2, 2, Jitter::NONE);
    let index = build_index(dir.path(), &FeatureParams::default()).unwrap().index;
    // both instances of a class are identical renders, so a lone class gives min = max everywhere
    let recs: Vec<FeatureVector> = index.records()[..2].to_vec();
    let single = FeatureIndex::from_records(recs, FeatureParams::default(), Default::default()).unwrap();
    assert!(single.norm_stats().bounds.iter().all(|(lo, hi)| lo == hi));
    assert!(single.normalized()[0].flatten().iter().all(|&x| x == 0.0));
}

#[test]
fn loaded_images_self_retrieve() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 4, 2, Jitter::MILD);
    let index = build_index(dir.path(), &FeatureParams::default()).unwrap().index;
    for rec in index.records() {
        let img = RasterImage::load(dir.path().join(&rec.leaf_id)).unwrap();
        let q = extract_features(&img, index.params()).unwrap();
        for m in Measure::ALL {
            let r = rank(&q, &index, Metric::new(m)).unwrap();
            assert_eq!(r.entries[0].species, rec.species);
            assert_eq!(r.entries[0].score, 0.0);
        }
    }
}

/// Features of every file, per class directory, both in sorted order.
fn features_by_class(root: &Path) -> Vec<(String, Vec<Vec<f64>>)> {
    let params = FeatureParams::default();
    let mut species_dirs: Vec<_> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    species_dirs.sort();
    species_dirs
        .into_iter()
        .map(|d| {
            let label = d.file_name().unwrap().to_string_lossy().into_owned();
            let mut files: Vec<_> = fs::read_dir(&d).unwrap().map(|e| e.unwrap().path()).collect();
            files.sort();
            let rows = files
                .iter()
                .map(|f| extract_features(&RasterImage::load(f).unwrap(), &params).unwrap().flatten())
                .collect();
            (label, rows)
        })
        .collect()
}

/// Recomputes the protocol with plain loops: min-max over references, per-leaf
/// fused scores, species minima and top-k hit counts.
fn brute_force_accuracy(files_by_class: &[(String, Vec<Vec<f64>>)], refs: usize, queries: usize, measure: Measure, k: usize) -> f64 {
    let weights = foliage::Weights::default().to_array();
    let groups = [(0, 40), (40, 49), (49, 54), (54, 56)];
    let mut ref_rows = Vec::new();
    let mut query_rows = Vec::new();
    for (label, rows) in files_by_class {
        let n = rows.len();
        for (i, flat) in rows.iter().enumerate() {
            if i < refs {
                ref_rows.push((label.clone(), flat.clone()));
            } else if i >= n - queries {
                query_rows.push((label.clone(), flat.clone()));
            }
        }
    }
    let norm = |x: f64, j: usize| {
        let lo = ref_rows.iter().map(|r| r.1[j]).fold(f64::INFINITY, f64::min);
        let hi = ref_rows.iter().map(|r| r.1[j]).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    };
    let normed = |v: &[f64]| (0..FEATURE_LEN).map(|j| norm(v[j], j)).collect::<Vec<f64>>();
    let refs_n: Vec<(String, Vec<f64>)> = ref_rows.iter().map(|(l, v)| (l.clone(), normed(v))).collect();
    let mut hits = 0;
    for (truth, q) in &query_rows {
        let qn = normed(q);
        let mut best: Vec<(String, f64)> = Vec::new();
        for (label, r) in &refs_n {
            let mut s = 0.0;
            for (g, &(a, b)) in groups.iter().enumerate() {
                s += weights[g] * distance(measure, &qn[a..b], &r[a..b]).unwrap();
            }
            match best.iter_mut().find(|x| &x.0 == label) {
                Some(x) => x.1 = x.1.min(s),
                None => best.push((label.clone(), s)),
            }
        }
        best.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if best.iter().take(k).any(|x| &x.0 == truth) {
            hits += 1;
        }
    }
    hits as f64 / query_rows.len() as f64
}

#[test]
fn experiment_matches_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path(), 10, 4, Jitter::MILD);
    let config = ExperimentConfig {
        measures: vec![Measure::CityBlock, Measure::KullbackLeibler, Measure::BrayCurtis],
        refs_per_class: vec![2, 3],
        queries_per_class: 1,
        ..Default::default()
    };
    let report = run_experiment(dir.path(), &config).unwrap();
    assert_eq!(report.rows.len(), 6);
    let features = features_by_class(dir.path());
    for row in &report.rows {
        for (k, got) in [(1, row.top1), (3, row.top3), (5, row.top5)] {
            let want = brute_force_accuracy(&features, row.refs_per_class, 1, row.measure, k);
            assert!((got - want).abs() < 1e-12, "{} refs={} k={k}: {got} vs {want}", row.measure, row.refs_per_class);
        }
    }

    let too_many = ExperimentConfig {
        refs_per_class: vec![4],
        ..config
    };
    assert!(matches!(
        run_experiment(dir.path(), &too_many),
        Err(Error::InsufficientImages { .. })
    ));
}
