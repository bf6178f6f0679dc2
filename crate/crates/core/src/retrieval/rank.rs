use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;

use super::features::{FeatureGroup, FeatureVector};
use super::index::FeatureIndex;
use crate::distances::Metric;
use crate::error::Result;

/// Distances between the query and one reference, per feature group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GroupDistances {
    pub shape: f64,
    pub color: f64,
    pub texture: f64,
    pub vein: f64,
}

impl GroupDistances {
    pub fn to_array(&self) -> [f64; 4] {
        [self.shape, self.color, self.texture, self.vein]
    }
}

/// Fused score of a single reference leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafScore {
    pub leaf_id: String,
    pub species: String,
    pub score: f64,
    pub distances: GroupDistances,
}

/// A species with the score of its closest reference leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub species: String,
    pub score: f64,
    pub best_leaf_id: String,
    pub distances: GroupDistances,
}

/// Species ordered by ascending score.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RankedResult {
    pub entries: Vec<RankedEntry>,
}

impl RankedResult {
    pub fn top_k(&self, k: usize) -> Vec<&str> {
        self.entries.iter().take(k).map(|e| e.species.as_str()).collect()
    }

    pub fn best(&self) -> Option<&RankedEntry> {
        self.entries.first()
    }

    /// 1-based rank of `species`, if present.
    pub fn position(&self, species: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.species == species).map(|p| p + 1)
    }
}

/// First `min(k, #species)` species of a ranking.
pub fn top_k(result: &RankedResult, k: usize) -> Vec<String> {
    result.top_k(k).into_iter().map(String::from).collect()
}

fn by_score_then_id(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    a_score.total_cmp(&b_score).then_with(|| a_id.cmp(b_id))
}

/// Fused score of every reference, ascending, ties broken by leaf id.
pub fn score_leaves(query: &FeatureVector, index: &FeatureIndex, metric: Metric<f64>) -> Result<Vec<LeafScore>> {
    query.validate()?;
    let q = index.normalize(query);
    let w = index.weights();
    let mut scores: Vec<LeafScore> = index
        .normalized()
        .iter()
        .map(|r| {
            let d = GroupDistances {
                shape: metric.eval(&q.shape, &r.shape),
                color: metric.eval(&q.color, &r.color),
                texture: metric.eval(&q.texture, &r.texture),
                vein: metric.eval(&q.vein, &r.vein),
            };
            let score = w.get(FeatureGroup::Shape) * d.shape
                + w.get(FeatureGroup::Color) * d.color
                + w.get(FeatureGroup::Texture) * d.texture
                + w.get(FeatureGroup::Vein) * d.vein;
            LeafScore {
                leaf_id: r.leaf_id.clone(),
                species: r.species.clone(),
                score,
                distances: d,
            }
        })
        .collect();
    scores.sort_by(|a, b| by_score_then_id(a.score, &a.leaf_id, b.score, &b.leaf_id));
    Ok(scores)
}

/// Ranks species by the minimum fused score over their reference leaves.
pub fn rank(query: &FeatureVector, index: &FeatureIndex, metric: Metric<f64>) -> Result<RankedResult> {
    let leaves = score_leaves(query, index, metric)?;
    let mut seen = HashSet::new();
    let entries = leaves
        .into_iter()
        .filter(|l| seen.insert(l.species.clone()))
        .map(|l| RankedEntry {
            species: l.species,
            score: l.score,
            best_leaf_id: l.leaf_id,
            distances: l.distances,
        })
        .collect();
    Ok(RankedResult { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::Measure;
    use crate::retrieval::features::FEATURE_LEN;
    use crate::retrieval::index::Weights;
    use crate::retrieval::FeatureParams;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_index(rng: &mut impl Rng, species: usize, per: usize, weights: Weights) -> FeatureIndex {
        let mut recs = Vec::new();
        for s in 0..species {
            for i in 0..per {
                let vals: Vec<f64> = (0..FEATURE_LEN).map(|_| rng.gen_range(0.0..10.0)).collect();
                recs.push(FeatureVector::from_flat(format!("s{s}/{i}"), format!("s{s}"), &vals).unwrap());
            }
        }
        FeatureIndex::from_records(recs, FeatureParams::default(), weights).unwrap()
    }

    fn random_query(rng: &mut impl Rng) -> FeatureVector {
        let vals: Vec<f64> = (0..FEATURE_LEN).map(|_| rng.gen_range(-1.0..11.0)).collect();
        FeatureVector::from_flat("q", "?", &vals).unwrap()
    }

    /// Recomputes every fused score from scratch, then picks per-species minima by scanning.
    fn oracle(query: &FeatureVector, index: &FeatureIndex, measure: Measure) -> Vec<(String, f64, String)> {
        let stats = index.norm_stats();
        let qn: Vec<f64> = query.flatten().iter().enumerate().map(|(i, &x)| stats.normalize_value(i, x)).collect();
        let w = index.weights().to_array();
        let mut best: Vec<(String, f64, String)> = Vec::new();
        for rec in index.records() {
            let rn: Vec<f64> = rec.flatten().iter().enumerate().map(|(i, &x)| stats.normalize_value(i, x)).collect();
            let mut score = 0.0;
            for (gi, g) in FeatureGroup::ALL.iter().enumerate() {
                let r = g.offset()..g.offset() + g.len();
                score += w[gi] * crate::distances::distance(measure, &qn[r.clone()], &rn[r]).unwrap();
            }
            match best.iter_mut().find(|b| b.0 == rec.species) {
                Some(b) if score < b.1 || (score == b.1 && rec.leaf_id < b.2) => {
                    b.1 = score;
                    b.2 = rec.leaf_id.clone();
                }
                Some(_) => {}
                None => best.push((rec.species.clone(), score, rec.leaf_id.clone())),
            }
        }
        best.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)));
        best
    }

    #[test]
    fn fused_score_arithmetic() {
        let w = Weights::new(0.25, 0.25, 0.25, 0.25).unwrap();
        let d = GroupDistances {
            shape: 1.0,
            color: 2.0,
            texture: 3.0,
            vein: 4.0,
        };
        let fused: f64 = w.to_array().iter().zip(d.to_array()).map(|(a, b)| a * b).sum();
        assert_eq!(fused, 2.5);
    }

    #[test]
    fn toy_index_matches_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for trial in 0..20 {
            let idx = random_index(&mut rng, 3, 4, Weights::default());
            let q = random_query(&mut rng);
            let measure = Measure::ALL[trial % 7];
            let got = rank(&q, &idx, Metric::new(measure)).unwrap();
            let want = oracle(&q, &idx, measure);
            assert_eq!(got.entries.len(), 3);
            for (e, (s, score, leaf)) in got.entries.iter().zip(&want) {
                assert_eq!(&e.species, s);
                assert_eq!(&e.best_leaf_id, leaf);
                assert!((e.score - score).abs() <= 1e-12 * score.abs().max(1.0));
            }
        }
    }

    #[test]
    fn self_retrieval_scores_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let idx = random_index(&mut rng, 4, 3, Weights::default());
        for m in Measure::ALL {
            for rec in idx.records() {
                let r = rank(rec, &idx, Metric::new(m)).unwrap();
                assert_eq!(r.entries[0].species, rec.species, "{m}");
                assert_eq!(r.entries[0].score, 0.0, "{m}");
            }
        }
    }

    #[test]
    fn top_k_truncates_and_is_prefix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let idx = random_index(&mut rng, 3, 2, Weights::default());
        let r = rank(&random_query(&mut rng), &idx, Metric::new(Measure::CityBlock)).unwrap();
        assert_eq!(top_k(&r, 1).len(), 1);
        assert_eq!(top_k(&r, 5).len(), 3);
        assert_eq!(top_k(&r, 3), top_k(&r, 5)[..3].to_vec());
    }

    #[test]
    fn ties_break_by_leaf_id() {
        let vals = vec![1.0; FEATURE_LEN];
        let recs = vec![
            FeatureVector::from_flat("b/1", "b", &vals).unwrap(),
            FeatureVector::from_flat("a/1", "a", &vals).unwrap(),
            FeatureVector::from_flat("c/1", "c", &vals).unwrap(),
        ];
        let idx = FeatureIndex::from_records(recs, FeatureParams::default(), Weights::default()).unwrap();
        let r = rank(&idx.records()[0].clone(), &idx, Metric::new(Measure::Euclidean)).unwrap();
        assert_eq!(r.top_k(3), ["a", "b", "c"]);
    }

    #[test]
    fn rejects_malformed_query() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let idx = random_index(&mut rng, 2, 2, Weights::default());
        let mut q = random_query(&mut rng);
        q.color.push(0.0);
        assert!(rank(&q, &idx, Metric::new(Measure::CityBlock)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn weight_scaling_preserves_order(seed in any::<u64>(), c in 0.01f64..100.0, m in 0usize..7) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut idx = random_index(&mut rng, 5, 3, Weights::default());
            let q = random_query(&mut rng);
            let metric = Metric::new(Measure::ALL[m]);
            let base = score_leaves(&q, &idx, metric).unwrap();
            idx.set_weights(Weights::default().scaled(c)).unwrap();
            let scaled = score_leaves(&q, &idx, metric).unwrap();
            let ids = |v: &[LeafScore]| v.iter().map(|l| l.leaf_id.clone()).collect::<Vec<_>>();
            prop_assert_eq!(ids(&base), ids(&scaled));
            for (a, b) in base.iter().zip(&scaled) {
                prop_assert!((b.score - c * a.score).abs() <= 1e-9 * (c * a.score).abs().max(1e-12));
            }
        }

        #[test]
        fn single_group_weights_reduce_to_group_sort(seed in any::<u64>(), g in 0usize..4, m in 0usize..7) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let group = FeatureGroup::ALL[g];
            let idx = random_index(&mut rng, 4, 3, Weights::only(group));
            let q = random_query(&mut rng);
            let metric = Metric::new(Measure::ALL[m]);
            let got: Vec<String> = score_leaves(&q, &idx, metric).unwrap().into_iter().map(|l| l.leaf_id).collect();
            let qn = idx.normalize(&q);
            let mut direct: Vec<(f64, String)> = idx
                .normalized()
                .iter()
                .map(|r| (metric.distance(qn.group(group), r.group(group)).unwrap(), r.leaf_id.clone()))
                .collect();
            direct.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<String> = direct.into_iter().map(|d| d.1).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn ranking_is_deterministic(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let idx = random_index(&mut rng, 4, 2, Weights::default());
            let q = random_query(&mut rng);
            let a = rank(&q, &idx, Metric::new(Measure::JensenShannon)).unwrap();
            let b = rank(&q, &idx.clone(), Metric::new(Measure::JensenShannon)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
