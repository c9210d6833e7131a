//! Per-query effectiveness against exact answers.

use simsearch_core::query::Neighbor;
use simsearch_core::{DataSet, LabelType, NO_LABEL};

use crate::error::{Error, Result};
use crate::gold::{GoldList, QueryType};

/// Effectiveness of one query's results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryEval {
    pub recall: f64,
    pub class_accuracy: f64,
    /// Natural log of the relative position error.
    pub log_rel_pos_error: f64,
    pub num_closer: f64,
    /// Some returned object ranked beyond the cached depth.
    pub beyond_depth: bool,
}

/// 1-based position of a returned object among the exact answers, capped at `depth + 1`.
fn position(gold: &GoldList, n: &Neighbor) -> usize {
    if let Some(i) = gold.entries.iter().position(|e| e.id == n.id) {
        return i + 1;
    }
    let closer = gold
        .entries
        .partition_point(|e| e.dist.total_cmp(&n.dist.0).then(e.id.cmp(&n.id)).is_lt());
    closer + 1
}

/// Majority label of the results; ties go to the smallest label.
pub fn majority_label(labels: impl IntoIterator<Item = LabelType>) -> Option<LabelType> {
    let mut v: Vec<LabelType> = labels.into_iter().collect();
    v.sort_unstable();
    let mut best: Option<(usize, LabelType)> = None;
    for chunk in v.chunk_by(|a, b| a == b) {
        if best.is_none_or(|(c, _)| chunk.len() > c) {
            best = Some((chunk.len(), chunk[0]));
        }
    }
    best.map(|(_, l)| l)
}

/// Scores `results` (sorted by `(dist, id)`) for a query with label `query_label`.
pub fn evaluate(
    results: &[Neighbor],
    gold: &GoldList,
    qt: QueryType,
    data: &DataSet,
    query_label: LabelType,
) -> QueryEval {
    let answers = gold.answer_count(qt, data.len());
    let truth = &gold.entries[..answers];
    let recall = if answers == 0 {
        1.0
    } else {
        let hit = results.iter().filter(|n| truth.iter().any(|e| e.id == n.id)).count();
        hit as f64 / answers as f64
    };
    let depth = gold.entries.len();
    let positions: Vec<usize> = results.iter().map(|n| position(gold, n)).collect();
    let beyond_depth = positions.iter().any(|&p| p > depth);
    let (log_rel_pos_error, num_closer) = if positions.is_empty() {
        (0.0, answers as f64)
    } else {
        let sum: f64 = positions
            .iter()
            .enumerate()
            .map(|(i, &p)| (p as f64 / (i + 1) as f64).ln())
            .sum();
        (sum / positions.len() as f64, (positions[0] - 1) as f64)
    };
    let class_accuracy = match majority_label(results.iter().map(|n| data.get(n.id as usize).label())) {
        Some(l) if query_label != NO_LABEL && l == query_label => 1.0,
        _ => 0.0,
    };
    QueryEval {
        recall,
        class_accuracy,
        log_rel_pos_error,
        num_closer,
        beyond_depth,
    }
}

/// Fails if a returned distance is smaller than the exact distance at the same rank.
pub fn sanity_check(results: &[Neighbor], gold: &GoldList, query_no: usize) -> Result<()> {
    for (rank, (n, e)) in results.iter().zip(&gold.entries).enumerate() {
        let (approx, exact) = (n.dist.0, e.dist);
        let tol = 1e-6 * exact.abs().max(approx.abs());
        if approx < exact && exact - approx > tol {
            return Err(Error::Sanity(format!(
                "query {query_no}, rank {}: approximate result (id {}, dist {approx}) is closer than \
                 the exact answer (id {}, dist {exact}); the distance function or data changed \
                 since the exact answers were computed",
                rank + 1,
                n.id,
                e.id
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gold::GoldEntry;
    use simsearch_core::{create_space, DistType};

    fn gold(ids: &[u32]) -> GoldList {
        GoldList {
            entries: ids
                .iter()
                .enumerate()
                .map(|(i, &id)| GoldEntry {
                    id,
                    dist: i as f64 + 1.0,
                    label: 0,
                })
                .collect(),
        }
    }

    fn data(labels: &[i32]) -> DataSet {
        let s = create_space("l2", DistType::Double).unwrap();
        let recs = labels.iter().map(|&l| s.from_dense(0, l, &[0.0]).unwrap());
        DataSet::from_records("l2", recs)
    }

    fn hits(g: &GoldList, ids: &[u32]) -> Vec<Neighbor> {
        ids.iter()
            .map(|&id| {
                let d = g.entries.iter().find(|e| e.id == id).map_or(100.0, |e| e.dist);
                Neighbor::new(d, id)
            })
            .collect()
    }

    #[test]
    fn perfect_results() {
        let g = gold(&[1, 2, 3, 4, 5, 6]);
        let d = data(&[0; 10]);
        let e = evaluate(&hits(&g, &[1, 2, 3]), &g, QueryType::Knn(3), &d, 0);
        assert_eq!((e.recall, e.num_closer, e.log_rel_pos_error.exp()), (1.0, 0.0, 1.0));
        assert_eq!(e.class_accuracy, 1.0);
    }

    #[test]
    fn partial_recall_and_positions() {
        let g = gold(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let d = data(&[0; 10]);
        let e = evaluate(&hits(&g, &[1, 3, 7]), &g, QueryType::Knn(3), &d, 0);
        assert!((e.recall - 2.0 / 3.0).abs() < 1e-15);
        // positions (1, 4) at ranks (1, 2)
        let e = evaluate(&hits(&g, &[1, 4]), &g, QueryType::Knn(2), &d, 0);
        assert!((e.log_rel_pos_error.exp() - 2f64.sqrt()).abs() < 1e-12);
        let e = evaluate(&hits(&g, &[3, 4]), &g, QueryType::Knn(2), &d, 0);
        assert_eq!(e.num_closer, 2.0);
    }

    #[test]
    fn beyond_cached_depth_is_clamped() {
        let g = gold(&[1, 2, 3]);
        let d = data(&[0; 10]);
        let e = evaluate(&hits(&g, &[9]), &g, QueryType::Knn(1), &d, 0);
        assert!(e.beyond_depth);
        assert_eq!(e.num_closer, 3.0);
        assert!((e.log_rel_pos_error - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_results() {
        let g = gold(&[1, 2, 3]);
        let d = data(&[0; 10]);
        let e = evaluate(&[], &g, QueryType::Knn(2), &d, 0);
        assert_eq!((e.recall, e.num_closer, e.log_rel_pos_error, e.class_accuracy), (0.0, 2.0, 0.0, 0.0));
        let none = GoldList::default();
        let e = evaluate(&[], &none, QueryType::Range(0.5), &d, 0);
        assert_eq!(e.recall, 1.0);
    }

    #[test]
    fn majority_votes() {
        assert_eq!(majority_label([3, 1, 3, 1]), Some(1));
        assert_eq!(majority_label([2, 5, 5]), Some(5));
        assert_eq!(majority_label([]), None);
        let g = gold(&[0, 1, 2]);
        let d = data(&[4, 2, 2, 0]);
        assert_eq!(evaluate(&hits(&g, &[0, 1, 2]), &g, QueryType::Knn(3), &d, 2).class_accuracy, 1.0);
        assert_eq!(evaluate(&hits(&g, &[0, 1, 2]), &g, QueryType::Knn(3), &d, 4).class_accuracy, 0.0);
        assert_eq!(evaluate(&hits(&g, &[0, 1, 2]), &g, QueryType::Knn(3), &d, NO_LABEL).class_accuracy, 0.0);
    }

    #[test]
    fn sanity() {
        let g = gold(&[1, 2, 3]);
        assert!(sanity_check(&hits(&g, &[1, 2, 3]), &g, 0).is_ok());
        // missing answers with larger distances are fine
        assert!(sanity_check(&[Neighbor::new(2.0, 2), Neighbor::new(5.0, 9)], &g, 0).is_ok());
        assert!(sanity_check(&[Neighbor::new(1.0 - 1e-9, 1)], &g, 0).is_ok());
        assert!(matches!(sanity_check(&[Neighbor::new(0.5, 1)], &g, 0), Err(Error::Sanity(_))));
    }
}
