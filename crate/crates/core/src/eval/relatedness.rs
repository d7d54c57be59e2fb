//! Entity relatedness as a ranking task: each query entity has candidates
//! labeled related or unrelated, ranked by embedding cosine and scored with
//! binary-gain nDCG@k and MAP.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::BufRead;

use rayon::prelude::*;

use super::report::{EvalReport, ReportRow};
use crate::densify::{vector_cosine, RowSource};
use crate::embeddings::Real;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RelatednessQuery {
    pub query: String,
    /// `(concept_id, related)` pairs.
    pub candidates: Vec<(String, bool)>,
}

impl RelatednessQuery {
    pub fn has_related(&self) -> bool {
        self.candidates.iter().any(|(_, r)| *r)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedCandidate {
    pub concept_id: String,
    pub related: bool,
    /// Cosine to the query; `None` when the candidate has no embedding.
    /// Zero rows score -1.
    pub score: Option<f64>,
}

/// Orders candidates by descending cosine to the query. Candidates without
/// an embedding score -1; ties fall back to ascending concept id. Returns
/// `None` when the query entity itself has no embedding.
pub fn rank_candidates<F: Real, S: RowSource<F> + ?Sized>(
    query: &RelatednessQuery,
    rows: &S,
) -> Option<Vec<RankedCandidate>> {
    let q = rows.concept_row(&query.query)?;
    let mut ranked: Vec<RankedCandidate> = query
        .candidates
        .iter()
        .map(|(c, related)| RankedCandidate {
            concept_id: c.clone(),
            related: *related,
            score: rows
                .concept_row(c)
                .map(|r| vector_cosine(q, r).unwrap_or(-1.0)),
        })
        .collect();
    ranked.sort_by(|a, b| {
        let (x, y) = (a.score.unwrap_or(-1.0), b.score.unwrap_or(-1.0));
        y.partial_cmp(&x)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.concept_id.cmp(&b.concept_id))
    });
    Some(ranked)
}

/// Binary-gain nDCG@k of a ranked relevance list. `None` without any
/// related item.
pub fn ndcg_at_k(ranked: &[bool], k: usize) -> Option<f64> {
    let relevant = ranked.iter().filter(|&&r| r).count();
    if relevant == 0 || k == 0 {
        return None;
    }
    let discount = |i: usize| 1.0 / ((i + 2) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, &r)| r)
        .map(|(i, _)| discount(i))
        .sum();
    let ideal: f64 = (0..k.min(relevant)).map(discount).sum();
    Some(dcg / ideal)
}

/// Mean of the precision at each related item's rank.
pub fn average_precision(ranked: &[bool]) -> Option<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &r) in ranked.iter().enumerate() {
        if r {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    (hits > 0).then(|| sum / hits as f64)
}

/// Mean AP over the rankings that contain a related item.
pub fn mean_average_precision<R: AsRef<[bool]>>(rankings: &[R]) -> Option<f64> {
    let aps: Vec<f64> = rankings
        .iter()
        .filter_map(|r| average_precision(r.as_ref()))
        .collect();
    (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelatednessReport {
    /// `(k, mean nDCG@k)` pairs.
    pub ndcg: Vec<(usize, f64)>,
    pub map: f64,
    pub scored: usize,
    /// Queries whose entity has no embedding.
    pub skipped_missing_query: usize,
    /// Queries with no related candidate.
    pub skipped_no_related: usize,
    /// Candidates (over scored queries) without an embedding.
    pub missing_candidates: usize,
}

impl RelatednessReport {
    pub fn to_report(&self, strategy: &str) -> EvalReport {
        let mut report = EvalReport::default();
        for &(k, v) in &self.ndcg {
            report
                .rows
                .push(ReportRow::new("ndcg", strategy, Some(k), v));
        }
        report
            .rows
            .push(ReportRow::new("map", strategy, None, self.map));
        report.counts = vec![
            ("queries_scored".into(), self.scored),
            ("queries_missing_entity".into(), self.skipped_missing_query),
            ("queries_without_related".into(), self.skipped_no_related),
            ("candidates_missing".into(), self.missing_candidates),
        ];
        report
    }
}

/// Ranks every query and averages nDCG@k for each `k` and MAP over the
/// scoreable queries.
pub fn evaluate_relatedness<F, S>(
    queries: &[RelatednessQuery],
    rows: &S,
    ks: &[usize],
) -> Result<RelatednessReport>
where
    F: Real,
    S: RowSource<F> + Sync + ?Sized,
{
    if ks.contains(&0) {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let outcomes: Vec<Option<Vec<RankedCandidate>>> = queries
        .par_iter()
        .map(|q| {
            if q.has_related() {
                rank_candidates(q, rows)
            } else {
                None
            }
        })
        .collect();

    let mut report = RelatednessReport {
        ndcg: Vec::new(),
        map: 0.0,
        scored: 0,
        skipped_missing_query: 0,
        skipped_no_related: 0,
        missing_candidates: 0,
    };
    let mut rankings: Vec<Vec<bool>> = Vec::new();
    for (q, outcome) in queries.iter().zip(outcomes) {
        match outcome {
            _ if !q.has_related() => report.skipped_no_related += 1,
            None => report.skipped_missing_query += 1,
            Some(ranked) => {
                report.missing_candidates += ranked.iter().filter(|c| c.score.is_none()).count();
                rankings.push(ranked.iter().map(|c| c.related).collect());
            }
        }
    }
    report.scored = rankings.len();
    if rankings.is_empty() {
        return Err(Error::Config("no scoreable relatedness query".into()));
    }
    let n = rankings.len() as f64;
    report.ndcg = ks
        .iter()
        .map(|&k| {
            (
                k,
                rankings.iter().filter_map(|r| ndcg_at_k(r, k)).sum::<f64>() / n,
            )
        })
        .collect();
    report.map = mean_average_precision(&rankings).unwrap_or(0.0);
    Ok(report)
}

/// Reads `query_id<TAB>candidate_id<TAB>label(0|1)` lines. Queries keep the
/// order of first appearance; candidates keep file order.
pub fn read_relatedness_tsv<R: BufRead>(
    reader: R,
    source_name: &str,
) -> Result<Vec<RelatednessQuery>> {
    let mut queries: Vec<RelatednessQuery> = Vec::new();
    let mut position: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let related = match cols.as_slice() {
            [_, _, "1"] => true,
            [_, _, "0"] => false,
            _ => {
                return Err(Error::format(
                    source_name,
                    idx + 1,
                    "expected `query_id<TAB>candidate_id<TAB>0|1`",
                ))
            }
        };
        let slot = *position.entry(cols[0].to_owned()).or_insert_with(|| {
            queries.push(RelatednessQuery {
                query: cols[0].to_owned(),
                candidates: Vec::new(),
            });
            queries.len() - 1
        });
        queries[slot].candidates.push((cols[1].to_owned(), related));
    }
    Ok(queries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{EmbeddingStore, Matrix};
    use crate::vocab::concept_key;

    fn store(rows: &[(&str, [f32; 2])]) -> EmbeddingStore {
        let keys = rows.iter().map(|(k, _)| concept_key(k)).collect();
        let data = rows.iter().flat_map(|(_, r)| r.iter().copied()).collect();
        EmbeddingStore::new(keys, Matrix::from_vec(rows.len(), 2, data).unwrap(), None).unwrap()
    }

    fn query(q: &str, cands: &[(&str, bool)]) -> RelatednessQuery {
        RelatednessQuery {
            query: q.into(),
            candidates: cands.iter().map(|(c, r)| (c.to_string(), *r)).collect(),
        }
    }

    #[test]
    fn identical_candidates_fall_back_to_id_order() {
        let s = store(&[
            ("q", [1.0, 1.0]),
            ("b", [1.0, 1.0]),
            ("a", [2.0, 2.0]),
            ("c", [0.5, 0.5]),
        ]);
        let ranked =
            rank_candidates(&query("q", &[("b", true), ("c", false), ("a", false)]), &s).unwrap();
        let ids: Vec<_> = ranked.iter().map(|c| c.concept_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn related_ranks_first() {
        let s = store(&[("q", [1.0, 0.0]), ("r", [1.0, 0.0]), ("u", [0.0, 1.0])]);
        let ranked = rank_candidates(&query("q", &[("u", false), ("r", true)]), &s).unwrap();
        assert_eq!(ranked[0].concept_id, "r");
    }

    #[test]
    fn missing_candidates_rank_last_and_missing_query_skips() {
        let s = store(&[("q", [1.0, 0.0]), ("u", [-0.5, 0.5])]);
        let ranked = rank_candidates(&query("q", &[("zz", true), ("u", false)]), &s).unwrap();
        assert_eq!(ranked[1].concept_id, "zz");
        assert!(ranked[1].score.is_none());
        assert!(rank_candidates(&query("nope", &[("u", true)]), &s).is_none());
    }

    #[test]
    fn ndcg_cases() {
        for k in 1..5 {
            assert_eq!(ndcg_at_k(&[true, true, false], k), Some(1.0));
        }
        let v = ndcg_at_k(&[false, true], 2).unwrap();
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((v - 0.63093).abs() < 1e-5);
        assert_eq!(ndcg_at_k(&[true, false], 1), Some(1.0));
        assert_eq!(ndcg_at_k(&[false, true], 1), Some(0.0));
        assert_eq!(ndcg_at_k(&[false, false], 3), None);
    }

    #[test]
    fn ap_cases() {
        let ap = average_precision(&[true, false, true]).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(average_precision(&[false, true]), Some(0.5));
        assert_eq!(
            mean_average_precision(&[vec![true, false], vec![true, true, false]]),
            Some(1.0)
        );
        assert_eq!(mean_average_precision(&[vec![false]]), None);
    }

    #[test]
    fn evaluation_skips() {
        let s = store(&[("q", [1.0, 0.0]), ("r", [1.0, 0.1]), ("u", [0.0, 1.0])]);
        let queries = vec![
            query("q", &[("u", false), ("r", true)]),
            query("missing", &[("r", true)]),
            query("q", &[("u", false)]),
        ];
        let report = evaluate_relatedness(&queries, &s, &[1, 5, 10]).unwrap();
        assert_eq!(report.scored, 1);
        assert_eq!(report.skipped_missing_query, 1);
        assert_eq!(report.skipped_no_related, 1);
        assert_eq!(report.ndcg, vec![(1, 1.0), (5, 1.0), (10, 1.0)]);
        assert_eq!(report.map, 1.0);
    }

    #[test]
    fn tsv() {
        let text = "q1\ta\t1\nq1\tb\t0\nq2\tc\t1\nq1\td\t0\n";
        let queries = read_relatedness_tsv(text.as_bytes(), "r").unwrap();
        assert_eq!(queries.len(), 2);
        assert_eq!(queries[0].candidates.len(), 3);
        assert!(read_relatedness_tsv("q\ta\t2\n".as_bytes(), "r").is_err());
    }
}
