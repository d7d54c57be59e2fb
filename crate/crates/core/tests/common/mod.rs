//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the code under test except to
//! read or write plain parameter values.

#![allow(dead_code)]

use std::collections::BTreeMap;

use conceptvec::boc::SparseBoc;
use conceptvec::embeddings::{EmbeddingStore, Matrix};
use rand::Rng;

/// Straight-line negative-sampling objective on plain nested vectors.
pub fn objective(
    input: &[Vec<f64>],
    output: &[Vec<f64>],
    t: usize,
    c: usize,
    negs: &[usize],
) -> f64 {
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let log_sig = |x: f64| -> f64 { -(1.0 + (-x).exp()).ln() };
    let mut total = log_sig(dot(&output[c], &input[t]));
    for &n in negs {
        total += log_sig(-dot(&output[n], &input[t]));
    }
    total
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

pub fn store_f64(input: &[Vec<f64>], output: &[Vec<f64>]) -> EmbeddingStore<f64> {
    let rows = input.len();
    let dim = input[0].len();
    let keys = (0..rows).map(|i| format!("k{i}")).collect();
    let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<_>>();
    EmbeddingStore::new(
        keys,
        Matrix::from_vec(rows, dim, flat(input)).unwrap(),
        Some(Matrix::from_vec(rows, dim, flat(output)).unwrap()),
    )
    .unwrap()
}

/// Central finite-difference gradient of [`objective`] with respect to the
/// target input row and every touched output row.
pub fn numeric_gradient(
    input: &[Vec<f64>],
    output: &[Vec<f64>],
    t: usize,
    c: usize,
    negs: &[usize],
    h: f64,
) -> (Vec<f64>, BTreeMap<usize, Vec<f64>>) {
    let dim = input[0].len();
    let mut inp = input.to_vec();
    let mut out = output.to_vec();
    let mut grad_u = vec![0.0; dim];
    for k in 0..dim {
        let orig = inp[t][k];
        inp[t][k] = orig + h;
        let plus = objective(&inp, &out, t, c, negs);
        inp[t][k] = orig - h;
        let minus = objective(&inp, &out, t, c, negs);
        inp[t][k] = orig;
        grad_u[k] = (plus - minus) / (2.0 * h);
    }
    let mut rows = BTreeMap::new();
    for &r in std::iter::once(&c).chain(negs) {
        if rows.contains_key(&r) {
            continue;
        }
        let mut g = vec![0.0; dim];
        for (k, gk) in g.iter_mut().enumerate() {
            let orig = out[r][k];
            out[r][k] = orig + h;
            let plus = objective(&inp, &out, t, c, negs);
            out[r][k] = orig - h;
            let minus = objective(&inp, &out, t, c, negs);
            out[r][k] = orig;
            *gk = (plus - minus) / (2.0 * h);
        }
        rows.insert(r, g);
    }
    (grad_u, rows)
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)` over concatenated vectors.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Best total weight over all injective row-to-column maps (or the
/// transpose when rows outnumber columns).
pub fn brute_force_assignment(w: &[Vec<f64>]) -> f64 {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    if rows > cols {
        let t: Vec<Vec<f64>> = (0..cols)
            .map(|j| (0..rows).map(|i| w[i][j]).collect())
            .collect();
        return brute_force_assignment(&t);
    }
    fn go(w: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == w.len() {
            *best = best.max(acc);
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(w, row + 1, used, acc + w[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(w, 0, &mut vec![false; cols], 0.0, &mut best);
    if rows == 0 {
        0.0
    } else {
        best
    }
}

/// Cosine after scattering both BOCs into a dense vector over the union of
/// their concept ids.
pub fn scattered_cosine(u: &SparseBoc, v: &SparseBoc) -> f64 {
    let mut ids: Vec<&str> = u
        .entries()
        .iter()
        .chain(v.entries())
        .map(|(c, _)| c.as_str())
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let scatter = |b: &SparseBoc| -> Vec<f64> {
        let mut x = vec![0.0; ids.len()];
        for (c, w) in b.entries() {
            x[ids.binary_search(&c.as_str()).unwrap()] = *w;
        }
        x
    };
    let (a, b) = (scatter(u), scatter(v));
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn random_boc(rng: &mut impl Rng, universe: usize, max_len: usize) -> SparseBoc {
    let len = rng.random_range(1..=max_len.min(universe));
    let ids = rand::seq::index::sample(rng, universe, len);
    SparseBoc::new(
        ids.into_iter()
            .map(|i| (format!("c{i}"), rng.random_range(0.001..100.0)))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

/// Binary-gain nDCG@k computed position by position.
pub fn naive_ndcg(ranked: &[bool], k: usize) -> f64 {
    let mut dcg = 0.0;
    for (pos, &rel) in ranked.iter().enumerate() {
        let rank = pos + 1;
        if rank > k {
            break;
        }
        if rel {
            dcg += 1.0 / (rank as f64 + 1.0).log2();
        }
    }
    let mut ideal_list = ranked.to_vec();
    ideal_list.sort_by(|a, b| b.cmp(a));
    let mut idcg = 0.0;
    for (pos, &rel) in ideal_list.iter().enumerate() {
        let rank = pos + 1;
        if rank > k {
            break;
        }
        if rel {
            idcg += 1.0 / (rank as f64 + 1.0).log2();
        }
    }
    dcg / idcg
}

/// AP as the mean of precision@r over the ranks r of related items.
pub fn naive_ap(ranked: &[bool]) -> f64 {
    let precisions: Vec<f64> = (0..ranked.len())
        .filter(|&r| ranked[r])
        .map(|r| ranked[..=r].iter().filter(|&&x| x).count() as f64 / (r + 1) as f64)
        .collect();
    precisions.iter().sum::<f64>() / precisions.len() as f64
}

/// Mean cosine between concept embeddings of the same cluster and of
/// different clusters.
pub fn cluster_cosines<F>(rows: &[(usize, Vec<F>)]) -> (f64, f64)
where
    F: Copy + Into<f64>,
{
    let cos = |a: &[F], b: &[F]| -> f64 {
        let a: Vec<f64> = a.iter().map(|&x| x.into()).collect();
        let b: Vec<f64> = b.iter().map(|&x| x.into()).collect();
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        dot / (a.iter().map(|x| x * x).sum::<f64>().sqrt()
            * b.iter().map(|x| x * x).sum::<f64>().sqrt())
    };
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let c = cos(&rows[i].1, &rows[j].1);
            if rows[i].0 == rows[j].0 {
                intra += c;
                ni += 1;
            } else {
                inter += c;
                nx += 1;
            }
        }
    }
    (intra / ni as f64, inter / nx as f64)
}

/// Token totals of a corpus file counted line by line with regular
/// expressions: `(words + mentions, mentions)`.
pub fn count_corpus_tokens(text: &str) -> (usize, usize) {
    let mention = regex::Regex::new(r"\[\[[^\]|]+(\|[^\]]*)?\]\]").unwrap();
    let word = regex::Regex::new(r"[\p{L}\p{N}]").unwrap();
    let (mut words, mut mentions) = (0, 0);
    for line in text.lines() {
        if line.starts_with("#doc ") {
            continue;
        }
        let line = line.replace("\\[", "");
        mentions += mention.find_iter(&line).count();
        let rest = mention.replace_all(&line, " ");
        words += rest.split_whitespace().filter(|w| word.is_match(w)).count();
    }
    (words + mentions, mentions)
}
