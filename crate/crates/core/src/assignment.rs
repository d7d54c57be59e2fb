//! Maximum-weight one-to-one assignment (Hungarian method, O(n²m)).

/// A one-to-one matching between rows and columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `(row, column)` pairs sorted by row. Every row of the smaller side is
    /// matched; no row or column appears twice.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of the matched weights, accumulated in row order.
    pub total: f64,
}

/// Finds a matching maximizing the total weight. Rectangular inputs behave
/// as if the smaller side were padded with zero-weight dummies; dummy
/// matches are not reported.
///
/// # Panics
///
/// If rows have different lengths.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Assignment {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    assert!(
        weights.iter().all(|r| r.len() == cols),
        "ragged weight matrix"
    );
    if rows == 0 || cols == 0 {
        return Assignment {
            pairs: Vec::new(),
            total: 0.0,
        };
    }

    let pairs = if rows <= cols {
        solve(rows, cols, |i, j| -weights[i][j])
    } else {
        let mut t: Vec<(usize, usize)> = solve(cols, rows, |i, j| -weights[j][i])
            .into_iter()
            .map(|(c, r)| (r, c))
            .collect();
        t.sort_unstable();
        t
    };
    let total = pairs.iter().map(|&(i, j)| weights[i][j]).sum();
    Assignment { pairs, total }
}

/// Minimum-cost assignment of `n` rows into `m >= n` columns. Returns the
/// `(row, column)` pairs sorted by row.
fn solve(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    // Potentials and matching are 1-indexed; index 0 is a sentinel.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut matched_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut min_slack = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < min_slack[j] {
                        min_slack[j] = cur;
                        way[j] = j0;
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| matched_row[j] != 0)
        .map(|j| (matched_row[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    pairs
}
