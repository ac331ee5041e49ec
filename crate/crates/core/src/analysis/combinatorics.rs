//! Closed forms for the sparsity pattern of `Q`, evaluated in log space.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `ln C(n, k)`; negative infinity when `k > n`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn check_degree(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyShape { rows: 0, cols: n });
    }
    if d == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    if d > n {
        return Err(Error::InvalidDegree { degree: d, cols: n });
    }
    Ok(())
}

/// Expected count of nonzero entries of `w = Q·z` when every row has `d`
/// entries and `z` is Bernoulli with uniformly random probabilities:
/// `m(1 − 2^{-d})`.
pub fn expected_nonzero_weights(m: usize, d: usize) -> f64 {
    m as f64 * (1.0 - 0.5f64.powi(d.min(i32::MAX as usize) as i32))
}

/// Probability that exactly `k` of the `n` columns are empty when each of
/// `m` rows picks `d` distinct columns uniformly at random.
///
/// Computed by a forward recursion on the number of covered columns: a new
/// row that already sees `c` covered columns adds `j` new ones with the
/// hypergeometric probability `C(n−c, j)·C(c, d−j)/C(n, d)`. Cost is
/// `O(m·n·d)`.
pub fn prob_k_empty_columns(n: usize, k: usize, d: usize, m: usize) -> Result<f64> {
    check_degree(n, d)?;
    if k > n {
        return Ok(0.0);
    }
    let dist = covered_distribution(n, d, m);
    Ok(dist[n - k])
}

/// Distribution of the number of covered columns after `m` rows; index `c`
/// holds `P(c columns covered)`.
pub fn covered_distribution(n: usize, d: usize, m: usize) -> Vec<f64> {
    let mut dist = vec![0.0; n + 1];
    dist[0] = 1.0;
    let ln_total = ln_choose(n, d);
    // transition[c][j] would be quadratic in memory; recompute per row.
    for _ in 0..m {
        let mut next = vec![0.0; n + 1];
        for (c, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let lo = d.saturating_sub(c);
            let hi = d.min(n - c);
            for j in lo..=hi {
                let ln_p = ln_choose(n - c, j) + ln_choose(c, d - j) - ln_total;
                next[c + j] += mass * ln_p.exp();
            }
        }
        dist = next;
    }
    dist
}

/// The literal expression `C(n,k)·C(n−k,d)^m / C(n,d)^m`.
///
/// It sums, over every set of `k` columns, the probability that the whole
/// set is empty, so it equals `E[C(#empty, k)]`. It coincides with the
/// exact-`k` probability only when at most `k` columns can be empty (for
/// instance `n=2, d=1, m=1`). For `n=4, d=2, m=2, k=1` it evaluates to 1
/// while `P(exactly one empty column) = 2/3`.
pub fn empty_subset_moment(n: usize, k: usize, d: usize, m: usize) -> Result<f64> {
    check_degree(n, d)?;
    if k > n {
        return Ok(0.0);
    }
    if m == 0 {
        return Ok(ln_choose(n, k).exp());
    }
    if k > n - d {
        return Ok(0.0);
    }
    let ln = ln_choose(n, k) + m as f64 * (ln_choose(n - k, d) - ln_choose(n, d));
    Ok(ln.exp())
}

/// Expected fraction of empty columns, `((n−d)/n)^m`.
pub fn expected_empty_fraction(n: usize, d: usize, m: usize) -> Result<f64> {
    check_degree(n, d)?;
    if d == n {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    Ok((m as f64 * (-(d as f64) / n as f64).ln_1p()).exp())
}

/// Expected number of stored entries per column, `md/n`.
pub fn expected_column_load(m: usize, n: usize, d: usize) -> Result<f64> {
    check_degree(n, d)?;
    Ok(m as f64 * d as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nonzero_weights() {
        assert_eq!(expected_nonzero_weights(100, 1), 50.0);
        assert_eq!(expected_nonzero_weights(2000, 3), 1750.0);
        assert!((expected_nonzero_weights(1000, 30) - 1000.0).abs() < 1e-6);
        assert_eq!(expected_nonzero_weights(0, 4), 0.0);
    }

    #[test]
    fn ln_choose_small_values() {
        assert_relative_eq!(ln_choose(4, 2).exp(), 6.0, max_relative = 1e-13);
        assert_relative_eq!(ln_choose(52, 5).exp(), 2_598_960.0, max_relative = 1e-12);
        assert_eq!(ln_choose(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn single_row_single_column() {
        assert_relative_eq!(prob_k_empty_columns(2, 1, 1, 1).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(empty_subset_moment(2, 1, 1, 1).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_and_literal_readings_differ() {
        // 36 equally likely pairs of rows; 24 of them leave one column
        // empty, 6 leave two empty and 6 leave none.
        assert_relative_eq!(prob_k_empty_columns(4, 1, 2, 2).unwrap(), 24.0 / 36.0, epsilon = 1e-14);
        assert_relative_eq!(prob_k_empty_columns(4, 2, 2, 2).unwrap(), 6.0 / 36.0, epsilon = 1e-14);
        assert_relative_eq!(prob_k_empty_columns(4, 0, 2, 2).unwrap(), 6.0 / 36.0, epsilon = 1e-14);
        assert_relative_eq!(empty_subset_moment(4, 1, 2, 2).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn full_degree_leaves_nothing_empty() {
        for k in 1..=5 {
            assert_eq!(prob_k_empty_columns(5, k, 5, 3).unwrap(), 0.0);
            assert_eq!(empty_subset_moment(5, k, 5, 3).unwrap(), 0.0);
        }
        assert_relative_eq!(prob_k_empty_columns(5, 0, 5, 3).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn beyond_support_is_zero() {
        assert_eq!(prob_k_empty_columns(6, 5, 2, 3).unwrap(), 0.0);
        assert_eq!(prob_k_empty_columns(6, 9, 2, 3).unwrap(), 0.0);
        assert_eq!(empty_subset_moment(6, 5, 2, 3).unwrap(), 0.0);
    }

    #[test]
    fn no_rows_means_all_empty() {
        assert_eq!(prob_k_empty_columns(4, 4, 2, 0).unwrap(), 1.0);
        assert_eq!(expected_empty_fraction(4, 2, 0).unwrap(), 1.0);
    }

    #[test]
    fn distribution_sums_to_one_for_large_n() {
        let total: f64 = covered_distribution(300, 3, 300).iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn empty_fraction_limits() {
        assert_relative_eq!(
            expected_empty_fraction(100_000, 1, 100_000).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-4
        );
        let f = expected_empty_fraction(266_610, 10, 266_610).unwrap();
        assert!((f - 4.5e-5).abs() < 1e-6, "{f}");
        assert_eq!(expected_empty_fraction(7, 7, 2).unwrap(), 0.0);
    }

    #[test]
    fn column_load() {
        assert_eq!(expected_column_load(50, 50, 1).unwrap(), 1.0);
        assert_relative_eq!(
            expected_column_load(266_610, 266_610 / 32, 10).unwrap(),
            320.0,
            max_relative = 1e-3
        );
    }

    #[test]
    fn invalid_degree() {
        assert!(matches!(
            prob_k_empty_columns(3, 0, 4, 1),
            Err(Error::InvalidDegree { .. })
        ));
        assert!(expected_column_load(5, 0, 1).is_err());
        assert!(expected_empty_fraction(5, 0, 1).is_err());
    }
}
