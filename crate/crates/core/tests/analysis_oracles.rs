use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use zampling::analysis::montecarlo::{
    mc_cherrypick, mc_column_load, mc_empty_fraction, mc_nonzero_fraction, mc_zonotope_area,
};
use zampling::analysis::{
    cherrypick_bracket, empty_subset_moment, expected_empty_fraction, expected_nonzero_weights, prob_k_empty_columns,
    zonotope_volume_exact_2d, zonotope_volume_expected, ZonotopeSpec,
};
use zampling::{Exec, SeedSpec};

/// Every `d`-subset of `0..n` as a bitmask.
fn subsets(n: usize, d: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|s| s.count_ones() as usize == d).collect()
}

/// Distribution of the number of empty columns over all `C(n,d)^m`
/// equally likely sparsity patterns.
fn enumerate_empty_counts(n: usize, d: usize, m: usize) -> Vec<f64> {
    let rows = subsets(n, d);
    let mut counts = vec![0u64; n + 1];
    fn recurse(rows: &[u32], left: usize, covered: u32, n: usize, counts: &mut [u64]) {
        if left == 0 {
            counts[n - covered.count_ones() as usize] += 1;
            return;
        }
        for &r in rows {
            recurse(rows, left - 1, covered | r, n, counts);
        }
    }
    recurse(&rows, m, 0, n, &mut counts);
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn exact_empty_probability_matches_enumeration() {
    for n in 1..=6 {
        for d in 1..=n {
            for m in 1..=4 {
                let truth = enumerate_empty_counts(n, d, m);
                let mut total = 0.0;
                for (k, &want) in truth.iter().enumerate() {
                    let got = prob_k_empty_columns(n, k, d, m).unwrap();
                    assert!((got - want).abs() < 1e-12, "n={n} d={d} m={m} k={k}: {got} vs {want}");
                    total += got;
                }
                assert!(total <= 1.0 + 1e-9 && total > 1.0 - 1e-9, "sum {total}");
            }
        }
    }
}

#[test]
fn literal_expression_is_the_binomial_moment_of_empty_columns() {
    for n in 1..=6 {
        for d in 1..=n {
            for m in 1..=4 {
                let truth = enumerate_empty_counts(n, d, m);
                for k in 0..=n {
                    let moment: f64 = truth.iter().enumerate().map(|(e, &p)| p * binomial(e, k)).sum();
                    let got = empty_subset_moment(n, k, d, m).unwrap();
                    assert!(
                        (got - moment).abs() < 1e-12,
                        "n={n} d={d} m={m} k={k}: {got} vs {moment}"
                    );
                }
            }
        }
    }
}

#[test]
fn literal_expression_is_not_a_distribution() {
    // n=4, d=2, m=2: the literal values over k sum to E[2^#empty] = 2.1666...
    let total: f64 = (0..=4).map(|k| empty_subset_moment(4, k, 2, 2).unwrap()).sum();
    assert!((total - 78.0 / 36.0).abs() < 1e-12, "{total}");
}

#[test]
fn nonzero_fraction_simulation() {
    let est = mc_nonzero_fraction(Exec::default(), 2000, 2000, 3, 50, SeedSpec::new(1)).unwrap();
    let target = expected_nonzero_weights(2000, 3) / 2000.0;
    assert!((est.mean / target - 1.0).abs() < 0.02, "{} vs {target}", est.mean);
}

#[test]
fn empty_fraction_simulation() {
    let est = mc_empty_fraction(Exec::default(), 500, 2, 500, 100, SeedSpec::new(3)).unwrap();
    let target = expected_empty_fraction(500, 2, 500).unwrap();
    assert!(est.within(target, 3.0), "{} ± {} vs {target}", est.mean, est.std_err);
}

#[test]
fn empty_fraction_limit() {
    for d in 1..=5 {
        let f = expected_empty_fraction(10_000, d, 10_000).unwrap();
        let limit = (-(d as f64)).exp();
        assert!((f / limit - 1.0).abs() < 0.02, "d={d}");
    }
}

#[test]
fn column_loads_are_binomial() {
    let (m, n, d) = (10_000, 1000, 5);
    let est = mc_column_load(Exec::default(), m, n, d, 20, SeedSpec::new(4)).unwrap();
    assert!((est.mean / 50.0 - 1.0).abs() < 0.01);
    let q = d as f64 / n as f64;
    let var = m as f64 * q * (1.0 - q);
    assert!((est.variance / var - 1.0).abs() < 0.05, "{} vs {var}", est.variance);
}

#[test]
fn cherrypick_stays_in_bracket() {
    for (d, seed) in [(1, 10), (10, 11), (100, 12)] {
        let est = mc_cherrypick(Exec::default(), d, 100, 1000, 1000, SeedSpec::new(seed)).unwrap();
        let (lo, hi) = cherrypick_bracket(d, 100);
        let slack = 3.0 * est.std_err;
        assert!(
            est.mean >= lo - slack && est.mean <= hi + slack,
            "d={d}: {} not in [{lo}, {hi}]",
            est.mean
        );
    }
}

#[test]
fn cherrypick_grows_like_root_d() {
    let means: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&d| {
            mc_cherrypick(Exec::default(), d, 100, 1000, 4000, SeedSpec::new(d as u64))
                .unwrap()
                .mean
        })
        .collect();
    for w in means.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.10, "ratio {ratio}");
    }
}

#[test]
fn one_dimensional_volume_matches_half_normal_mean() {
    let spec = ZonotopeSpec::new(1, 1, vec![1]).unwrap();
    assert!((zonotope_volume_expected(&spec) - (12.0 / std::f64::consts::PI).sqrt()).abs() < 1e-6);
}

#[test]
fn determinant_oracle_for_dense_plane() {
    // E|det| of a 2×2 matrix with N(0, 1.5) entries, sampled independently
    // of the crate's generators.
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let sd = 1.5f64.sqrt();
    let draws = 1_000_000;
    let mut total = 0.0;
    for _ in 0..draws {
        let e: [f64; 4] = std::array::from_fn(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            sd * x
        });
        total += (e[0] * e[3] - e[1] * e[2]).abs();
    }
    let mean = total / draws as f64;
    let spec = ZonotopeSpec::new(2, 2, vec![2, 2]).unwrap();
    assert!((mean / zonotope_volume_expected(&spec) - 1.0).abs() < 0.01, "{mean}");
}

#[test]
fn generated_planar_zonotopes_match_the_volume_formula() {
    let est = mc_zonotope_area(Exec::default(), [2, 2], 2, 100_000, SeedSpec::new(6)).unwrap();
    let spec = ZonotopeSpec::new(2, 2, vec![2, 2]).unwrap();
    assert!(
        (est.mean / zonotope_volume_expected(&spec) - 1.0).abs() < 0.02,
        "{}",
        est.mean
    );
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Area of the convex hull of all subset sums of the generators.
fn hull_area(gens: &[[f64; 2]]) -> f64 {
    let mut pts: Vec<[f64; 2]> = (0u32..1 << gens.len())
        .map(|mask| {
            gens.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold([0.0, 0.0], |acc, (_, g)| [acc[0] + g[0], acc[1] + g[1]])
        })
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let k = hull.len();
    (0..k)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % k]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

#[test]
fn hull_oracle_on_spec_examples() {
    assert!((hull_area(&[[1.0, 0.0], [0.0, 1.0]]) - 1.0).abs() < 1e-12);
    assert!((hull_area(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]) - 3.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn planar_area_matches_hull_of_vertices(
        gens in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..9)
    ) {
        let gens: Vec<[f64; 2]> = gens.into_iter().map(|(x, y)| [x, y]).collect();
        let exact = zonotope_volume_exact_2d(&gens);
        let hull = hull_area(&gens);
        prop_assert!((exact - hull).abs() <= 1e-9 * exact.max(1.0), "{} vs {}", exact, hull);
    }
}
