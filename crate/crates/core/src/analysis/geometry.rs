//! Zonotopes spanned by the columns of `Q`, and the cherry-picked row bound.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::influence::InfluenceMatrix;
use crate::trainer::ProbVector;

/// Square zonotope `{Q·p : p ∈ [0,1]ⁿ}` with `n` generators in `ℝⁿ`, each
/// row of `Q` holding `d` entries of variance `6/(d·n_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZonotopeSpec {
    n: usize,
    degree: usize,
    fan_ins: Vec<usize>,
}

impl ZonotopeSpec {
    pub fn new(n: usize, degree: usize, fan_ins: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyShape { rows: n, cols: n });
        }
        if degree == 0 || degree > n {
            return Err(Error::InvalidDegree { degree, cols: n });
        }
        if fan_ins.len() != n {
            return Err(Error::dim("zonotope fan-ins", n, fan_ins.len()));
        }
        if fan_ins.contains(&0) {
            return Err(Error::InvalidParameter("fan-ins must be positive".into()));
        }
        Ok(ZonotopeSpec { n, degree, fan_ins })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn fan_ins(&self) -> &[usize] {
        &self.fan_ins
    }
}

/// Natural log of the expected volume,
/// `ln n! + (n/2)·ln(3/d) − ln Γ(1 + n/2) − ½·Σ ln n_i`.
pub fn ln_zonotope_volume_expected(spec: &ZonotopeSpec) -> f64 {
    let n = spec.n as f64;
    ln_gamma(n + 1.0) + 0.5 * n * (3.0 / spec.degree as f64).ln()
        - ln_gamma(1.0 + 0.5 * n)
        - 0.5 * spec.fan_ins.iter().map(|&f| (f as f64).ln()).sum::<f64>()
}

/// Expected volume for Gaussian generators; `+∞` if it exceeds `f64`.
pub fn zonotope_volume_expected(spec: &ZonotopeSpec) -> f64 {
    ln_zonotope_volume_expected(spec).exp()
}

/// Area of the planar zonotope `Σ [0,1]·g_i`: `Σ_{i<j} |det(g_i, g_j)|`.
pub fn zonotope_volume_exact_2d(generators: &[[f64; 2]]) -> f64 {
    let mut area = 0.0;
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            area += (a[0] * b[1] - a[1] * b[0]).abs();
        }
    }
    area
}

/// The columns of a two-row `Q` as planar generators.
pub fn planar_generators(q: &InfluenceMatrix) -> Result<Vec<[f64; 2]>> {
    if q.rows() != 2 {
        return Err(Error::dim("rows of a planar influence matrix", 2, q.rows()));
    }
    let mut gens = vec![[0.0; 2]; q.cols()];
    for r in 0..2 {
        let (cols, vals) = q.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            let g: &mut [f64; 2] = &mut gens[c as usize];
            g[r] = v;
        }
    }
    Ok(gens)
}

/// Probabilities that push `|Q_i·p|` up: `p_j = 1` on the entries of row
/// `i` sharing the majority sign (positive on ties), 0 elsewhere.
/// Returns the vector and `|Q_i·p*|`.
pub fn cherrypick_p(q: &InfluenceMatrix, row: usize) -> Result<(ProbVector, f64)> {
    if row >= q.rows() {
        return Err(Error::InvalidParameter(format!(
            "row {row} out of range for {} rows",
            q.rows()
        )));
    }
    let (cols, vals) = q.row(row);
    let positives = vals.iter().filter(|&&v| v >= 0.0).count();
    let keep_positive = 2 * positives >= vals.len();
    let mut p = vec![0.0; q.cols()];
    for (&c, &v) in cols.iter().zip(vals) {
        if (v >= 0.0) == keep_positive {
            p[c as usize] = 1.0;
        }
    }
    let value = cols
        .iter()
        .zip(vals)
        .map(|(&c, &v)| v * p[c as usize])
        .sum::<f64>()
        .abs();
    Ok((ProbVector::new(p)?, value))
}

/// Bracket `[(d/2)·σ·√(2/π), d·σ·√(2/π)]` on the expected cherry-picked
/// value, with `σ = √(6/(d·fan_in))`.
pub fn cherrypick_bracket(d: usize, fan_in: usize) -> (f64, f64) {
    let sigma = (6.0 / (d as f64 * fan_in as f64)).sqrt();
    let half_normal = sigma * (2.0 / std::f64::consts::PI).sqrt();
    (0.5 * d as f64 * half_normal, d as f64 * half_normal)
}
