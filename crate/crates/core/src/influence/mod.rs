//! The fixed sparse random matrix `Q` that maps trainable parameters to
//! network weights (`w = Q·v`).
//!
//! Every row stores exactly `degree` entries in sorted column order. Row `i`
//! draws its columns uniformly without replacement (Floyd's algorithm) and
//! its values from `N(0, 6 / (degree · fan_in[i]))`, all from the
//! [`Stream::Matrix`] stream, so `(fan_ins, cols, degree, seed)` determines
//! the matrix bit-for-bit.

mod storage;

use rand::Rng;

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::rng::{Gaussian, SeedSpec, Stream};

pub use storage::{MAGIC, VERSION};

const ROW_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    rows: usize,
    cols: usize,
    degree: usize,
    seed: u64,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<f64>,
    fan_in: Vec<u32>,
    // transpose index: entries of column j are col_entries[col_offsets[j]..col_offsets[j + 1]]
    col_offsets: Vec<usize>,
    col_entries: Vec<u32>,
}

impl InfluenceMatrix {
    /// Generate `Q` with one row per entry of `fan_ins`.
    pub fn generate(fan_ins: &[u32], cols: usize, degree: usize, seed: SeedSpec) -> Result<Self> {
        let rows = fan_ins.len();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyShape { rows, cols });
        }
        if degree == 0 {
            return Err(Error::InvalidParameter("degree must be at least 1".into()));
        }
        if degree > cols {
            return Err(Error::InvalidDegree { degree, cols });
        }
        if cols > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "{cols} columns do not fit a u32 index"
            )));
        }
        if let Some(i) = fan_ins.iter().position(|&f| f == 0) {
            return Err(Error::InvalidParameter(format!("fan-in of row {i} is zero")));
        }

        let mut rng = seed.rng(Stream::Matrix);
        let mut gauss = Gaussian::new();
        let nnz = rows * degree;
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut chosen: Vec<u32> = Vec::with_capacity(degree);

        for &fan_in in fan_ins {
            sample_without_replacement(&mut rng, cols, degree, &mut chosen);
            col_indices.extend_from_slice(&chosen);
            let sigma = (6.0 / (degree as f64 * f64::from(fan_in))).sqrt();
            values.extend((0..degree).map(|_| sigma * gauss.sample(&mut rng)));
        }

        let row_offsets = (0..=rows).map(|i| i * degree).collect();
        Ok(Self::assemble(
            rows,
            cols,
            degree,
            seed.master_seed,
            row_offsets,
            col_indices,
            values,
            fan_ins.to_vec(),
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        rows: usize,
        cols: usize,
        degree: usize,
        seed: u64,
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
        values: Vec<f64>,
        fan_in: Vec<u32>,
    ) -> Self {
        let (col_offsets, col_entries) = transpose_index(cols, &col_indices);
        InfluenceMatrix {
            rows,
            cols,
            degree,
            seed,
            row_offsets,
            col_indices,
            values,
            fan_in,
            col_offsets,
            col_entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn fan_in(&self) -> &[u32] {
        &self.fan_in
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Number of rows that reference column `j`.
    pub fn column_load(&self, j: usize) -> usize {
        self.col_offsets[j + 1] - self.col_offsets[j]
    }

    pub fn expand(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.expand_with(Exec::default(), v)
    }

    /// `Q·v`, costing `Θ(rows · degree)`.
    pub fn expand_with(&self, exec: Exec, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dim("expand input", self.cols, v.len()));
        }
        let mut out = vec![0.0; self.rows];
        exec.fill_chunks(&mut out, ROW_CHUNK, |start, chunk| {
            for (k, o) in chunk.iter_mut().enumerate() {
                let (idx, val) = self.row(start + k);
                *o = idx.iter().zip(val).map(|(&j, &q)| q * v[j as usize]).sum();
            }
        });
        Ok(out)
    }

    pub fn backproject(&self, grad_w: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.backproject_with(Exec::default(), grad_w, p)
    }

    /// Straight-through gradient for the scores: `Qᵀ·grad_w`, zeroed on
    /// coordinates where `p` sits on the clip boundary (`p ≤ 0` or `p ≥ 1`).
    pub fn backproject_with(&self, exec: Exec, grad_w: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        if grad_w.len() != self.rows {
            return Err(Error::dim("backproject gradient", self.rows, grad_w.len()));
        }
        if p.len() != self.cols {
            return Err(Error::dim("backproject probabilities", self.cols, p.len()));
        }
        let mut out = vec![0.0; self.cols];
        exec.fill_chunks(&mut out, ROW_CHUNK, |start, chunk| {
            for (k, o) in chunk.iter_mut().enumerate() {
                let j = start + k;
                if !(p[j] > 0.0 && p[j] < 1.0) {
                    continue;
                }
                let entries = &self.col_entries[self.col_offsets[j]..self.col_offsets[j + 1]];
                *o = entries
                    .iter()
                    .map(|&e| {
                        let e = e as usize;
                        self.values[e] * grad_w[e / self.degree]
                    })
                    .sum();
            }
        });
        Ok(out)
    }

    /// Columns referenced by no row.
    pub fn count_empty_columns(&self) -> usize {
        self.col_offsets.windows(2).filter(|w| w[0] == w[1]).count()
    }

    /// Dense row-major copy; meant for tests and tiny matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            for (&j, &q) in idx.iter().zip(val) {
                dense[i * self.cols + j as usize] = q;
            }
        }
        dense
    }
}

/// Trainable parameter count `n = round(m / ratio)` for a compression
/// factor `ratio = m/n`.
pub fn params_for_compression(m: usize, ratio: f64) -> Result<usize> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "compression factor {ratio} must be positive"
        )));
    }
    let n = (m as f64 / ratio).round();
    if n < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "compression {ratio} leaves no trainable parameters for m = {m}"
        )));
    }
    Ok(n as usize)
}

/// Floyd's sampling of `k` distinct values from `0..n`, left sorted in `out`.
fn sample_without_replacement<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, out: &mut Vec<u32>) {
    out.clear();
    for j in (n - k)..n {
        let t = rng.random_range(0..=j) as u32;
        let pick = match out.binary_search(&t) {
            Ok(_) => j as u32,
            Err(_) => t,
        };
        // j exceeds every value inserted so far, so it always lands at the end
        let pos = out.binary_search(&pick).unwrap_err();
        out.insert(pos, pick);
    }
}

fn transpose_index(cols: usize, col_indices: &[u32]) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; cols + 1];
    for &j in col_indices {
        offsets[j as usize + 1] += 1;
    }
    for j in 0..cols {
        offsets[j + 1] += offsets[j];
    }
    let mut cursor = offsets.clone();
    let mut entries = vec![0u32; col_indices.len()];
    // entries are visited in row order, so each column's list is sorted by row
    for (e, &j) in col_indices.iter().enumerate() {
        let slot = &mut cursor[j as usize];
        entries[*slot] = e as u32;
        *slot += 1;
    }
    (offsets, entries)
}
