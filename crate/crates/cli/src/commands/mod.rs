pub mod analyze;
pub mod compress_sweep;
pub mod federated;
pub mod gap;
pub mod sensitivity;
pub mod train_local;
pub mod zhou;

use std::path::PathBuf;

use zampling::{params_for_compression, ArchSpec, InfluenceMatrix, SeedSpec, WeightLayout};

use crate::error::{CliError, CliResult};

/// Rows produced by a subcommand together with the files they went to.
#[derive(Debug, Clone)]
pub struct Report<R> {
    pub rows: R,
    pub files: Vec<PathBuf>,
}

/// Master seed of repetition `index` of an experiment seeded with `base`.
pub fn repetition_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// Trainable parameter counts for each compression factor, rejecting the
/// whole grid if any entry leaves fewer than one parameter.
pub fn params_for_grid(m: usize, compressions: &[f64]) -> CliResult<Vec<usize>> {
    compressions
        .iter()
        .map(|&c| {
            params_for_compression(m, c).map_err(|e| CliError::config(format!("compression {c} with {m} weights: {e}")))
        })
        .collect()
}

/// The layout of `arch` and an `n`-column influence matrix for it.
pub fn build_model(
    arch: &ArchSpec,
    n: usize,
    degree: usize,
    seed: SeedSpec,
) -> CliResult<(WeightLayout, InfluenceMatrix)> {
    let layout = WeightLayout::new(arch);
    let q = InfluenceMatrix::generate(&layout.fan_ins(), n, degree, seed)?;
    Ok((layout, q))
}

/// `None` for fewer than two values, the sample standard deviation otherwise.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mean = mean(values);
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_compression_is_a_config_error() {
        assert_eq!(params_for_grid(320, &[1.0, 32.0]).unwrap(), vec![320, 10]);
        let err = params_for_grid(320, &[1.0, 1024.0]).unwrap_err();
        assert_eq!(err.kind, crate::error::ExitKind::Config);
    }

    #[test]
    fn std_needs_two_values() {
        assert_eq!(sample_std(&[3.0]), None);
        assert_eq!(sample_std(&[1.0, 3.0]), Some(2f64.sqrt()));
    }
}
