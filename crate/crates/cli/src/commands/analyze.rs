//! Closed-form quantities next to Monte Carlo estimates.

use serde::Serialize;
use zampling::analysis::montecarlo::{
    mc_cherrypick, mc_column_load, mc_empty_fraction, mc_init_variance, mc_nonzero_fraction, mc_zonotope_area,
};
use zampling::analysis::{
    cherrypick_bracket, expected_column_load, expected_empty_fraction, expected_nonzero_weights,
    zonotope_volume_expected, ZonotopeSpec,
};
use zampling::SeedSpec;

use super::Report;
use crate::error::CliResult;
use crate::Context;

pub const COLUMNS: &[&str] = &[
    "quantity",
    "weights",
    "params",
    "degree",
    "formula",
    "upper",
    "monte_carlo",
    "std_err",
    "samples",
];

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub quantity: &'static str,
    pub weights: usize,
    pub params: usize,
    pub degree: usize,
    /// The closed-form value, or the lower end of a bracket.
    pub formula: f64,
    /// Upper end for bracketed quantities.
    pub upper: Option<f64>,
    pub monte_carlo: f64,
    pub std_err: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub rows: Vec<Row>,
}

impl Outcome {
    pub fn get(&self, quantity: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

pub fn run(ctx: &Context) -> CliResult<Report<Outcome>> {
    let cfg = &ctx.config.analyze;
    let (m, n, d) = (cfg.weights, cfg.params, cfg.degree);
    let seed = SeedSpec::new(ctx.config.seed);
    let exec = ctx.exec;
    let mut rows = Vec::new();

    let nonzero = mc_nonzero_fraction(exec, m, n, d, cfg.trials, seed)?;
    rows.push(Row {
        quantity: "nonzero_weights",
        weights: m,
        params: n,
        degree: d,
        formula: expected_nonzero_weights(m, d),
        upper: None,
        monte_carlo: nonzero.mean * m as f64,
        std_err: Some(nonzero.std_err * m as f64),
        samples: nonzero.samples,
    });

    let empty = mc_empty_fraction(exec, n, d, m, cfg.trials, seed)?;
    rows.push(Row {
        quantity: "empty_column_fraction",
        weights: m,
        params: n,
        degree: d,
        formula: expected_empty_fraction(n, d, m)?,
        upper: None,
        monte_carlo: empty.mean,
        std_err: Some(empty.std_err),
        samples: empty.samples,
    });

    let load = mc_column_load(exec, m, n, d, cfg.trials, seed)?;
    rows.push(Row {
        quantity: "column_load",
        weights: m,
        params: n,
        degree: d,
        formula: expected_column_load(m, n, d)?,
        upper: None,
        monte_carlo: load.mean,
        std_err: Some((load.variance / load.columns as f64).sqrt()),
        samples: load.columns,
    });

    let init = mc_init_variance(exec, cfg.fan_in, n, d, cfg.init_trials, seed)?;
    rows.push(Row {
        quantity: "init_weight_variance",
        weights: 1,
        params: n,
        degree: d,
        formula: 2.0 / f64::from(cfg.fan_in),
        upper: None,
        monte_carlo: init.mean,
        std_err: Some(init.std_err),
        samples: init.samples,
    });

    let (lo, hi) = cherrypick_bracket(d, cfg.fan_in as usize);
    let cherry = mc_cherrypick(exec, d, cfg.fan_in, n, cfg.cherrypick_rows, seed)?;
    rows.push(Row {
        quantity: "cherrypicked_magnitude",
        weights: cfg.cherrypick_rows,
        params: n,
        degree: d,
        formula: lo,
        upper: Some(hi),
        monte_carlo: cherry.mean,
        std_err: Some(cherry.std_err),
        samples: cherry.samples,
    });

    let zd = cfg.zonotope_degree;
    let spec = ZonotopeSpec::new(2, zd, cfg.zonotope_fan_ins.iter().map(|&f| f as usize).collect())?;
    let area = mc_zonotope_area(exec, cfg.zonotope_fan_ins, zd, cfg.zonotope_trials, seed)?;
    rows.push(Row {
        quantity: "zonotope_area",
        weights: 2,
        params: 2,
        degree: zd,
        formula: zonotope_volume_expected(&spec),
        upper: None,
        monte_carlo: area.mean,
        std_err: Some(area.std_err),
        samples: area.samples,
    });

    let out = ctx.out_dir("analyze")?;
    let files = vec![out.write_csv("analyze.csv", COLUMNS, &rows)?];
    Ok(Report {
        rows: Outcome { rows },
        files,
    })
}
