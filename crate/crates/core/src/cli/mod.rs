//! Batch harness: suite configuration, execution over the formula grid, and reports.

mod config;
mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::assoc::check_association;
use crate::embedding::Embedder;
use crate::error::{Error, Result};
use crate::smooth_kit::{fit_mollifier, MollifierSpec};

pub use config::{
    Format, FormulaSelection, MollifierSelection, OutputConfig, ResolvedSuite, SuiteConfig,
    MAX_EPS0,
};
pub use report::{emit, file_name, Report, Summary};

/// Build the embedders a resolved suite needs, one per `(mollifier, order)`.
fn embedders(
    cfg: &SuiteConfig,
    suite: &ResolvedSuite,
) -> Result<BTreeMap<(usize, usize), Embedder>> {
    let mut keys = Vec::new();
    for f in &suite.instances {
        for (k, m) in cfg.mollifiers.iter().enumerate() {
            keys.push((k, m.order_for(f.params)));
        }
    }
    keys.sort_unstable();
    keys.dedup();
    let specs: Vec<Result<MollifierSpec>> = keys
        .par_iter()
        .map(|&(k, q)| {
            let m = &cfg.mollifiers[k];
            fit_mollifier(q, m.radius(), m.variant)
        })
        .collect();
    keys.into_iter()
        .zip(specs)
        .map(|(key, spec)| Ok((key, Embedder::new(spec?))))
        .collect()
}

/// Run every `(formula, ψ, mollifier)` of the configuration.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    let suite = cfg.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.parallel {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let records = pool.install(|| -> Result<Vec<_>> {
        let embs = embedders(cfg, &suite)?;
        let per_formula: Vec<Result<Vec<_>>> = suite
            .instances
            .par_iter()
            .map(|f| {
                let list: Vec<Embedder> = cfg
                    .mollifiers
                    .iter()
                    .enumerate()
                    .map(|(k, m)| embs[&(k, m.order_for(f.params))].clone())
                    .collect();
                check_association(
                    f,
                    &suite.test_functions,
                    &list,
                    &cfg.tolerances,
                    &cfg.schedule,
                    &cfg.quadrature,
                )
            })
            .collect();
        Ok(per_formula
            .into_iter()
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect())
    })?;
    let echo = SuiteConfig {
        output: OutputConfig::default(),
        ..cfg.clone()
    };
    Ok(Report::new(echo, records))
}
