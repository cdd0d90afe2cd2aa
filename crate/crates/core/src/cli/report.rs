use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assoc::AssociationVerdict;
use crate::error::{Error, Result};

use super::config::{Format, SuiteConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub verdicts: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: SuiteConfig,
    pub summary: Summary,
    pub records: Vec<AssociationVerdict>,
}

impl Report {
    /// Sorts the records and derives the summary from them.
    pub fn new(config: SuiteConfig, mut records: Vec<AssociationVerdict>) -> Self {
        records.sort_by(|a, b| {
            (&a.formula_id, a.params, &a.psi, &a.mollifier).cmp(&(
                &b.formula_id,
                b.params,
                &b.psi,
                &b.mollifier,
            ))
        });
        let passed = records.iter().filter(|r| r.pass).count();
        let summary = Summary {
            verdicts: records.len(),
            passed,
            failed: records.len() - passed,
            pass: passed == records.len(),
        };
        Self {
            tool: "colombeau".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            summary,
            records,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record([
            "formula",
            "p",
            "q",
            "psi",
            "mollifier",
            "limit_re",
            "limit_im",
            "oracle_re",
            "oracle_im",
            "gap",
            "pass",
        ])
        .map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.formula_id.clone(),
                r.params.p.map(|p| p.to_string()).unwrap_or_default(),
                r.params.q.map(|q| q.to_string()).unwrap_or_default(),
                r.psi.clone(),
                r.mollifier.clone(),
                opt(r.limit_estimate.map(|c| c.re)),
                opt(r.limit_estimate.map(|c| c.im)),
                opt(r.oracle_value.map(|c| c.re)),
                opt(r.oracle_value.map(|c| c.im)),
                opt(r.abs_gap),
                r.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// One whitespace-separated block per sweep, blocks separated by two blank lines.
    pub fn to_plotdata(&self) -> String {
        let mut s = String::new();
        for (i, r) in self.records.iter().enumerate() {
            if i > 0 {
                s.push_str("\n\n");
            }
            let p = r
                .params
                .p
                .map(|p| p.to_string())
                .unwrap_or_else(|| "-".into());
            let q = r
                .params
                .q
                .map(|q| q.to_string())
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "# formula={} p={p} q={q} psi={} mollifier={}",
                r.formula_id, r.psi, r.mollifier
            );
            if let Some(o) = r.oracle_value {
                let _ = writeln!(s, "# oracle {} {}", o.re, o.im);
            }
            s.push_str("# eps value_re value_im\n");
            for pt in r.series.points.iter().filter(|p| p.converged) {
                if let Some(v) = pt.value {
                    let _ = writeln!(s, "{} {} {}", pt.eps, v.re, v.im);
                }
            }
        }
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv()?,
            Format::Plotdata => self.to_plotdata(),
        })
    }
}

pub fn file_name(format: Format) -> &'static str {
    match format {
        Format::Json => "report.json",
        Format::Csv => "verdicts.csv",
        Format::Plotdata => "sweeps.dat",
    }
}

/// Write the report in `format` under `dir`, creating the directory.
pub fn emit(report: &Report, format: Format, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file_name(format));
    fs::write(&path, report.render(format)?)?;
    Ok(path)
}
