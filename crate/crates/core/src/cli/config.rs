use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assoc::{
    build_formula, default_mollifier_order, default_params, registry, FormulaInstance,
    FormulaParams, Schedule, Tolerances,
};
use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::smooth_kit::{TestFunction, TestFunctionParams, Variant};

/// Largest accepted `ε₀`.
pub const MAX_EPS0: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaSelection {
    pub id: String,
    /// Values of `p`; all defaults when both `p` and `q` are absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<u32>>,
}

impl FormulaSelection {
    pub fn all_defaults(id: &str) -> Self {
        Self {
            id: id.to_string(),
            p: None,
            q: None,
        }
    }

    fn params(&self) -> Result<Vec<FormulaParams>> {
        if self.p.is_none() && self.q.is_none() {
            return default_params(&self.id);
        }
        let ps: Vec<Option<i32>> = self
            .p
            .as_ref()
            .map_or(vec![None], |v| v.iter().map(|&p| Some(p)).collect());
        let qs: Vec<Option<u32>> = self
            .q
            .as_ref()
            .map_or(vec![None], |v| v.iter().map(|&q| Some(q)).collect());
        Ok(ps
            .iter()
            .flat_map(|&p| qs.iter().map(move |&q| FormulaParams { p, q }))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierSelection {
    pub variant: Variant,
    /// Kernel radius; the variant's standard radius when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Moment order; `max(p, q, 1) + 1` per formula when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl MollifierSelection {
    pub fn standard(variant: Variant) -> Self {
        Self {
            variant,
            radius: None,
            order: None,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius.unwrap_or_else(|| self.variant.default_radius())
    }

    pub fn order_for(&self, params: FormulaParams) -> usize {
        self.order
            .unwrap_or_else(|| default_mollifier_order(params))
    }
}

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Plotdata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

/// Everything a suite run depends on. Every field has a default, so an empty
/// file is the full default suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub formulas: Vec<FormulaSelection>,
    pub mollifiers: Vec<MollifierSelection>,
    pub test_functions: Vec<TestFunctionParams>,
    pub schedule: Schedule,
    pub tolerances: Tolerances,
    pub quadrature: QuadConfig,
    /// Worker threads; all cores when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
    #[serde(skip_serializing)]
    pub output: OutputConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            formulas: registry()
                .iter()
                .map(|f| FormulaSelection::all_defaults(f.id))
                .collect(),
            mollifiers: vec![
                MollifierSelection::standard(Variant::Plain),
                MollifierSelection::standard(Variant::Weighted),
            ],
            test_functions: TestFunction::defaults()
                .into_iter()
                .map(Into::into)
                .collect(),
            schedule: Schedule::default(),
            tolerances: Tolerances::default(),
            quadrature: QuadConfig::default(),
            parallel: None,
            output: OutputConfig::default(),
        }
    }
}

/// A validated configuration, expanded into concrete runs.
#[derive(Debug, Clone)]
pub struct ResolvedSuite {
    pub instances: Vec<FormulaInstance>,
    pub test_functions: Vec<TestFunction>,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string().trim_end().to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Check everything and expand the formula grid; all problems are reported together.
    pub fn resolve(&self) -> Result<ResolvedSuite> {
        let mut errs = Vec::new();
        if self.formulas.is_empty() {
            errs.push("formulas: at least one formula is required".to_string());
        }
        if self.mollifiers.is_empty() {
            errs.push("mollifiers: at least one mollifier is required".to_string());
        }
        if self.test_functions.is_empty() {
            errs.push("test_functions: at least one test function is required".to_string());
        }
        if let Err(Error::Config(v)) = self.schedule.validate() {
            errs.extend(v);
        }
        if self.schedule.eps0 > MAX_EPS0 {
            errs.push(format!(
                "schedule.eps0 must be at most {MAX_EPS0}, got {}",
                self.schedule.eps0
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [("rel", t.rel), ("abs", t.abs), ("cancel", t.cancel)] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        if let Err(e) = self.quadrature.validate() {
            errs.push(format!("quadrature: {e}"));
        }
        if self.parallel == Some(0) {
            errs.push("parallel must be at least 1".to_string());
        }

        let mut radius_max: f64 = 0.0;
        for (i, m) in self.mollifiers.iter().enumerate() {
            let r = m.radius();
            if !(r > 0.0 && r.is_finite()) {
                errs.push(format!("mollifiers[{i}].radius must be positive, got {r}"));
            }
            radius_max = radius_max.max(r);
        }

        let mut test_functions = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, p) in self.test_functions.iter().enumerate() {
            if !ids.insert(p.id.clone()) {
                errs.push(format!("test_functions[{i}]: duplicate id `{}`", p.id));
            }
            match TestFunction::try_from(p.clone()) {
                Ok(t) => {
                    if self.schedule.eps0 * radius_max >= t.radius() {
                        errs.push(format!(
                            "test_functions[{i}]: radius {} must exceed eps0 · kernel radius = {}",
                            t.radius(),
                            self.schedule.eps0 * radius_max
                        ));
                    }
                    test_functions.push(t);
                }
                Err(e) => errs.push(format!("test_functions[{i}] (`{}`): {e}", p.id)),
            }
        }

        let mut instances = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, sel) in self.formulas.iter().enumerate() {
            let params = match sel.params() {
                Ok(p) => p,
                Err(e) => {
                    errs.push(format!("formulas[{i}]: {e}"));
                    continue;
                }
            };
            for params in params {
                match build_formula(&sel.id, params.p, params.q) {
                    Ok(f) => {
                        if seen.insert((f.formula_id.clone(), f.params)) {
                            for (k, m) in self.mollifiers.iter().enumerate() {
                                if let Err(e) = check_order(&f, m) {
                                    errs.push(format!("formulas[{i}] with mollifiers[{k}]: {e}"));
                                }
                            }
                            instances.push(f);
                        }
                    }
                    Err(e) => errs.push(format!("formulas[{i}]: {e}")),
                }
            }
        }

        if errs.is_empty() {
            Ok(ResolvedSuite {
                instances,
                test_functions,
            })
        } else {
            Err(Error::Config(errs))
        }
    }
}

fn check_order(f: &FormulaInstance, m: &MollifierSelection) -> Result<()> {
    let q = m.order_for(f.params);
    let need = f.expr.max_kernel_order()?;
    let max = crate::smooth_kit::DEFAULT_MAX_ORDER;
    if q > crate::smooth_kit::MAX_FIT_ORDER || need + q > max {
        return Err(Error::UnsupportedOrder {
            order: need + q,
            max,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_suite() {
        let c = SuiteConfig::from_toml("").unwrap();
        assert_eq!(c, SuiteConfig::default());
        let r = c.resolve().unwrap();
        assert!(r.instances.len() > 80);
        assert_eq!(r.test_functions.len(), 3);
    }

    #[test]
    fn toml_round_trip() {
        let c = SuiteConfig {
            parallel: Some(3),
            formulas: vec![FormulaSelection {
                id: "XPDQ".into(),
                p: Some(vec![1, 2]),
                q: Some(vec![2]),
            }],
            ..SuiteConfig::default()
        };
        let back = SuiteConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.resolve().unwrap().instances.len(), 2);
    }

    #[test]
    fn all_errors_are_listed() {
        let text = r#"
formulas = []
test_functions = []
[schedule]
eps0 = 0.5
ratio = 0.5
count = 8
[tolerances]
rel = -1.0
abs = 1e-6
"#;
        match SuiteConfig::from_toml(text).unwrap().resolve() {
            Err(Error::Config(v)) => {
                assert_eq!(v.len(), 4, "{v:?}");
                assert!(v[0].starts_with("formulas"));
                assert!(v.iter().any(|e| e.contains("eps0")));
                assert!(v.iter().any(|e| e.contains("tolerances.rel")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_formulas_are_named() {
        let text = r#"
[[formulas]]
id = "NOPE"
[[formulas]]
id = "XPDQ"
p = [0]
q = [1]
"#;
        match SuiteConfig::from_toml(text).unwrap().resolve() {
            Err(Error::Config(v)) => {
                assert_eq!(v.len(), 2);
                assert!(v[0].contains("NOPE"));
                assert!(v[1].contains("XPDQ"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            SuiteConfig::from_toml("colour = 1"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mollifier_order_must_fit_the_kernel() {
        let mut c = SuiteConfig {
            formulas: vec![FormulaSelection {
                id: "CMUC".into(),
                p: Some(vec![4]),
                q: None,
            }],
            ..SuiteConfig::default()
        };
        c.mollifiers[0].order = Some(9);
        assert!(matches!(c.resolve(), Err(Error::Config(v)) if v.len() == 1));
    }
}
