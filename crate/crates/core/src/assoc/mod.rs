//! Balanced product expressions, the registry of identities they are claimed to
//! satisfy, and the scale sweep that decides each association.

mod expr;
mod registry;
mod sweep;

pub use expr::{ProductExpr, Summand};
pub use registry::{
    build_formula, default_mollifier_order, default_params, differentiate_expr, formula_info,
    induction_step, registry, Arity, FormulaInfo, FormulaInstance, FormulaParams,
};
pub use sweep::{
    check_association, extrapolate, extrapolate_points, sweep, AssociationVerdict, Extrapolation,
    Schedule, SweepPoint, SweepSeries, Tolerances, BASIS, MAX_CONDITION, MIN_POINTS,
};
