//! Symbolic scalar expressions: parsing, printing, canonical form, exact
//! differentiation, evaluation and equality.

mod canon;
mod diff;
mod equal;
mod eval;
mod expr;
mod linsolve;
mod parse;
mod print;
pub mod random;

pub use canon::{canonicalize, is_polynomial, rational_from_f64};
pub use diff::{derive, derive_raw, differentiate, time_derivative, Derivation, Partial};
pub use equal::{probe_equal, sym_equal, DecidedBy, SymEquality, PROBE_POINTS, PROBE_TOLERANCE};
pub use eval::{evaluate, Env, EvalError, Point};
pub use expr::{Atom, DerivOp, Expr, Func, Symbol, Var};
pub use linsolve::{det_numeric, solve_linear, substitute};
pub use parse::{parse_expr, ParseError};

use std::collections::BTreeMap;

/// Replaces named parameters by exact rational values.
pub fn bind_params(e: &Expr, params: &BTreeMap<String, f64>) -> Expr {
    let map: BTreeMap<Symbol, Expr> = params
        .iter()
        .filter_map(|(k, v)| Some((Symbol::Param(k.clone()), Expr::Num(rational_from_f64(*v)?))))
        .collect();
    substitute(e, &map)
}
