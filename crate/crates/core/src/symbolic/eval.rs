//! Floating-point evaluation.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::expr::{Expr, Func, Symbol, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unassigned symbol `{0}`")]
    Unassigned(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Source of numeric values for symbols.
pub trait Env {
    fn lookup(&self, s: &Symbol) -> Option<f64>;
}

impl Env for BTreeMap<Symbol, f64> {
    fn lookup(&self, s: &Symbol) -> Option<f64> {
        self.get(s).copied()
    }
}

/// A numeric assignment for coordinates, velocities, time and parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    pub n: usize,
    values: BTreeMap<Symbol, f64>,
}

impl Point {
    pub fn new(n: usize) -> Self {
        Point {
            n,
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, v: Var, value: f64) -> Self {
        self.set(v, value);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.values.insert(Symbol::Param(name.to_string()), value);
        self
    }

    pub fn with_symbol(mut self, s: Symbol, value: f64) -> Self {
        self.values.insert(s, value);
        self
    }

    pub fn set(&mut self, v: Var, value: f64) {
        self.values.insert(Symbol::Var(v), value);
    }

    /// Point with x and y taken from a state vector `(x^1..x^n, y^1..y^n)`.
    pub fn from_state(n: usize, t: f64, state: &[f64], params: &BTreeMap<String, f64>) -> Self {
        let mut p = Point::new(n).with(Var::T, t);
        for i in 0..n {
            p.set(Var::X(i), state[i]);
            p.set(Var::Y(i), state[n + i]);
        }
        for (k, v) in params {
            p = p.with_param(k, *v);
        }
        p
    }
}

impl Env for Point {
    fn lookup(&self, s: &Symbol) -> Option<f64> {
        self.values.get(s).copied()
    }
}

pub fn evaluate(e: &Expr, env: &(impl Env + ?Sized)) -> Result<f64, EvalError> {
    let v = eval_inner(e, env)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!("non-finite value of `{e}`")))
    }
}

fn eval_inner(e: &Expr, env: &(impl Env + ?Sized)) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(r) => r
            .to_f64()
            .ok_or_else(|| EvalError::Domain(format!("rational {r} out of range")))?,
        Expr::Sym(s) => env
            .lookup(s)
            .ok_or_else(|| EvalError::Unassigned(s.to_string()))?,
        Expr::Add(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += eval_inner(x, env)?;
            }
            acc
        }
        Expr::Mul(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= eval_inner(x, env)?;
            }
            acc
        }
        Expr::Pow(b, x) => {
            let base = eval_inner(b, env)?;
            match x.as_small_int() {
                Some(k) if i32::try_from(k).is_ok() => {
                    if base == 0.0 && k < 0 {
                        return Err(EvalError::Domain(format!("division by zero in `{e}`")));
                    }
                    base.powi(k as i32)
                }
                _ => {
                    let exp = eval_inner(x, env)?;
                    if base < 0.0 && exp.fract() != 0.0 {
                        return Err(EvalError::Domain(format!(
                            "negative base {base} to non-integer power in `{e}`"
                        )));
                    }
                    if base == 0.0 && exp < 0.0 {
                        return Err(EvalError::Domain(format!("division by zero in `{e}`")));
                    }
                    base.powf(exp)
                }
            }
        }
        Expr::Func(f, a) => {
            let u = eval_inner(a, env)?;
            match f {
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Exp => u.exp(),
                Func::Log => {
                    if u <= 0.0 {
                        return Err(EvalError::Domain(format!("log of nonpositive {u}")));
                    }
                    u.ln()
                }
                Func::Sqrt => {
                    if u < 0.0 {
                        return Err(EvalError::Domain(format!("sqrt of negative {u}")));
                    }
                    u.sqrt()
                }
            }
        }
    })
}
