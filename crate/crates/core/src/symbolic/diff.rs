//! Exact differentiation.
//!
//! Every derivative here is a derivation on the expression algebra, fixed by
//! its values on the coordinate symbols and on opaque atoms. [`Derivation`]
//! captures that so ordinary partials and adapted derivatives share one
//! chain-rule implementation.

use super::canon::canonicalize;
use super::expr::{Atom, DerivOp, Expr, Func, Symbol, Var};

/// A derivation of the expression algebra.
pub trait Derivation {
    /// Derivative of a variable.
    fn of_var(&self, v: Var) -> Expr;
    /// Derivative of an opaque atom.
    fn of_atom(&self, a: &Atom) -> Expr;
}

/// Ordinary partial derivative with respect to one variable.
#[derive(Clone, Copy, Debug)]
pub struct Partial(pub Var);

impl Derivation for Partial {
    fn of_var(&self, v: Var) -> Expr {
        if v == self.0 {
            Expr::one()
        } else {
            Expr::zero()
        }
    }

    fn of_atom(&self, a: &Atom) -> Expr {
        if a.depends_on(self.0) {
            Expr::atom(a.then(DerivOp::Partial(self.0)))
        } else {
            Expr::zero()
        }
    }
}

/// Applies a derivation; the result is not canonicalized.
pub fn derive_raw<D: Derivation + ?Sized>(e: &Expr, d: &D) -> Expr {
    match e {
        Expr::Num(_) => Expr::zero(),
        Expr::Sym(Symbol::Param(_)) => Expr::zero(),
        Expr::Sym(Symbol::Var(v)) => d.of_var(*v),
        Expr::Sym(Symbol::Atom(a)) => d.of_atom(a),
        Expr::Add(xs) => Expr::sum(xs.iter().map(|x| derive_raw(x, d))),
        Expr::Mul(xs) => {
            let mut terms = Vec::with_capacity(xs.len());
            for (k, x) in xs.iter().enumerate() {
                let dx = derive_raw(x, d);
                if dx.is_zero() {
                    continue;
                }
                let mut fs = xs.clone();
                fs[k] = dx;
                terms.push(Expr::Mul(fs));
            }
            Expr::sum(terms)
        }
        Expr::Pow(b, x) => {
            let db = derive_raw(b, d);
            let dx = derive_raw(x, d);
            let base = (**b).clone();
            let exp = (**x).clone();
            if dx.is_zero() {
                // d(b^c) = c b^(c-1) db
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product([exp.clone(), base.pow(exp - Expr::one()), db])
            } else {
                // d(b^e) = b^e (de log b + e db / b)
                let whole = e.clone();
                let log_term = dx * Expr::func(Func::Log, base.clone());
                let ratio = Expr::product([exp, db, base.recip()]);
                whole * (log_term + ratio)
            }
        }
        Expr::Func(f, a) => {
            let da = derive_raw(a, d);
            if da.is_zero() {
                return Expr::zero();
            }
            let u = (**a).clone();
            let outer = match f {
                Func::Sin => Expr::func(Func::Cos, u),
                Func::Cos => -Expr::func(Func::Sin, u),
                Func::Exp => Expr::func(Func::Exp, u),
                Func::Log => u.recip(),
                Func::Sqrt => (Expr::int(2) * Expr::func(Func::Sqrt, u)).recip(),
            };
            outer * da
        }
    }
}

/// Applies a derivation and canonicalizes.
pub fn derive<D: Derivation + ?Sized>(e: &Expr, d: &D) -> Expr {
    canonicalize(&derive_raw(e, d))
}

/// Exact partial derivative ∂e/∂var, canonicalized.
pub fn differentiate(e: &Expr, var: Var) -> Expr {
    derive(e, &Partial(var))
}

/// Total time derivative along a curve: Σ ∂e/∂x^k ẋ^k + ∂e/∂y^k ẏ^k + ∂e/∂t.
pub fn time_derivative(e: &Expr, n: usize) -> Expr {
    let mut terms = Vec::with_capacity(2 * n + 1);
    for k in 0..n {
        terms.push(differentiate(e, Var::X(k)) * Expr::var(Var::XDot(k)));
        terms.push(differentiate(e, Var::Y(k)) * Expr::var(Var::YDot(k)));
    }
    terms.push(differentiate(e, Var::T));
    canonicalize(&Expr::sum(terms))
}
