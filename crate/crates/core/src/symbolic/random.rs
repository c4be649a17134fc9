//! Seeded random expressions for property checks.

use rand::Rng;

use super::expr::{Expr, Func, Var};

/// Random expression over `x1..xn`, `y1..yn`, `t`, parameters `a`, `b` and
/// small rationals, using sums, products, small integer powers and `sin`,
/// `cos`, `exp`. Always finite on bounded inputs.
pub fn random_expr(rng: &mut impl Rng, n: usize, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return random_leaf(rng, n);
    }
    match rng.random_range(0..6) {
        0 | 1 => random_expr(rng, n, depth - 1) + random_expr(rng, n, depth - 1),
        2 | 3 => random_expr(rng, n, depth - 1) * random_expr(rng, n, depth - 1),
        4 => random_expr(rng, n, depth - 1).powi(rng.random_range(2..=3)),
        _ => {
            let f = [Func::Sin, Func::Cos, Func::Exp][rng.random_range(0..3)];
            // keep exponentials tame
            let inner = if f == Func::Exp {
                random_leaf(rng, n)
            } else {
                random_expr(rng, n, depth - 1)
            };
            Expr::func(f, inner)
        }
    }
}

fn random_leaf(rng: &mut impl Rng, n: usize) -> Expr {
    match rng.random_range(0..7) {
        0 | 1 => Expr::x(rng.random_range(0..n)),
        2 | 3 => Expr::y(rng.random_range(0..n)),
        4 => Expr::param(if rng.random_bool(0.5) { "a" } else { "b" }),
        5 => Expr::var(Var::T),
        _ => Expr::rational(rng.random_range(-4..=4), rng.random_range(1..=3)),
    }
}
