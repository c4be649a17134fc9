//! Expression equality: canonical difference first, randomized probing when
//! the difference is not a polynomial.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::canon::{canonicalize, is_polynomial};
use super::eval::{evaluate, EvalError};
use super::expr::{Expr, Symbol};

pub const PROBE_POINTS: usize = 32;
pub const PROBE_TOLERANCE: f64 = 1e-9;
const PROBE_SEED: u64 = 0x5eed_d15e;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecidedBy {
    Canonical,
    Probing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymEquality {
    pub equal: bool,
    pub decided_by: DecidedBy,
}

pub fn sym_equal(a: &Expr, b: &Expr) -> SymEquality {
    let diff = canonicalize(&(a.clone() - b.clone()));
    if diff.is_zero() {
        return SymEquality {
            equal: true,
            decided_by: DecidedBy::Canonical,
        };
    }
    if is_polynomial(&diff) {
        // A nonzero canonical polynomial is nonzero as a function.
        return SymEquality {
            equal: false,
            decided_by: DecidedBy::Canonical,
        };
    }
    SymEquality {
        equal: probe_equal(a, b),
        decided_by: DecidedBy::Probing,
    }
}

/// Evaluates both sides at [`PROBE_POINTS`] pseudo-random assignments of
/// every free symbol. Points where either side leaves its domain are
/// redrawn; if too few valid points remain the expressions are reported
/// unequal.
pub fn probe_equal(a: &Expr, b: &Expr) -> bool {
    let mut symbols = a.symbols();
    symbols.extend(b.symbols());
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut accepted = 0;
    for _ in 0..PROBE_POINTS * 4 {
        let env: BTreeMap<Symbol, f64> = symbols
            .iter()
            .map(|s| (s.clone(), random_value(&mut rng)))
            .collect();
        let (va, vb) = match (evaluate(a, &env), evaluate(b, &env)) {
            (Ok(va), Ok(vb)) => (va, vb),
            (Err(EvalError::Domain(_)), _) | (_, Err(EvalError::Domain(_))) => continue,
            _ => return false,
        };
        if (va - vb).abs() >= PROBE_TOLERANCE * (1.0 + va.abs()) {
            return false;
        }
        accepted += 1;
        if accepted == PROBE_POINTS {
            return true;
        }
    }
    false
}

fn random_value(rng: &mut impl Rng) -> f64 {
    let magnitude = rng.random_range(0.2..1.5);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_expr;

    fn p(s: &str) -> Expr {
        parse_expr(s, 1).unwrap()
    }

    #[test]
    fn expansion_identity() {
        let r = sym_equal(&p("(x1+y1)^2"), &p("x1^2+2*x1*y1+y1^2"));
        assert_eq!(r, SymEquality { equal: true, decided_by: DecidedBy::Canonical });
    }

    #[test]
    fn distinct_coordinates() {
        let r = sym_equal(&p("x1"), &p("y1"));
        assert_eq!(r, SymEquality { equal: false, decided_by: DecidedBy::Canonical });
    }

    #[test]
    fn pythagorean_identity_via_probing() {
        let r = sym_equal(&p("sin(x1)^2 + cos(x1)^2"), &p("1"));
        assert_eq!(r, SymEquality { equal: true, decided_by: DecidedBy::Probing });
    }

    #[test]
    fn probing_rejects_near_identities() {
        let r = sym_equal(&p("sin(x1)^2 + cos(x1)^2"), &p("1 + 1/1000000*x1"));
        assert!(!r.equal);
        assert!(sym_equal(&p("x1/(x1+y1) + y1/(x1+y1)"), &p("1")).equal);
        assert!(sym_equal(&p("log(exp(x1))"), &p("x1")).equal);
    }
}
