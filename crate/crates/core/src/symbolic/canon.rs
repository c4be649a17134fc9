//! Canonical form: flattened, fully expanded sums of monomials with folded
//! rational coefficients, like terms merged and operands sorted by the
//! derived total order on [`Expr`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::expr::{Expr, Func};

/// Positive integer powers of sums up to this exponent are expanded.
const MAX_EXPAND_POWER: i64 = 12;
/// Integer powers of rationals are folded up to this exponent magnitude.
const MAX_FOLD_POWER: i64 = 64;

pub fn canonicalize(e: &Expr) -> Expr {
    let mut cur = canon(e);
    // Rewrites are confluent on everything the constructors produce; the
    // loop only guards against a missed fold leaving a non-fixpoint.
    for _ in 0..8 {
        let next = canon(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
    cur
}

fn canon(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Sym(_) => e.clone(),
        Expr::Add(xs) => add_all(xs.iter().map(canon).collect()),
        Expr::Mul(xs) => mul_all(xs.iter().map(canon).collect()),
        Expr::Pow(b, x) => pow(canon(b), canon(x)),
        Expr::Func(f, a) => func(*f, canon(a)),
    }
}

/// Splits a canonical term into rational coefficient and remaining monomial.
fn split_coef(term: Expr) -> (BigRational, Expr) {
    match term {
        Expr::Num(r) => (r, Expr::one()),
        Expr::Mul(mut fs) => {
            if let Some(Expr::Num(_)) = fs.first() {
                let Expr::Num(c) = fs.remove(0) else { unreachable!() };
                (c, Expr::product(fs))
            } else {
                (BigRational::one(), Expr::Mul(fs))
            }
        }
        other => (BigRational::one(), other),
    }
}

fn with_coef(c: BigRational, rest: Expr) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if rest.is_one() {
        return Expr::Num(c);
    }
    if c.is_one() {
        return rest;
    }
    match rest {
        Expr::Mul(mut fs) => {
            fs.insert(0, Expr::Num(c));
            Expr::Mul(fs)
        }
        other => Expr::Mul(vec![Expr::Num(c), other]),
    }
}

/// Sum of canonical operands.
pub(crate) fn add_all(terms: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t {
            Expr::Add(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut acc: BTreeMap<Expr, BigRational> = BTreeMap::new();
    for t in flat {
        let (c, rest) = split_coef(t);
        *acc.entry(rest).or_insert_with(BigRational::zero) += c;
    }
    let mut out: Vec<Expr> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, c)| with_coef(c, rest))
        .collect();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

/// Product of canonical operands, distributing over sums.
pub(crate) fn mul_all(factors: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(factors.len());
    for f in factors {
        match f {
            Expr::Mul(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    if flat.iter().any(Expr::is_zero) {
        return Expr::zero();
    }
    if let Some(pos) = flat.iter().position(|f| matches!(f, Expr::Add(_))) {
        let Expr::Add(terms) = flat.remove(pos) else { unreachable!() };
        let rest = flat;
        let expanded = terms
            .into_iter()
            .map(|t| {
                let mut fs = rest.clone();
                fs.push(t);
                mul_all(fs)
            })
            .collect();
        return add_all(expanded);
    }

    let mut coef = BigRational::one();
    let mut powers: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    for f in flat {
        match f {
            Expr::Num(r) => coef *= r,
            Expr::Pow(b, x) => powers.entry(*b).or_default().push(*x),
            other => powers.entry(other).or_default().push(Expr::one()),
        }
    }

    let mut rest: Vec<Expr> = Vec::new();
    let mut needs_refold = false;
    for (base, exps) in powers {
        let exp = add_all(exps);
        match pow(base, exp) {
            Expr::Num(r) => coef *= r,
            Expr::Mul(inner) => {
                needs_refold = true;
                rest.extend(inner);
            }
            sum @ Expr::Add(_) => {
                // Exponents merged to a positive integer: distribute again.
                needs_refold = true;
                rest.push(sum);
            }
            other => rest.push(other),
        }
    }
    if coef.is_zero() {
        return Expr::zero();
    }
    if needs_refold {
        rest.insert(0, Expr::Num(coef));
        return mul_all(rest);
    }
    rest.sort();
    with_coef(coef, Expr::product(rest))
}

fn rational_pow(base: &BigRational, k: i64) -> Option<BigRational> {
    if k.abs() > MAX_FOLD_POWER {
        return None;
    }
    if base.is_zero() {
        return if k > 0 { Some(BigRational::zero()) } else { None };
    }
    let mut out = BigRational::one();
    for _ in 0..k.abs() {
        out *= base;
    }
    Some(if k < 0 { out.recip() } else { out })
}

/// Power of canonical operands.
pub(crate) fn pow(base: Expr, exp: Expr) -> Expr {
    if exp.is_zero() {
        return Expr::one();
    }
    if exp.is_one() {
        return base;
    }
    if base.is_one() {
        return Expr::one();
    }
    if let (Expr::Num(b), Some(k)) = (&base, exp.as_small_int()) {
        if let Some(r) = rational_pow(b, k) {
            return Expr::Num(r);
        }
    }
    if base.is_zero() {
        if let Expr::Num(r) = &exp {
            if r.is_positive() {
                return Expr::zero();
            }
        }
    }
    if let Some(k) = exp.as_small_int() {
        match base {
            Expr::Pow(inner_b, inner_e) => {
                return pow(*inner_b, mul_all(vec![*inner_e, Expr::int(k)]));
            }
            Expr::Mul(fs) => {
                return mul_all(fs.into_iter().map(|f| pow(f, Expr::int(k))).collect());
            }
            Expr::Add(ref terms) if (2..=MAX_EXPAND_POWER).contains(&k) => {
                let copies = vec![Expr::Add(terms.clone()); k as usize];
                return mul_all(copies);
            }
            _ => {}
        }
    }
    Expr::Pow(Box::new(base), Box::new(exp))
}

pub(crate) fn func(f: Func, arg: Expr) -> Expr {
    let zero = arg.is_zero();
    let one = arg.is_one();
    match f {
        Func::Sin if zero => Expr::zero(),
        Func::Cos if zero => Expr::one(),
        Func::Exp if zero => Expr::one(),
        Func::Log if one => Expr::zero(),
        Func::Sqrt if zero || one => arg,
        Func::Log => match arg {
            Expr::Func(Func::Exp, inner) => *inner,
            other => Expr::Func(f, Box::new(other)),
        },
        Func::Sqrt => match &arg {
            Expr::Num(r) if !r.is_negative() => match exact_sqrt(r) {
                Some(s) => Expr::Num(s),
                None => Expr::Func(f, Box::new(arg)),
            },
            _ => Expr::Func(f, Box::new(arg)),
        },
        _ => Expr::Func(f, Box::new(arg)),
    }
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// True when the canonical expression is a polynomial in its symbols
/// (no functions, only non-negative integer powers).
pub fn is_polynomial(e: &Expr) -> bool {
    match e {
        Expr::Num(_) | Expr::Sym(_) => true,
        Expr::Add(xs) | Expr::Mul(xs) => xs.iter().all(is_polynomial),
        Expr::Pow(b, x) => {
            matches!(x.as_small_int(), Some(k) if k >= 0) && is_polynomial(b)
        }
        Expr::Func(..) => false,
    }
}

/// Converts a finite float to the exact rational with the same shortest
/// round-trip decimal spelling (so `0.1` becomes `1/10`).
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    if !v.is_finite() {
        return None;
    }
    parse_decimal(&format!("{v:e}"))
}

/// Parses `123`, `1.5`, `2.5e-3` exactly.
pub(crate) fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(p) => (&text[..p], text[p + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i64;
    if scale.abs() > 400 {
        return None;
    }
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    let factor = BigRational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(if neg { -value } else { value })
}
