//! Pretty-printer emitting the same grammar the parser accepts.
//!
//! Opaque function symbols print as `D(L; Dx1, dy2)` (apply `Dx1`, then
//! `dy2`), which is outside the grammar.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::expr::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const POWER: u8 = 3;
const ATOM: u8 = 4;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let (s, p) = render(e);
    if p < min {
        format!("({s})")
    } else {
        s
    }
}

fn render_num(r: &BigRational) -> (String, u8) {
    if r.is_integer() {
        let p = if r.is_negative() { PRODUCT } else { ATOM };
        (r.numer().to_string(), p)
    } else {
        (format!("{}/{}", r.numer(), r.denom()), PRODUCT)
    }
}

/// A term is "negative" when it prints with a leading minus sign.
fn split_sign(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Num(r) if r.is_negative() => Some(Expr::Num(-r)),
        Expr::Mul(fs) => match fs.first() {
            Some(Expr::Num(r)) if r.is_negative() => {
                let mut rest = fs.clone();
                let c = -r;
                if c.is_one() {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::Num(c);
                }
                Some(Expr::product(rest))
            }
            _ => None,
        },
        _ => None,
    }
}

fn render(e: &Expr) -> (String, u8) {
    match e {
        Expr::Num(r) => render_num(r),
        Expr::Sym(s) => (s.to_string(), ATOM),
        Expr::Func(g, a) => (format!("{}({})", g.name(), render(a).0), ATOM),
        Expr::Pow(_, x) if x.is_negative_num() => render_product(e, std::slice::from_ref(e)),
        Expr::Pow(b, x) => {
            let base = wrap(b, ATOM);
            let exp = match x.as_small_int() {
                Some(k) if k >= 0 => k.to_string(),
                _ => wrap(x, ATOM),
            };
            (format!("{base}^{exp}"), POWER)
        }
        Expr::Add(terms) => {
            let mut out = String::new();
            for (k, t) in terms.iter().enumerate() {
                match (k, split_sign(t)) {
                    (0, Some(pos)) => {
                        out.push('-');
                        out.push_str(&wrap(&pos, PRODUCT));
                    }
                    (0, None) => out.push_str(&wrap(t, PRODUCT)),
                    (_, Some(pos)) => {
                        out.push_str(" - ");
                        out.push_str(&wrap(&pos, PRODUCT));
                    }
                    (_, None) => {
                        out.push_str(" + ");
                        out.push_str(&wrap(t, PRODUCT));
                    }
                }
            }
            (out, SUM)
        }
        Expr::Mul(fs) => render_product(e, fs),
    }
}

fn render_product(whole: &Expr, fs: &[Expr]) -> (String, u8) {
    if let Some(pos) = split_sign(whole) {
        return (format!("-{}", wrap(&pos, PRODUCT)), PRODUCT);
    }
    let mut numer: Vec<String> = Vec::new();
    let mut denom: Vec<String> = Vec::new();
    for (k, f) in fs.iter().enumerate() {
        match f {
            Expr::Num(r) if k == 0 => numer.push(render_num(r).0),
            Expr::Pow(b, x) if x.is_negative_num() => {
                let Expr::Num(r) = x.as_ref() else { unreachable!() };
                let inv = Expr::Pow(b.clone(), Box::new(Expr::Num(-r)));
                let inv = if (-r).is_one() { (**b).clone() } else { inv };
                denom.push(wrap(&inv, POWER));
            }
            other => numer.push(wrap(other, POWER)),
        }
    }
    let mut out = if numer.is_empty() { "1".to_string() } else { numer.join("*") };
    for d in denom {
        out.push('/');
        out.push_str(&d);
    }
    (out, PRODUCT)
}
