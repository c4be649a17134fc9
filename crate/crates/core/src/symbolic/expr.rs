//! Expression tree.
//!
//! Coordinate indices are zero-based internally and printed one-based
//! (`Var::X(0)` prints as `x1`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coordinate-like variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
    T,
    /// Velocity atom dx^i/dt introduced by time differentiation along a curve.
    XDot(usize),
    /// Velocity atom dy^i/dt.
    YDot(usize),
}

impl Var {
    pub fn index(self) -> Option<usize> {
        match self {
            Var::X(i) | Var::Y(i) | Var::XDot(i) | Var::YDot(i) => Some(i),
            Var::T => None,
        }
    }

    pub fn is_coordinate(self) -> bool {
        matches!(self, Var::X(_) | Var::Y(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
            Var::T => f.write_str("t"),
            Var::XDot(i) => write!(f, "xdot{}", i + 1),
            Var::YDot(i) => write!(f, "ydot{}", i + 1),
        }
    }
}

/// One differentiation step recorded on an opaque function symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DerivOp {
    /// Ordinary partial derivative.
    Partial(Var),
    /// Adapted derivative δ/δx^i of the horizontal distribution.
    Adapted(usize),
}

impl fmt::Display for DerivOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivOp::Partial(v) => write!(f, "d{v}"),
            DerivOp::Adapted(i) => write!(f, "Dx{}", i + 1),
        }
    }
}

/// Opaque function symbol such as a generic `L(x, y)`, together with the
/// ordered list of derivatives applied to it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub name: Arc<str>,
    pub deps: Arc<[Var]>,
    pub chain: Vec<DerivOp>,
}

impl Atom {
    pub fn new(name: &str, deps: impl IntoIterator<Item = Var>) -> Self {
        let mut deps: Vec<Var> = deps.into_iter().collect();
        deps.sort();
        deps.dedup();
        Atom {
            name: Arc::from(name),
            deps: Arc::from(deps),
            chain: Vec::new(),
        }
    }

    /// Atom depending on every x^i and y^i of an `n`-dimensional base.
    pub fn on_bundle(name: &str, n: usize) -> Self {
        Atom::new(name, (0..n).flat_map(|i| [Var::X(i), Var::Y(i)]))
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.deps.contains(&v)
    }

    pub fn depends_on_bundle(&self) -> bool {
        self.deps.iter().any(|v| v.is_coordinate())
    }

    /// Appends a derivative. Ordinary partials applied after the last adapted
    /// derivative commute with each other, so that trailing run is kept sorted.
    pub fn then(&self, op: DerivOp) -> Atom {
        let mut chain = self.chain.clone();
        chain.push(op);
        let start = chain
            .iter()
            .rposition(|o| matches!(o, DerivOp::Adapted(_)))
            .map_or(0, |p| p + 1);
        chain[start..].sort();
        Atom {
            name: self.name.clone(),
            deps: self.deps.clone(),
            chain,
        }
    }

    pub fn base(&self) -> Atom {
        Atom {
            name: self.name.clone(),
            deps: self.deps.clone(),
            chain: Vec::new(),
        }
    }

    pub fn has_adapted(&self) -> bool {
        self.chain.iter().any(|o| matches!(o, DerivOp::Adapted(_)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.chain.is_empty() {
            return f.write_str(&self.name);
        }
        write!(f, "D({}", self.name)?;
        for (k, op) in self.chain.iter().enumerate() {
            f.write_str(if k == 0 { "; " } else { ", " })?;
            write!(f, "{op}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Param(String),
    Var(Var),
    Atom(Atom),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Param(p) => f.write_str(p),
            Symbol::Var(v) => write!(f, "{v}"),
            Symbol::Atom(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Symbolic scalar expression. Negation and subtraction are expressed as
/// multiplication by `-1`; division as a power with exponent `-1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(BigRational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Num(BigRational::one())
    }

    pub fn int(v: i64) -> Expr {
        Expr::Num(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Num(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn x(i: usize) -> Expr {
        Expr::Sym(Symbol::Var(Var::X(i)))
    }

    pub fn y(i: usize) -> Expr {
        Expr::Sym(Symbol::Var(Var::Y(i)))
    }

    pub fn t() -> Expr {
        Expr::Sym(Symbol::Var(Var::T))
    }

    pub fn var(v: Var) -> Expr {
        Expr::Sym(Symbol::Var(v))
    }

    pub fn param(name: &str) -> Expr {
        Expr::Sym(Symbol::Param(name.to_string()))
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::Sym(Symbol::Atom(a))
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Box::new(arg))
    }

    pub fn pow(self, exp: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exp))
    }

    pub fn powi(self, k: i64) -> Expr {
        self.pow(Expr::int(k))
    }

    pub fn recip(self) -> Expr {
        self.powi(-1)
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let terms: Vec<Expr> = terms.into_iter().collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::Add(terms),
        }
    }

    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let factors: Vec<Expr> = factors.into_iter().collect();
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::Mul(factors),
        }
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    /// Small integer value of a numeric node, if it is one.
    pub fn as_small_int(&self) -> Option<i64> {
        match self {
            Expr::Num(r) if r.is_integer() => r.to_integer().to_i64(),
            _ => None,
        }
    }

    pub fn is_negative_num(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_negative())
    }

    /// Visits every symbol in the tree.
    pub fn for_each_symbol(&self, f: &mut impl FnMut(&Symbol)) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => f(s),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.for_each_symbol(f)),
            Expr::Pow(b, e) => {
                b.for_each_symbol(f);
                e.for_each_symbol(f);
            }
            Expr::Func(_, a) => a.for_each_symbol(f),
        }
    }

    pub fn symbols(&self) -> std::collections::BTreeSet<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.for_each_symbol(&mut |s| {
            out.insert(s.clone());
        });
        out
    }

    pub fn contains_var(&self, v: Var) -> bool {
        let mut hit = false;
        self.for_each_symbol(&mut |s| {
            if matches!(s, Symbol::Var(w) if *w == v) {
                hit = true;
            }
        });
        hit
    }

    /// Largest coordinate index (zero-based) referenced anywhere, if any.
    pub fn max_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        self.for_each_symbol(&mut |s| {
            let idx = match s {
                Symbol::Var(v) => v.index(),
                Symbol::Atom(a) => a
                    .deps
                    .iter()
                    .filter_map(|v| v.index())
                    .chain(a.chain.iter().filter_map(|o| match o {
                        DerivOp::Partial(v) => v.index(),
                        DerivOp::Adapted(i) => Some(*i),
                    }))
                    .max(),
                Symbol::Param(_) => None,
            };
            if let Some(i) = idx {
                best = Some(best.map_or(i, |b| b.max(i)));
            }
        });
        best
    }

    /// Applies `f` to every node bottom-up.
    pub fn map_symbols(&self, f: &impl Fn(&Symbol) -> Option<Expr>) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Sym(s) => f(s).unwrap_or_else(|| self.clone()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.map_symbols(f)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.map_symbols(f)).collect()),
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.map_symbols(f)), Box::new(e.map_symbols(f))),
            Expr::Func(g, a) => Expr::Func(*g, Box::new(a.map_symbols(f))),
        }
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<BigRational> for Expr {
    fn from(v: BigRational) -> Self {
        Expr::Num(v)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(r) => Expr::Num(-r),
            other => Expr::Mul(vec![Expr::int(-1), other]),
        }
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.clone() + rhs.clone()
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.clone() * rhs.clone()
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}
