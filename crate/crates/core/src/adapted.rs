//! Nonlinear connection, the adapted frame `(δ/δx^i, ∂/∂y^i)` with its dual
//! coframe `(dx^i, δy^i)`, and the frame operators `J, J*, h, v, F, F*`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::forms::AdaptedForm;
use crate::symbolic::{
    bind_params, canonicalize, derive, parse_expr, sym_equal, Atom, DerivOp, Derivation, Expr,
    Var,
};

/// Which index of `N[i][j]` is summed in `δ/δx^i = ∂/∂x^i − N ∂/∂y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IndexConvention {
    /// `δ/δx^i = ∂/∂x^i − Σ_j N[i][j] ∂/∂y^j`
    #[default]
    Standard,
    /// `δ/δx^i = ∂/∂x^i − Σ_j N[j][i] ∂/∂y^j`
    Transposed,
}

/// Coefficients `N[i][j]` of a nonlinear connection on an `n`-dimensional base.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    n: usize,
    entries: Vec<Vec<Expr>>,
    convention: IndexConvention,
}

impl Connection {
    pub fn zero(n: usize) -> Self {
        Connection {
            n,
            entries: vec![vec![Expr::zero(); n]; n],
            convention: IndexConvention::Standard,
        }
    }

    pub fn new(entries: Vec<Vec<Expr>>) -> Result<Self> {
        let n = entries.len();
        for row in &entries {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        for e in entries.iter().flatten() {
            if let Some(i) = e.max_index() {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, n });
                }
            }
        }
        Ok(Connection {
            n,
            entries: entries.iter().map(|r| r.iter().map(canonicalize).collect()).collect(),
            convention: IndexConvention::Standard,
        })
    }

    /// Parses a matrix of expression strings in dimension `n`.
    pub fn parse(rows: &[Vec<String>], n: usize) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        let mut entries = Vec::with_capacity(n);
        for row in rows {
            let parsed: Result<Vec<Expr>> = row
                .iter()
                .map(|s| parse_expr(s, n).map_err(Error::from))
                .collect();
            entries.push(parsed?);
        }
        Connection::new(entries)
    }

    pub fn with_convention(mut self, convention: IndexConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn convention(&self) -> IndexConvention {
        self.convention
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entry `N[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Expr>] {
        &self.entries
    }

    /// Coefficient of `∂/∂y^j` subtracted in `δ/δx^i`. The dual coframe is
    /// `δy^j = dy^j + Σ_i frame_coefficient(i, j) dx^i`.
    pub fn frame_coefficient(&self, i: usize, j: usize) -> &Expr {
        match self.convention {
            IndexConvention::Standard => &self.entries[i][j],
            IndexConvention::Transposed => &self.entries[j][i],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Expr::is_zero)
    }

    /// No entry depends on a coordinate or on time.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().flatten().all(|e| {
            e.symbols()
                .iter()
                .all(|s| matches!(s, crate::symbolic::Symbol::Param(_)))
        })
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| sym_equal(&self.entries[i][j], &self.entries[j][i]).equal))
    }

    pub fn bind_params(&self, params: &BTreeMap<String, f64>) -> Self {
        Connection {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|e| bind_params(e, params)).collect())
                .collect(),
            convention: self.convention,
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        }
    }
}

/// The derivation `δ/δx^i`. On an opaque atom it records the adapted
/// derivative in the atom's chain instead of expanding it.
pub struct AdaptedDerivative<'a> {
    pub index: usize,
    pub connection: &'a Connection,
}

impl Derivation for AdaptedDerivative<'_> {
    fn of_var(&self, v: Var) -> Expr {
        match v {
            Var::X(k) if k == self.index => Expr::one(),
            Var::Y(k) => -self.connection.frame_coefficient(self.index, k).clone(),
            _ => Expr::zero(),
        }
    }

    fn of_atom(&self, a: &Atom) -> Expr {
        if a.depends_on_bundle() {
            Expr::atom(a.then(DerivOp::Adapted(self.index)))
        } else {
            Expr::zero()
        }
    }
}

/// `δe/δx^i = ∂e/∂x^i − Σ_j N ∂e/∂y^j` (zero-based `i`).
pub fn adapted_dx(e: &Expr, i: usize, conn: &Connection) -> Result<Expr> {
    conn.check_index(i)?;
    Ok(derive(
        e,
        &AdaptedDerivative {
            index: i,
            connection: conn,
        },
    ))
}

/// Rewrites every adapted derivative recorded on opaque atoms in terms of
/// ordinary partials, using the chain rule through the connection.
pub fn expand_adapted_atoms(e: &Expr, conn: &Connection) -> Expr {
    use crate::symbolic::{differentiate, Symbol};
    canonicalize(&e.map_symbols(&|s| match s {
        Symbol::Atom(a) if a.has_adapted() => {
            let mut g = Expr::atom(a.base());
            for op in &a.chain {
                g = match *op {
                    DerivOp::Partial(v) => differentiate(&g, v),
                    DerivOp::Adapted(k) => {
                        let mut terms = vec![differentiate(&g, Var::X(k))];
                        for m in 0..conn.n() {
                            let c = conn.frame_coefficient(k, m);
                            if !c.is_zero() {
                                terms.push(-(c.clone() * differentiate(&g, Var::Y(m))));
                            }
                        }
                        canonicalize(&Expr::sum(terms))
                    }
                };
            }
            Some(g)
        }
        _ => None,
    }))
}

/// Vector field `Σ h^i δ/δx^i + Σ v^i ∂/∂y^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedVectorField {
    pub h: Vec<Expr>,
    pub v: Vec<Expr>,
}

impl AdaptedVectorField {
    pub fn new(h: Vec<Expr>, v: Vec<Expr>) -> Result<Self> {
        if h.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: h.len(),
                got: v.len(),
            });
        }
        Ok(AdaptedVectorField {
            h: h.iter().map(canonicalize).collect(),
            v: v.iter().map(canonicalize).collect(),
        })
    }

    pub fn zero(n: usize) -> Self {
        AdaptedVectorField {
            h: vec![Expr::zero(); n],
            v: vec![Expr::zero(); n],
        }
    }

    /// `δ/δx^i`
    pub fn horizontal_basis(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.h[i] = Expr::one();
        f
    }

    /// `∂/∂y^i`
    pub fn vertical_basis(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.v[i] = Expr::one();
        f
    }

    /// Field whose components are the parameters `<prefix>h<i>`, `<prefix>v<i>`.
    pub fn generic(n: usize, prefix: &str) -> Self {
        AdaptedVectorField {
            h: (1..=n).map(|i| Expr::param(&format!("{prefix}h{i}"))).collect(),
            v: (1..=n).map(|i| Expr::param(&format!("{prefix}v{i}"))).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// Component along the `p`-th adapted basis vector (horizontal first).
    pub fn component(&self, p: usize) -> &Expr {
        let n = self.n();
        if p < n {
            &self.h[p]
        } else {
            &self.v[p - n]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().chain(&self.v).all(Expr::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        AdaptedVectorField {
            h: self.h.iter().map(|e| canonicalize(&f(e))).collect(),
            v: self.v.iter().map(|e| canonicalize(&f(e))).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        AdaptedVectorField {
            h: zip_canon(&self.h, &other.h, |a, b| a + b),
            v: zip_canon(&self.v, &other.v, |a, b| a + b),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        AdaptedVectorField {
            h: zip_canon(&self.h, &other.h, |a, b| a - b),
            v: zip_canon(&self.v, &other.v, |a, b| a - b),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    /// The field acting on a function: `X(f) = h^i δf/δx^i + v^i ∂f/∂y^i`.
    pub fn apply_to(&self, f: &Expr, conn: &Connection) -> Result<Expr> {
        let mut terms = Vec::with_capacity(2 * self.n());
        for i in 0..self.n() {
            terms.push(self.h[i].clone() * adapted_dx(f, i, conn)?);
            terms.push(self.v[i].clone() * crate::symbolic::differentiate(f, Var::Y(i)));
        }
        Ok(canonicalize(&Expr::sum(terms)))
    }

    /// Componentwise symbolic equality.
    pub fn sym_eq(&self, other: &Self) -> bool {
        self.n() == other.n()
            && self
                .h
                .iter()
                .chain(&self.v)
                .zip(other.h.iter().chain(&other.v))
                .all(|(a, b)| sym_equal(a, b).equal)
    }

    /// Converts natural components `a^k ∂/∂x^k + b^k ∂/∂y^k` to the adapted frame.
    pub fn from_natural(a: &[Expr], b: &[Expr], conn: &Connection) -> Self {
        let n = a.len();
        let v = (0..n)
            .map(|m| {
                let mut terms = vec![b[m].clone()];
                for k in 0..n {
                    terms.push(a[k].clone() * conn.frame_coefficient(k, m).clone());
                }
                canonicalize(&Expr::sum(terms))
            })
            .collect();
        AdaptedVectorField {
            h: a.iter().map(canonicalize).collect(),
            v,
        }
    }
}

fn zip_canon(a: &[Expr], b: &[Expr], f: impl Fn(Expr, Expr) -> Expr) -> Vec<Expr> {
    a.iter()
        .zip(b)
        .map(|(x, y)| canonicalize(&f(x.clone(), y.clone())))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameOperator {
    J,
    Jstar,
    H,
    V,
    F,
    Fstar,
}

impl fmt::Display for FrameOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameOperator::J => "J",
            FrameOperator::Jstar => "J*",
            FrameOperator::H => "h",
            FrameOperator::V => "v",
            FrameOperator::F => "F",
            FrameOperator::Fstar => "F*",
        })
    }
}

/// Applies `J`, `h`, `v` or `F` to a vector field.
///
/// `J(δ/δx^i) = ∂/∂y^i`, `J(∂/∂y^i) = 0`; `h` keeps the horizontal part,
/// `v` the vertical part; `F(δ/δx^i) = −∂/∂y^i`, `F(∂/∂y^i) = δ/δx^i`.
pub fn apply_operator(op: FrameOperator, x: &AdaptedVectorField) -> Result<AdaptedVectorField> {
    let n = x.n();
    let zeros = || vec![Expr::zero(); n];
    Ok(match op {
        FrameOperator::J => AdaptedVectorField {
            h: zeros(),
            v: x.h.clone(),
        },
        FrameOperator::H => AdaptedVectorField {
            h: x.h.clone(),
            v: zeros(),
        },
        FrameOperator::V => AdaptedVectorField {
            h: zeros(),
            v: x.v.clone(),
        },
        FrameOperator::F => AdaptedVectorField {
            h: x.v.clone(),
            v: x.h.iter().map(|e| canonicalize(&-e)).collect(),
        },
        FrameOperator::Jstar | FrameOperator::Fstar => {
            return Err(Error::KindMismatch {
                op: if op == FrameOperator::Jstar { "J*" } else { "F*" },
                operand: "vector field",
            })
        }
    })
}

/// Applies `J*` or `F*` to a 1-form in the adapted coframe.
///
/// `F*(dx^i) = −δy^i`, `F*(δy^i) = dx^i` act directly. `J*(dx^i) = dy^i`,
/// `J*(dy^i) = 0` are defined on the natural coframe, so the form is
/// converted there and back.
pub fn apply_costar(op: FrameOperator, form: &AdaptedForm, conn: &Connection) -> Result<AdaptedForm> {
    if form.degree() != 1 {
        return Err(Error::KindMismatch {
            op: if op == FrameOperator::Jstar { "J*" } else { "F*" },
            operand: "form of degree other than 1",
        });
    }
    let n = form.n();
    match op {
        FrameOperator::Fstar => {
            let dx: Vec<Expr> = (0..n).map(|i| form.dy(i).clone()).collect();
            let dy: Vec<Expr> = (0..n).map(|i| -form.dx(i).clone()).collect();
            Ok(AdaptedForm::one_form(dx, dy))
        }
        FrameOperator::Jstar => {
            let (a, _b) = to_natural_coframe(form, conn)?;
            Ok(to_adapted_coframe(&vec![Expr::zero(); n], &a, conn))
        }
        _ => Err(Error::KindMismatch {
            op: match op {
                FrameOperator::J => "J",
                FrameOperator::H => "h",
                FrameOperator::V => "v",
                _ => "F",
            },
            operand: "1-form",
        }),
    }
}

/// Rewrites `Σ a_i dx^i + Σ b_i dy^i` in the adapted coframe using
/// `dy^k = δy^k − Σ_i frame_coefficient(i, k) dx^i`.
pub fn to_adapted_coframe(a: &[Expr], b: &[Expr], conn: &Connection) -> AdaptedForm {
    let n = a.len();
    let dx = (0..n)
        .map(|i| {
            let mut terms = vec![a[i].clone()];
            for k in 0..n {
                terms.push(-(b[k].clone() * conn.frame_coefficient(i, k).clone()));
            }
            Expr::sum(terms)
        })
        .collect();
    AdaptedForm::one_form(dx, b.to_vec())
}

/// Inverse of [`to_adapted_coframe`]: natural coefficients `(a, b)` of a 1-form.
pub fn to_natural_coframe(form: &AdaptedForm, conn: &Connection) -> Result<(Vec<Expr>, Vec<Expr>)> {
    if form.degree() != 1 {
        return Err(Error::DegreeOutOfRange(form.degree()));
    }
    let n = form.n();
    let a = (0..n)
        .map(|i| {
            let mut terms = vec![form.dx(i).clone()];
            for k in 0..n {
                terms.push(form.dy(k).clone() * conn.frame_coefficient(i, k).clone());
            }
            canonicalize(&Expr::sum(terms))
        })
        .collect();
    let b = (0..n).map(|k| form.dy(k).clone()).collect();
    Ok((a, b))
}

/// The bracket `[δ/δx^i, δ/δx^j]`, obtained by applying the adapted
/// derivatives in both orders to every coordinate function.
pub fn commutator_defect(conn: &Connection, i: usize, j: usize) -> Result<AdaptedVectorField> {
    conn.check_index(i)?;
    conn.check_index(j)?;
    let n = conn.n();
    let bracket = |f: &Expr| -> Result<Expr> {
        let ij = adapted_dx(&adapted_dx(f, j, conn)?, i, conn)?;
        let ji = adapted_dx(&adapted_dx(f, i, conn)?, j, conn)?;
        Ok(canonicalize(&(ij - ji)))
    };
    let a: Result<Vec<Expr>> = (0..n).map(|k| bracket(&Expr::x(k))).collect();
    let b: Result<Vec<Expr>> = (0..n).map(|k| bracket(&Expr::y(k))).collect();
    Ok(AdaptedVectorField::from_natural(&a?, &b?, conn))
}

/// True when some `[δ/δx^i, δ/δx^j]` does not vanish identically.
pub fn has_commutator_defect(conn: &Connection) -> Result<bool> {
    for i in 0..conn.n() {
        for j in i + 1..conn.n() {
            if !commutator_defect(conn, i, j)?.sym_eq(&AdaptedVectorField::zero(conn.n())) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
