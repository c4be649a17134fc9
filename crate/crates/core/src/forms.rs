//! Differential forms of degree at most two in the adapted coframe
//! `(dx^1..dx^n, δy^1..δy^n)`.
//!
//! Internally the coframe is numbered `e_0..e_{2n-1}` with the `dx` first,
//! so wedge, interior product and the exterior derivative are written once
//! over index pairs. A 2-form is exposed as three blocks:
//! `Σ_{i<j} A_ij dx^i∧dx^j + Σ_{i,j} B_ij dx^i∧δy^j + Σ_{i<j} C_ij δy^i∧δy^j`.

use std::collections::BTreeMap;

use crate::adapted::{adapted_dx, AdaptedVectorField, Connection};
use crate::error::{Error, Result};
use crate::symbolic::{canonicalize, differentiate, evaluate, sym_equal, Env, EvalError, Expr, Var};

#[derive(Clone, Debug, PartialEq)]
enum Body {
    Scalar(Expr),
    One(Vec<Expr>),
    /// Strictly upper triangle of the `2n × 2n` coefficient matrix, row-major.
    Two(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedForm {
    n: usize,
    body: Body,
}

fn tri_index(dim: usize, p: usize, q: usize) -> usize {
    debug_assert!(p < q && q < dim);
    p * dim - p * (p + 1) / 2 + (q - p - 1)
}

impl AdaptedForm {
    pub fn scalar(n: usize, e: Expr) -> Self {
        AdaptedForm {
            n,
            body: Body::Scalar(canonicalize(&e)),
        }
    }

    /// `Σ dx_coef[i] dx^i + Σ dy_coef[i] δy^i`
    pub fn one_form(dx_coef: Vec<Expr>, dy_coef: Vec<Expr>) -> Self {
        assert_eq!(dx_coef.len(), dy_coef.len());
        let n = dx_coef.len();
        AdaptedForm {
            n,
            body: Body::One(dx_coef.iter().chain(&dy_coef).map(canonicalize).collect()),
        }
    }

    /// Builds a 2-form from full blocks. Only the strictly upper triangles
    /// of `a` and `c` are read, which is the convention for the JSON output.
    pub fn two_form(a: &[Vec<Expr>], b: &[Vec<Expr>], c: &[Vec<Expr>]) -> Self {
        let n = b.len();
        let mut f = Self::zero(n, 2);
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    f.add_wedge(i, j, a[i][j].clone());
                    f.add_wedge(n + i, n + j, c[i][j].clone());
                }
                f.add_wedge(i, n + j, b[i][j].clone());
            }
        }
        f.canonicalized()
    }

    pub fn zero(n: usize, degree: usize) -> Self {
        let dim = 2 * n;
        let body = match degree {
            0 => Body::Scalar(Expr::zero()),
            1 => Body::One(vec![Expr::zero(); dim]),
            2 => Body::Two(vec![Expr::zero(); dim * dim.saturating_sub(1) / 2]),
            _ => panic!("degree {degree} is not stored"),
        };
        AdaptedForm { n, body }
    }

    pub fn dx_basis(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n, 1);
        f.set_comp(i, Expr::one());
        f
    }

    pub fn dy_basis(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n, 1);
        f.set_comp(n + i, Expr::one());
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        match self.body {
            Body::Scalar(_) => 0,
            Body::One(_) => 1,
            Body::Two(_) => 2,
        }
    }

    pub fn as_scalar(&self) -> Option<&Expr> {
        match &self.body {
            Body::Scalar(e) => Some(e),
            _ => None,
        }
    }

    /// Coefficient of `dx^i` in a 1-form.
    pub fn dx(&self, i: usize) -> &Expr {
        self.comp(i)
    }

    /// Coefficient of `δy^i` in a 1-form.
    pub fn dy(&self, i: usize) -> &Expr {
        self.comp(self.n + i)
    }

    /// `A_ij`, antisymmetric.
    pub fn a(&self, i: usize, j: usize) -> Expr {
        self.pair(i, j)
    }

    /// `B_ij`, coefficient of `dx^i∧δy^j`.
    pub fn b(&self, i: usize, j: usize) -> Expr {
        self.pair(i, self.n + j)
    }

    /// `C_ij`, antisymmetric.
    pub fn c(&self, i: usize, j: usize) -> Expr {
        self.pair(self.n + i, self.n + j)
    }

    /// Full `n × n` blocks `(A, B, C)` of a 2-form.
    pub fn blocks(&self) -> (Vec<Vec<Expr>>, Vec<Vec<Expr>>, Vec<Vec<Expr>>) {
        let n = self.n;
        let grid = |f: &dyn Fn(usize, usize) -> Expr| -> Vec<Vec<Expr>> {
            (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
        };
        (
            grid(&|i, j| self.a(i, j)),
            grid(&|i, j| self.b(i, j)),
            grid(&|i, j| self.c(i, j)),
        )
    }

    /// Coefficient of `e_p` in a 1-form.
    pub fn comp(&self, p: usize) -> &Expr {
        match &self.body {
            Body::One(v) => &v[p],
            _ => panic!("comp on a form of degree {}", self.degree()),
        }
    }

    fn set_comp(&mut self, p: usize, e: Expr) {
        match &mut self.body {
            Body::One(v) => v[p] = e,
            _ => panic!("set_comp on a form of degree {}", self.degree()),
        }
    }

    /// Antisymmetric coefficient `ω(e_p, e_q)` of a 2-form.
    pub fn pair(&self, p: usize, q: usize) -> Expr {
        let Body::Two(v) = &self.body else {
            panic!("pair on a form of degree {}", self.degree())
        };
        let dim = 2 * self.n;
        match p.cmp(&q) {
            std::cmp::Ordering::Less => v[tri_index(dim, p, q)].clone(),
            std::cmp::Ordering::Greater => canonicalize(&-v[tri_index(dim, q, p)].clone()),
            std::cmp::Ordering::Equal => Expr::zero(),
        }
    }

    /// Adds `e · e_p∧e_q` (not canonicalized).
    pub fn add_wedge(&mut self, p: usize, q: usize, e: Expr) {
        if p == q || e.is_zero() {
            return;
        }
        let dim = 2 * self.n;
        let Body::Two(v) = &mut self.body else {
            panic!("add_wedge on a form of degree other than 2")
        };
        let (k, e) = if p < q {
            (tri_index(dim, p, q), e)
        } else {
            (tri_index(dim, q, p), -e)
        };
        v[k] = v[k].clone() + e;
    }

    fn coefficients_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.body {
            Body::Scalar(e) => vec![e],
            Body::One(v) | Body::Two(v) => v.iter_mut().collect(),
        }
    }

    pub fn coefficients(&self) -> Vec<&Expr> {
        match &self.body {
            Body::Scalar(e) => vec![e],
            Body::One(v) | Body::Two(v) => v.iter().collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        let mut out = self.clone();
        for c in out.coefficients_mut() {
            *c = canonicalize(&f(c));
        }
        out
    }

    pub fn canonicalized(&self) -> Self {
        self.map(Expr::clone)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(|e| e.is_zero())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.degree() != other.degree() {
            return Err(Error::KindMismatch {
                op: "form sum",
                operand: "forms of different degree",
            });
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(Expr, Expr) -> Expr) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (c, o) in out.coefficients_mut().into_iter().zip(other.coefficients()) {
            *c = canonicalize(&f(c.clone(), o.clone()));
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e.clone())
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.map(|e| s.clone() * e.clone())
    }

    /// Coefficientwise symbolic equality.
    pub fn sym_eq(&self, other: &Self) -> bool {
        self.mismatches(other).is_some_and(|m| m.is_empty())
    }

    /// Labels of the coefficients on which two forms differ, or `None` when
    /// their degree or dimension differ.
    pub fn mismatches(&self, other: &Self) -> Option<Vec<String>> {
        self.check_same(other).ok()?;
        let mut out = Vec::new();
        let labels = self.labels();
        for ((a, b), label) in self.coefficients().into_iter().zip(other.coefficients()).zip(labels) {
            if !sym_equal(a, b).equal {
                out.push(label);
            }
        }
        Some(out)
    }

    fn labels(&self) -> Vec<String> {
        let n = self.n;
        let name = |p: usize| {
            if p < n {
                format!("dx{}", p + 1)
            } else {
                format!("dy{}", p - n + 1)
            }
        };
        match &self.body {
            Body::Scalar(_) => vec!["scalar".into()],
            Body::One(_) => (0..2 * n).map(name).collect(),
            Body::Two(_) => {
                let mut v = Vec::new();
                for p in 0..2 * n {
                    for q in p + 1..2 * n {
                        v.push(format!("{}^{}", name(p), name(q)));
                    }
                }
                v
            }
        }
    }

    /// Evaluates the form on `degree` vector fields given by numeric
    /// adapted components. Used as a multilinear oracle in tests.
    pub fn evaluate_on(&self, vectors: &[Vec<f64>], env: &impl Env) -> Result<f64, EvalError> {
        let dim = 2 * self.n;
        match &self.body {
            Body::Scalar(e) => evaluate(e, env),
            Body::One(v) => {
                let mut s = 0.0;
                for p in 0..dim {
                    s += evaluate(&v[p], env)? * vectors[0][p];
                }
                Ok(s)
            }
            Body::Two(_) => {
                let mut s = 0.0;
                for p in 0..dim {
                    for q in p + 1..dim {
                        let w = evaluate(&self.pair(p, q), env)?;
                        s += w * (vectors[0][p] * vectors[1][q] - vectors[0][q] * vectors[1][p]);
                    }
                }
                Ok(s)
            }
        }
    }
}

/// A 3-form, returned only to check closure. Keys are sorted index triples
/// over the combined coframe; absent keys are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ThreeForm {
    pub n: usize,
    pub coefficients: BTreeMap<(usize, usize, usize), Expr>,
}

impl ThreeForm {
    /// Entries that are not identically zero.
    pub fn nonzero_terms(&self) -> Vec<((usize, usize, usize), Expr)> {
        self.coefficients
            .iter()
            .filter(|(_, e)| !sym_equal(e, &Expr::zero()).equal)
            .map(|(k, e)| (*k, e.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero_terms().is_empty()
    }
}

/// Sign and sorted order of a permutation of three distinct indices.
fn sort3(mut k: [usize; 3]) -> Option<(i64, (usize, usize, usize))> {
    if k[0] == k[1] || k[1] == k[2] || k[0] == k[2] {
        return None;
    }
    let mut sign = 1;
    for i in 0..3 {
        for j in 0..2 - i {
            if k[j] > k[j + 1] {
                k.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    Some((sign, (k[0], k[1], k[2])))
}

pub fn wedge(f: &AdaptedForm, g: &AdaptedForm) -> Result<AdaptedForm> {
    if f.n != g.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            got: g.n,
        });
    }
    match (f.degree(), g.degree()) {
        (0, _) => Ok(g.scale(f.as_scalar().unwrap())),
        (_, 0) => Ok(f.scale(g.as_scalar().unwrap())),
        (1, 1) => {
            let dim = 2 * f.n;
            let mut out = AdaptedForm::zero(f.n, 2);
            for p in 0..dim {
                for q in 0..dim {
                    out.add_wedge(p, q, f.comp(p).clone() * g.comp(q).clone());
                }
            }
            Ok(out.canonicalized())
        }
        (a, b) => Err(Error::DegreeOutOfRange(a + b)),
    }
}

/// The derivative dual to `e_r`: `δ/δx^r` for `r < n`, otherwise `∂/∂y^{r-n}`.
fn frame_derivative(e: &Expr, r: usize, n: usize, conn: &Connection) -> Result<Expr> {
    if r < n {
        adapted_dx(e, r, conn)
    } else {
        Ok(differentiate(e, Var::Y(r - n)))
    }
}

/// Formal exterior derivative: `d(Σ w_I e^I) = Σ_r Σ_I D_r(w_I) e^r∧e^I`,
/// with `D_r` the frame derivatives. Degrees 0 and 1 are supported;
/// use [`exterior_d3`] to differentiate a 2-form.
pub fn exterior_d(f: &AdaptedForm, conn: &Connection) -> Result<AdaptedForm> {
    check_conn(f, conn)?;
    let n = f.n;
    let dim = 2 * n;
    match f.degree() {
        0 => {
            let e = f.as_scalar().unwrap();
            let mut coefs = Vec::with_capacity(dim);
            for r in 0..dim {
                coefs.push(frame_derivative(e, r, n, conn)?);
            }
            let dy = coefs.split_off(n);
            Ok(AdaptedForm::one_form(coefs, dy))
        }
        1 => {
            let mut out = AdaptedForm::zero(n, 2);
            for q in 0..dim {
                if f.comp(q).is_zero() {
                    continue;
                }
                for r in 0..dim {
                    out.add_wedge(r, q, frame_derivative(f.comp(q), r, n, conn)?);
                }
            }
            Ok(out.canonicalized())
        }
        d => Err(Error::DegreeOutOfRange(d + 1)),
    }
}

/// Formal exterior derivative of a 2-form.
pub fn exterior_d3(f: &AdaptedForm, conn: &Connection) -> Result<ThreeForm> {
    check_conn(f, conn)?;
    if f.degree() != 2 {
        return Err(Error::DegreeOutOfRange(f.degree()));
    }
    let n = f.n;
    let dim = 2 * n;
    let mut acc: BTreeMap<(usize, usize, usize), Vec<Expr>> = BTreeMap::new();
    for p in 0..dim {
        for q in p + 1..dim {
            let w = f.pair(p, q);
            if w.is_zero() {
                continue;
            }
            for r in 0..dim {
                let Some((sign, key)) = sort3([r, p, q]) else {
                    continue;
                };
                let d = frame_derivative(&w, r, n, conn)?;
                if !d.is_zero() {
                    acc.entry(key).or_default().push(Expr::int(sign) * d);
                }
            }
        }
    }
    Ok(ThreeForm {
        n,
        coefficients: acc
            .into_iter()
            .map(|(k, v)| (k, canonicalize(&Expr::sum(v))))
            .collect(),
    })
}

fn check_conn(f: &AdaptedForm, conn: &Connection) -> Result<()> {
    if f.n == conn.n() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: conn.n(),
            got: f.n,
        })
    }
}

/// Interior product `i_X`, contracting the first slot.
pub fn interior(x: &AdaptedVectorField, f: &AdaptedForm) -> Result<AdaptedForm> {
    if x.n() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            got: x.n(),
        });
    }
    let n = f.n;
    let dim = 2 * n;
    match f.degree() {
        0 => Ok(AdaptedForm::scalar(n, Expr::zero())),
        1 => {
            let terms = (0..dim).map(|p| x.component(p).clone() * f.comp(p).clone());
            Ok(AdaptedForm::scalar(n, Expr::sum(terms)))
        }
        _ => {
            let mut coefs = vec![Vec::new(); dim];
            for p in 0..dim {
                if x.component(p).is_zero() {
                    continue;
                }
                for (q, c) in coefs.iter_mut().enumerate() {
                    c.push(x.component(p).clone() * f.pair(p, q));
                }
            }
            let mut flat: Vec<Expr> = coefs.into_iter().map(Expr::sum).collect();
            let dy = flat.split_off(n);
            Ok(AdaptedForm::one_form(flat, dy))
        }
    }
}

/// `i_F(e_p)`: `dx^i ↦ δy^i`, `δy^i ↦ −dx^i`, as (index, sign).
fn f_on_coframe(p: usize, n: usize) -> (usize, i64) {
    if p < n {
        (p + n, 1)
    } else {
        (p - n, -1)
    }
}

/// The derivation `i_F` of degree zero induced by the almost complex
/// structure: `i_F(ω)(X_1..X_k) = Σ_j ω(X_1..F X_j..X_k)`.
pub fn vertical_derivation(f: &AdaptedForm) -> AdaptedForm {
    let n = f.n;
    let dim = 2 * n;
    match f.degree() {
        0 => AdaptedForm::scalar(n, Expr::zero()),
        1 => {
            let dx = (0..n).map(|i| -f.dy(i).clone()).collect();
            let dy = (0..n).map(|i| f.dx(i).clone()).collect();
            AdaptedForm::one_form(dx, dy)
        }
        _ => {
            let mut out = AdaptedForm::zero(n, 2);
            for p in 0..dim {
                for q in p + 1..dim {
                    let w = f.pair(p, q);
                    if w.is_zero() {
                        continue;
                    }
                    let (fp, sp) = f_on_coframe(p, n);
                    let (fq, sq) = f_on_coframe(q, n);
                    out.add_wedge(fp, q, Expr::int(sp) * w.clone());
                    out.add_wedge(p, fq, Expr::int(sq) * w);
                }
            }
            out.canonicalized()
        }
    }
}

/// `d_F = [i_F, d]`. On functions this is `i_F(d f)`:
/// `d_F f = −∂f/∂y^i dx^i + δf/δx^i δy^i`.
pub fn vertical_differential(e: &Expr, conn: &Connection) -> Result<AdaptedForm> {
    let df = exterior_d(&AdaptedForm::scalar(conn.n(), e.clone()), conn)?;
    Ok(vertical_derivation(&df))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapted::{apply_operator, FrameOperator};
    use crate::symbolic::{parse_expr, Point};
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> Expr {
        parse_expr(s, n).unwrap()
    }

    fn conn(rows: &[&[&str]]) -> Connection {
        let n = rows.len();
        Connection::new(rows.iter().map(|r| r.iter().map(|s| p(s, n)).collect()).collect()).unwrap()
    }

    fn one(dx: &[&str], dy: &[&str]) -> AdaptedForm {
        let n = dx.len();
        AdaptedForm::one_form(
            dx.iter().map(|s| p(s, n)).collect(),
            dy.iter().map(|s| p(s, n)).collect(),
        )
    }

    #[test]
    fn block_layout() {
        let n = 2;
        let z = || vec![vec![Expr::zero(); n]; n];
        let mut a = z();
        a[0][1] = Expr::int(3);
        let mut b = z();
        b[1][0] = Expr::int(5);
        let f = AdaptedForm::two_form(&a, &b, &z());
        assert_eq!(f.a(0, 1), Expr::int(3));
        assert_eq!(f.a(1, 0), Expr::int(-3));
        assert_eq!(f.b(1, 0), Expr::int(5));
        assert_eq!(f.b(0, 1), Expr::zero());
        assert_eq!(f.pair(n, 1), Expr::int(-5));
        let (fa, fb, _) = f.blocks();
        assert_eq!(AdaptedForm::two_form(&fa, &fb, &z()), f);
    }

    #[test]
    fn wedge_of_basis() {
        let w = wedge(&AdaptedForm::dy_basis(1, 0), &AdaptedForm::dx_basis(1, 0)).unwrap();
        assert_eq!(w.b(0, 0), Expr::int(-1));
        assert!(wedge(&AdaptedForm::dx_basis(1, 0), &AdaptedForm::dx_basis(1, 0))
            .unwrap()
            .is_zero());
        assert!(matches!(wedge(&w, &AdaptedForm::dx_basis(1, 0)), Err(Error::DegreeOutOfRange(3))));
    }

    #[test]
    fn d_of_functions_with_zero_connection() {
        let c = Connection::zero(1);
        let d = exterior_d(&AdaptedForm::scalar(1, p("x1^2*y1", 1)), &c).unwrap();
        assert!(d.sym_eq(&one(&["2*x1*y1"], &["x1^2"])));
    }

    #[test]
    fn d_of_delta_y_for_constant_connection() {
        // δy = dy + c dx is closed when c is constant
        let c = conn(&[&["c"]]);
        assert!(exterior_d(&AdaptedForm::dy_basis(1, 0), &c).unwrap().is_zero());
    }

    #[test]
    fn d_squared_on_functions_constant_connection() {
        let c = conn(&[&["a", "b"], &["0", "c"]]);
        let f = p("sin(x1*y2) + x2^2*y1^3 + exp(y2)", 2);
        let df = exterior_d(&AdaptedForm::scalar(2, f), &c).unwrap();
        assert!(exterior_d(&df, &c).unwrap().is_zero());
    }

    #[test]
    fn d_squared_fails_with_curvature() {
        // [δ1, δ2] ≠ 0 here, so the formal d is not nilpotent on functions
        let c = conn(&[&["0", "x2"], &["0", "0"]]);
        let f = p("y2", 2);
        let df = exterior_d(&AdaptedForm::scalar(2, f), &c).unwrap();
        assert!(!exterior_d(&df, &c).unwrap().is_zero());
    }

    #[test]
    fn closure_of_symplectic_candidate() {
        let c = Connection::zero(2);
        let mut w = AdaptedForm::zero(2, 2);
        for i in 0..2 {
            w.add_wedge(2 + i, i, Expr::one());
        }
        assert!(exterior_d3(&w, &c).unwrap().is_zero());
        let mut bad = w.clone();
        bad.add_wedge(0, 1, Expr::y(0));
        let d = exterior_d3(&bad, &c).unwrap();
        assert_eq!(d.nonzero_terms().len(), 1);
    }

    #[test]
    fn interior_of_one_form() {
        let x = AdaptedVectorField::new(vec![p("2", 1)], vec![p("y1", 1)]).unwrap();
        let got = interior(&x, &one(&["x1"], &["3"])).unwrap();
        assert!(sym_equal(got.as_scalar().unwrap(), &p("2*x1 + 3*y1", 1)).equal);
    }

    #[test]
    fn vertical_derivation_on_one_forms() {
        assert!(vertical_derivation(&AdaptedForm::dx_basis(1, 0)).sym_eq(&AdaptedForm::dy_basis(1, 0)));
        assert!(vertical_derivation(&AdaptedForm::dy_basis(1, 0))
            .sym_eq(&AdaptedForm::dx_basis(1, 0).neg()));
    }

    #[test]
    fn vertical_differential_of_a_function() {
        let c = conn(&[&["c"]]);
        let got = vertical_differential(&p("x1*y1", 1), &c).unwrap();
        assert!(got.sym_eq(&one(&["-x1"], &["y1 - c*x1"])));
    }

    fn basis_vector(n: usize, p: usize) -> Vec<f64> {
        let mut v = vec![0.0; 2 * n];
        v[p] = 1.0;
        v
    }

    fn f_numeric(v: &[f64]) -> Vec<f64> {
        // F(δ_i) = −∂y_i, F(∂y_i) = δ_i
        let n = v.len() / 2;
        let mut out = vec![0.0; 2 * n];
        for i in 0..n {
            out[i] = v[n + i];
            out[n + i] = -v[i];
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn interior_agrees_with_evaluation(
            coefs in proptest::collection::vec(-3i64..=3, 6),
            xs in proptest::collection::vec(-3i64..=3, 4),
            ys in proptest::collection::vec(-3i64..=3, 4),
        ) {
            // 2-form with integer coefficients on n = 2
            let n = 2;
            let mut w = AdaptedForm::zero(n, 2);
            let mut k = 0;
            for a in 0..4 {
                for b in a + 1..4 {
                    w.add_wedge(a, b, Expr::int(coefs[k]));
                    k += 1;
                }
            }
            let w = w.canonicalized();
            let x = AdaptedVectorField::new(
                xs[..2].iter().map(|&v| Expr::int(v)).collect(),
                xs[2..].iter().map(|&v| Expr::int(v)).collect(),
            ).unwrap();
            let xf: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
            let yf: Vec<f64> = ys.iter().map(|&v| v as f64).collect();
            let env = Point::new(n);
            let lhs = interior(&x, &w).unwrap().evaluate_on(&[yf.clone()], &env).unwrap();
            let rhs = w.evaluate_on(&[xf, yf], &env).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn vertical_derivation_agrees_with_evaluation(
            coefs in proptest::collection::vec(-3i64..=3, 6),
            a in 0usize..4,
            b in 0usize..4,
        ) {
            let n = 2;
            let mut w = AdaptedForm::zero(n, 2);
            let mut k = 0;
            for p in 0..4 {
                for q in p + 1..4 {
                    w.add_wedge(p, q, Expr::int(coefs[k]));
                    k += 1;
                }
            }
            let w = w.canonicalized();
            let env = Point::new(n);
            let (u, v) = (basis_vector(n, a), basis_vector(n, b));
            let lhs = vertical_derivation(&w).evaluate_on(&[u.clone(), v.clone()], &env).unwrap();
            let rhs = w.evaluate_on(&[f_numeric(&u), v.clone()], &env).unwrap()
                + w.evaluate_on(&[u, f_numeric(&v)], &env).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn wedge_is_antisymmetric(
            f in proptest::collection::vec(-3i64..=3, 4),
            g in proptest::collection::vec(-3i64..=3, 4),
        ) {
            let mk = |v: &[i64]| AdaptedForm::one_form(
                v[..2].iter().map(|&c| Expr::int(c)).collect(),
                v[2..].iter().map(|&c| Expr::int(c)).collect(),
            );
            let (a, b) = (mk(&f), mk(&g));
            prop_assert!(wedge(&a, &b).unwrap().sym_eq(&wedge(&b, &a).unwrap().neg()));
        }
    }

    #[test]
    fn f_numeric_matches_operator() {
        let x = AdaptedVectorField::new(vec![p("2", 1)], vec![p("5", 1)]).unwrap();
        let fx = apply_operator(FrameOperator::F, &x).unwrap();
        assert_eq!(fx.h[0], Expr::int(5));
        assert_eq!(fx.v[0], Expr::int(-2));
        assert_eq!(f_numeric(&[2.0, 5.0]), vec![5.0, -2.0]);
    }
}
