//! Lagrangian side: semispray and Liouville fields, the fundamental 2-form
//! `Φ_L = −d d_F L`, the energy `E_L`, and the Euler-Lagrange residuals
//! `d/dt(∂L/∂y^i) + δL/δx^i` and `d/dt(δL/δx^i) − ∂L/∂y^i`.

use std::collections::BTreeMap;

use crate::adapted::{
    adapted_dx, apply_operator, expand_adapted_atoms, AdaptedVectorField, Connection,
    FrameOperator,
};
use crate::check::CheckLine;
use crate::error::{Error, Result};
use crate::forms::{exterior_d, interior, vertical_differential, AdaptedForm};
use crate::integrate::{solve_velocities, ODESystem};
use crate::symbolic::{
    bind_params, canonicalize, differentiate, solve_linear, substitute, sym_equal, time_derivative,
    Atom, Expr, Symbol, Var,
};

/// Name of the conserved quantity attached to Euler-Lagrange systems.
pub const BRIDGE_NORM: &str = "bridge_norm";

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianModel {
    pub n: usize,
    pub connection: Connection,
    pub lagrangian: Expr,
    pub params: BTreeMap<String, f64>,
}

impl LagrangianModel {
    pub fn new(connection: Connection, lagrangian: Expr, params: BTreeMap<String, f64>) -> Result<Self> {
        let n = connection.n();
        check_bundle_function(&lagrangian, n)?;
        Ok(LagrangianModel {
            n,
            connection,
            lagrangian: canonicalize(&lagrangian),
            params,
        })
    }

    /// Model with an opaque Lagrangian `L(x, y)`.
    pub fn opaque(connection: Connection) -> Self {
        let n = connection.n();
        LagrangianModel {
            n,
            lagrangian: Expr::atom(Atom::on_bundle("L", n)),
            connection,
            params: BTreeMap::new(),
        }
    }

    /// Copy with every parameter of the table replaced by its value.
    pub fn bound(&self) -> Self {
        LagrangianModel {
            n: self.n,
            connection: self.connection.bind_params(&self.params),
            lagrangian: bind_params(&self.lagrangian, &self.params),
            params: self.params.clone(),
        }
    }

    fn dl_dy(&self, i: usize) -> Expr {
        differentiate(&self.lagrangian, Var::Y(i))
    }

    fn dl_dx(&self, i: usize) -> Expr {
        adapted_dx(&self.lagrangian, i, &self.connection).expect("index checked by caller")
    }
}

/// Rejects velocity symbols and out-of-range indices.
pub(crate) fn check_bundle_function(e: &Expr, n: usize) -> Result<()> {
    if let Some(i) = e.max_index() {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    for s in e.symbols() {
        if let Symbol::Var(v @ (Var::XDot(_) | Var::YDot(_))) = s {
            return Err(Error::Precondition(format!(
                "velocity {v} may not appear in a function on the bundle"
            )));
        }
    }
    Ok(())
}

/// `X = X^i δ/δx^i + Ẋ^i ∂/∂y^i` with `Ẋ` stored independently of `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemisprayField {
    pub x: Vec<Expr>,
    pub xdot: Vec<Expr>,
}

pub fn build_semispray(x: Vec<Expr>, xdot: Vec<Expr>) -> Result<SemisprayField> {
    if x.len() != xdot.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: xdot.len(),
        });
    }
    Ok(SemisprayField {
        x: x.iter().map(canonicalize).collect(),
        xdot: xdot.iter().map(canonicalize).collect(),
    })
}

impl SemisprayField {
    /// Components are the parameters `X1..Xn`, `Xdot1..Xdotn`.
    pub fn generic(n: usize) -> Self {
        SemisprayField {
            x: (0..n).map(|i| Expr::param(&generic_x(i))).collect(),
            xdot: (0..n).map(|i| Expr::param(&generic_xdot(i))).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn as_field(&self) -> AdaptedVectorField {
        AdaptedVectorField {
            h: self.x.clone(),
            v: self.xdot.clone(),
        }
    }
}

pub fn generic_x(i: usize) -> String {
    format!("X{}", i + 1)
}

pub fn generic_xdot(i: usize) -> String {
    format!("Xdot{}", i + 1)
}

/// `C = F(X) = Ẋ^i δ/δx^i − X^i ∂/∂y^i`.
pub fn liouville_field(x: &SemisprayField) -> AdaptedVectorField {
    apply_operator(FrameOperator::F, &x.as_field()).expect("F acts on vector fields")
}

/// `½ Σ m_i (y^i)²`.
pub fn kinetic_energy(masses: &[Expr]) -> Expr {
    canonicalize(&Expr::sum(masses.iter().enumerate().map(|(i, m)| {
        Expr::rational(1, 2) * m.clone() * Expr::y(i).powi(2)
    })))
}

/// `T − P`, with `T` from [`kinetic_energy`] unless overridden.
pub fn build_tp_lagrangian(masses: &[Expr], potential: &Expr, kinetic: Option<&Expr>) -> Expr {
    let t = kinetic.cloned().unwrap_or_else(|| kinetic_energy(masses));
    canonicalize(&(t - potential.clone()))
}

/// `Φ_L = −d(d_F L)` through the generic forms pipeline.
pub fn fundamental_form(m: &LagrangianModel) -> Result<AdaptedForm> {
    let df = vertical_differential(&m.lagrangian, &m.connection)?;
    Ok(exterior_d(&df, &m.connection)?.neg())
}

/// `Φ_L` assembled term by term from its four blocks:
/// `δ_j(∂L/∂y^i) dx^j∧dx^i − δ_jδ_i L dx^j∧δy^i + ∂²L/∂y^j∂y^i δy^j∧dx^i
///  − ∂(δ_i L)/∂y^j δy^j∧δy^i`.
pub fn fundamental_form_blocks(m: &LagrangianModel) -> Result<AdaptedForm> {
    let n = m.n;
    let conn = &m.connection;
    let mut phi = AdaptedForm::zero(n, 2);
    for i in 0..n {
        let ly = m.dl_dy(i);
        let lx = m.dl_dx(i);
        for j in 0..n {
            phi.add_wedge(j, i, adapted_dx(&ly, j, conn)?);
            phi.add_wedge(j, n + i, -adapted_dx(&lx, j, conn)?);
            phi.add_wedge(n + j, i, differentiate(&ly, Var::Y(j)));
            phi.add_wedge(n + j, n + i, -differentiate(&lx, Var::Y(j)));
        }
    }
    Ok(phi.canonicalized())
}

/// `E_L = −X^i ∂L/∂y^i + Ẋ^i δL/δx^i − L`.
pub fn energy(m: &LagrangianModel, x: &SemisprayField) -> Result<Expr> {
    check_field(m, x)?;
    let mut terms = vec![-m.lagrangian.clone()];
    for i in 0..m.n {
        terms.push(-(x.x[i].clone() * m.dl_dy(i)));
        terms.push(x.xdot[i].clone() * m.dl_dx(i));
    }
    Ok(canonicalize(&Expr::sum(terms)))
}

fn check_field(m: &LagrangianModel, x: &SemisprayField) -> Result<()> {
    if x.n() == m.n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: m.n,
            got: x.n(),
        })
    }
}

/// `i_X Φ_L`.
pub fn contract_fundamental(x: &SemisprayField, m: &LagrangianModel) -> Result<AdaptedForm> {
    check_field(m, x)?;
    interior(&x.as_field(), &fundamental_form(m)?)
}

/// `dE_L`, treating the semispray components as constants.
pub fn energy_differential(m: &LagrangianModel, x: &SemisprayField) -> Result<AdaptedForm> {
    check_field(m, x)?;
    let n = m.n;
    let frozen = SemisprayField {
        x: (0..n).map(|i| Expr::param(&format!("#X{i}"))).collect(),
        xdot: (0..n).map(|i| Expr::param(&format!("#Xdot{i}"))).collect(),
    };
    let mut thaw = BTreeMap::new();
    for i in 0..n {
        thaw.insert(Symbol::Param(format!("#X{i}")), x.x[i].clone());
        thaw.insert(Symbol::Param(format!("#Xdot{i}")), x.xdot[i].clone());
    }
    let e = energy(m, &frozen)?;
    let de = exterior_d(&AdaptedForm::scalar(n, e), &m.connection)?;
    Ok(de.map(|c| substitute(c, &thaw)))
}

/// The 1-form whose vanishing is `i_X Φ_L = dE_L`, written out:
/// `dx^j`: `X^i δ_i(∂L/∂y^j) + Ẋ^i ∂²L/∂y^i∂y^j + δL/δx^j`;
/// `δy^j`: `−X^i δ_iδ_j L − Ẋ^i ∂(δ_j L)/∂y^i + ∂L/∂y^j`.
pub fn residual_one_form(m: &LagrangianModel, x: &SemisprayField) -> Result<AdaptedForm> {
    check_field(m, x)?;
    let n = m.n;
    let conn = &m.connection;
    let mut dx = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for j in 0..n {
        let ly = m.dl_dy(j);
        let lx = m.dl_dx(j);
        let mut a = vec![lx.clone()];
        let mut b = vec![ly.clone()];
        for i in 0..n {
            a.push(x.x[i].clone() * adapted_dx(&ly, i, conn)?);
            a.push(x.xdot[i].clone() * differentiate(&ly, Var::Y(i)));
            b.push(-(x.x[i].clone() * adapted_dx(&lx, i, conn)?));
            b.push(-(x.xdot[i].clone() * differentiate(&lx, Var::Y(i))));
        }
        dx.push(Expr::sum(a));
        dy.push(Expr::sum(b));
    }
    Ok(AdaptedForm::one_form(dx, dy))
}

/// `R1_i = d/dt(∂L/∂y^i) + δL/δx^i` followed by `R2_i = d/dt(δL/δx^i) − ∂L/∂y^i`,
/// with `d/dt` introducing the velocity symbols `xdot`, `ydot`.
pub fn el_residual_exprs(m: &LagrangianModel) -> Vec<Expr> {
    let n = m.n;
    let mut r1 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    for i in 0..n {
        let ly = m.dl_dy(i);
        let lx = m.dl_dx(i);
        r1.push(canonicalize(&(time_derivative(&ly, n) + lx.clone())));
        r2.push(canonicalize(&(time_derivative(&lx, n) - ly)));
    }
    r1.extend(r2);
    r1
}

/// Diagnostic text attached to systems that cannot be solved for velocities.
pub const DEGENERATE: &str = "degenerate: residuals cannot be solved for the velocities";

/// Euler-Lagrange system: residuals, the explicit flow when the residuals
/// can be solved for `(ẋ, ẏ)`, and the monitor
/// `bridge_norm = ½ Σ ((δL/δx^i)² + (∂L/∂y^i)²)`, which the flow conserves.
pub fn el_residuals(m: &LagrangianModel) -> Result<ODESystem> {
    let n = m.n;
    let residuals = el_residual_exprs(m);
    let mut sys = match solve_velocities(&residuals, n) {
        Some(rhs) => ODESystem::explicit(n, rhs)?.with_residuals(residuals)?,
        None => {
            let mut s = ODESystem::residual(n, residuals)?;
            s.diagnostics.push(DEGENERATE.to_string());
            s
        }
    };
    if !hessian_regular(m) {
        sys.diagnostics
            .push("singular velocity Hessian: ∂²L/∂y∂y is not invertible".to_string());
    }
    let norm = Expr::rational(1, 2)
        * Expr::sum((0..n).flat_map(|i| [m.dl_dx(i).powi(2), m.dl_dy(i).powi(2)]));
    Ok(sys.with_monitor(BRIDGE_NORM, canonicalize(&norm)))
}

/// Classical residuals `d/dt(∂L/∂y^i) − δL/δx^i`, for comparison output.
pub fn classical_el_residuals(m: &LagrangianModel) -> Vec<Expr> {
    (0..m.n)
        .map(|i| canonicalize(&(time_derivative(&m.dl_dy(i), m.n) - m.dl_dx(i))))
        .collect()
}

/// Whether `∂²L/∂y^i∂y^j` is invertible.
pub fn hessian_regular(m: &LagrangianModel) -> bool {
    let n = m.n;
    let hess: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| differentiate(&m.dl_dy(i), Var::Y(j))).collect())
        .collect();
    solve_linear(&hess, &vec![Expr::zero(); n]).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckReport {
    pub lines: Vec<CheckLine>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

/// Compares after rewriting adapted derivatives of opaque functions.
fn same_function(a: &Expr, b: &Expr, conn: &Connection) -> std::result::Result<(), String> {
    let a = expand_adapted_atoms(a, conn);
    let b = expand_adapted_atoms(b, conn);
    if sym_equal(&a, &b).equal {
        Ok(())
    } else {
        Err(canonicalize(&(a - b)).to_string())
    }
}

fn compare_forms(
    name: &str,
    got: &AdaptedForm,
    want: &AdaptedForm,
    labels: impl Fn(usize) -> String,
    conn: &Connection,
) -> CheckLine {
    let mut details = Vec::new();
    for (k, (g, w)) in got.coefficients().into_iter().zip(want.coefficients()).enumerate() {
        if let Err(diff) = same_function(g, w, conn) {
            details.push(format!("{}: difference {diff}", labels(k)));
        }
    }
    CheckLine {
        name: name.to_string(),
        passed: details.is_empty(),
        details,
    }
}

fn pair_labels(n: usize) -> impl Fn(usize) -> String {
    let name = move |p: usize| {
        if p < n {
            format!("dx{}", p + 1)
        } else {
            format!("dy{}", p - n + 1)
        }
    };
    let mut labels = Vec::new();
    for p in 0..2 * n {
        for q in p + 1..2 * n {
            labels.push(format!("{}^{}", name(p), name(q)));
        }
    }
    move |k| labels[k].clone()
}

fn one_labels(n: usize) -> impl Fn(usize) -> String {
    move |k| {
        if k < n {
            format!("dx{}", k + 1)
        } else {
            format!("dy{}", k - n + 1)
        }
    }
}

/// Runs the derivation chain for the generic semispray and checks
/// 1. the forms pipeline and the four-block formula give the same `Φ_L`,
/// 2. `i_X Φ_L − dE_L` equals [`residual_one_form`],
/// 3. under `X^i ↦ ẋ^i`, `Ẋ^k ↦ ẏ^k + Σ_i ẋ^i N_ik` (the adapted components
///    of the velocity of a curve) the `dx^j` and `δy^j` coefficients become
///    `R1_j` and `−R2_j`.
pub fn derivation_crosscheck(m: &LagrangianModel) -> Result<CrosscheckReport> {
    derivation_crosscheck_with(m, None)
}

/// As [`derivation_crosscheck`], optionally replacing the pipeline's `Φ_L`.
pub fn derivation_crosscheck_with(
    m: &LagrangianModel,
    phi_override: Option<&AdaptedForm>,
) -> Result<CrosscheckReport> {
    let n = m.n;
    let conn = &m.connection;
    let x = SemisprayField::generic(n);
    let phi = match phi_override {
        Some(p) => p.clone(),
        None => fundamental_form(m)?,
    };
    let blocks = fundamental_form_blocks(m)?;
    let mut lines = vec![compare_forms(
        "fundamental form: pipeline vs blocks",
        &phi,
        &blocks,
        pair_labels(n),
        conn,
    )];

    let lhs = interior(&x.as_field(), &phi)?.sub(&energy_differential(m, &x)?)?;
    let want = residual_one_form(m, &x)?;
    lines.push(compare_forms(
        "contraction minus energy differential",
        &lhs,
        &want,
        one_labels(n),
        conn,
    ));

    let mut along_curve = BTreeMap::new();
    for i in 0..n {
        along_curve.insert(Symbol::Param(generic_x(i)), Expr::var(Var::XDot(i)));
        let mut v = vec![Expr::var(Var::YDot(i))];
        for k in 0..n {
            v.push(Expr::var(Var::XDot(k)) * conn.frame_coefficient(k, i).clone());
        }
        along_curve.insert(Symbol::Param(generic_xdot(i)), Expr::sum(v));
    }
    let residuals = el_residual_exprs(m);
    let mut details = Vec::new();
    for j in 0..n {
        let a = substitute(lhs.dx(j), &along_curve);
        if let Err(d) = same_function(&a, &residuals[j], conn) {
            details.push(format!("dx{}: difference {d}", j + 1));
        }
        let b = substitute(lhs.dy(j), &along_curve);
        if let Err(d) = same_function(&b, &-residuals[n + j].clone(), conn) {
            details.push(format!("dy{}: difference {d}", j + 1));
        }
    }
    lines.push(CheckLine {
        name: "integral-curve substitution vs Euler-Lagrange residuals".into(),
        passed: details.is_empty(),
        details,
    });
    Ok(CrosscheckReport { lines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_expr;

    fn p(s: &str, n: usize) -> Expr {
        parse_expr(s, n).unwrap()
    }

    fn model(l: &str, rows: &[&[&str]]) -> LagrangianModel {
        let n = rows.len();
        let conn = Connection::new(rows.iter().map(|r| r.iter().map(|s| p(s, n)).collect()).collect()).unwrap();
        LagrangianModel::new(conn, p(l, n), BTreeMap::new()).unwrap()
    }

    fn oscillator() -> LagrangianModel {
        model("1/2*m*y1^2 - 1/2*k*x1^2", &[&["0"]])
    }

    #[test]
    fn semispray_constructor() {
        let s = build_semispray(vec![p("a", 1)], vec![p("b", 1)]).unwrap();
        assert_eq!(s.as_field().h[0], p("a", 1));
        assert!(build_semispray(vec![p("a", 1)], vec![]).is_err());
        let zero = build_semispray(vec![Expr::zero()], vec![Expr::zero()]).unwrap();
        assert!(zero.as_field().is_zero());
    }

    #[test]
    fn liouville_components() {
        let x = SemisprayField::generic(1);
        let c = liouville_field(&x);
        assert_eq!(c.h[0], Expr::param("Xdot1"));
        assert_eq!(c.v[0], canonicalize(&-Expr::param("X1")));
        let fc = apply_operator(FrameOperator::F, &c).unwrap();
        assert!(fc.sym_eq(&x.as_field().neg()));
    }

    #[test]
    fn tp_lagrangian() {
        let m = [Expr::param("m")];
        let osc = build_tp_lagrangian(&m, &p("1/2*k*x1^2", 1), None);
        assert!(sym_equal(&osc, &p("1/2*m*y1^2 - 1/2*k*x1^2", 1)).equal);
        let fall = build_tp_lagrangian(&m, &p("m*g*x1", 1), None);
        assert!(sym_equal(&fall, &p("1/2*m*y1^2 - m*g*x1", 1)).equal);
        let free = build_tp_lagrangian(&m, &Expr::zero(), None);
        assert_eq!(free, kinetic_energy(&m));
        let over = build_tp_lagrangian(&m, &Expr::zero(), Some(&p("1/2*m*x1^2", 1)));
        assert!(sym_equal(&over, &p("1/2*m*x1^2", 1)).equal);
    }

    #[test]
    fn velocity_symbols_rejected() {
        let conn = Connection::zero(1);
        assert!(LagrangianModel::new(conn.clone(), p("xdot1", 1), BTreeMap::new()).is_err());
        assert!(matches!(
            LagrangianModel::new(conn, p("x2", 2), BTreeMap::new()),
            Err(Error::IndexOutOfRange { index: 1, n: 1 })
        ));
    }

    #[test]
    fn fundamental_form_of_free_particle() {
        let phi = fundamental_form(&model("1/2*y1^2", &[&["0"]])).unwrap();
        // δy1∧dx1 = −dx1∧δy1
        assert_eq!(phi.b(0, 0), Expr::int(-1));
    }

    #[test]
    fn fundamental_form_of_position_only_lagrangian() {
        let phi = fundamental_form(&model("x1^3 + x1*x2", &[&["0", "0"], &["0", "0"]])).unwrap();
        let (a, b, c) = phi.blocks();
        assert!(a.iter().flatten().chain(c.iter().flatten()).all(Expr::is_zero));
        assert!(sym_equal(&b[0][0], &p("-6*x1", 2)).equal);
        assert!(sym_equal(&b[0][1], &p("-1", 2)).equal);
        assert!(sym_equal(&b[1][0], &p("-1", 2)).equal);
    }

    #[test]
    fn two_routes_agree() {
        for m in [
            oscillator(),
            model("sin(x1)*y2^2 + x2*y1*y2", &[&["x1*y2", "a"], &["y1^2", "0"]]),
            LagrangianModel::opaque(Connection::new(vec![vec![p("c", 1)]]).unwrap()),
        ] {
            assert!(fundamental_form(&m).unwrap().sym_eq(&fundamental_form_blocks(&m).unwrap()));
        }
    }

    #[test]
    fn energy_examples() {
        let free = model("1/2*y1^2", &[&["0"]]);
        let x = SemisprayField::generic(1);
        let e = energy(&free, &x).unwrap();
        assert!(sym_equal(&e, &p("-X1*y1 - 1/2*y1^2", 1)).equal);
        let c = model("c", &[&["0"]]);
        let zero = build_semispray(vec![Expr::zero()], vec![Expr::zero()]).unwrap();
        assert!(sym_equal(&energy(&c, &zero).unwrap(), &p("-c", 1)).equal);
    }

    #[test]
    fn energy_is_liouville_derivative_minus_l() {
        let m = model("sin(x1)*y2^2 + x2*y1*y2", &[&["x1*y2", "a"], &["y1^2", "0"]]);
        let x = SemisprayField::generic(2);
        let cl = liouville_field(&x).apply_to(&m.lagrangian, &m.connection).unwrap();
        let want = canonicalize(&(cl - m.lagrangian.clone()));
        assert!(sym_equal(&energy(&m, &x).unwrap(), &want).equal);
    }

    #[test]
    fn contraction_and_energy_differential_for_free_particle() {
        let free = model("1/2*y1^2", &[&["0"]]);
        let x = SemisprayField::generic(1);
        let ix = contract_fundamental(&x, &free).unwrap();
        assert!(ix.sym_eq(&AdaptedForm::one_form(vec![p("Xdot1", 1)], vec![p("-X1", 1)])));
        let de = energy_differential(&free, &x).unwrap();
        assert!(de.sym_eq(&AdaptedForm::one_form(vec![Expr::zero()], vec![p("-X1 - y1", 1)])));
    }

    #[test]
    fn energy_differential_freezes_components() {
        let m = model("x1*y1", &[&["0"]]);
        let x = build_semispray(vec![p("x1", 1)], vec![Expr::zero()]).unwrap();
        // E = −K x1 − x1 y1 with K = x1 frozen: dE = (−K − y1) dx1 − x1 δy1
        let de = energy_differential(&m, &x).unwrap();
        assert!(de.sym_eq(&AdaptedForm::one_form(vec![p("-x1 - y1", 1)], vec![p("-x1", 1)])));
    }

    #[test]
    fn oscillator_residuals_and_flow() {
        let sys = el_residuals(&oscillator()).unwrap();
        let r = sys.residuals.as_ref().unwrap();
        assert!(sym_equal(&r[0], &p("m*ydot1 - k*x1", 1)).equal);
        assert!(sym_equal(&r[1], &p("-k*xdot1 - m*y1", 1)).equal);
        let f = sys.explicit.as_ref().unwrap();
        assert!(sym_equal(&f[0], &p("-m*y1/k", 1)).equal);
        assert!(sym_equal(&f[1], &p("k*x1/m", 1)).equal);
        assert!(sys.diagnostics.is_empty());
    }

    #[test]
    fn degenerate_free_particle() {
        let sys = el_residuals(&model("1/2*y1^2", &[&["0"]])).unwrap();
        let r = sys.residuals.as_ref().unwrap();
        assert!(sym_equal(&r[0], &p("ydot1", 1)).equal);
        assert!(sym_equal(&r[1], &p("-y1", 1)).equal);
        assert!(sys.explicit.is_none());
        assert!(sys.diagnostics.iter().any(|d| d == DEGENERATE));
        assert!(hessian_regular(&model("1/2*y1^2", &[&["0"]])));
        assert!(!hessian_regular(&model("x1*y1", &[&["0"]])));
    }

    #[test]
    fn crosscheck_passes() {
        for m in [
            oscillator(),
            model("sin(x1)*y2^2 + x2*y1*y2", &[&["x1*y2", "a"], &["y1^2", "0"]]),
            LagrangianModel::opaque(Connection::new(vec![vec![p("x1*y1", 1)]]).unwrap()),
        ] {
            let report = derivation_crosscheck(&m).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn crosscheck_detects_sign_flip() {
        let m = oscillator();
        let bad = fundamental_form(&m).unwrap().neg();
        let report = derivation_crosscheck_with(&m, Some(&bad)).unwrap();
        assert!(!report.passed());
        assert!(report.lines[1].details.iter().any(|d| d.starts_with("dx1")));
    }
}
