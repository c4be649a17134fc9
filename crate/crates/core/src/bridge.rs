//! Correspondence between the Euler-Lagrange and Hamilton equations under
//! `q_i = δL/δx^i`, `p_i = ∂L/∂y^i`, `H = −L`.

use std::collections::BTreeMap;

use crate::adapted::Connection;
use crate::error::{Error, Result};
use crate::hamiltonian::{hamilton_rhs, HamiltonianModel};
use crate::integrate::{
    central_derivative, compile_system, max_residual, ODESystem, Plan, Trajectory,
};
use crate::lagrangian::{el_residuals, LagrangianModel};
use crate::symbolic::{
    canonicalize, differentiate, evaluate, solve_linear, substitute, sym_equal, Expr, Point,
    Symbol, Var,
};

/// Sign relating the target Hamiltonian to the re-expressed Lagrangian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianSign {
    /// `H = −L`
    Minus,
    /// `H = +L`, a negative control.
    Plus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquationVerdict {
    pub label: String,
    /// Hamilton side in the new coordinates.
    pub hamiltonian: Expr,
    /// Euler-Lagrange side pushed through the change of variables.
    pub lagrangian: Expr,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BridgeReport {
    pub model: String,
    pub substitution: Vec<String>,
    pub verdicts: Vec<EquationVerdict>,
    /// `(label, max |residual|)` for trajectory checks.
    pub residual_maxima: Vec<(String, f64)>,
    pub tolerance: Option<f64>,
}

impl BridgeReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.equal)
            && self
                .residual_maxima
                .iter()
                .all(|(_, r)| self.tolerance.is_some_and(|t| *r < t))
    }
}

fn substitution_lines(q: &[Expr], p: &[Expr], sign: HamiltonianSign) -> Vec<String> {
    let mut lines: Vec<String> = q
        .iter()
        .enumerate()
        .map(|(i, e)| format!("q{} = {e}", i + 1))
        .chain(p.iter().enumerate().map(|(i, e)| format!("p{} = {e}", i + 1)))
        .collect();
    lines.push(match sign {
        HamiltonianSign::Minus => "H = -L".into(),
        HamiltonianSign::Plus => "H = L".into(),
    });
    lines
}

fn new_coordinates(m: &LagrangianModel) -> (Vec<Expr>, Vec<Expr>) {
    let n = m.n;
    let sys_q = (0..n)
        .map(|i| crate::adapted::adapted_dx(&m.lagrangian, i, &m.connection).expect("index in range"))
        .collect();
    let sys_p = (0..n).map(|i| differentiate(&m.lagrangian, Var::Y(i))).collect();
    (sys_q, sys_p)
}

/// Rewrites the Euler-Lagrange flow and `H = ∓L` in the coordinates
/// `(q, p)` and compares the two first-order systems equation by equation.
///
/// The coordinate change must be affine with an invertible Jacobian; the
/// new coordinates reuse the symbols `x^i` (for `q_i`) and `y^i` (for `p_i`),
/// and the Hamiltonian model carries the zero connection.
pub fn bridge_check_symbolic(m: &LagrangianModel, sign: HamiltonianSign) -> Result<BridgeReport> {
    let n = m.n;
    let (q, p) = new_coordinates(m);
    let map_exprs: Vec<Expr> = q.iter().chain(&p).cloned().collect();
    let coords: Vec<Var> = (0..n).map(Var::X).chain((0..n).map(Var::Y)).collect();

    let jacobian: Vec<Vec<Expr>> = map_exprs
        .iter()
        .map(|e| coords.iter().map(|v| differentiate(e, *v)).collect())
        .collect();
    if jacobian
        .iter()
        .flatten()
        .any(|e| coords.iter().any(|v| e.contains_var(*v)) || e.contains_var(Var::T))
    {
        return Err(Error::Unsolvable(
            "the change of variables is not affine in (x, y)".into(),
        ));
    }
    let origin: BTreeMap<Symbol, Expr> = coords
        .iter()
        .map(|v| (Symbol::Var(*v), Expr::zero()))
        .collect();
    let rhs: Vec<Expr> = coords
        .iter()
        .zip(&map_exprs)
        .map(|(v, e)| canonicalize(&(Expr::var(*v) - substitute(e, &origin))))
        .collect();
    let old_in_new = solve_linear(&jacobian, &rhs).ok_or_else(|| {
        let shown: Vec<String> = substitution_lines(&q, &p, sign);
        Error::NonInvertible(format!("Jacobian of {} is singular", shown[..2 * n].join(", ")))
    })?;
    let to_new: BTreeMap<Symbol, Expr> = coords
        .iter()
        .zip(&old_in_new)
        .map(|(v, e)| (Symbol::Var(*v), e.clone()))
        .collect();

    let flow = el_residuals(m)?
        .explicit
        .ok_or_else(|| Error::Unsolvable("the Euler-Lagrange system is degenerate".into()))?;
    let lagrangian_side: Vec<Expr> = jacobian
        .iter()
        .map(|row| {
            let pushed = Expr::sum(row.iter().zip(&flow).map(|(k, f)| k.clone() * f.clone()));
            substitute(&pushed, &to_new)
        })
        .collect();

    let l_new = substitute(&m.lagrangian, &to_new);
    let h = match sign {
        HamiltonianSign::Minus => canonicalize(&-l_new),
        HamiltonianSign::Plus => l_new,
    };
    let hm = HamiltonianModel::new(Connection::zero(n), h, m.params.clone())?;
    let hamilton_side = hamilton_rhs(&hm);

    let verdicts = hamilton_side
        .into_iter()
        .zip(lagrangian_side)
        .enumerate()
        .map(|(k, (hs, ls))| EquationVerdict {
            label: if k < n {
                format!("dq{}/dt", k + 1)
            } else {
                format!("dp{}/dt", k - n + 1)
            },
            equal: sym_equal(&hs, &ls).equal,
            hamiltonian: hs,
            lagrangian: ls,
        })
        .collect();
    Ok(BridgeReport {
        model: m.lagrangian.to_string(),
        substitution: substitution_lines(&q, &p, sign),
        verdicts,
        residual_maxima: Vec::new(),
        tolerance: None,
    })
}

/// Checks along a sampled trajectory that `ṗ_i = −q_i` and `q̇_i = p_i`,
/// differentiating the sampled `q`, `p` with fourth-order central
/// differences. The trajectory must first satisfy the model's
/// Euler-Lagrange residuals to within `tol`.
pub fn bridge_check_trajectory(m: &LagrangianModel, traj: &Trajectory, tol: f64) -> Result<BridgeReport> {
    let n = m.n;
    if traj.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: traj.n,
        });
    }
    let bound = m.bound();
    let sys = el_residuals(&bound)?;
    let residual_plan = compile_system(
        &ODESystem::residual(n, sys.residuals.clone().expect("residuals always present"))?,
        &m.params,
    )?;
    let worst = max_residual(&residual_plan, traj)?;
    if !(worst < tol) {
        return Err(Error::Precondition(format!(
            "trajectory violates the Euler-Lagrange residuals (max {worst:e}, tolerance {tol:e})"
        )));
    }

    let (q, p) = new_coordinates(&bound);
    let sample = |e: &Expr| -> Result<Vec<f64>> {
        traj.states
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let pt = Point::from_state(n, traj.time(k), s, &m.params);
                Ok(evaluate(e, &pt)?)
            })
            .collect()
    };
    let mut maxima = Vec::with_capacity(2 * n);
    for i in 0..n {
        let qs = sample(&q[i])?;
        let ps = sample(&p[i])?;
        let dq = central_derivative(&qs, traj.dt);
        let dp = central_derivative(&ps, traj.dt);
        let mut worst_q: f64 = 0.0;
        let mut worst_p: f64 = 0.0;
        for k in 0..qs.len() {
            if let (Some(dq), Some(dp)) = (dq[k], dp[k]) {
                worst_q = worst_q.max((dq - ps[k]).abs());
                worst_p = worst_p.max((dp + qs[k]).abs());
            }
        }
        maxima.push((format!("dq{}/dt - p{}", i + 1, i + 1), worst_q));
        maxima.push((format!("dp{}/dt + q{}", i + 1, i + 1), worst_p));
    }
    Ok(BridgeReport {
        model: m.lagrangian.to_string(),
        substitution: substitution_lines(&q, &p, HamiltonianSign::Minus),
        verdicts: Vec::new(),
        residual_maxima: maxima,
        tolerance: Some(tol),
    })
}

/// Compiles the explicit Euler-Lagrange flow of a model with bound parameters.
pub fn el_plan(m: &LagrangianModel) -> Result<Plan> {
    compile_system(&el_residuals(&m.bound())?, &m.params)
}
