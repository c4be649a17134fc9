//! Hamiltonian side: the 1-forms `ω`, `λ`, the symplectic form
//! `φ_H = δy^i∧dx^i`, the Hamiltonian vector field solving `i_X φ_H = dH`,
//! and Hamilton's equations `ẋ^i = −∂H/∂y^i`, `ẏ^i = δH/δx^i`.

use std::collections::BTreeMap;

use crate::adapted::{adapted_dx, AdaptedVectorField, Connection};
use crate::error::{Error, Result};
use crate::forms::{exterior_d, interior, AdaptedForm};
use crate::integrate::{predicted_rate_name, ODESystem};
use crate::lagrangian::check_bundle_function;
use crate::symbolic::{bind_params, canonicalize, differentiate, solve_linear, Atom, Expr, Var};

pub const ENERGY_MONITOR: &str = "H";

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianModel {
    pub n: usize,
    pub connection: Connection,
    pub hamiltonian: Expr,
    pub params: BTreeMap<String, f64>,
}

impl HamiltonianModel {
    pub fn new(connection: Connection, hamiltonian: Expr, params: BTreeMap<String, f64>) -> Result<Self> {
        let n = connection.n();
        check_bundle_function(&hamiltonian, n)?;
        Ok(HamiltonianModel {
            n,
            connection,
            hamiltonian: canonicalize(&hamiltonian),
            params,
        })
    }

    /// Model with an opaque Hamiltonian `H(x, y)`.
    pub fn opaque(connection: Connection) -> Self {
        let n = connection.n();
        HamiltonianModel {
            n,
            hamiltonian: Expr::atom(Atom::on_bundle("H", n)),
            connection,
            params: BTreeMap::new(),
        }
    }

    pub fn bound(&self) -> Self {
        HamiltonianModel {
            n: self.n,
            connection: self.connection.bind_params(&self.params),
            hamiltonian: bind_params(&self.hamiltonian, &self.params),
            params: self.params.clone(),
        }
    }

    fn dh_dy(&self, i: usize) -> Expr {
        differentiate(&self.hamiltonian, Var::Y(i))
    }

    fn dh_dx(&self, i: usize) -> Expr {
        adapted_dx(&self.hamiltonian, i, &self.connection).expect("index within dimension")
    }
}

/// `ω = ½(x^i dx^i + y^i δy^i)` and `λ = ½(y^i dx^i − x^i δy^i)`.
pub fn liouville_one_form(n: usize) -> (AdaptedForm, AdaptedForm) {
    let half = Expr::rational(1, 2);
    let omega = AdaptedForm::one_form(
        (0..n).map(|i| half.clone() * Expr::x(i)).collect(),
        (0..n).map(|i| half.clone() * Expr::y(i)).collect(),
    );
    let lambda = AdaptedForm::one_form(
        (0..n).map(|i| half.clone() * Expr::y(i)).collect(),
        (0..n).map(|i| -(half.clone() * Expr::x(i))).collect(),
    );
    (omega, lambda)
}

/// The symplectic form `δy^i∧dx^i` that Hamilton's equations are solved against.
pub fn canonical_symplectic(n: usize) -> AdaptedForm {
    let mut phi = AdaptedForm::zero(n, 2);
    for i in 0..n {
        phi.add_wedge(n + i, i, Expr::one());
    }
    phi.canonicalized()
}

/// `−dλ` under the formal exterior derivative.
pub fn minus_d_liouville(conn: &Connection) -> Result<AdaptedForm> {
    let (_, lambda) = liouville_one_form(conn.n());
    Ok(exterior_d(&lambda, conn)?.neg())
}

/// `−dλ − δy^i∧dx^i`. Equals `2 dx^i∧δy^i` plus an antisymmetric part of
/// the connection in the `dx∧dx` block, so it never vanishes.
pub fn symplectic_defect(conn: &Connection) -> Result<AdaptedForm> {
    minus_d_liouville(conn)?.sub(&canonical_symplectic(conn.n()))
}

/// `dH = δH/δx^i dx^i + ∂H/∂y^i δy^i`.
pub fn hamiltonian_differential(m: &HamiltonianModel) -> Result<AdaptedForm> {
    exterior_d(&AdaptedForm::scalar(m.n, m.hamiltonian.clone()), &m.connection)
}

/// Solves `i_X φ_H = dH` for the components of `X`.
pub fn hamiltonian_vf(m: &HamiltonianModel) -> Result<AdaptedVectorField> {
    let n = m.n;
    let phi = canonical_symplectic(n);
    let basis: Vec<AdaptedVectorField> = (0..n)
        .map(|i| AdaptedVectorField::horizontal_basis(n, i))
        .chain((0..n).map(|i| AdaptedVectorField::vertical_basis(n, i)))
        .collect();
    let columns: Vec<AdaptedForm> = basis
        .iter()
        .map(|e| interior(e, &phi))
        .collect::<Result<_>>()?;
    let matrix: Vec<Vec<Expr>> = (0..2 * n)
        .map(|r| columns.iter().map(|c| c.comp(r).clone()).collect())
        .collect();
    let dh = hamiltonian_differential(m)?;
    let rhs: Vec<Expr> = (0..2 * n).map(|r| dh.comp(r).clone()).collect();
    let mut z = solve_linear(&matrix, &rhs)
        .ok_or_else(|| Error::Unsolvable("symplectic form is degenerate".into()))?;
    let v = z.split_off(n);
    AdaptedVectorField::new(z, v)
}

/// `(−∂H/∂y^i, δH/δx^i)`.
pub fn hamilton_rhs(m: &HamiltonianModel) -> Vec<Expr> {
    let n = m.n;
    (0..n)
        .map(|i| canonicalize(&-m.dh_dy(i)))
        .chain((0..n).map(|i| m.dh_dx(i)))
        .collect()
}

/// Classical signs `(∂H/∂y^i, −δH/δx^i)`, for comparison output.
pub fn classical_hamilton_rhs(m: &HamiltonianModel) -> Vec<Expr> {
    let n = m.n;
    (0..n)
        .map(|i| m.dh_dy(i))
        .chain((0..n).map(|i| canonicalize(&-m.dh_dx(i))))
        .collect()
}

/// `dH/dt = −Σ_ij ∂H/∂y^i N_ij ∂H/∂y^j` along Hamilton's equations.
pub fn energy_drift_rate(m: &HamiltonianModel) -> Expr {
    let n = m.n;
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let c = m.connection.frame_coefficient(i, j);
            if !c.is_zero() {
                terms.push(-(m.dh_dy(i) * c.clone() * m.dh_dy(j)));
            }
        }
    }
    canonicalize(&Expr::sum(terms))
}

/// Hamilton's equations with residuals `ẋ − f`, `ẏ − g` and the monitors
/// `H` and its predicted rate.
pub fn ham_residuals(m: &HamiltonianModel) -> Result<ODESystem> {
    let n = m.n;
    let rhs = hamilton_rhs(m);
    let vel = (0..n).map(Var::XDot).chain((0..n).map(Var::YDot));
    let residuals = vel
        .zip(&rhs)
        .map(|(v, f)| canonicalize(&(Expr::var(v) - f.clone())))
        .collect();
    Ok(ODESystem::explicit(n, rhs)?
        .with_residuals(residuals)?
        .with_monitor(ENERGY_MONITOR, m.hamiltonian.clone())
        .with_monitor(&predicted_rate_name(ENERGY_MONITOR), energy_drift_rate(m)))
}
