//! First-order ODE systems in the state `(x^1..x^n, y^1..y^n)`, compiled
//! evaluation plans, fixed-step integrators and trajectory monitors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::symbolic::{
    bind_params, canonicalize, differentiate, solve_linear, substitute, Expr, Func, Symbol, Var,
};

/// Midpoint fixed-point iteration limits.
pub const MIDPOINT_MAX_ITER: usize = 50;
pub const MIDPOINT_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct Monitor {
    pub name: String,
    pub expr: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Explicit,
    Residual,
}

/// A first-order system given explicitly (`ẋ = f(x, y)`, `ẏ = g(x, y)`),
/// implicitly by residuals in `(x, y, ẋ, ẏ)`, or both.
#[derive(Clone, Debug, PartialEq)]
pub struct ODESystem {
    pub n: usize,
    pub explicit: Option<Vec<Expr>>,
    pub residuals: Option<Vec<Expr>>,
    pub monitors: Vec<Monitor>,
    pub diagnostics: Vec<String>,
}

impl ODESystem {
    pub fn explicit(n: usize, rhs: Vec<Expr>) -> Result<Self> {
        check_len(n, &rhs)?;
        Ok(ODESystem {
            n,
            explicit: Some(rhs),
            residuals: None,
            monitors: Vec::new(),
            diagnostics: Vec::new(),
        })
    }

    pub fn residual(n: usize, residuals: Vec<Expr>) -> Result<Self> {
        check_len(n, &residuals)?;
        Ok(ODESystem {
            n,
            explicit: None,
            residuals: Some(residuals),
            monitors: Vec::new(),
            diagnostics: Vec::new(),
        })
    }

    pub fn kind(&self) -> SystemKind {
        if self.explicit.is_some() {
            SystemKind::Explicit
        } else {
            SystemKind::Residual
        }
    }

    pub fn with_monitor(mut self, name: &str, expr: Expr) -> Self {
        self.monitors.push(Monitor {
            name: name.to_string(),
            expr,
        });
        self
    }

    pub fn with_residuals(mut self, residuals: Vec<Expr>) -> Result<Self> {
        check_len(self.n, &residuals)?;
        self.residuals = Some(residuals);
        Ok(self)
    }

    pub fn bind_params(&self, params: &BTreeMap<String, f64>) -> Self {
        let bind = |v: &Vec<Expr>| v.iter().map(|e| bind_params(e, params)).collect::<Vec<_>>();
        ODESystem {
            n: self.n,
            explicit: self.explicit.as_ref().map(bind),
            residuals: self.residuals.as_ref().map(bind),
            monitors: self
                .monitors
                .iter()
                .map(|m| Monitor {
                    name: m.name.clone(),
                    expr: bind_params(&m.expr, params),
                })
                .collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

fn check_len(n: usize, v: &[Expr]) -> Result<()> {
    if v.len() == 2 * n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: v.len(),
        })
    }
}

/// Velocity symbols in state order: `ẋ^1..ẋ^n, ẏ^1..ẏ^n`.
pub fn velocity_vars(n: usize) -> Vec<Var> {
    (0..n).map(Var::XDot).chain((0..n).map(Var::YDot)).collect()
}

/// Solves residuals that are affine in the velocities. Returns `None` when
/// a residual is nonlinear in them or the coefficient matrix is singular.
pub fn solve_velocities(residuals: &[Expr], n: usize) -> Option<Vec<Expr>> {
    let vel = velocity_vars(n);
    let zero: BTreeMap<Symbol, Expr> = vel.iter().map(|v| (Symbol::Var(*v), Expr::zero())).collect();
    let mut matrix = Vec::with_capacity(2 * n);
    let mut rhs = Vec::with_capacity(2 * n);
    for r in residuals {
        let row: Vec<Expr> = vel.iter().map(|v| differentiate(r, *v)).collect();
        if row.iter().any(|c| vel.iter().any(|v| c.contains_var(*v))) {
            return None;
        }
        matrix.push(row);
        rhs.push(canonicalize(&-substitute(r, &zero)));
    }
    solve_linear(&matrix, &rhs)
}

#[derive(Clone, Debug)]
enum Node {
    Const(f64),
    Slot(usize),
    Add(Vec<Node>),
    Mul(Vec<Node>),
    PowI(Box<Node>, i32),
    Pow(Box<Node>, Box<Node>),
    Func(Func, Box<Node>),
}

impl Node {
    fn eval(&self, s: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Slot(k) => s[*k],
            Node::Add(xs) => xs.iter().map(|x| x.eval(s)).sum(),
            Node::Mul(xs) => xs.iter().map(|x| x.eval(s)).product(),
            Node::PowI(b, k) => b.eval(s).powi(*k),
            Node::Pow(b, e) => b.eval(s).powf(e.eval(s)),
            Node::Func(f, a) => {
                let v = a.eval(s);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }
}

/// Slot layout: `t`, state, velocities.
fn slot_of(v: Var, n: usize) -> usize {
    match v {
        Var::T => 0,
        Var::X(i) => 1 + i,
        Var::Y(i) => 1 + n + i,
        Var::XDot(i) => 1 + 2 * n + i,
        Var::YDot(i) => 1 + 3 * n + i,
    }
}

fn compile_expr(e: &Expr, n: usize, params: &BTreeMap<String, f64>) -> Result<Node> {
    Ok(match e {
        Expr::Num(r) => Node::Const(r.to_f64().unwrap_or(f64::NAN)),
        Expr::Sym(Symbol::Var(v)) => {
            if v.index().is_some_and(|i| i >= n) {
                return Err(Error::IndexOutOfRange {
                    index: v.index().unwrap(),
                    n,
                });
            }
            Node::Slot(slot_of(*v, n))
        }
        Expr::Sym(Symbol::Param(p)) => Node::Const(
            *params
                .get(p)
                .ok_or_else(|| Error::UnboundParameter(p.clone()))?,
        ),
        Expr::Sym(Symbol::Atom(a)) => {
            return Err(Error::Precondition(format!(
                "opaque function `{a}` has no numeric value"
            )))
        }
        Expr::Add(xs) => Node::Add(xs.iter().map(|x| compile_expr(x, n, params)).collect::<Result<_>>()?),
        Expr::Mul(xs) => Node::Mul(xs.iter().map(|x| compile_expr(x, n, params)).collect::<Result<_>>()?),
        Expr::Pow(b, x) => {
            let base = Box::new(compile_expr(b, n, params)?);
            match x.as_small_int().and_then(|k| i32::try_from(k).ok()) {
                Some(k) => Node::PowI(base, k),
                None => Node::Pow(base, Box::new(compile_expr(x, n, params)?)),
            }
        }
        Expr::Func(f, a) => Node::Func(*f, Box::new(compile_expr(a, n, params)?)),
    })
}

/// An immutable evaluation plan for one system with bound parameters.
#[derive(Clone, Debug)]
pub struct Plan {
    n: usize,
    rhs: Option<Vec<Node>>,
    residuals: Option<Vec<Node>>,
    monitors: Vec<(String, Node)>,
}

/// Compiles a system. Residual-only systems are solved for the velocities
/// when possible; otherwise the plan carries residuals only and cannot be
/// integrated.
pub fn compile_system(sys: &ODESystem, params: &BTreeMap<String, f64>) -> Result<Plan> {
    let n = sys.n;
    let explicit = match (&sys.explicit, &sys.residuals) {
        (Some(rhs), _) => Some(rhs.clone()),
        (None, Some(res)) => solve_velocities(res, n),
        (None, None) => None,
    };
    let compile_all = |v: &Vec<Expr>| -> Result<Vec<Node>> {
        v.iter().map(|e| compile_expr(e, n, params)).collect()
    };
    if let Some(rhs) = &explicit {
        for e in rhs {
            for v in velocity_vars(n) {
                if e.contains_var(v) {
                    return Err(Error::Precondition(format!(
                        "right-hand side `{e}` depends on the velocity {v}"
                    )));
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut monitors = Vec::with_capacity(sys.monitors.len());
    for m in &sys.monitors {
        if !seen.insert(m.name.clone()) {
            return Err(Error::Precondition(format!("duplicate monitor `{}`", m.name)));
        }
        monitors.push((m.name.clone(), compile_expr(&m.expr, n, params)?));
    }
    Ok(Plan {
        n,
        rhs: explicit.as_ref().map(compile_all).transpose()?,
        residuals: sys.residuals.as_ref().map(compile_all).transpose()?,
        monitors,
    })
}

impl Plan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_explicit(&self) -> bool {
        self.rhs.is_some()
    }

    pub fn has_residuals(&self) -> bool {
        self.residuals.is_some()
    }

    pub fn monitor_names(&self) -> Vec<String> {
        self.monitors.iter().map(|(k, _)| k.clone()).collect()
    }

    fn slots(&self, t: f64, state: &[f64], velocity: Option<&[f64]>) -> Vec<f64> {
        let n = self.n;
        let mut s = vec![0.0; 1 + 4 * n];
        s[0] = t;
        s[1..1 + 2 * n].copy_from_slice(state);
        if let Some(v) = velocity {
            s[1 + 2 * n..].copy_from_slice(v);
        }
        s
    }

    /// `(ẋ, ẏ)` at `(t, state)`.
    pub fn rhs(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        let rhs = self.rhs.as_ref().ok_or_else(|| {
            Error::Unsolvable("the residual system is degenerate in the velocities".into())
        })?;
        let s = self.slots(t, state, None);
        Ok(rhs.iter().map(|e| e.eval(&s)).collect())
    }

    pub fn residuals(&self, t: f64, state: &[f64], velocity: &[f64]) -> Option<Vec<f64>> {
        let res = self.residuals.as_ref()?;
        let s = self.slots(t, state, Some(velocity));
        Some(res.iter().map(|e| e.eval(&s)).collect())
    }

    pub fn monitors(&self, t: f64, state: &[f64]) -> Vec<f64> {
        let s = self.slots(t, state, None);
        self.monitors.iter().map(|(_, e)| e.eval(&s)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::ImplicitMidpoint => "midpoint",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "midpoint" | "implicit-midpoint" => Ok(Method::ImplicitMidpoint),
            _ => Err(format!("unknown method `{s}` (expected rk4 or midpoint)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub t0: f64,
    pub dt: f64,
    pub method: Method,
    /// One row per sample, `steps + 1` rows for a completed run.
    pub states: Vec<Vec<f64>>,
    pub monitor_names: Vec<String>,
    pub monitors: Vec<Vec<f64>>,
    /// Largest residual seen by finite-difference velocity reconstruction.
    pub max_residual: Option<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|k| self.time(k)).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has an initial sample")
    }

    /// Series of state column `c`.
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[c]).collect()
    }

    pub fn monitor(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.monitor_names.iter().position(|m| m == name)?;
        Some(self.monitors.iter().map(|row| row[k]).collect())
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=self.n).map(|i| format!("x{i}")));
        cols.extend((1..=self.n).map(|i| format!("y{i}")));
        cols.extend(self.monitor_names.iter().cloned());
        cols.join(",")
    }

    /// Writes the trajectory with 17 significant digits per value.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for (k, (s, m)) in self.states.iter().zip(&self.monitors).enumerate() {
            let mut row = vec![format!("{:.16e}", self.time(k))];
            row.extend(s.iter().chain(m).map(|v| format!("{v:.16e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn abort(traj: Trajectory, reason: String) -> Error {
    Error::NumericAbort {
        reason,
        partial: Box::new(traj),
    }
}

/// Fixed-step integration of an explicit plan.
pub fn integrate(
    plan: &Plan,
    init: &[f64],
    method: Method,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    let n = plan.n;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Precondition(format!("step size must be positive, got {dt}")));
    }
    if steps == 0 {
        return Err(Error::Precondition("at least one step is required".into()));
    }
    if init.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: init.len(),
        });
    }
    if !plan.is_explicit() {
        return Err(Error::Unsolvable(
            "the residual system is degenerate in the velocities".into(),
        ));
    }
    let mut traj = Trajectory {
        n,
        t0,
        dt,
        method,
        states: Vec::with_capacity(steps + 1),
        monitor_names: plan.monitor_names(),
        monitors: Vec::with_capacity(steps + 1),
        max_residual: None,
    };
    if init.iter().any(|v| !v.is_finite()) {
        return Err(abort(traj, "non-finite initial state".into()));
    }
    traj.monitors.push(plan.monitors(t0, init));
    traj.states.push(init.to_vec());

    let mut state = init.to_vec();
    for k in 0..steps {
        let t = traj.time(k);
        let next = match method {
            Method::Rk4 => rk4_step(plan, t, &state, dt)?,
            Method::ImplicitMidpoint => match midpoint_step(plan, t, &state, dt)? {
                Some(s) => s,
                None => {
                    return Err(abort(
                        traj,
                        format!("midpoint iteration did not converge at t = {t}"),
                    ))
                }
            },
        };
        let t_next = traj.time(k + 1);
        let mon = plan.monitors(t_next, &next);
        if next.iter().chain(&mon).any(|v| !v.is_finite()) {
            return Err(abort(traj, format!("non-finite value at t = {t_next}")));
        }
        traj.states.push(next.clone());
        traj.monitors.push(mon);
        state = next;
    }
    if plan.has_residuals() && traj.states.len() >= 5 {
        traj.max_residual = Some(max_residual(plan, &traj)?);
    }
    Ok(traj)
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| yi + a * xi).collect()
}

fn rk4_step(plan: &Plan, t: f64, s: &[f64], dt: f64) -> Result<Vec<f64>> {
    let k1 = plan.rhs(t, s)?;
    let k2 = plan.rhs(t + dt / 2.0, &axpy(dt / 2.0, &k1, s))?;
    let k3 = plan.rhs(t + dt / 2.0, &axpy(dt / 2.0, &k2, s))?;
    let k4 = plan.rhs(t + dt, &axpy(dt, &k3, s))?;
    Ok((0..s.len())
        .map(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Solves `z = s + dt f(t + dt/2, (s + z)/2)` by fixed-point iteration.
fn midpoint_step(plan: &Plan, t: f64, s: &[f64], dt: f64) -> Result<Option<Vec<f64>>> {
    let mut z = axpy(dt, &plan.rhs(t, s)?, s);
    for _ in 0..MIDPOINT_MAX_ITER {
        let mid: Vec<f64> = s.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
        let next = axpy(dt, &plan.rhs(t + dt / 2.0, &mid)?, s);
        let change = next
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        z = next;
        if change.is_nan() {
            return Ok(None);
        }
        if change < MIDPOINT_TOL {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// Fourth-order central difference at every sample with two neighbours on
/// each side; `None` near the ends.
pub fn central_derivative(series: &[f64], dt: f64) -> Vec<Option<f64>> {
    let len = series.len();
    (0..len)
        .map(|k| {
            (k >= 2 && k + 2 < len).then(|| {
                (series[k - 2] - 8.0 * series[k - 1] + 8.0 * series[k + 1] - series[k + 2])
                    / (12.0 * dt)
            })
        })
        .collect()
}

/// Velocities reconstructed by finite differences at interior samples.
pub fn reconstructed_velocities(traj: &Trajectory) -> Vec<Option<Vec<f64>>> {
    let cols: Vec<Vec<Option<f64>>> = (0..2 * traj.n)
        .map(|c| central_derivative(&traj.column(c), traj.dt))
        .collect();
    (0..traj.states.len())
        .map(|k| cols.iter().map(|c| c[k]).collect())
        .collect()
}

/// Maximum absolute residual over interior samples.
pub fn max_residual(plan: &Plan, traj: &Trajectory) -> Result<f64> {
    if !plan.has_residuals() {
        return Err(Error::Precondition("system has no residual form".into()));
    }
    if traj.n != plan.n {
        return Err(Error::DimensionMismatch {
            expected: plan.n,
            got: traj.n,
        });
    }
    if traj.states.len() < 5 {
        return Err(Error::Precondition(
            "at least five samples are needed to reconstruct velocities".into(),
        ));
    }
    let mut worst: f64 = 0.0;
    for (k, vel) in reconstructed_velocities(traj).into_iter().enumerate() {
        if let Some(vel) = vel {
            let r = plan.residuals(traj.time(k), &traj.states[k], &vel).unwrap();
            worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    Ok(worst)
}

/// Name of the monitor holding the predicted rate of change of `name`.
pub fn predicted_rate_name(name: &str) -> String {
    format!("d{name}dt_predicted")
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftMeasurement {
    pub values: Vec<f64>,
    /// Least-squares slope of the values against time.
    pub slope: f64,
    /// Finite-difference rate at interior samples.
    pub instantaneous: Vec<Option<f64>>,
    /// Predicted rate per sample, when the trajectory carries it.
    pub predicted: Option<Vec<f64>>,
}

impl DriftMeasurement {
    /// `(sample, measured, predicted)` at interior samples.
    pub fn comparison(&self) -> Vec<(usize, f64, f64)> {
        let Some(pred) = &self.predicted else {
            return Vec::new();
        };
        self.instantaneous
            .iter()
            .enumerate()
            .filter_map(|(k, m)| m.map(|m| (k, m, pred[k])))
            .collect()
    }
}

pub fn measure_drift(traj: &Trajectory, monitor: &str) -> Result<DriftMeasurement> {
    let values = traj
        .monitor(monitor)
        .ok_or_else(|| Error::Precondition(format!("unknown monitor `{monitor}`")))?;
    let times = traj.times();
    let len = values.len() as f64;
    let tm = times.iter().sum::<f64>() / len;
    let vm = values.iter().sum::<f64>() / len;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, v) in times.iter().zip(&values) {
        num += (t - tm) * (v - vm);
        den += (t - tm) * (t - tm);
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    Ok(DriftMeasurement {
        instantaneous: central_derivative(&values, traj.dt),
        predicted: traj.monitor(&predicted_rate_name(monitor)),
        values,
        slope,
    })
}

/// `|Δm − ∫ predicted rate dt|` over the whole trajectory, integrating the
/// predicted rate by Simpson's rule (zero when no prediction is attached).
pub fn integrated_drift_mismatch(traj: &Trajectory, monitor: &str) -> Result<f64> {
    let d = measure_drift(traj, monitor)?;
    let change = d.values.last().unwrap() - d.values[0];
    let predicted = match &d.predicted {
        Some(rate) => simpson(rate, traj.dt),
        None => 0.0,
    };
    Ok((change - predicted).abs())
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let intervals = f.len().saturating_sub(1);
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    for k in (0..even).step_by(2) {
        s += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    }
    if even < intervals {
        s += h / 2.0 * (f[even] + f[even + 1]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_expr;

    fn p(s: &str) -> Expr {
        parse_expr(s, 1).unwrap()
    }

    fn rotation() -> ODESystem {
        ODESystem::explicit(1, vec![p("-y1"), p("x1")])
            .unwrap()
            .with_monitor("H", p("1/2*(x1^2 + y1^2)"))
    }

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn plan_evaluation() {
        let plan = compile_system(&rotation(), &no_params()).unwrap();
        assert_eq!(plan.rhs(0.0, &[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(plan.monitors(0.0, &[1.0, 0.0]), vec![0.5]);
    }

    #[test]
    fn unbound_parameter() {
        let sys = ODESystem::explicit(1, vec![p("a*y1"), p("x1")]).unwrap();
        assert!(matches!(compile_system(&sys, &no_params()), Err(Error::UnboundParameter(a)) if a == "a"));
        let bound: BTreeMap<String, f64> = [("a".to_string(), 2.0)].into();
        assert_eq!(compile_system(&sys, &bound).unwrap().rhs(0.0, &[0.0, 1.0]).unwrap()[0], 2.0);
    }

    #[test]
    fn residual_system_is_solved() {
        let sys = ODESystem::residual(1, vec![p("ydot1 - x1"), p("-xdot1 - y1")]).unwrap();
        let plan = compile_system(&sys, &no_params()).unwrap();
        assert_eq!(plan.rhs(0.0, &[2.0, 3.0]).unwrap(), vec![-3.0, 2.0]);
    }

    #[test]
    fn degenerate_residual_system() {
        let sys = ODESystem::residual(1, vec![p("ydot1"), p("-y1")]).unwrap();
        let plan = compile_system(&sys, &no_params()).unwrap();
        assert!(!plan.is_explicit());
        for m in [Method::Rk4, Method::ImplicitMidpoint] {
            assert!(matches!(integrate(&plan, &[0.0, 0.0], m, 0.0, 0.1, 3), Err(Error::Unsolvable(_))));
        }
    }

    #[test]
    fn zero_rhs_is_constant() {
        let sys = ODESystem::explicit(1, vec![p("0"), p("0")]).unwrap();
        let plan = compile_system(&sys, &no_params()).unwrap();
        let tr = integrate(&plan, &[0.3, -0.7], Method::Rk4, 0.0, 0.1, 10).unwrap();
        assert!(tr.states.iter().all(|s| s == &vec![0.3, -0.7]));
    }

    #[test]
    fn preconditions() {
        let plan = compile_system(&rotation(), &no_params()).unwrap();
        assert!(matches!(integrate(&plan, &[1.0, 0.0], Method::Rk4, 0.0, 0.0, 10), Err(Error::Precondition(_))));
        assert!(matches!(integrate(&plan, &[1.0, 0.0], Method::Rk4, 0.0, 0.1, 0), Err(Error::Precondition(_))));
        assert!(matches!(
            integrate(&plan, &[1.0], Method::Rk4, 0.0, 0.1, 1),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn blow_up_aborts_with_partial_trajectory() {
        let sys = ODESystem::explicit(1, vec![p("x1^2"), p("0")]).unwrap();
        let plan = compile_system(&sys, &no_params()).unwrap();
        match integrate(&plan, &[1.0, 0.0], Method::Rk4, 0.0, 0.5, 100) {
            Err(Error::NumericAbort { partial, .. }) => {
                assert!(partial.steps() < 100);
                assert!(partial.states.iter().flatten().all(|v| v.is_finite()));
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn midpoint_non_convergence() {
        // contraction factor dt/2 * 2|x| >> 1
        let sys = ODESystem::explicit(1, vec![p("x1^2"), p("0")]).unwrap();
        let plan = compile_system(&sys, &no_params()).unwrap();
        assert!(matches!(
            integrate(&plan, &[10.0, 0.0], Method::ImplicitMidpoint, 0.0, 1.0, 1),
            Err(Error::NumericAbort { .. })
        ));
    }

    #[test]
    fn rotation_accuracy_and_conservation() {
        let plan = compile_system(&rotation(), &no_params()).unwrap();
        let tr = integrate(&plan, &[1.0, 0.0], Method::Rk4, 0.0, 1e-3, 10_000).unwrap();
        let end = tr.last();
        assert!((end[0] - 10f64.cos()).abs() < 1e-8 && (end[1] - 10f64.sin()).abs() < 1e-8);
        let mid = integrate(&plan, &[1.0, 0.0], Method::ImplicitMidpoint, 0.0, 1e-3, 10_000).unwrap();
        let h = mid.monitor("H").unwrap();
        assert!(h.iter().all(|v| (v - 0.5).abs() < 0.5e-9));
    }

    #[test]
    fn deterministic() {
        let plan = compile_system(&rotation(), &no_params()).unwrap();
        let a = integrate(&plan, &[1.0, 0.0], Method::ImplicitMidpoint, 0.0, 1e-2, 500).unwrap();
        let b = integrate(&plan, &[1.0, 0.0], Method::ImplicitMidpoint, 0.0, 1e-2, 500).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn drift_of_constant_monitor() {
        let sys = rotation().with_monitor("c", p("3"));
        let plan = compile_system(&sys, &no_params()).unwrap();
        let tr = integrate(&plan, &[1.0, 0.0], Method::Rk4, 0.0, 1e-2, 100).unwrap();
        let d = measure_drift(&tr, "c").unwrap();
        assert_eq!(d.slope, 0.0);
        assert!(matches!(measure_drift(&tr, "nope"), Err(Error::Precondition(_))));
    }

    #[test]
    fn central_derivative_is_exact_on_quartics() {
        let dt = 0.1;
        let f: Vec<f64> = (0..9).map(|k| (k as f64 * dt).powi(4)).collect();
        let d = central_derivative(&f, dt);
        assert!(d[0].is_none() && d[8].is_none());
        let t = 4.0 * dt;
        assert!((d[4].unwrap() - 4.0 * t * t * t).abs() < 1e-12);
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let h = 0.25;
        let f: Vec<f64> = (0..9).map(|k| (k as f64 * h).powi(3)).collect();
        assert!((simpson(&f, h) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn csv_layout() {
        let plan = compile_system(&rotation(), &no_params()).unwrap();
        let tr = integrate(&plan, &[1.0, 0.0], Method::Rk4, 0.0, 0.5, 1).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,y1,H");
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1");
        assert_eq!(lines.len(), 3);
    }
}
