//! The `check` suites.

use std::io::Write;
use std::path::PathBuf;

use super::model::{self, Model};
use super::{CliError, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use crate::adapted::{Connection, IndexConvention};
use crate::bridge::{bridge_check_symbolic, bridge_check_trajectory, el_plan, BridgeReport, HamiltonianSign};
use crate::check::CheckLine;
use crate::error::Error;
use crate::hamiltonian::ENERGY_MONITOR;
use crate::identities::operator_identities;
use crate::integrate::{compile_system, integrate, measure_drift, Method, Trajectory};
use crate::lagrangian::{derivation_crosscheck, el_residuals, LagrangianModel, BRIDGE_NORM};
use crate::hamiltonian::ham_residuals;
use crate::symbolic::Expr;

/// Slope bound for monitors whose predicted rate vanishes identically.
pub const DRIFT_SLOPE_TOL: f64 = 1e-10;
/// Samples with `|predicted| ≥` this fraction of the largest predicted rate
/// enter the instantaneous comparison.
pub const DRIFT_SAMPLE_FRACTION: f64 = 0.01;

pub struct CheckArgs {
    pub model: Option<PathBuf>,
    pub n: Option<usize>,
    pub seed: u64,
    pub convention: IndexConvention,
    pub init: Option<String>,
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    pub tol: f64,
}

impl CheckArgs {
    fn dims(&self) -> Vec<usize> {
        match self.n {
            Some(n) => vec![n],
            None => (1..=3).collect(),
        }
    }

    fn model(&self) -> Result<Model, CliError> {
        let path = self
            .model
            .as_ref()
            .ok_or_else(|| CliError::usage("this suite requires --model"))?;
        model::load(path, self.convention)
    }

    fn lagrangian(&self) -> Result<LagrangianModel, CliError> {
        match self.model()? {
            Model::Lagrangian(m) => Ok(m),
            Model::Hamiltonian(_) => Err(CliError::usage("this suite requires a lagrangian model")),
        }
    }

    /// `--init`, or `x^i = 1`, `y^i = 0`.
    fn initial_state(&self, n: usize) -> Result<Vec<f64>, CliError> {
        match &self.init {
            Some(spec) => model::parse_init(spec, n),
            None => Ok((0..2 * n).map(|k| if k < n { 1.0 } else { 0.0 }).collect()),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::usage(format!("--dt must be positive, got {}", self.dt)));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::usage("--tol must be positive"));
        }
        Ok(())
    }
}

fn report(lines: &[CheckLine], out: &mut dyn Write) -> Result<i32, CliError> {
    for l in lines {
        writeln!(out, "{l}")?;
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    writeln!(out, "{} checks, {} failed", lines.len(), failed)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn identities(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let lines: Vec<CheckLine> = a.dims().into_iter().flat_map(|n| operator_identities(n, a.seed)).collect();
    report(&lines, out)
}

fn bridge_lines(r: &BridgeReport) -> Vec<CheckLine> {
    let mut lines: Vec<CheckLine> = r
        .verdicts
        .iter()
        .map(|v| {
            let details = if v.equal {
                Vec::new()
            } else {
                vec![format!("hamilton: {}", v.hamiltonian), format!("euler-lagrange: {}", v.lagrangian)]
            };
            CheckLine::new(format!("symbolic {}", v.label), details)
        })
        .collect();
    if let Some(tol) = r.tolerance {
        for (label, worst) in &r.residual_maxima {
            let details = if *worst < tol {
                Vec::new()
            } else {
                vec![format!("max {worst:e} exceeds {tol:e}")]
            };
            lines.push(CheckLine::new(format!("trajectory {label}"), details));
        }
    }
    lines
}

pub fn bridge(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    a.validate()?;
    let m = a.lagrangian()?;
    writeln!(out, "model L = {}", m.lagrangian)?;
    let mut lines = Vec::new();
    match bridge_check_symbolic(&m.bound(), HamiltonianSign::Minus) {
        Ok(r) => {
            for s in &r.substitution {
                writeln!(out, "  {s}")?;
            }
            lines.extend(bridge_lines(&r));
        }
        Err(Error::NonInvertible(why)) => {
            writeln!(out, "NON-INVERTIBLE {why}")?;
            return Ok(EXIT_USAGE);
        }
        Err(Error::Unsolvable(why)) => writeln!(out, "SKIP symbolic: {why}")?,
        Err(e) => return Err(e.into()),
    }
    let plan = el_plan(&m)?;
    let traj = integrate(&plan, &a.initial_state(m.n)?, a.method, 0.0, a.dt, a.steps)?;
    match bridge_check_trajectory(&m, &traj, a.tol) {
        Ok(r) => lines.extend(bridge_lines(&r)),
        Err(Error::Precondition(why)) => lines.push(CheckLine::new("trajectory precondition", vec![why])),
        Err(e) => return Err(e.into()),
    }
    report(&lines, out)
}

/// Compares measured and predicted drift of one monitor.
pub fn drift_lines(traj: &Trajectory, monitor: &str, tol: f64) -> Result<Vec<CheckLine>, Error> {
    let d = measure_drift(traj, monitor)?;
    let cmp = d.comparison();
    let peak = cmp.iter().fold(0.0_f64, |m, (_, _, p)| m.max(p.abs()));
    if peak == 0.0 {
        let details = if d.slope.abs() < DRIFT_SLOPE_TOL {
            Vec::new()
        } else {
            vec![format!("fitted slope {:e} exceeds {DRIFT_SLOPE_TOL:e}", d.slope)]
        };
        return Ok(vec![CheckLine::new(format!("{monitor} conserved (slope {:e})", d.slope), details)]);
    }
    let mut details = Vec::new();
    let mut used = 0;
    for (k, measured, predicted) in cmp {
        if predicted.abs() < DRIFT_SAMPLE_FRACTION * peak {
            continue;
        }
        used += 1;
        let rel = (measured - predicted).abs() / predicted.abs();
        if !(rel < tol) && details.len() < 5 {
            details.push(format!("t = {}: measured {measured:e}, predicted {predicted:e}", traj.time(k)));
        }
    }
    Ok(vec![CheckLine::new(format!("{monitor} rate matches prediction at {used} samples"), details)])
}

pub fn drift(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    a.validate()?;
    let model = a.model()?;
    let (sys, monitor) = match &model {
        Model::Lagrangian(m) => (el_residuals(&m.bound())?, BRIDGE_NORM),
        Model::Hamiltonian(m) => (ham_residuals(&m.bound())?, ENERGY_MONITOR),
    };
    if sys.explicit.is_none() {
        return Err(CliError::usage("model is not derivable to an explicit system"));
    }
    let plan = compile_system(&sys, model.params())?;
    let traj = integrate(&plan, &a.initial_state(model.n())?, a.method, 0.0, a.dt, a.steps)?;
    report(&drift_lines(&traj, monitor, a.tol)?, out)
}

/// Generic constant connection `N_ij = c{i}{j}` (one-based).
fn generic_connection(n: usize, convention: IndexConvention) -> Connection {
    let entries = (1..=n)
        .map(|i| (1..=n).map(|j| Expr::param(&format!("c{i}{j}"))).collect())
        .collect();
    Connection::new(entries).expect("square").with_convention(convention)
}

fn prefixed(prefix: &str, lines: Vec<CheckLine>) -> Vec<CheckLine> {
    lines
        .into_iter()
        .map(|mut l| {
            l.name = format!("{prefix}: {}", l.name);
            l
        })
        .collect()
}

pub fn crossderivation(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut lines = Vec::new();
    if a.model.is_some() {
        let m = a.lagrangian()?;
        lines.extend(prefixed("model", derivation_crosscheck(&m.bound())?.lines));
    } else {
        for n in a.dims() {
            for (label, conn) in [
                ("zero connection", Connection::zero(n).with_convention(a.convention)),
                ("constant connection", generic_connection(n, a.convention)),
            ] {
                let m = LagrangianModel::opaque(conn);
                lines.extend(prefixed(&format!("opaque L, n = {n}, {label}"), derivation_crosscheck(&m)?.lines));
            }
        }
    }
    report(&lines, out)
}
