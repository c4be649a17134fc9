//! Command-line workbench: `derive`, `simulate` and `check`.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or schema error,
//! 3 numeric abort.

mod checks;
pub mod model;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adapted::{has_commutator_defect, IndexConvention};
use crate::error::Error;
use crate::forms::AdaptedForm;
use crate::hamiltonian::{
    canonical_symplectic, classical_hamilton_rhs, ham_residuals, minus_d_liouville, HamiltonianModel,
};
use crate::integrate::{compile_system, integrate, integrated_drift_mismatch, Method, ODESystem};
use crate::lagrangian::{
    classical_el_residuals, el_residuals, energy, fundamental_form, hessian_regular, LagrangianModel,
    SemisprayField, DEGENERATE,
};
use crate::symbolic::Expr;
use model::Model;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Eval(_) | Error::NumericAbort { .. } => CliError::numeric(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<crate::symbolic::ParseError> for CliError {
    fn from(e: crate::symbolic::ParseError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "distmech", version, about = "Mechanics on adapted frames of TM and T*M")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Side {
    Auto,
    Lagrangian,
    Hamiltonian,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Convention {
    /// `N[i][j]` sums over `j`
    #[value(name = "paper")]
    Standard,
    Transposed,
}

impl From<Convention> for IndexConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Standard => IndexConvention::Standard,
            Convention::Transposed => IndexConvention::Transposed,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Rk4,
    Midpoint,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Midpoint => Method::ImplicitMidpoint,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Identities,
    Bridge,
    Drift,
    Crossderivation,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive the equations of a model as a JSON document.
    Derive {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        side: Side,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "paper")]
        index_convention: Convention,
        /// Also emit the classical-sign equations under `classical`.
        #[arg(long)]
        classical: bool,
    },
    /// Integrate a model and write the trajectory as CSV.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "")]
        init: String,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long, value_enum, default_value = "rk4")]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "paper")]
        index_convention: Convention,
        /// Fail when a monitor's change departs from its predicted drift by more than this.
        #[arg(long)]
        assert_drift: Option<f64>,
    },
    /// Run a check suite.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=6))]
        n: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "paper")]
        index_convention: Convention,
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long, value_enum, default_value = "rk4")]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

/// Runs the workbench and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Derive {
            model,
            side,
            out,
            index_convention,
            classical,
        } => cmd_derive(&model, side, out.as_deref(), index_convention.into(), classical, stdout),
        Command::Simulate {
            model,
            init,
            t0,
            dt,
            steps,
            method,
            out,
            index_convention,
            assert_drift,
        } => cmd_simulate(
            &SimulateArgs {
                model,
                init,
                t0,
                dt,
                steps: steps as usize,
                method: method.into(),
                out,
                convention: index_convention.into(),
                assert_drift,
            },
            stdout,
            stderr,
        ),
        Command::Check {
            suite,
            model,
            n,
            seed,
            index_convention,
            init,
            dt,
            steps,
            method,
            tol,
        } => {
            let args = checks::CheckArgs {
                model,
                n: n.map(|n| n as usize),
                seed,
                convention: index_convention.into(),
                init,
                dt,
                steps: steps as usize,
                method: method.into(),
                tol,
            };
            match suite {
                Suite::Identities => checks::identities(&args, stdout),
                Suite::Bridge => checks::bridge(&args, stdout),
                Suite::Drift => checks::drift(&args, stdout),
                Suite::Crossderivation => checks::crossderivation(&args, stdout),
            }
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn open_out<'a>(out: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(stdout),
    })
}

#[derive(Serialize)]
struct Blocks {
    #[serde(rename = "A")]
    a: Vec<Vec<String>>,
    #[serde(rename = "B")]
    b: Vec<Vec<String>>,
    #[serde(rename = "C")]
    c: Vec<Vec<String>>,
}

impl Blocks {
    fn of(form: &AdaptedForm) -> Self {
        let strings = |m: Vec<Vec<Expr>>| -> Vec<Vec<String>> {
            m.iter().map(|r| r.iter().map(Expr::to_string).collect()).collect()
        };
        let (a, b, c) = form.blocks();
        Blocks {
            a: strings(a),
            b: strings(b),
            c: strings(c),
        }
    }
}

#[derive(Serialize)]
struct Diagnostics {
    degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    hessian_regular: Option<bool>,
    commutator_defect: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    liouville_matches_symplectic: Option<bool>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct Document {
    side: &'static str,
    n: usize,
    fundamental_form: Blocks,
    energy: String,
    residuals: Vec<String>,
    explicit: Option<Vec<String>>,
    diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    classical: Option<Vec<String>>,
}

fn strings(v: &[Expr]) -> Vec<String> {
    v.iter().map(Expr::to_string).collect()
}

fn lagrangian_document(m: &LagrangianModel, classical: bool) -> Result<Document, CliError> {
    let m = m.bound();
    let sys = el_residuals(&m)?;
    Ok(Document {
        side: "lagrangian",
        n: m.n,
        fundamental_form: Blocks::of(&fundamental_form(&m)?),
        energy: energy(&m, &SemisprayField::generic(m.n))?.to_string(),
        residuals: strings(sys.residuals.as_deref().unwrap_or_default()),
        explicit: sys.explicit.as_deref().map(strings),
        diagnostics: Diagnostics {
            degenerate: sys.diagnostics.iter().any(|d| d == DEGENERATE),
            hessian_regular: Some(hessian_regular(&m)),
            commutator_defect: has_commutator_defect(&m.connection)?,
            liouville_matches_symplectic: None,
            notes: sys.diagnostics.clone(),
        },
        classical: classical.then(|| strings(&classical_el_residuals(&m))),
    })
}

fn hamiltonian_document(m: &HamiltonianModel, classical: bool) -> Result<Document, CliError> {
    let m = m.bound();
    let sys = ham_residuals(&m)?;
    let phi = canonical_symplectic(m.n);
    Ok(Document {
        side: "hamiltonian",
        n: m.n,
        fundamental_form: Blocks::of(&phi),
        energy: m.hamiltonian.to_string(),
        residuals: strings(sys.residuals.as_deref().unwrap_or_default()),
        explicit: sys.explicit.as_deref().map(strings),
        diagnostics: Diagnostics {
            degenerate: false,
            hessian_regular: None,
            commutator_defect: has_commutator_defect(&m.connection)?,
            liouville_matches_symplectic: Some(minus_d_liouville(&m.connection)?.sym_eq(&phi)),
            notes: sys.diagnostics.clone(),
        },
        classical: classical.then(|| strings(&classical_hamilton_rhs(&m))),
    })
}

fn cmd_derive(
    path: &Path,
    side: Side,
    out: Option<&Path>,
    convention: IndexConvention,
    classical: bool,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let model = model::load(path, convention)?;
    let doc = match (side, &model) {
        (Side::Auto | Side::Lagrangian, Model::Lagrangian(m)) => lagrangian_document(m, classical)?,
        (Side::Auto | Side::Hamiltonian, Model::Hamiltonian(m)) => hamiltonian_document(m, classical)?,
        (Side::Lagrangian, Model::Hamiltonian(_)) => {
            return Err(CliError::usage("--side lagrangian but the model defines a hamiltonian"))
        }
        (Side::Hamiltonian, Model::Lagrangian(_)) => {
            return Err(CliError::usage("--side hamiltonian but the model defines a lagrangian"))
        }
    };
    let text = serde_json::to_string_pretty(&doc).expect("document serializes");
    let mut w = open_out(out, stdout)?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(EXIT_OK)
}

struct SimulateArgs {
    model: PathBuf,
    init: String,
    t0: f64,
    dt: f64,
    steps: usize,
    method: Method,
    out: Option<PathBuf>,
    convention: IndexConvention,
    assert_drift: Option<f64>,
}

/// Explicit system of a model, or a usage error when it cannot be solved.
fn explicit_system(model: &Model) -> Result<ODESystem, CliError> {
    let sys = match model {
        Model::Lagrangian(m) => el_residuals(&m.bound())?,
        Model::Hamiltonian(m) => ham_residuals(&m.bound())?,
    };
    if sys.explicit.is_none() {
        return Err(CliError::usage(format!("model is not derivable to an explicit system: {}", sys.diagnostics.join("; "))));
    }
    Ok(sys)
}

fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return Err(CliError::usage(format!("--dt must be positive, got {}", a.dt)));
    }
    if !a.t0.is_finite() {
        return Err(CliError::usage("--t0 must be finite"));
    }
    if let Some(tol) = a.assert_drift {
        if !(tol >= 0.0) {
            return Err(CliError::usage("--assert-drift must be non-negative"));
        }
    }
    let model = model::load(&a.model, a.convention)?;
    let init = model::parse_init(&a.init, model.n())?;
    let plan = compile_system(&explicit_system(&model)?, model.params())?;
    let traj = match integrate(&plan, &init, a.method, a.t0, a.dt, a.steps) {
        Ok(t) => t,
        Err(Error::NumericAbort { reason, partial }) => {
            let mut w = open_out(a.out.as_deref(), stdout)?;
            partial.write_csv(&mut w)?;
            w.flush()?;
            return Err(CliError::numeric(format!("numeric abort after {} steps: {reason}", partial.steps())));
        }
        Err(e) => return Err(e.into()),
    };
    {
        let mut w = open_out(a.out.as_deref(), stdout)?;
        traj.write_csv(&mut w)?;
        w.flush()?;
    }
    let Some(tol) = a.assert_drift else {
        return Ok(EXIT_OK);
    };
    let mut code = EXIT_OK;
    for name in traj.monitor_names.iter().filter(|m| !m.ends_with("_predicted")) {
        let mismatch = integrated_drift_mismatch(&traj, name)?;
        if !(mismatch <= tol) {
            writeln!(stderr, "drift violation: {name} departs from its predicted change by {mismatch:e} (tolerance {tol:e})")?;
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(code)
}
