//! JSON model files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::adapted::{Connection, IndexConvention};
use crate::hamiltonian::HamiltonianModel;
use crate::lagrangian::LagrangianModel;
use crate::symbolic::parse_expr;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    #[serde(default)]
    pub connection: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub lagrangian: Option<String>,
    #[serde(default)]
    pub hamiltonian: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub labels: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug)]
pub enum Model {
    Lagrangian(LagrangianModel),
    Hamiltonian(HamiltonianModel),
}

impl Model {
    pub fn n(&self) -> usize {
        match self {
            Model::Lagrangian(m) => m.n,
            Model::Hamiltonian(m) => m.n,
        }
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        match self {
            Model::Lagrangian(m) => &m.params,
            Model::Hamiltonian(m) => &m.params,
        }
    }
}

pub fn load(path: &Path, convention: IndexConvention) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text, convention)
}

pub fn parse_model(text: &str, convention: IndexConvention) -> Result<Model, CliError> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("model schema: {e}")))?;
    let n = file.n;
    if n == 0 {
        return Err(CliError::usage("model schema: n must be at least 1"));
    }
    for (k, v) in &file.params {
        if !v.is_finite() {
            return Err(CliError::usage(format!("model schema: parameter `{k}` is not finite")));
        }
    }
    let connection = match &file.connection {
        Some(rows) => Connection::parse(rows, n)?,
        None => Connection::zero(n),
    }
    .with_convention(convention);
    match (&file.lagrangian, &file.hamiltonian) {
        (Some(l), None) => Ok(Model::Lagrangian(LagrangianModel::new(
            connection,
            parse_expr(l, n)?,
            file.params,
        )?)),
        (None, Some(h)) => Ok(Model::Hamiltonian(HamiltonianModel::new(
            connection,
            parse_expr(h, n)?,
            file.params,
        )?)),
        _ => Err(CliError::usage(
            "model schema: exactly one of `lagrangian` and `hamiltonian` is required",
        )),
    }
}

/// Parses `x1=1,y1=0`; unspecified coordinates start at zero.
pub fn parse_init(spec: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let mut state = vec![0.0; 2 * n];
    let mut seen = vec![false; 2 * n];
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("init: expected name=value, got `{item}`")))?;
        let name = name.trim();
        let slot = init_slot(name, n)
            .ok_or_else(|| CliError::usage(format!("init: `{name}` is not a coordinate for n = {n}")))?;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(CliError::usage(format!("init: `{name}` given twice")));
        }
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("init: bad number `{}`", value.trim())))?;
        if !v.is_finite() {
            return Err(CliError::usage(format!("init: `{name}` is not finite")));
        }
        state[slot] = v;
    }
    Ok(state)
}

fn init_slot(name: &str, n: usize) -> Option<usize> {
    let (offset, digits) = match name.as_bytes().first()? {
        b'x' => (0, &name[1..]),
        b'y' => (n, &name[1..]),
        _ => return None,
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let i: usize = digits.parse().ok()?;
    (1..=n).contains(&i).then(|| offset + i - 1)
}
