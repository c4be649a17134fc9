//! Named pass/fail lines shared by the check suites.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub details: Vec<String>,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, details: Vec<String>) -> Self {
        CheckLine {
            name: name.into(),
            passed: details.is_empty(),
            details,
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.passed { "PASS" } else { "FAIL" }, self.name)?;
        for d in &self.details {
            write!(f, "\n    {d}")?;
        }
        Ok(())
    }
}
