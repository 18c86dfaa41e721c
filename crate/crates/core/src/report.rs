//! Structured pass/fail records produced by every checker.

use crate::sparse::{SparseMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Max-entry norm of the defect (after scalar fitting, where applicable).
    pub residual: f64,
    pub tolerance: f64,
    pub fitted_scalar: Option<C64>,
    pub details: Vec<CheckReport>,
}

impl CheckReport {
    /// A single check; passes iff `residual < tol`.
    pub fn leaf(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual < tol,
            residual,
            tolerance: tol,
            fitted_scalar: None,
            details: Vec::new(),
        }
    }

    pub fn with_scalar(mut self, c: C64) -> Self {
        self.fitted_scalar = Some(c);
        self
    }

    /// A composite check whose residual is the largest sub-residual; it passes
    /// iff every sub-check passes.
    pub fn group(name: impl Into<String>, details: Vec<CheckReport>, tol: f64) -> Self {
        let residual = details.iter().map(|d| d.residual).fold(0.0, f64::max);
        let passed = details.iter().all(|d| d.passed) && residual < tol;
        Self {
            name: name.into(),
            passed,
            residual,
            tolerance: tol,
            fitted_scalar: None,
            details,
        }
    }

    /// Finds a direct sub-check by name.
    pub fn detail(&self, name: &str) -> Option<&CheckReport> {
        self.details.iter().find(|d| d.name == name)
    }

    /// Depth-first iterator over this report and all nested sub-checks.
    pub fn walk(&self) -> Vec<&CheckReport> {
        let mut out = vec![self];
        for d in &self.details {
            out.extend(d.walk());
        }
        out
    }
}

/// Least-squares scalar `c` minimizing `|lhs − c·rhs|`, i.e. the ratio of
/// Frobenius inner products `⟨rhs, lhs⟩ / ⟨rhs, rhs⟩`, together with the
/// max-entry residual `|lhs − c·rhs|` after fitting. A zero `rhs` fits `c = 0`.
pub fn fit_scalar(lhs: &SparseMatrix, rhs: &SparseMatrix) -> (C64, f64) {
    let denom = rhs.inner(rhs);
    let c = if denom.re > 0.0 {
        rhs.inner(lhs) / denom
    } else {
        C64::new(0.0, 0.0)
    };
    let residual = lhs.combine(C64::new(1.0, 0.0), rhs, -c).max_abs();
    (c, residual)
}
