//! Identity checks and their serialisable report.

use num_complex::Complex;
use serde::Serialize;

use crate::scalar::{rel_err, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Value {
    pub re: f64,
    pub im: f64,
}

impl<T: Scalar> From<Complex<T>> for Value {
    fn from(z: Complex<T>) -> Self {
        Value {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
        }
    }
}

/// One compared pair of quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: Value,
    pub rhs: Value,
    pub rel_err: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
}

impl Check {
    /// Relative comparison.
    pub fn relative<T: Scalar>(name: impl Into<String>, lhs: Complex<T>, rhs: Complex<T>, tol: f64) -> Self {
        let err = rel_err(lhs, rhs);
        Check {
            name: name.into(),
            lhs: lhs.into(),
            rhs: rhs.into(),
            rel_err: err,
            pass: err <= tol,
            route: None,
        }
    }

    /// Absolute comparison; `rel_err` then holds the absolute gap.
    pub fn absolute<T: Scalar>(name: impl Into<String>, lhs: Complex<T>, rhs: Complex<T>, tol: f64) -> Self {
        let gap = Complex::new((lhs.re - rhs.re).to_f64_lossy(), (lhs.im - rhs.im).to_f64_lossy()).norm();
        Check {
            name: name.into(),
            lhs: lhs.into(),
            rhs: rhs.into(),
            rel_err: gap,
            pass: gap <= tol,
            route: None,
        }
    }

    /// A yes/no property reported as 1 vs 0.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let one = Value { re: 1.0, im: 0.0 };
        Check {
            name: name.into(),
            lhs: if ok { one } else { Value { re: 0.0, im: 0.0 } },
            rhs: one,
            rel_err: if ok { 0.0 } else { 1.0 },
            pass: ok,
            route: None,
        }
    }

    pub fn with_route(mut self, route: impl Into<String>) -> Self {
        self.route = Some(route.into());
        self
    }
}

/// Full report for one graph.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub graph: String,
    pub tolerance: f64,
    pub root_s: usize,
    /// Unit-modulus constant relating the matching sum of the double to
    /// the tree sums.
    pub phase_constant: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}
