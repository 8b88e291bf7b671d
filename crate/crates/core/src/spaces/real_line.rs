use crate::error::{Error, Result};
use crate::metric::{DeclaredDimension, Exactness, MetricSpace, Real};

/// The real line with `|x - y|`, compared with tolerance `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealLine {
    pub tol: f64,
}

impl RealLine {
    pub fn new() -> Self {
        RealLine { tol: 0.0 }
    }

    pub fn with_tolerance(tol: f64) -> Self {
        RealLine { tol }
    }
}

impl Default for RealLine {
    fn default() -> Self {
        Self::new()
    }
}

impl MetricSpace for RealLine {
    type Point = f64;
    type Dist = Real;

    #[inline]
    fn distance(&self, a: &f64, b: &f64) -> Result<Real> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::OutsideUniverse(format!("non-finite real {a} or {b}")));
        }
        Ok(Real::new((a - b).abs(), self.tol))
    }

    fn exactness(&self) -> Exactness {
        Exactness::Inexact
    }

    fn name(&self) -> String {
        "real-line".into()
    }

    fn declared(&self) -> DeclaredDimension {
        DeclaredDimension {
            nagata: Some(1),
            beta: Some(2),
            scale: None,
        }
    }
}
