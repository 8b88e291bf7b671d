use rand::Rng;

use super::RealLine;
use crate::distribution::LabeledDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaKind {
    /// `eta(x) = x`
    Linear,
    /// `eta(x) = c`
    Constant(f64),
}

/// Uniform marginal on `[0, 1]` with a linear or constant regression function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDistribution {
    pub eta: EtaKind,
    space: RealLine,
}

pub fn build_interval_distribution(eta: EtaKind) -> Result<IntervalDistribution> {
    if let EtaKind::Constant(c) = eta {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!("constant eta {c} outside [0, 1]")));
        }
    }
    Ok(IntervalDistribution {
        eta,
        space: RealLine::new(),
    })
}

impl LabeledDistribution for IntervalDistribution {
    type Space = RealLine;

    fn space(&self) -> &RealLine {
        &self.space
    }

    fn name(&self) -> String {
        match self.eta {
            EtaKind::Linear => "uniform01-linear".into(),
            EtaKind::Constant(c) => format!("uniform01-constant-{c}"),
        }
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.gen::<f64>()
    }

    fn eta(&self, x: &f64) -> Option<f64> {
        Some(match self.eta {
            EtaKind::Linear => x.clamp(0.0, 1.0),
            EtaKind::Constant(c) => c,
        })
    }

    fn bayes_error(&self) -> Option<f64> {
        Some(match self.eta {
            EtaKind::Linear => 0.25,
            EtaKind::Constant(c) => c.min(1.0 - c),
        })
    }
}

/// All mass at one point of the line, with constant `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    pub at: f64,
    pub eta: f64,
    space: RealLine,
}

impl PointMass {
    pub fn new(at: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside [0, 1]")));
        }
        Ok(PointMass {
            at,
            eta,
            space: RealLine::new(),
        })
    }
}

impl LabeledDistribution for PointMass {
    type Space = RealLine;

    fn space(&self) -> &RealLine {
        &self.space
    }

    fn name(&self) -> String {
        format!("point-mass-{}", self.at)
    }

    fn sample_point<R: Rng + ?Sized>(&self, _rng: &mut R) -> f64 {
        self.at
    }

    fn eta(&self, _x: &f64) -> Option<f64> {
        Some(self.eta)
    }

    fn bayes_error(&self) -> Option<f64> {
        Some(self.eta.min(1.0 - self.eta))
    }
}
