use std::fmt;

use serde::{Deserialize, Serialize};

/// How an estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed-form class constants.
    Analytical,
    /// Certified upper bound from interval branch and bound.
    IntervalUpper,
    /// Maximum over sampled points; a lower bound.
    PointLower,
}

/// Norm of the (diagonal) Jacobian being maximised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Largest absolute diagonal entry, i.e. the spectral norm.
    Max,
    /// Frobenius norm, `sqrt(sum of squared entries)`.
    Sqrt,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Some(Mode::Max),
            "sqrt" => Some(Mode::Sqrt),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Mode::Max => "max",
            Mode::Sqrt => "sqrt",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Per-class constants behind an analytical estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassConstants {
    pub k_pipes: f64,
    pub k_pumps: f64,
    pub k_valves: f64,
}

impl ClassConstants {
    pub fn max(&self) -> f64 {
        self.k_pipes.max(self.k_pumps).max(self.k_valves)
    }
}

/// Why a branch-and-bound run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The gap fell to the requested tolerance.
    Gap,
    /// The box budget ran out first.
    MaxIterations,
    /// Remaining boxes could not be bisected further in floating point.
    Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub method: Method,
    pub mode: Mode,
    /// `upper - lower` of the branch and bound run; interval estimates only.
    pub gap: Option<f64>,
    /// Lower bound found by branch and bound; interval estimates only.
    pub lower: Option<f64>,
    pub terminated_by: Option<Termination>,
    /// Boxes processed or points sampled; 0 for closed forms.
    pub effort: u64,
    pub per_class: Option<ClassConstants>,
}

impl LipschitzEstimate {
    pub fn analytical(per_class: ClassConstants) -> Self {
        LipschitzEstimate {
            value: per_class.max(),
            method: Method::Analytical,
            mode: Mode::Max,
            gap: None,
            lower: None,
            terminated_by: None,
            effort: 0,
            per_class: Some(per_class),
        }
    }
}
