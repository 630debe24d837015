//! Reader and writer for the subset of the EPANET INP format that describes
//! network topology and the hydraulic parameters of each component.
//!
//! Supported sections are `[JUNCTIONS]`, `[RESERVOIRS]`, `[TANKS]`, `[PIPES]`,
//! `[PUMPS]`, `[VALVES]`, `[CURVES]`, `[OPTIONS]` and `[COORDINATES]`. Any
//! other section is skipped and reported as a [`Warning`]. `[TITLE]` is
//! ignored silently and `[END]` stops the reader.
//!
//! Pipe resistances are derived from length, diameter and roughness with the
//! head-loss formula selected in `[OPTIONS]`, and expressed in the file's own
//! head and flow units. Pump curves are fitted to `h = h_s - r q^nu`.

mod curve;
mod parse;
mod units;
mod write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{fit_pump_curve, fit_valve_resistance, PumpCurveFit};
pub use parse::{parse_inp, parse_inp_with_warnings, Warning};
pub use units::{FlowUnits, HeadlossFormula};
pub use write::write_inp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InpError {
    #[error("line {line}: malformed row in [{section}]: {reason}")]
    MalformedSection {
        section: String,
        line: usize,
        reason: String,
    },
    #[error("link {link} references undeclared node {node}")]
    UnknownNodeRef { link: String, node: String },
    #[error("link {link} references undeclared curve {curve}")]
    UnknownCurveRef { link: String, curve: String },
    #[error("duplicate id {id} in [{section}]")]
    DuplicateId { section: String, id: String },
    #[error("missing required section [{0}]")]
    MissingRequiredSection(String),
    #[error("{component} {id}: {reason}")]
    ParameterOutOfRange {
        component: String,
        id: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Options {
    pub flow_units: FlowUnits,
    pub headloss: HeadlossFormula,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            flow_units: FlowUnits::Gpm,
            headloss: HeadlossFormula::HazenWilliams,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: String,
    pub elevation: f64,
    pub base_demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub id: String,
    pub head: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tank {
    pub id: String,
    pub elevation: f64,
    pub init_level: f64,
    pub min_level: f64,
    pub max_level: f64,
    pub diameter: f64,
    pub min_volume: f64,
    /// `pi * diameter^2 / 4`, in the square of the file's length unit.
    pub cross_section_area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkStatus {
    Open,
    Closed,
    Cv,
}

impl LinkStatus {
    pub fn token(self) -> &'static str {
        match self {
            LinkStatus::Open => "Open",
            LinkStatus::Closed => "Closed",
            LinkStatus::Cv => "CV",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub length: f64,
    pub diameter: f64,
    pub roughness: f64,
    pub minor_loss: f64,
    pub status: LinkStatus,
    /// Resistance `R` in `h = R q |q|^(mu - 1)`.
    pub resistance: f64,
    /// Flow exponent `mu`.
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pump {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub curve: String,
    pub speed: f64,
    pub shutoff_head: f64,
    pub curve_coeff: f64,
    pub curve_exponent: f64,
}

/// General purpose valve. Its resistance is fitted to the head-loss curve
/// named in the setting column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valve {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub diameter: f64,
    pub curve: String,
    pub minor_loss: f64,
    pub openness: f64,
    pub resistance: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub id: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub node: String,
    pub x: f64,
    pub y: f64,
}

/// A parsed, validated network. Components appear in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDescription {
    pub options: Options,
    pub junctions: Vec<Junction>,
    pub reservoirs: Vec<Reservoir>,
    pub tanks: Vec<Tank>,
    pub pipes: Vec<Pipe>,
    pub pumps: Vec<Pump>,
    pub valves: Vec<Valve>,
    pub curves: Vec<Curve>,
    pub coordinates: Vec<Coordinate>,
}

/// Component counts in the order junctions, reservoirs, tanks, pipes,
/// pumps, valves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub junctions: usize,
    pub reservoirs: usize,
    pub tanks: usize,
    pub pipes: usize,
    pub pumps: usize,
    pub valves: usize,
}

impl ComponentCounts {
    pub fn as_array(&self) -> [usize; 6] {
        [
            self.junctions,
            self.reservoirs,
            self.tanks,
            self.pipes,
            self.pumps,
            self.valves,
        ]
    }
}

impl std::fmt::Display for ComponentCounts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = self.as_array();
        write!(
            f,
            "{{{},{},{},{},{},{}}}",
            c[0], c[1], c[2], c[3], c[4], c[5]
        )
    }
}

impl NetworkDescription {
    pub fn counts(&self) -> ComponentCounts {
        ComponentCounts {
            junctions: self.junctions.len(),
            reservoirs: self.reservoirs.len(),
            tanks: self.tanks.len(),
            pipes: self.pipes.len(),
            pumps: self.pumps.len(),
            valves: self.valves.len(),
        }
    }

    /// Canonical JSON: pretty-printed, keys in declaration order, trailing
    /// newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("description serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
