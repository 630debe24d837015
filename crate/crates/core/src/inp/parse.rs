use std::collections::{HashMap, HashSet};

use super::curve::{fit_pump_curve, fit_valve_resistance};
use super::units::{FlowUnits, HeadlossFormula};
use super::{
    Coordinate, Curve, InpError, Junction, LinkStatus, NetworkDescription, Options, Pipe, Pump,
    Reservoir, Tank, Valve,
};

/// A non-fatal issue found while reading a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Junctions,
    Reservoirs,
    Tanks,
    Pipes,
    Pumps,
    Valves,
    Curves,
    Options,
    Coordinates,
}

impl Section {
    fn from_header(name: &str) -> Option<Self> {
        Some(match name {
            "JUNCTIONS" => Section::Junctions,
            "RESERVOIRS" => Section::Reservoirs,
            "TANKS" => Section::Tanks,
            "PIPES" => Section::Pipes,
            "PUMPS" => Section::Pumps,
            "VALVES" => Section::Valves,
            "CURVES" => Section::Curves,
            "OPTIONS" => Section::Options,
            "COORDINATES" => Section::Coordinates,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Section::Junctions => "JUNCTIONS",
            Section::Reservoirs => "RESERVOIRS",
            Section::Tanks => "TANKS",
            Section::Pipes => "PIPES",
            Section::Pumps => "PUMPS",
            Section::Valves => "VALVES",
            Section::Curves => "CURVES",
            Section::Options => "OPTIONS",
            Section::Coordinates => "COORDINATES",
        }
    }
}

struct Row<'a> {
    section: Section,
    line: usize,
    tokens: Vec<&'a str>,
}

impl Row<'_> {
    fn malformed(&self, reason: impl Into<String>) -> InpError {
        InpError::MalformedSection {
            section: self.section.name().to_string(),
            line: self.line,
            reason: reason.into(),
        }
    }

    fn require(&self, count: usize) -> Result<(), InpError> {
        if self.tokens.len() < count {
            Err(self.malformed(format!(
                "expected at least {count} fields, found {}",
                self.tokens.len()
            )))
        } else {
            Ok(())
        }
    }

    fn num(&self, idx: usize, what: &str) -> Result<f64, InpError> {
        let tok = self
            .tokens
            .get(idx)
            .ok_or_else(|| self.malformed(format!("missing {what}")))?;
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.malformed(format!("{what} `{tok}` is not a finite number"))),
        }
    }

    fn num_or(&self, idx: usize, what: &str, default: f64) -> Result<f64, InpError> {
        if idx < self.tokens.len() {
            self.num(idx, what)
        } else {
            Ok(default)
        }
    }
}

/// Parses INP text into a validated [`NetworkDescription`], discarding warnings.
pub fn parse_inp(text: &str) -> Result<NetworkDescription, InpError> {
    parse_inp_with_warnings(text).map(|(desc, _)| desc)
}

/// Parses INP text and also returns the warnings collected for skipped
/// sections and ignored fields.
pub fn parse_inp_with_warnings(text: &str) -> Result<(NetworkDescription, Vec<Warning>), InpError> {
    let mut warnings = Vec::new();
    let mut rows: HashMap<Section, Vec<Row<'_>>> = HashMap::new();
    let mut seen: HashSet<Section> = HashSet::new();
    // None: inside a skipped section (or before the first header)
    let mut current: Option<Section> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split(';').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .split(']')
                .next()
                .unwrap_or("")
                .trim()
                .to_ascii_uppercase();
            current = Section::from_header(&name);
            match current {
                Some(section) => {
                    seen.insert(section);
                }
                None if name == "END" => break,
                None if name == "TITLE" => {}
                None => warnings.push(Warning {
                    line: line_no,
                    message: format!("skipped unsupported section [{name}]"),
                }),
            }
            continue;
        }
        if let Some(section) = current {
            rows.entry(section).or_default().push(Row {
                section,
                line: line_no,
                tokens: content.split_whitespace().collect(),
            });
        }
    }

    if !seen.contains(&Section::Junctions) {
        return Err(InpError::MissingRequiredSection("JUNCTIONS".into()));
    }
    let mut take = |s: Section| rows.remove(&s).unwrap_or_default();

    let options = parse_options(&take(Section::Options))?;
    let curves = parse_curves(&take(Section::Curves))?;
    let curve_points: HashMap<&str, &[(f64, f64)]> = curves
        .iter()
        .map(|c| (c.id.as_str(), c.points.as_slice()))
        .collect();

    let mut node_ids: HashSet<String> = HashSet::new();
    let mut claim_node = |section: &str, id: &str| -> Result<(), InpError> {
        if node_ids.insert(id.to_string()) {
            Ok(())
        } else {
            Err(InpError::DuplicateId {
                section: section.into(),
                id: id.into(),
            })
        }
    };

    let mut junctions = Vec::new();
    for row in take(Section::Junctions) {
        row.require(2)?;
        claim_node("JUNCTIONS", row.tokens[0])?;
        junctions.push(Junction {
            id: row.tokens[0].to_string(),
            elevation: row.num(1, "elevation")?,
            base_demand: row.num_or(2, "demand", 0.0)?,
        });
    }

    let mut reservoirs = Vec::new();
    for row in take(Section::Reservoirs) {
        row.require(2)?;
        claim_node("RESERVOIRS", row.tokens[0])?;
        reservoirs.push(Reservoir {
            id: row.tokens[0].to_string(),
            head: row.num(1, "head")?,
        });
    }

    let mut tanks = Vec::new();
    for row in take(Section::Tanks) {
        row.require(6)?;
        let id = row.tokens[0];
        claim_node("TANKS", id)?;
        let diameter = row.num(5, "diameter")?;
        if diameter <= 0.0 {
            return Err(out_of_range("tank", id, "diameter must be positive"));
        }
        if let Some(curve) = row.tokens.get(7) {
            warnings.push(Warning {
                line: row.line,
                message: format!(
                    "tank {id}: volume curve {curve} ignored, cylindrical shape assumed"
                ),
            });
        }
        tanks.push(Tank {
            id: id.to_string(),
            elevation: row.num(1, "elevation")?,
            init_level: row.num(2, "initial level")?,
            min_level: row.num(3, "minimum level")?,
            max_level: row.num(4, "maximum level")?,
            diameter,
            min_volume: row.num_or(6, "minimum volume", 0.0)?,
            cross_section_area: std::f64::consts::PI * diameter * diameter / 4.0,
        });
    }

    let mut coordinates = Vec::new();
    for row in take(Section::Coordinates) {
        row.require(3)?;
        if !node_ids.contains(row.tokens[0]) {
            warnings.push(Warning {
                line: row.line,
                message: format!("coordinates for undeclared node {} ignored", row.tokens[0]),
            });
            continue;
        }
        coordinates.push(Coordinate {
            node: row.tokens[0].to_string(),
            x: row.num(1, "x")?,
            y: row.num(2, "y")?,
        });
    }

    let mut link_ids: HashSet<String> = HashSet::new();
    let mut claim_link = |row: &Row<'_>| -> Result<(), InpError> {
        let id = row.tokens[0];
        if !link_ids.insert(id.to_string()) {
            return Err(InpError::DuplicateId {
                section: row.section.name().into(),
                id: id.into(),
            });
        }
        for node in &row.tokens[1..3] {
            if !node_ids.contains(*node) {
                return Err(InpError::UnknownNodeRef {
                    link: id.into(),
                    node: (*node).into(),
                });
            }
        }
        Ok(())
    };

    let mu = options.headloss.exponent();

    let mut pipes = Vec::new();
    for row in take(Section::Pipes) {
        row.require(6)?;
        claim_link(&row)?;
        let id = row.tokens[0];
        let length = row.num(3, "length")?;
        let diameter = row.num(4, "diameter")?;
        let roughness = row.num(5, "roughness")?;
        if length <= 0.0 || diameter <= 0.0 || roughness <= 0.0 {
            return Err(out_of_range(
                "pipe",
                id,
                "length, diameter and roughness must be positive",
            ));
        }
        let status = match row.tokens.get(7) {
            None => LinkStatus::Open,
            Some(s) => match s.to_ascii_uppercase().as_str() {
                "OPEN" => LinkStatus::Open,
                "CLOSED" => LinkStatus::Closed,
                "CV" => LinkStatus::Cv,
                _ => return Err(row.malformed(format!("unknown pipe status `{s}`"))),
            },
        };
        let resistance =
            options
                .headloss
                .resistance(options.flow_units, length, diameter, roughness);
        if !(resistance.is_finite() && resistance > 0.0) {
            return Err(out_of_range(
                "pipe",
                id,
                &format!("resistance {resistance} is not positive and finite"),
            ));
        }
        pipes.push(Pipe {
            id: id.to_string(),
            from_node: row.tokens[1].to_string(),
            to_node: row.tokens[2].to_string(),
            length,
            diameter,
            roughness,
            minor_loss: row.num_or(6, "minor loss", 0.0)?,
            status,
            resistance,
            exponent: mu,
        });
    }

    let mut pumps = Vec::new();
    for row in take(Section::Pumps) {
        row.require(3)?;
        claim_link(&row)?;
        let id = row.tokens[0];
        let mut curve = None;
        let mut speed = 1.0;
        let mut i = 3;
        while i < row.tokens.len() {
            let key = row.tokens[i].to_ascii_uppercase();
            let value = row
                .tokens
                .get(i + 1)
                .ok_or_else(|| row.malformed(format!("keyword {key} without a value")))?;
            match key.as_str() {
                "HEAD" => curve = Some(value.to_string()),
                "SPEED" => speed = row.num(i + 1, "speed")?,
                "PATTERN" => warnings.push(Warning {
                    line: row.line,
                    message: format!("pump {id}: speed pattern ignored, speed held fixed"),
                }),
                "POWER" => return Err(row.malformed("constant-power pumps are not supported")),
                _ => return Err(row.malformed(format!("unknown pump keyword {key}"))),
            }
            i += 2;
        }
        let curve = curve.ok_or_else(|| row.malformed("pump has no HEAD curve"))?;
        let points = curve_points
            .get(curve.as_str())
            .ok_or_else(|| InpError::UnknownCurveRef {
                link: id.into(),
                curve: curve.clone(),
            })?;
        let fit = fit_pump_curve(points).map_err(|e| out_of_range("pump", id, &e))?;
        if !(speed > 0.0 && speed <= 1.0) {
            return Err(out_of_range("pump", id, "speed must lie in (0, 1]"));
        }
        if !(fit.shutoff_head > 0.0 && fit.coeff > 0.0) {
            return Err(out_of_range(
                "pump",
                id,
                "shutoff head and curve coefficient must be positive",
            ));
        }
        if !(1.0..=3.0).contains(&fit.exponent) {
            return Err(out_of_range(
                "pump",
                id,
                &format!("curve exponent {} outside [1, 3]", fit.exponent),
            ));
        }
        pumps.push(Pump {
            id: id.to_string(),
            from_node: row.tokens[1].to_string(),
            to_node: row.tokens[2].to_string(),
            curve,
            speed,
            shutoff_head: fit.shutoff_head,
            curve_coeff: fit.coeff,
            curve_exponent: fit.exponent,
        });
    }

    let mut valves = Vec::new();
    for row in take(Section::Valves) {
        row.require(6)?;
        claim_link(&row)?;
        let id = row.tokens[0];
        if !row.tokens[4].eq_ignore_ascii_case("GPV") {
            return Err(row.malformed(format!(
                "valve type {} is not supported, only GPV",
                row.tokens[4]
            )));
        }
        let curve = row.tokens[5].to_string();
        let points = curve_points
            .get(curve.as_str())
            .ok_or_else(|| InpError::UnknownCurveRef {
                link: id.into(),
                curve: curve.clone(),
            })?;
        let resistance =
            fit_valve_resistance(points, mu).map_err(|e| out_of_range("valve", id, &e))?;
        let openness = row.num_or(7, "openness", 1.0)?;
        if !(openness > 0.0 && openness <= 1.0) {
            return Err(out_of_range("valve", id, "openness must lie in (0, 1]"));
        }
        valves.push(Valve {
            id: id.to_string(),
            from_node: row.tokens[1].to_string(),
            to_node: row.tokens[2].to_string(),
            diameter: row.num(3, "diameter")?,
            curve,
            minor_loss: row.num_or(6, "minor loss", 0.0)?,
            openness,
            resistance,
            exponent: mu,
        });
    }

    let desc = NetworkDescription {
        options,
        junctions,
        reservoirs,
        tanks,
        pipes,
        pumps,
        valves,
        curves,
        coordinates,
    };
    Ok((desc, warnings))
}

fn out_of_range(component: &str, id: &str, reason: &str) -> InpError {
    InpError::ParameterOutOfRange {
        component: component.into(),
        id: id.into(),
        reason: reason.into(),
    }
}

fn parse_options(rows: &[Row<'_>]) -> Result<Options, InpError> {
    let mut options = Options::default();
    for row in rows {
        let key = row.tokens[0].to_ascii_uppercase();
        match key.as_str() {
            "UNITS" => {
                row.require(2)?;
                options.flow_units = FlowUnits::parse(row.tokens[1]).ok_or_else(|| {
                    row.malformed(format!("unknown flow units {}", row.tokens[1]))
                })?;
            }
            "HEADLOSS" => {
                row.require(2)?;
                options.headloss = HeadlossFormula::parse(row.tokens[1]).ok_or_else(|| {
                    row.malformed(format!("unknown head-loss formula {}", row.tokens[1]))
                })?;
            }
            _ => {}
        }
    }
    Ok(options)
}

fn parse_curves(rows: &[Row<'_>]) -> Result<Vec<Curve>, InpError> {
    let mut curves: Vec<Curve> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for row in rows {
        row.require(3)?;
        let point = (row.num(1, "x value")?, row.num(2, "y value")?);
        let id = row.tokens[0];
        match index.get(id) {
            Some(&i) => curves[i].points.push(point),
            None => {
                index.insert(id, curves.len());
                curves.push(Curve {
                    id: id.to_string(),
                    points: vec![point],
                });
            }
        }
    }
    Ok(curves)
}
