//! The box of attainable flows: one interval per link.

use std::collections::HashMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LinkKind, Network};

/// Lower flow floor given to pumps by [`default_box`].
pub const DEFAULT_PUMP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("no bounds for link {0}")]
    MissingLink(String),
    #[error("link {0} appears more than once")]
    DuplicateLink(String),
    #[error("bounds given for unknown link {0}")]
    UnknownLink(String),
    #[error("link {link}: interval [{q_min}, {q_max}] is inverted or not finite")]
    InvertedInterval {
        link: String,
        q_min: f64,
        q_max: f64,
    },
    #[error("pump {link}: lower bound {q_min} must be positive")]
    PumpNonpositiveLower { link: String, q_min: f64 },
    #[error("network has no pumps, cannot infer default bounds")]
    NoPumps,
    #[error("bounds file: {0}")]
    Format(String),
}

/// Product of per-link flow intervals, in the flat link order of the
/// network (pipes, pumps, valves).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowBox {
    pub links: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FlowBox {
    /// Builds a box from intervals in flat link order, enforcing the
    /// invariants.
    pub fn new(net: &Network, intervals: &[(f64, f64)]) -> Result<Self, DomainError> {
        if intervals.len() != net.n_links() {
            return Err(DomainError::Format(format!(
                "expected {} intervals, got {}",
                net.n_links(),
                intervals.len()
            )));
        }
        let ids = net.link_ids();
        for (k, &(lo, hi)) in intervals.iter().enumerate() {
            check_interval(net, k, ids[k], lo, hi)?;
        }
        Ok(FlowBox {
            links: ids.into_iter().map(String::from).collect(),
            lower: intervals.iter().map(|i| i.0).collect(),
            upper: intervals.iter().map(|i| i.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.lower[k], self.upper[k])
    }

    /// `max(|q_min|, |q_max|)` for link `k`.
    pub fn max_abs(&self, k: usize) -> f64 {
        self.lower[k].abs().max(self.upper[k].abs())
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.len()
            && q.iter()
                .enumerate()
                .all(|(k, &x)| self.lower[k] <= x && x <= self.upper[k])
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Affine image of a unit-cube point.
    pub fn map_unit(&self, t: &[f64], out: &mut [f64]) {
        for k in 0..self.len() {
            let (a, b) = self.interval(k);
            out[k] = (a + t[k] * (b - a)).clamp(a, b);
        }
    }

    /// Writes `link_id,q_min,q_max` with 17 significant digits, which
    /// reproduces every value exactly on reading.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing to memory cannot fail
        w.write_record(["link_id", "q_min", "q_max"]).unwrap();
        for k in 0..self.len() {
            w.write_record([
                self.links[k].clone(),
                format!("{:.16e}", self.lower[k]),
                format!("{:.16e}", self.upper[k]),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Parses bounds CSV text; every link of `net` must appear exactly once.
    pub fn from_csv(text: &str, net: &Network) -> Result<Self, DomainError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| DomainError::Format(e.to_string()))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DomainError::Format(format!("missing column {name}")))
        };
        let (ci, clo, chi) = (col("link_id")?, col("q_min")?, col("q_max")?);

        let mut seen: HashMap<String, (f64, f64)> = HashMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| DomainError::Format(e.to_string()))?;
            let field = |c: usize| rec.get(c).unwrap_or("");
            let id = field(ci).to_string();
            let num = |c: usize| {
                field(c).parse::<f64>().map_err(|_| {
                    DomainError::Format(format!("link {id}: bad number '{}'", field(c)))
                })
            };
            let (lo, hi) = (num(clo)?, num(chi)?);
            if net.link(&id).is_none() {
                return Err(DomainError::UnknownLink(id));
            }
            if seen.insert(id.clone(), (lo, hi)).is_some() {
                return Err(DomainError::DuplicateLink(id));
            }
        }

        let mut intervals = Vec::with_capacity(net.n_links());
        for id in net.link_ids() {
            match seen.get(id) {
                Some(&iv) => intervals.push(iv),
                None => return Err(DomainError::MissingLink(id.to_string())),
            }
        }
        FlowBox::new(net, &intervals)
    }
}

fn check_interval(net: &Network, k: usize, id: &str, lo: f64, hi: f64) -> Result<(), DomainError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(DomainError::InvertedInterval {
            link: id.to_string(),
            q_min: lo,
            q_max: hi,
        });
    }
    if net.link_kind(k) == LinkKind::Pump && lo <= 0.0 {
        return Err(DomainError::PumpNonpositiveLower {
            link: id.to_string(),
            q_min: lo,
        });
    }
    Ok(())
}

/// Reads a bounds CSV (`link_id,q_min,q_max`).
pub fn load_bounds(path: &Path, net: &Network) -> Result<FlowBox, DomainError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DomainError::Format(format!("{}: {e}", path.display())))?;
    FlowBox::from_csv(&text, net)
}

pub fn save_bounds(path: &Path, bounds: &FlowBox) -> io::Result<()> {
    std::fs::write(path, bounds.to_csv())
}

/// Flow at which a pump curve reaches zero head: `s (h_s / r)^(1/nu)`.
pub fn pump_max_flow(shutoff_head: f64, coeff: f64, exponent: f64, speed: f64) -> f64 {
    speed * (shutoff_head / coeff).powf(1.0 / exponent)
}

/// Box implied by the pumps alone: each pump gets `[floor, its max flow]`
/// and every other link `[-Q, Q]` with `Q` the largest pump max flow.
pub fn default_box(net: &Network) -> Result<FlowBox, DomainError> {
    default_box_with_floor(net, DEFAULT_PUMP_FLOOR)
}

pub fn default_box_with_floor(net: &Network, floor: f64) -> Result<FlowBox, DomainError> {
    let maxima: Vec<f64> = net
        .pumps
        .iter()
        .map(|p| pump_max_flow(p.shutoff_head, p.coeff, p.exponent, p.speed))
        .collect();
    let q = maxima.iter().copied().fold(f64::NAN, f64::max);
    if q.is_nan() {
        return Err(DomainError::NoPumps);
    }
    let mut intervals = vec![(-q, q); net.n_links()];
    for (i, &m) in maxima.iter().enumerate() {
        intervals[net.n_pipes() + i] = (floor, m);
    }
    FlowBox::new(net, &intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inp::parse_inp;
    use crate::model::build_network;

    const NET: &str =
        "[JUNCTIONS]\nJ 0 1\n[RESERVOIRS]\nR 10\n[PIPES]\nP R J 100 12 100\nQ J R 50 8 100\n\
        [CURVES]\nC 0 16\nC 1 15\nC 4 0\n[PUMPS]\nM R J HEAD C\n";

    fn net() -> Network {
        build_network(&parse_inp(NET).unwrap())
    }

    #[test]
    fn pump_max_flow_examples() {
        assert_eq!(pump_max_flow(16.0, 1.0, 2.0, 1.0), 4.0);
        assert_eq!(pump_max_flow(16.0, 1.0, 2.0, 0.5), 2.0);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let n = net();
        let text = "link_id,q_min,q_max\nP,-3.5,2\nQ,-1,1\nM,0.25,4\n";
        let b = FlowBox::from_csv(text, &n).unwrap();
        assert_eq!(b.links, vec!["P", "Q", "M"]);
        assert_eq!(FlowBox::from_csv(&b.to_csv(), &n).unwrap(), b);

        let missing = "link_id,q_min,q_max\nP,-3.5,2\nM,0.25,4\n";
        assert_eq!(
            FlowBox::from_csv(missing, &n),
            Err(DomainError::MissingLink("Q".into()))
        );
        let dup = format!("{text}P,0,1\n");
        assert_eq!(
            FlowBox::from_csv(&dup, &n),
            Err(DomainError::DuplicateLink("P".into()))
        );
        let inverted = text.replace("Q,-1,1", "Q,1,-1");
        assert!(matches!(
            FlowBox::from_csv(&inverted, &n),
            Err(DomainError::InvertedInterval { .. })
        ));
        let zero_pump = text.replace("M,0.25,4", "M,0,4");
        assert!(matches!(
            FlowBox::from_csv(&zero_pump, &n),
            Err(DomainError::PumpNonpositiveLower { .. })
        ));
        let unknown = format!("{text}X,0,1\n");
        assert!(matches!(
            FlowBox::from_csv(&unknown, &n),
            Err(DomainError::UnknownLink(_))
        ));
    }

    #[test]
    fn default_box_from_pump() {
        let n = net();
        let b = default_box(&n).unwrap();
        let m = &n.pumps[0];
        let q = pump_max_flow(m.shutoff_head, m.coeff, m.exponent, m.speed);
        assert_eq!(b.interval(0), (-q, q));
        assert_eq!(b.interval(2), (DEFAULT_PUMP_FLOOR, q));
        let no_pump = build_network(
            &parse_inp("[JUNCTIONS]\nJ 0 1\n[RESERVOIRS]\nR 10\n[PIPES]\nP R J 100 12 100\n")
                .unwrap(),
        );
        assert_eq!(default_box(&no_pump), Err(DomainError::NoPumps));
    }
}
