//! Indexed network, hydraulic nonlinearity and the descriptor (DAE) form of
//! the network equations.
//!
//! Links are laid out in a single flat order used everywhere a vector of
//! flows appears: pipes first, then pumps, then valves. The pipe block is the
//! uncontrollable flow vector `v`; pumps and valves together form the
//! controllable flow vector `u`.

mod dae;
mod hydraulics;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inp::{FlowUnits, NetworkDescription};

pub use dae::{build_dae, DaeLayout, DaeSystem, SparseMatrix, TimeMode, Triplet};
pub use hydraulics::{
    eval_f, eval_jacobian_diag, headgain_pump, headloss_pipe, headloss_valve, junction_residual,
    pipe_derivative, pump_derivative, tank_step, valve_derivative,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("pump {link}: flow {flow} is not positive")]
    NonPositiveFlow { link: String, flow: f64 },
    #[error("expected {expected} values for {what}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("time step {0} must be positive")]
    InvalidTimeStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRef {
    Junction(usize),
    Reservoir(usize),
    Tank(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkRef {
    Pipe(usize),
    Pump(usize),
    Valve(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Pipe,
    Pump,
    Valve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipeParams {
    pub id: String,
    pub from: NodeRef,
    pub to: NodeRef,
    pub resistance: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpParams {
    pub id: String,
    pub from: NodeRef,
    pub to: NodeRef,
    pub shutoff_head: f64,
    pub coeff: f64,
    pub exponent: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValveParams {
    pub id: String,
    pub from: NodeRef,
    pub to: NodeRef,
    pub resistance: f64,
    pub exponent: f64,
    pub openness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TankParams {
    pub id: String,
    pub area: f64,
    pub elevation: f64,
    pub init_head: f64,
}

/// Index-resolved network. Indices follow declaration order in the source
/// description and never change after construction.
#[derive(Debug, Clone)]
pub struct Network {
    pub flow_units: FlowUnits,
    pub junction_ids: Vec<String>,
    pub demands: Vec<f64>,
    pub reservoir_ids: Vec<String>,
    pub reservoir_heads: Vec<f64>,
    pub tanks: Vec<TankParams>,
    pub pipes: Vec<PipeParams>,
    pub pumps: Vec<PumpParams>,
    pub valves: Vec<ValveParams>,
    node_index: HashMap<String, NodeRef>,
    link_index: HashMap<String, LinkRef>,
    // indexed by flat node position: junctions, reservoirs, tanks
    inflow: Vec<Vec<LinkRef>>,
    outflow: Vec<Vec<LinkRef>>,
}

impl Network {
    pub fn n_junctions(&self) -> usize {
        self.junction_ids.len()
    }
    pub fn n_reservoirs(&self) -> usize {
        self.reservoir_ids.len()
    }
    pub fn n_tanks(&self) -> usize {
        self.tanks.len()
    }
    pub fn n_pipes(&self) -> usize {
        self.pipes.len()
    }
    pub fn n_pumps(&self) -> usize {
        self.pumps.len()
    }
    pub fn n_valves(&self) -> usize {
        self.valves.len()
    }
    /// Length of the flow vector and of `f`.
    pub fn n_links(&self) -> usize {
        self.pipes.len() + self.pumps.len() + self.valves.len()
    }
    pub fn n_nodes(&self) -> usize {
        self.junction_ids.len() + self.reservoir_ids.len() + self.tanks.len()
    }

    pub fn node(&self, id: &str) -> Option<NodeRef> {
        self.node_index.get(id).copied()
    }

    pub fn link(&self, id: &str) -> Option<LinkRef> {
        self.link_index.get(id).copied()
    }

    /// Position of a link in the flat flow layout.
    pub fn flat_index(&self, link: LinkRef) -> usize {
        match link {
            LinkRef::Pipe(i) => i,
            LinkRef::Pump(i) => self.pipes.len() + i,
            LinkRef::Valve(i) => self.pipes.len() + self.pumps.len() + i,
        }
    }

    pub fn link_at(&self, k: usize) -> LinkRef {
        let (np, nm) = (self.pipes.len(), self.pumps.len());
        if k < np {
            LinkRef::Pipe(k)
        } else if k < np + nm {
            LinkRef::Pump(k - np)
        } else {
            LinkRef::Valve(k - np - nm)
        }
    }

    pub fn link_kind(&self, k: usize) -> LinkKind {
        match self.link_at(k) {
            LinkRef::Pipe(_) => LinkKind::Pipe,
            LinkRef::Pump(_) => LinkKind::Pump,
            LinkRef::Valve(_) => LinkKind::Valve,
        }
    }

    pub fn link_id(&self, link: LinkRef) -> &str {
        match link {
            LinkRef::Pipe(i) => &self.pipes[i].id,
            LinkRef::Pump(i) => &self.pumps[i].id,
            LinkRef::Valve(i) => &self.valves[i].id,
        }
    }

    pub fn link_ids(&self) -> Vec<&str> {
        (0..self.n_links())
            .map(|k| self.link_id(self.link_at(k)))
            .collect()
    }

    pub fn endpoints(&self, link: LinkRef) -> (NodeRef, NodeRef) {
        match link {
            LinkRef::Pipe(i) => (self.pipes[i].from, self.pipes[i].to),
            LinkRef::Pump(i) => (self.pumps[i].from, self.pumps[i].to),
            LinkRef::Valve(i) => (self.valves[i].from, self.valves[i].to),
        }
    }

    pub fn node_id(&self, node: NodeRef) -> &str {
        match node {
            NodeRef::Junction(i) => &self.junction_ids[i],
            NodeRef::Reservoir(i) => &self.reservoir_ids[i],
            NodeRef::Tank(i) => &self.tanks[i].id,
        }
    }

    fn node_position(&self, node: NodeRef) -> usize {
        match node {
            NodeRef::Junction(i) => i,
            NodeRef::Reservoir(i) => self.junction_ids.len() + i,
            NodeRef::Tank(i) => self.junction_ids.len() + self.reservoir_ids.len() + i,
        }
    }

    /// Links delivering flow into `node` (the node is their downstream end).
    pub fn inflow_links(&self, node: NodeRef) -> &[LinkRef] {
        &self.inflow[self.node_position(node)]
    }

    /// Links carrying flow out of `node`.
    pub fn outflow_links(&self, node: NodeRef) -> &[LinkRef] {
        &self.outflow[self.node_position(node)]
    }

    /// Upstream neighbours of `node`.
    pub fn inflow_neighbors(&self, node: NodeRef) -> Vec<NodeRef> {
        self.inflow_links(node)
            .iter()
            .map(|&l| self.endpoints(l).0)
            .collect()
    }

    /// Downstream neighbours of `node`.
    pub fn outflow_neighbors(&self, node: NodeRef) -> Vec<NodeRef> {
        self.outflow_links(node)
            .iter()
            .map(|&l| self.endpoints(l).1)
            .collect()
    }

    /// Multiplies every pipe and valve resistance and every pump curve
    /// coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Network {
        let mut net = self.clone();
        for p in &mut net.pipes {
            p.resistance *= factor;
        }
        for p in &mut net.pumps {
            p.coeff *= factor;
        }
        for v in &mut net.valves {
            v.resistance *= factor;
        }
        net
    }
}

/// Resolves a validated description into an indexed [`Network`].
///
/// The description's invariants (unique ids, declared endpoints) are
/// established by the parser; this function only assigns indices.
pub fn build_network(desc: &NetworkDescription) -> Network {
    let mut node_index = HashMap::new();
    for (i, j) in desc.junctions.iter().enumerate() {
        node_index.insert(j.id.clone(), NodeRef::Junction(i));
    }
    for (i, r) in desc.reservoirs.iter().enumerate() {
        node_index.insert(r.id.clone(), NodeRef::Reservoir(i));
    }
    for (i, t) in desc.tanks.iter().enumerate() {
        node_index.insert(t.id.clone(), NodeRef::Tank(i));
    }
    let node = |id: &str| -> NodeRef {
        *node_index
            .get(id)
            .unwrap_or_else(|| panic!("link endpoint {id} is not a declared node"))
    };

    let pipes: Vec<PipeParams> = desc
        .pipes
        .iter()
        .map(|p| PipeParams {
            id: p.id.clone(),
            from: node(&p.from_node),
            to: node(&p.to_node),
            resistance: p.resistance,
            exponent: p.exponent,
        })
        .collect();
    let pumps: Vec<PumpParams> = desc
        .pumps
        .iter()
        .map(|p| PumpParams {
            id: p.id.clone(),
            from: node(&p.from_node),
            to: node(&p.to_node),
            shutoff_head: p.shutoff_head,
            coeff: p.curve_coeff,
            exponent: p.curve_exponent,
            speed: p.speed,
        })
        .collect();
    let valves: Vec<ValveParams> = desc
        .valves
        .iter()
        .map(|v| ValveParams {
            id: v.id.clone(),
            from: node(&v.from_node),
            to: node(&v.to_node),
            resistance: v.resistance,
            exponent: v.exponent,
            openness: v.openness,
        })
        .collect();

    let mut link_index = HashMap::new();
    for (i, p) in pipes.iter().enumerate() {
        link_index.insert(p.id.clone(), LinkRef::Pipe(i));
    }
    for (i, p) in pumps.iter().enumerate() {
        link_index.insert(p.id.clone(), LinkRef::Pump(i));
    }
    for (i, v) in valves.iter().enumerate() {
        link_index.insert(v.id.clone(), LinkRef::Valve(i));
    }

    let n_nodes = desc.junctions.len() + desc.reservoirs.len() + desc.tanks.len();
    let mut net = Network {
        flow_units: desc.options.flow_units,
        junction_ids: desc.junctions.iter().map(|j| j.id.clone()).collect(),
        demands: desc.junctions.iter().map(|j| j.base_demand).collect(),
        reservoir_ids: desc.reservoirs.iter().map(|r| r.id.clone()).collect(),
        reservoir_heads: desc.reservoirs.iter().map(|r| r.head).collect(),
        tanks: desc
            .tanks
            .iter()
            .map(|t| TankParams {
                id: t.id.clone(),
                area: t.cross_section_area,
                elevation: t.elevation,
                init_head: t.elevation + t.init_level,
            })
            .collect(),
        pipes,
        pumps,
        valves,
        node_index,
        link_index,
        inflow: vec![Vec::new(); n_nodes],
        outflow: vec![Vec::new(); n_nodes],
    };
    for k in 0..net.n_links() {
        let link = net.link_at(k);
        let (from, to) = net.endpoints(link);
        let (f, t) = (net.node_position(from), net.node_position(to));
        net.outflow[f].push(link);
        net.inflow[t].push(link);
    }
    net
}

/// Flows through every link: `v` for pipes, `u` for pumps then valves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowVector {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

impl FlowVector {
    /// Splits a flat vector (pipes, pumps, valves) according to `net`.
    pub fn from_flat(net: &Network, flat: &[f64]) -> Result<Self, ModelError> {
        if flat.len() != net.n_links() {
            return Err(ModelError::DimensionMismatch {
                what: "flows",
                expected: net.n_links(),
                found: flat.len(),
            });
        }
        let (v, u) = flat.split_at(net.n_pipes());
        Ok(FlowVector {
            v: v.to_vec(),
            u: u.to_vec(),
        })
    }

    pub fn zeros(net: &Network) -> Self {
        FlowVector {
            v: vec![0.0; net.n_pipes()],
            u: vec![0.0; net.n_pumps() + net.n_valves()],
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.v.iter().chain(&self.u).copied().collect()
    }

    pub(crate) fn check(&self, net: &Network) -> Result<(), ModelError> {
        if self.v.len() != net.n_pipes() {
            return Err(ModelError::DimensionMismatch {
                what: "pipe flows",
                expected: net.n_pipes(),
                found: self.v.len(),
            });
        }
        if self.u.len() != net.n_pumps() + net.n_valves() {
            return Err(ModelError::DimensionMismatch {
                what: "pump and valve flows",
                expected: net.n_pumps() + net.n_valves(),
                found: self.u.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn get(&self, net: &Network, link: LinkRef) -> f64 {
        match link {
            LinkRef::Pipe(i) => self.v[i],
            LinkRef::Pump(i) => self.u[i],
            LinkRef::Valve(i) => self.u[net.n_pumps() + i],
        }
    }
}
