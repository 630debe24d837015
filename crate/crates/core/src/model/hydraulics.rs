use super::{FlowVector, LinkRef, ModelError, Network, NodeRef};

/// Pipe head loss `R q |q|^(mu - 1)`.
pub fn headloss_pipe(resistance: f64, exponent: f64, q: f64) -> f64 {
    resistance * q * q.abs().powf(exponent - 1.0)
}

/// Valve head loss, a pipe law scaled by openness.
pub fn headloss_valve(openness: f64, resistance: f64, exponent: f64, q: f64) -> f64 {
    openness * headloss_pipe(resistance, exponent, q)
}

/// Pump head loss `-s^2 (h_s - r (q/s)^nu)`, written as
/// `-s^2 h_s + r q^nu s^(2 - nu)`. Defined only for positive flow.
pub fn headgain_pump(
    shutoff_head: f64,
    coeff: f64,
    exponent: f64,
    speed: f64,
    q: f64,
) -> Result<f64, ModelError> {
    if q <= 0.0 || q.is_nan() {
        return Err(ModelError::NonPositiveFlow {
            link: String::new(),
            flow: q,
        });
    }
    Ok(-speed * speed * shutoff_head + coeff * q.powf(exponent) * speed.powf(2.0 - exponent))
}

/// `d/dq` of the pipe law: `mu R |q|^(mu - 1)`.
///
/// The analytical constants evaluate this same function at the extreme
/// flow, so point estimates never exceed them through rounding.
pub fn pipe_derivative(resistance: f64, exponent: f64, q: f64) -> f64 {
    exponent * resistance * q.abs().powf(exponent - 1.0)
}

/// `d/dq` of the valve law: `mu o R |q|^(mu - 1)`.
pub fn valve_derivative(openness: f64, resistance: f64, exponent: f64, q: f64) -> f64 {
    exponent * openness * resistance * q.abs().powf(exponent - 1.0)
}

/// `d/dq` of the pump law: `nu r q^(nu - 1) s^(2 - nu)`, for `q > 0`.
pub fn pump_derivative(coeff: f64, exponent: f64, speed: f64, q: f64) -> f64 {
    exponent * coeff * q.powf(exponent - 1.0) * speed.powf(2.0 - exponent)
}

impl Network {
    /// Component `k` of `f` at flow `q`.
    pub fn f_component(&self, k: usize, q: f64) -> Result<f64, ModelError> {
        Ok(match self.link_at(k) {
            LinkRef::Pipe(i) => {
                let p = &self.pipes[i];
                headloss_pipe(p.resistance, p.exponent, q)
            }
            LinkRef::Pump(i) => {
                let p = &self.pumps[i];
                headgain_pump(p.shutoff_head, p.coeff, p.exponent, p.speed, q).map_err(|_| {
                    ModelError::NonPositiveFlow {
                        link: p.id.clone(),
                        flow: q,
                    }
                })?
            }
            LinkRef::Valve(i) => {
                let v = &self.valves[i];
                headloss_valve(v.openness, v.resistance, v.exponent, q)
            }
        })
    }

    /// Diagonal Jacobian entry `k` at flow `q`. Pump entries are only
    /// meaningful for `q > 0`.
    pub fn derivative(&self, k: usize, q: f64) -> f64 {
        match self.link_at(k) {
            LinkRef::Pipe(i) => {
                let p = &self.pipes[i];
                pipe_derivative(p.resistance, p.exponent, q)
            }
            LinkRef::Pump(i) => {
                let p = &self.pumps[i];
                pump_derivative(p.coeff, p.exponent, p.speed, q)
            }
            LinkRef::Valve(i) => {
                let v = &self.valves[i];
                valve_derivative(v.openness, v.resistance, v.exponent, q)
            }
        }
    }
}

fn check_pumps(net: &Network, flows: &FlowVector) -> Result<(), ModelError> {
    flows.check(net)?;
    for (i, p) in net.pumps.iter().enumerate() {
        let q = flows.u[i];
        if q <= 0.0 || q.is_nan() {
            return Err(ModelError::NonPositiveFlow {
                link: p.id.clone(),
                flow: q,
            });
        }
    }
    Ok(())
}

/// Stacked nonlinearity: pipe head losses, pump head gains, valve head
/// losses, each in index order.
pub fn eval_f(net: &Network, flows: &FlowVector) -> Result<Vec<f64>, ModelError> {
    check_pumps(net, flows)?;
    flows
        .v
        .iter()
        .chain(&flows.u)
        .enumerate()
        .map(|(k, &q)| net.f_component(k, q))
        .collect()
}

/// Diagonal of the Jacobian of [`eval_f`]. The Jacobian has no off-diagonal
/// entries because each component depends on its own link flow only.
pub fn eval_jacobian_diag(net: &Network, flows: &FlowVector) -> Result<Vec<f64>, ModelError> {
    check_pumps(net, flows)?;
    Ok(flows
        .v
        .iter()
        .chain(&flows.u)
        .enumerate()
        .map(|(k, &q)| net.derivative(k, q))
        .collect())
}

fn net_inflow(net: &Network, node: NodeRef, flows: &FlowVector) -> f64 {
    let inflow: f64 = net
        .inflow_links(node)
        .iter()
        .map(|&l| flows.get(net, l))
        .sum();
    let outflow: f64 = net
        .outflow_links(node)
        .iter()
        .map(|&l| flows.get(net, l))
        .sum();
    inflow - outflow
}

/// Advances tank heads by one step: `h + dt / A * (inflow - outflow)`.
pub fn tank_step(
    net: &Network,
    tank_heads: &[f64],
    flows: &FlowVector,
    dt: f64,
) -> Result<Vec<f64>, ModelError> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(ModelError::InvalidTimeStep(dt));
    }
    flows.check(net)?;
    if tank_heads.len() != net.n_tanks() {
        return Err(ModelError::DimensionMismatch {
            what: "tank heads",
            expected: net.n_tanks(),
            found: tank_heads.len(),
        });
    }
    Ok(net
        .tanks
        .iter()
        .enumerate()
        .map(|(i, t)| tank_heads[i] + dt / t.area * net_inflow(net, NodeRef::Tank(i), flows))
        .collect())
}

/// Mass-balance residual at each junction: `inflow - outflow - demand`.
pub fn junction_residual(
    net: &Network,
    flows: &FlowVector,
    demand: &[f64],
) -> Result<Vec<f64>, ModelError> {
    flows.check(net)?;
    if demand.len() != net.n_junctions() {
        return Err(ModelError::DimensionMismatch {
            what: "demands",
            expected: net.n_junctions(),
            found: demand.len(),
        });
    }
    Ok((0..net.n_junctions())
        .map(|i| net_inflow(net, NodeRef::Junction(i), flows) - demand[i])
        .collect())
}
