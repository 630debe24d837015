//! Closed-form Lipschitz constants.
//!
//! Each link's nonlinearity depends only on its own flow and has a
//! derivative that grows with `|q|`, so the supremum of the derivative over
//! an interval is attained at the endpoint of largest magnitude. The network
//! Jacobian is diagonal, so its spectral norm (and its logarithmic norm,
//! since every entry is nonnegative) is the largest entry.

use crate::domain::FlowBox;
use crate::estimate::{ClassConstants, LipschitzEstimate};
use crate::model::{pipe_derivative, pump_derivative, valve_derivative, Network};

fn check(net: &Network, bounds: &FlowBox) {
    assert_eq!(
        bounds.len(),
        net.n_links(),
        "flow box does not match the network"
    );
}

/// `max_i mu R_i max(|q_min|, |q_max|)^(mu - 1)` over pipes; 0 without pipes.
pub fn k_pipes(net: &Network, bounds: &FlowBox) -> f64 {
    check(net, bounds);
    net.pipes
        .iter()
        .enumerate()
        .map(|(i, p)| pipe_derivative(p.resistance, p.exponent, bounds.max_abs(i)))
        .fold(0.0, f64::max)
}

/// `max_i nu_i r_i q_max^(nu_i - 1) s_i^(2 - nu_i)` over pumps; 0 without
/// pumps.
pub fn k_pumps(net: &Network, bounds: &FlowBox) -> f64 {
    check(net, bounds);
    let base = net.n_pipes();
    net.pumps
        .iter()
        .enumerate()
        .map(|(i, p)| pump_derivative(p.coeff, p.exponent, p.speed, bounds.upper[base + i]))
        .fold(0.0, f64::max)
}

/// Pipe constant with each resistance scaled by the valve openness; 0
/// without valves.
pub fn k_valves(net: &Network, bounds: &FlowBox) -> f64 {
    check(net, bounds);
    let base = net.n_pipes() + net.n_pumps();
    net.valves
        .iter()
        .enumerate()
        .map(|(i, v)| {
            valve_derivative(
                v.openness,
                v.resistance,
                v.exponent,
                bounds.max_abs(base + i),
            )
        })
        .fold(0.0, f64::max)
}

pub fn class_constants(net: &Network, bounds: &FlowBox) -> ClassConstants {
    ClassConstants {
        k_pipes: k_pipes(net, bounds),
        k_pumps: k_pumps(net, bounds),
        k_valves: k_valves(net, bounds),
    }
}

/// Lipschitz constant of the network nonlinearity: the largest class
/// constant.
pub fn k_network(net: &Network, bounds: &FlowBox) -> LipschitzEstimate {
    LipschitzEstimate::analytical(class_constants(net, bounds))
}

/// One-sided Lipschitz constant. Every Jacobian entry is nonnegative, so the
/// logarithmic norm coincides with the spectral norm and this is the same
/// number as [`k_network`].
pub fn osl_network(net: &Network, bounds: &FlowBox) -> LipschitzEstimate {
    k_network(net, bounds)
}

/// Pump constant for a station of pumps sharing `r` and `nu` whose speeds
/// range over `[s_min, s_max]`: `s^(2 - nu)` grows with `s` when `nu <= 2`
/// and shrinks otherwise, so the worst speed is an endpoint.
pub fn pump_shortcut(coeff: f64, exponent: f64, s_min: f64, s_max: f64, q_bar: f64) -> f64 {
    let s = if exponent <= 2.0 { s_max } else { s_min };
    pump_derivative(coeff, exponent, s, q_bar)
}

/// Logarithmic 2-norm of a diagonal matrix: its largest entry.
pub fn lognorm_diagonal(diag: &[f64]) -> f64 {
    diag.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
