// Shared by the core integration tests and the CLI acceptance test.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wdn_lipschitz::domain::{load_bounds, FlowBox};
use wdn_lipschitz::inp::parse_inp;
use wdn_lipschitz::model::{build_network, LinkKind, Network};
use wdn_lipschitz::report::load_network;

pub const FIXTURES: [&str; 6] = [
    "three_node",
    "eight_node",
    "anytown",
    "net2",
    "net3",
    "obcl",
];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> (Network, FlowBox) {
    let dir = fixture_dir();
    let (net, _) = load_network(&dir.join(format!("{name}.inp"))).unwrap();
    let bounds = load_bounds(&dir.join(format!("{name}_bounds.csv")), &net).unwrap();
    (net, bounds)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// A chain `R0 - J1 - ... - Jn` whose links are a random mix of pipes, pumps
/// and GPVs, with every law parameter redrawn after parsing, plus a random
/// flow box.
pub fn synthetic(seed: u64) -> (Network, FlowBox) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=12);
    let mut junctions = String::new();
    let mut pipes = String::new();
    let mut pumps = String::new();
    let mut valves = String::new();
    for i in 1..=n {
        junctions.push_str(&format!("J{i} 0 1\n"));
        let from = if i == 1 {
            "R0".to_string()
        } else {
            format!("J{}", i - 1)
        };
        match rng.gen_range(0..3) {
            0 => pipes.push_str(&format!("L{i} {from} J{i} 100 12 100\n")),
            1 => pumps.push_str(&format!("L{i} {from} J{i} HEAD C\n")),
            _ => valves.push_str(&format!("L{i} {from} J{i} 12 GPV G 0 1\n")),
        }
    }
    let text = format!(
        "[JUNCTIONS]\n{junctions}[RESERVOIRS]\nR0 100\n[PIPES]\n{pipes}[PUMPS]\n{pumps}\
         [VALVES]\n{valves}[CURVES]\nC 0 100\nC 500 80\nC 900 30\nG 1 3\nG 2 12\n"
    );
    let mut net = build_network(&parse_inp(&text).unwrap());

    let mu = if rng.gen_bool(0.5) { 1.852 } else { 2.0 };
    for p in &mut net.pipes {
        p.resistance = log_uniform(&mut rng, 1e-7, 1e-1);
        p.exponent = mu;
    }
    for m in &mut net.pumps {
        m.coeff = log_uniform(&mut rng, 1e-8, 1e-2);
        m.exponent = rng.gen_range(1.1..3.0);
        m.speed = rng.gen_range(0.3..1.2);
        m.shutoff_head = rng.gen_range(10.0..500.0);
    }
    for v in &mut net.valves {
        v.resistance = log_uniform(&mut rng, 1e-7, 1e-1);
        v.exponent = mu;
        v.openness = rng.gen_range(0.01..=1.0);
    }

    let intervals: Vec<(f64, f64)> = (0..net.n_links())
        .map(|k| {
            let hi = log_uniform(&mut rng, 1e-2, 2e3);
            match net.link_kind(k) {
                LinkKind::Pump => (hi * rng.gen_range(1e-4..0.9), hi),
                _ => (-hi * rng.gen_range(0.0..1.0), hi),
            }
        })
        .collect();
    let bounds = FlowBox::new(&net, &intervals).unwrap();
    (net, bounds)
}
