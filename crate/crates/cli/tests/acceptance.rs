//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines always reach the terminal.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture, fixture_dir, synthetic};
use wdn_lipschitz::analytical::{class_constants, k_network, osl_network};
use wdn_lipschitz::bnb::{k_upper_max, BnbConfig};
use wdn_lipschitz::domain::FlowBox;
use wdn_lipschitz::estimate::Mode;
use wdn_lipschitz::model::{LinkKind, Network};
use wdn_lipschitz::report::{analyze, load_network, read_manifest, AnalysisConfig, MethodName};
use wdn_lipschitz::sampling::{k_lower_trace, SamplerKind};

// pinned tolerances
const K_THREE_NODE: f64 = 0.5023;
const K_PIPES_THREE_NODE: f64 = 0.004;
const K_TOL: f64 = 5e-4;
const Q_MAX_EXPECTED: f64 = 922.5;
const Q_MAX_TOL: f64 = 1.0;
const ANALYZE_SECONDS: f64 = 1.0;
const BNB_TOTAL_SECONDS: f64 = 300.0;
const SYNTHETIC_NETWORKS: u64 = 100;
const CONVERGENCE_SAMPLES: usize = 100_000;
const CONVERGENCE_REL: f64 = 0.01;
const GRID_POINTS: usize = 100_000;
const GRID_REL: f64 = 1e-9;
const PAIRS: usize = 10_000;
const PAIR_SLACK: f64 = 1e-12;
const FD_POINTS: usize = 1000;
const FD_REL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Three-Node pump and pipe parameters.
const H_S: f64 = 393.7008;
const R_PUMP: f64 = 3.746e-6;
const NU: f64 = 2.59;
const R_PIPE: f64 = 2.346e-6;

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Outcome {
    let q_star = bisect_root(|q| NU * R_PUMP * q.powf(NU - 1.0) - K_THREE_NODE, 1.0, 1e5);
    let (net, bounds) = fixture("three_node");
    let m = &net.pumps[0];
    let p = &net.pipes[0];
    let params_ok = (m.shutoff_head - H_S).abs() < 1e-9
        && ((m.coeff - R_PUMP) / R_PUMP).abs() < 1e-9
        && (m.exponent - NU).abs() < 1e-9
        && ((p.resistance - R_PIPE) / R_PIPE).abs() < 1e-9;
    let q_file = bounds.interval(1).1;
    let q_ok =
        (q_star - Q_MAX_EXPECTED).abs() <= Q_MAX_TOL && ((q_file - q_star) / q_star).abs() < 1e-9;

    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_wdnlip"))
        .args([
            "analyze",
            "--methods",
            "analytical",
            "--format",
            "json",
            "--bounds",
        ])
        .arg(fixture_dir().join("three_node_bounds.csv"))
        .arg(fixture_dir().join("three_node.inp"))
        .output()
        .unwrap();
    let secs = t.elapsed().as_secs_f64();
    if !out.status.success() {
        return outcome(
            false,
            format!("analyze exited with {:?}", out.status.code()),
        );
    }
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let est = &r["estimates"]["analytical"]["estimate"];
    let k = est["value"].as_f64().unwrap();
    let kp = est["per_class"]["k_pipes"].as_f64().unwrap();
    let pass = params_ok
        && q_ok
        && (k - K_THREE_NODE).abs() <= K_TOL
        && (kp - K_PIPES_THREE_NODE).abs() <= K_TOL
        && secs < ANALYZE_SECONDS;
    outcome(
        pass,
        format!(
            "K = {k:.6} (target {K_THREE_NODE}±{K_TOL}), K^P = {kp:.6} (target {K_PIPES_THREE_NODE}±{K_TOL}), \
             root-solved q_max = {q_star:.4} (file {q_file:.4}), params match: {params_ok}, {secs:.3} s (< {ANALYZE_SECONDS} s)"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut total = 0.0;
    for e in read_manifest(&fixture_dir()).unwrap() {
        let (net, bounds) = fixture(&e.name);
        let k = k_network(&net, &bounds).value;
        let t = Instant::now();
        let up = k_upper_max(&net, &bounds, &BnbConfig::new(e.gap)).unwrap();
        total += t.elapsed().as_secs_f64();
        let (lo, hi, gap) = (up.lower.unwrap(), up.value, up.gap.unwrap());
        let ok = lo <= k && k <= hi && gap <= e.gap;
        pass &= ok;
        parts.push(format!(
            "{} [{lo:.6e}, {hi:.6e}] gap {gap:.1e}/{:.0e}{}",
            e.name,
            e.gap,
            if ok { "" } else { " FAIL" }
        ));
    }
    pass &= total < BNB_TOTAL_SECONDS;
    parts.push(format!("total {total:.2} s (< {BNB_TOTAL_SECONDS} s)"));
    outcome(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let mut violations = Vec::new();
    for e in read_manifest(&fixture_dir()).unwrap() {
        let (net, counts) = load_network(&fixture_dir().join(&e.inp)).unwrap();
        let (_, bounds) = fixture(&e.name);
        let config = AnalysisConfig {
            methods: vec![
                MethodName::Analytical,
                MethodName::Interval,
                MethodName::Point,
            ],
            gap: e.gap,
            samples: CONVERGENCE_SAMPLES,
            sampler: SamplerKind::Sobol,
            ..AnalysisConfig::default()
        };
        let r = analyze(&e.name, &net, counts, &bounds, &config).unwrap();
        let v = |key: &str| r.value(key).unwrap();
        for (a, b) in [
            ("point_max", "analytical"),
            ("analytical", "interval_max"),
            ("interval_max", "interval_sqrt"),
            ("point_sqrt", "interval_sqrt"),
        ] {
            if v(a) > v(b) {
                violations.push(format!("{}: {a} {} > {b} {}", e.name, v(a), v(b)));
            }
        }
    }
    let pass = violations.is_empty();
    let detail = if pass {
        "6 fixtures, 4 orderings each, 10^5 Sobol points: 0 violations".to_string()
    } else {
        violations.join("; ")
    };
    outcome(pass, detail)
}

fn criterion_4() -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for name in common::FIXTURES {
        let (net, b) = fixture(name);
        checked += 1;
        if k_network(&net, &b).value.to_bits() != osl_network(&net, &b).value.to_bits() {
            mismatches += 1;
        }
    }
    for seed in 0..SYNTHETIC_NETWORKS {
        let (net, b) = synthetic(seed);
        checked += 1;
        if k_network(&net, &b).value.to_bits() != osl_network(&net, &b).value.to_bits() {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{checked} networks (6 fixtures + {SYNTHETIC_NETWORKS} synthetic), {mismatches} bitwise mismatches"),
    )
}

fn criterion_5() -> Outcome {
    let (net, b) = fixture("three_node");
    let k = k_network(&net, &b).value;
    let ns: Vec<usize> = (1..=CONVERGENCE_SAMPLES).collect();
    let trace = k_lower_trace(&net, &b, SamplerKind::Sobol, 0, &ns, Mode::Max).unwrap();
    let monotone = trace.windows(2).all(|w| w[0].1 <= w[1].1);
    let last = trace.last().unwrap().1;
    let rel = (k - last).abs() / k;
    outcome(
        monotone && rel <= CONVERGENCE_REL,
        format!(
            "estimate {last:.6} vs K {k:.6}: rel. error {rel:.2e} (<= {CONVERGENCE_REL}); nondecreasing over all {} prefixes: {monotone}",
            ns.len()
        ),
    )
}

fn grid_class_maxima(net: &Network, b: &FlowBox) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for k in 0..net.n_links() {
        let (lo, hi) = b.interval(k);
        let class = match net.link_kind(k) {
            LinkKind::Pipe => 0,
            LinkKind::Pump => 1,
            LinkKind::Valve => 2,
        };
        for i in 0..GRID_POINTS {
            let t = i as f64 / (GRID_POINTS - 1) as f64;
            let q = if i == GRID_POINTS - 1 {
                hi
            } else {
                lo + t * (hi - lo)
            };
            out[class] = out[class].max(net.derivative(k, q));
        }
    }
    out
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn f_at(net: &Network, q: &[f64]) -> Vec<f64> {
    q.iter()
        .enumerate()
        .map(|(k, &x)| net.f_component(k, x).unwrap())
        .collect()
}

fn criterion_6() -> Outcome {
    let mut worst_grid = 0.0f64;
    let mut networks: Vec<(String, Network, FlowBox)> = common::FIXTURES
        .iter()
        .map(|n| {
            let (net, b) = fixture(n);
            (n.to_string(), net, b)
        })
        .collect();
    // the fixtures have no valves; add synthetic networks that do
    for seed in 0..10 {
        let (net, b) = synthetic(1000 + seed);
        networks.push((format!("synthetic-{seed}"), net, b));
    }
    let mut valves_seen = 0;
    for (_, net, b) in &networks {
        valves_seen += net.n_valves();
        let cc = class_constants(net, b);
        let grid = grid_class_maxima(net, b);
        for (closed, dense) in [cc.k_pipes, cc.k_pumps, cc.k_valves].into_iter().zip(grid) {
            worst_grid = worst_grid.max(rel_diff(closed, dense));
        }
    }

    let mut violations = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for name in common::FIXTURES {
        let (net, b) = fixture(name);
        let k = k_network(&net, &b).value;
        let l = osl_network(&net, &b).value;
        for _ in 0..PAIRS {
            let mut draw = || -> Vec<f64> {
                (0..net.n_links())
                    .map(|i| {
                        let (lo, hi) = b.interval(i);
                        rng.gen_range(lo..=hi)
                    })
                    .collect()
            };
            let (x, y) = (draw(), draw());
            let (fx, fy) = (f_at(&net, &x), f_at(&net, &y));
            let (mut df2, mut dq2, mut inner) = (0.0, 0.0, 0.0);
            for i in 0..x.len() {
                let (dfi, dqi) = (fx[i] - fy[i], x[i] - y[i]);
                df2 += dfi * dfi;
                dq2 += dqi * dqi;
                inner += dfi * dqi;
            }
            if df2.sqrt() > (k + PAIR_SLACK * k) * dq2.sqrt() || inner > (l + PAIR_SLACK * k) * dq2
            {
                violations += 1;
            }
        }
    }
    outcome(
        worst_grid <= GRID_REL && violations == 0 && valves_seen > 0,
        format!(
            "class constants vs {GRID_POINTS}-point grids on {} networks ({valves_seen} valves): worst rel. diff {worst_grid:.1e} (<= {GRID_REL:e}); \
             {PAIRS} pairs x 6 fixtures, slack {PAIR_SLACK:e}*K: {violations} violations",
            networks.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut evaluated = 0usize;
    for name in common::FIXTURES {
        let (net, b) = fixture(name);
        let mut points = 0;
        while points < FD_POINTS {
            let q: Vec<f64> = (0..net.n_links())
                .map(|k| {
                    let (lo, hi) = b.interval(k);
                    rng.gen_range(lo..hi)
                })
                .collect();
            for (k, &x) in q.iter().enumerate() {
                let (lo, hi) = b.interval(k);
                // five-point stencil; the wide step keeps rounding in the large
                // constant pump term negligible
                let h = 1e-2 * x.abs().max(1e-3);
                if x - 2.0 * h <= lo || x + 2.0 * h >= hi {
                    continue;
                }
                let f = |v: f64| net.f_component(k, v).unwrap();
                let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h))
                    / (12.0 * h);
                worst = worst.max(rel_diff(net.derivative(k, x), fd));
                evaluated += 1;
            }
            points += 1;
        }
    }
    outcome(
        worst <= FD_REL,
        format!("{FD_POINTS} points x 6 fixtures ({evaluated} entries): worst rel. diff {worst:.1e} (<= {FD_REL:e})"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 7] = [
        ("1 three-node analytical reproduction", criterion_1),
        ("2 interval certification", criterion_2),
        ("3 bound ordering", criterion_3),
        (
            "4 one-sided constant equals Lipschitz constant",
            criterion_4,
        ),
        ("5 point-based convergence", criterion_5),
        ("6 class-constant and definition oracles", criterion_6),
        ("7 finite-difference Jacobian", criterion_7),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "N/A  criterion 8 reference values for the other five networks and absolute timings: not reproducible \
         (their flow bounds are unavailable; timings are hardware-specific); covered by criteria 2-3 and relative timings"
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
