mod common;

use std::path::Path;

use common::{fixture_dir, FIXTURES};
use wdn_lipschitz::analytical::k_network;
use wdn_lipschitz::estimate::Mode;
use wdn_lipschitz::report::{
    analyze, benchmark, benchmark_table_csv, benchmark_timing_csv, convergence, load_network,
    read_manifest, resolve_bounds, AnalysisConfig, AnalysisReport, BenchmarkOptions, MethodName,
    ReportError, REPORT_SCHEMA,
};
use wdn_lipschitz::sampling::SamplerKind;

fn validator() -> jsonschema::Validator {
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn full_config(gap: f64) -> AnalysisConfig {
    AnalysisConfig {
        methods: vec![
            MethodName::Analytical,
            MethodName::Interval,
            MethodName::Point,
        ],
        gap,
        samples: 20_000,
        ..AnalysisConfig::default()
    }
}

fn run(name: &str, config: &AnalysisConfig) -> AnalysisReport {
    let dir = fixture_dir();
    let (net, counts) = load_network(&dir.join(format!("{name}.inp"))).unwrap();
    let bounds = resolve_bounds(&net, Some(&dir.join(format!("{name}_bounds.csv")))).unwrap();
    analyze(name, &net, counts, &bounds, config).unwrap()
}

#[test]
fn reports_validate_against_the_schema() {
    let v = validator();
    for entry in read_manifest(&fixture_dir()).unwrap() {
        let report = run(&entry.name, &full_config(entry.gap));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let errors: Vec<String> = v.iter_errors(&json).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{}: {errors:?}", entry.name);

        let back: AnalysisReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        for key in [
            "analytical",
            "osl_analytical",
            "interval_max",
            "osl_interval",
            "interval_sqrt",
            "point_max",
            "point_sqrt",
        ] {
            assert!(report.get(key).is_some(), "{} lacks {key}", entry.name);
        }
    }
    let minimal = run("three_node", &AnalysisConfig::default());
    let json: serde_json::Value = serde_json::from_str(&minimal.to_json()).unwrap();
    assert!(v.is_valid(&json));
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    let report = run("three_node", &AnalysisConfig::default());
    let good: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();

    let mut extra = good.clone();
    extra["estimates"]["bogus"] = extra["estimates"]["analytical"].clone();
    assert!(!v.is_valid(&extra));

    let mut missing = good.clone();
    missing["estimates"]
        .as_object_mut()
        .unwrap()
        .remove("analytical");
    assert!(!v.is_valid(&missing));

    let mut negative = good;
    negative["estimates"]["analytical"]["wall_time_s"] = serde_json::json!(-1.0);
    assert!(!v.is_valid(&negative));
}

#[test]
fn table_and_csv_views() {
    let report = run("three_node", &full_config(1e-2));
    let table = report.to_table();
    assert!(table.starts_with("network three_node  junctions 1"));
    assert!(table.contains("class constants: K^P"));
    let csv = report.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("estimate,method,mode,value,gap,lower,effort,wall_time_s")
    );
    assert_eq!(lines.count(), report.estimates.len());
}

fn bench_opts(networks: &[&str]) -> BenchmarkOptions {
    BenchmarkOptions {
        networks: Some(networks.iter().map(|s| s.to_string()).collect()),
        samples: 2_000,
        repeats: 3,
        ..BenchmarkOptions::default()
    }
}

#[test]
fn benchmark_is_deterministic_and_ordered() {
    let opts = bench_opts(&["three_node", "eight_node", "anytown"]);
    let a = benchmark(&fixture_dir(), &opts).unwrap();
    let b = benchmark(&fixture_dir(), &opts).unwrap();
    assert_eq!(a.len(), 3);
    assert_eq!(benchmark_table_csv(&a), benchmark_table_csv(&b));
    for row in &a {
        assert!(row.error.is_none());
        assert!(
            row.ordering_violations().is_empty(),
            "{:?}",
            row.ordering_violations()
        );
        assert!(row.timings.values().all(|&t| t >= 0.0));
    }
    let timing = benchmark_timing_csv(&a);
    assert!(timing.starts_with("network,method,median_s\n"));

    let one = benchmark(&fixture_dir(), &bench_opts(&["three_node"])).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(
        one[0].report.as_ref().unwrap().value("analytical"),
        a[0].report.as_ref().unwrap().value("analytical")
    );
    assert!(matches!(
        benchmark(&fixture_dir(), &bench_opts(&["atlantis"])),
        Err(ReportError::Config(_))
    ));
}

#[test]
fn failing_network_is_recorded_and_run_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let src = fixture_dir();
    for f in ["three_node.inp", "three_node_bounds.csv"] {
        std::fs::copy(src.join(f), tmp.path().join(f)).unwrap();
    }
    std::fs::write(
        tmp.path().join("networks.csv"),
        "name,inp,bounds,gap\nghost,ghost.inp,ghost.csv,1e-2\nthree_node,three_node.inp,three_node_bounds.csv,1e-2\n",
    )
    .unwrap();
    let opts = BenchmarkOptions {
        samples: 100,
        repeats: 1,
        ..BenchmarkOptions::default()
    };
    let rows = benchmark(tmp.path(), &opts).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].error.is_some() && rows[0].report.is_none());
    assert!(rows[1].error.is_none());
    let csv = benchmark_table_csv(&rows);
    assert!(csv.lines().nth(1).unwrap().starts_with("ghost,,,,,,,"));
}

#[test]
fn convergence_rows() {
    let dir = fixture_dir();
    let (net, _) = load_network(&dir.join("three_node.inp")).unwrap();
    let bounds = resolve_bounds(&net, Some(&dir.join("three_node_bounds.csv"))).unwrap();
    let k = k_network(&net, &bounds).value;

    let single = convergence(&net, &bounds, &[SamplerKind::Sobol], 0, &[1], Mode::Max).unwrap();
    assert_eq!(single.len(), 1);

    let grid = [10, 100, 1000];
    let r1 = convergence(&net, &bounds, &[SamplerKind::Random], 1, &grid, Mode::Max).unwrap();
    let r2 = convergence(&net, &bounds, &[SamplerKind::Random], 2, &grid, Mode::Max).unwrap();
    assert_ne!(r1, r2);
    assert!(r1.iter().chain(&r2).all(|r| r.3 <= k));
}

fn error_for(inp: &str, bounds: Option<&str>) -> ReportError {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("net.inp");
    std::fs::write(&p, inp).unwrap();
    let (net, _) = match load_network(&p) {
        Ok(v) => v,
        Err(e) => return e,
    };
    let b = tmp.path().join("b.csv");
    std::fs::write(&b, bounds.unwrap()).unwrap();
    resolve_bounds(&net, Some(&b)).unwrap_err()
}

#[test]
fn error_exit_codes() {
    let missing = load_network(Path::new("/nonexistent/net.inp")).unwrap_err();
    assert_eq!(missing.exit_code(), 2);

    let garbled = error_for("[PIPES]\nP A B 100 12 100\n", None);
    assert_eq!(garbled.exit_code(), 2);

    let bad_param = error_for(
        "[JUNCTIONS]\nJ1 0\nJ2 0\n[PIPES]\nP J1 J2 100 0 100\n",
        None,
    );
    assert_eq!(bad_param.exit_code(), 4);

    let net = "[JUNCTIONS]\nJ 0 1\n[RESERVOIRS]\nR 50\n[PIPES]\nP R J 100 12 100\n\
               [CURVES]\nC 0 100\nC 500 80\nC 900 30\n[PUMPS]\nM R J HEAD C\n";
    let inverted = error_for(net, Some("link_id,q_min,q_max\nP,5,-5\nM,1,2\n"));
    assert_eq!(inverted.exit_code(), 3);
    let short = error_for(net, Some("link_id,q_min,q_max\nP,-5,5\n"));
    assert_eq!(short.exit_code(), 3);
    let pump_zero = error_for(net, Some("link_id,q_min,q_max\nP,-5,5\nM,0,2\n"));
    assert_eq!(pump_zero.exit_code(), 4);
}

#[test]
fn every_fixture_has_a_manifest_row() {
    let names: Vec<String> = read_manifest(&fixture_dir())
        .unwrap()
        .into_iter()
        .map(|e| e.name)
        .collect();
    assert_eq!(names, FIXTURES);
}
