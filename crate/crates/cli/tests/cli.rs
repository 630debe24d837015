use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn wdnlip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wdnlip"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn analyze_three_node_analytical() {
    let r = json(&wdnlip(&[
        "analyze",
        &fx("three_node.inp"),
        "--bounds",
        &fx("three_node_bounds.csv"),
        "--format",
        "json",
    ]));
    let est = &r["estimates"]["analytical"]["estimate"];
    assert!((est["value"].as_f64().unwrap() - 0.5023).abs() <= 5e-4);
    assert!((est["per_class"]["k_pipes"].as_f64().unwrap() - 0.004).abs() <= 5e-4);
    assert_eq!(r["counts"]["pumps"], 1);
}

#[test]
fn interval_certifies_the_analytical_value() {
    let r = json(&wdnlip(&[
        "analyze",
        &fx("three_node.inp"),
        "--bounds",
        &fx("three_node_bounds.csv"),
        "--methods",
        "analytical,interval",
        "--gap",
        "1e-6",
        "--mode",
        "max",
        "--format",
        "json",
    ]));
    let k = r["estimates"]["analytical"]["estimate"]["value"]
        .as_f64()
        .unwrap();
    let up = &r["estimates"]["interval_max"]["estimate"];
    assert!((up["value"].as_f64().unwrap() - k).abs() <= 1e-6);
    assert!(up["lower"].as_f64().unwrap() <= k);
    assert!(r["estimates"].get("interval_sqrt").is_none());
}

#[test]
fn csv_and_table_formats() {
    let args = |fmt: &'static str| {
        wdnlip(&[
            "analyze",
            &fx("eight_node.inp"),
            "--bounds",
            &fx("eight_node_bounds.csv"),
            "--methods",
            "analytical,point",
            "--samples",
            "1000",
            "--format",
            fmt,
        ])
    };
    let csv = stdout(&args("csv"));
    assert!(csv.starts_with("estimate,method,mode,value,gap,lower,effort,wall_time_s\n"));
    assert!(csv.contains("\npoint_sqrt,point_lower,sqrt,"));
    assert!(!csv.contains('\r'));
    let table = stdout(&args("table"));
    assert!(table.starts_with("network eight_node"));
}

#[test]
fn report_and_progress_files() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("r.json");
    let progress = tmp.path().join("p.jsonl");
    stdout(&wdnlip(&[
        "analyze",
        &fx("anytown.inp"),
        "--bounds",
        &fx("anytown_bounds.csv"),
        "--methods",
        "interval",
        "--gap",
        "1e-5",
        "--output",
        report.to_str().unwrap(),
        "--progress",
        progress.to_str().unwrap(),
    ]));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(r["estimates"]["interval_sqrt"].is_object());
    let log = std::fs::read_to_string(&progress).unwrap();
    assert!(!log.is_empty());
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["boxes", "lower", "upper", "gap", "wall_time"] {
            assert!(v.get(key).is_some(), "{line}");
        }
    }
}

#[test]
fn exit_codes() {
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(
        code(wdnlip(&["analyze", "missing.inp", "--default-bounds"])),
        2
    );

    let tmp = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = tmp.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let bad_bounds = write("bad.csv", "link_id,q_min,q_max\n23,0,1\n");
    assert_eq!(
        code(wdnlip(&[
            "analyze",
            &fx("three_node.inp"),
            "--bounds",
            &bad_bounds
        ])),
        3
    );
    let pump_zero = write("zero.csv", "link_id,q_min,q_max\n23,0,922\n12,0,922\n");
    assert_eq!(
        code(wdnlip(&[
            "analyze",
            &fx("three_node.inp"),
            "--bounds",
            &pump_zero
        ])),
        4
    );
    assert_eq!(code(wdnlip(&["analyze", &fx("three_node.inp")])), 1);
    assert_eq!(
        code(wdnlip(&[
            "analyze",
            &fx("three_node.inp"),
            "--default-bounds",
            "--methods",
            "magic"
        ])),
        1
    );
}

#[test]
fn benchmark_subset_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = tmp.path().join(sub);
        stdout(&wdnlip(&[
            "benchmark",
            fixtures().to_str().unwrap(),
            "--networks",
            "three_node",
            "--samples",
            "2000",
            "--repeats",
            "1",
            "--out-dir",
            out.to_str().unwrap(),
        ]));
        (
            std::fs::read(out.join("results.csv")).unwrap(),
            std::fs::read_to_string(out.join("timing.csv")).unwrap(),
        )
    };
    let (a, timing) = run("a");
    let (b, _) = run("b");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("three_node,1,1,1,1,1,0,"));
    assert!(timing.starts_with("network,method,median_s\n"));
}

#[test]
fn convergence_grid() {
    let base = [
        "convergence",
        &fx("three_node.inp"),
        "--bounds",
        &fx("three_node_bounds.csv"),
    ];
    let one = stdout(&wdnlip(
        &[&base[..], &["--samplers", "sobol", "--n", "1"]].concat(),
    ));
    assert_eq!(one.lines().count(), 2);
    assert!(one.starts_with("n,sampler,mode,estimate\n1,sobol,max,"));

    let all = stdout(&wdnlip(&[&base[..], &["--n", "10,100"]].concat()));
    assert_eq!(all.lines().count(), 7);
}

#[test]
fn parse_dae_and_default_bounds() {
    let desc = json(&wdnlip(&["parse", &fx("anytown.inp")]));
    assert_eq!(desc["junctions"].as_array().unwrap().len(), 19);

    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("dae");
    stdout(&wdnlip(&[
        "dae",
        &fx("net3.inp"),
        "--out",
        out.to_str().unwrap(),
        "--dt",
        "60",
    ]));
    for f in ["E_z.mtx", "A_z.mtx", "B_f.mtx", "B_l.mtx"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    }
    let layout: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("layout.json")).unwrap()).unwrap();
    assert_eq!(layout["dt"], 60.0);

    let csv = stdout(&wdnlip(&["default-bounds", &fx("anytown.inp")]));
    assert!(csv.starts_with("link_id,q_min,q_max\n"));
    assert_eq!(csv.lines().count(), 1 + 40 + 1);
    let b = tmp.path().join("b.csv");
    std::fs::write(&b, csv).unwrap();
    stdout(&wdnlip(&[
        "analyze",
        &fx("anytown.inp"),
        "--bounds",
        b.to_str().unwrap(),
    ]));

    let no_pumps = wdnlip(&["default-bounds", &fx("net2.inp")]);
    assert_eq!(no_pumps.status.code(), Some(3));
}
