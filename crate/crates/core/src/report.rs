//! Analysis reports and the benchmark harness behind the command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytical::{k_network, osl_network};
use crate::bnb::{interval_estimate, BnbConfig, BnbError, Reduction, DEFAULT_MAX_BOXES};
use crate::domain::{default_box, load_bounds, DomainError, FlowBox};
use crate::estimate::{LipschitzEstimate, Mode};
use crate::inp::{parse_inp, ComponentCounts, InpError};
use crate::model::{build_network, Network};
use crate::sampling::{k_lower, k_lower_trace, SamplerKind, SamplingError};

/// Version of the report layout; bump on incompatible changes.
pub const REPORT_VERSION: u32 = 1;

const PROGRESS_EVERY: u64 = 10_000;

/// JSON schema every [`AnalysisReport`] validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Parse { path: String, source: InpError },
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("bounds: {0}")]
    Bounds(DomainError),
    #[error("branch and bound: {0}")]
    Bnb(#[from] BnbError),
    #[error("sampling: {0}")]
    Sampling(#[from] SamplingError),
    #[error("{0}")]
    Config(String),
}

impl ReportError {
    /// Process exit code: 2 input file, 3 bounds, 4 modelling assumption
    /// violated, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Parse {
                source: InpError::ParameterOutOfRange { .. },
                ..
            } => 4,
            ReportError::Parse { .. } | ReportError::Read { .. } => 2,
            ReportError::Bounds(DomainError::PumpNonpositiveLower { .. }) => 4,
            ReportError::Bounds(_) => 3,
            _ => 1,
        }
    }
}

impl From<DomainError> for ReportError {
    fn from(e: DomainError) -> Self {
        ReportError::Bounds(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Analytical,
    Interval,
    Point,
}

impl MethodName {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytical" => Some(MethodName::Analytical),
            "interval" => Some(MethodName::Interval),
            "point" => Some(MethodName::Point),
            _ => None,
        }
    }
}

/// Which norms the interval and point methods compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    Max,
    Sqrt,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeSelection::Max => vec![Mode::Max],
            ModeSelection::Sqrt => vec![Mode::Sqrt],
            ModeSelection::Both => vec![Mode::Max, Mode::Sqrt],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub methods: Vec<MethodName>,
    pub gap: f64,
    pub max_boxes: u64,
    pub samples: usize,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub mode: ModeSelection,
    pub default_bounds: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            methods: vec![MethodName::Analytical],
            gap: 1e-2,
            max_boxes: DEFAULT_MAX_BOXES,
            samples: 100_000,
            sampler: SamplerKind::Sobol,
            seed: 0,
            mode: ModeSelection::Both,
            default_bounds: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedEstimate {
    pub estimate: LipschitzEstimate,
    pub wall_time_s: f64,
}

/// Everything computed for one network. Keys of `estimates`:
/// `analytical`, `osl_analytical`, `interval_max`, `osl_interval`,
/// `interval_sqrt`, `point_max`, `point_sqrt`; only those requested appear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub version: u32,
    pub network: String,
    pub counts: ComponentCounts,
    pub config: AnalysisConfig,
    pub estimates: BTreeMap<String, TimedEstimate>,
}

impl AnalysisReport {
    pub fn get(&self, key: &str) -> Option<&LipschitzEstimate> {
        self.estimates.get(key).map(|t| &t.estimate)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.get(key).map(|e| e.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    /// Aligned plain-text table, one row per estimate.
    pub fn to_table(&self) -> String {
        let c = self.counts;
        let mut s = format!(
            "network {}  junctions {} reservoirs {} tanks {} pipes {} pumps {} valves {}\n",
            self.network, c.junctions, c.reservoirs, c.tanks, c.pipes, c.pumps, c.valves
        );
        s.push_str(&format!(
            "{:<16} {:>14} {:>12} {:>10} {:>10}\n",
            "estimate", "value", "gap", "effort", "time_s"
        ));
        for (k, t) in &self.estimates {
            let gap = t
                .estimate
                .gap
                .map_or("-".to_string(), |g| format!("{g:.3e}"));
            s.push_str(&format!(
                "{:<16} {:>14.6e} {:>12} {:>10} {:>10.4}\n",
                k, t.estimate.value, gap, t.estimate.effort, t.wall_time_s
            ));
        }
        if let Some(pc) = self.get("analytical").and_then(|e| e.per_class) {
            s.push_str(&format!(
                "class constants: K^P {:.6e}  K^M {:.6e}  K^V {:.6e}\n",
                pc.k_pipes, pc.k_pumps, pc.k_valves
            ));
        }
        s
    }

    /// `key,method,mode,value,gap,lower,effort,wall_time_s` rows.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing to memory cannot fail
        w.write_record([
            "estimate",
            "method",
            "mode",
            "value",
            "gap",
            "lower",
            "effort",
            "wall_time_s",
        ])
        .unwrap();
        for (k, t) in &self.estimates {
            let e = &t.estimate;
            let method = serde_json::to_value(e.method).unwrap();
            w.write_record([
                k.clone(),
                method.as_str().unwrap_or_default().to_string(),
                e.mode.token().to_string(),
                fmt_num(e.value),
                e.gap.map_or(String::new(), fmt_num),
                e.lower.map_or(String::new(), fmt_num),
                e.effort.to_string(),
                fmt_num(t.wall_time_s),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// Reads and parses an INP file.
pub fn load_network(path: &Path) -> Result<(Network, ComponentCounts), ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| ReportError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let desc = parse_inp(&text).map_err(|source| ReportError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    Ok((build_network(&desc), desc.counts()))
}

/// Bounds from a file, or inferred from the pumps when `bounds` is `None`.
pub fn resolve_bounds(net: &Network, bounds: Option<&Path>) -> Result<FlowBox, ReportError> {
    Ok(match bounds {
        Some(p) => load_bounds(p, net)?,
        None => default_box(net)?,
    })
}

fn timed<T, E>(f: impl FnOnce() -> Result<T, E>) -> Result<(T, f64), E> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64()))
}

/// Runs the configured methods.
pub fn analyze(
    name: &str,
    net: &Network,
    counts: ComponentCounts,
    bounds: &FlowBox,
    config: &AnalysisConfig,
) -> Result<AnalysisReport, ReportError> {
    analyze_with_progress(name, net, counts, bounds, config, None)
}

/// As [`analyze`], appending branch-and-bound progress lines to `progress`.
pub fn analyze_with_progress(
    name: &str,
    net: &Network,
    counts: ComponentCounts,
    bounds: &FlowBox,
    config: &AnalysisConfig,
    mut progress: Option<&mut dyn Write>,
) -> Result<AnalysisReport, ReportError> {
    let mut estimates = BTreeMap::new();
    let mut put = |key: &str, (estimate, wall_time_s): (LipschitzEstimate, f64)| {
        estimates.insert(
            key.to_string(),
            TimedEstimate {
                estimate,
                wall_time_s,
            },
        );
    };
    let bnb = BnbConfig {
        gap_tol: config.gap,
        max_boxes: config.max_boxes,
    };
    let modes = config.mode.modes();
    let run_bnb = |r: Reduction, log: &mut Option<&mut dyn Write>| {
        let log = log
            .as_mut()
            .map(|w| (&mut **w as &mut dyn Write, PROGRESS_EVERY));
        interval_estimate(net, bounds, r, &bnb, log)
    };

    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    for m in methods {
        match m {
            MethodName::Analytical => {
                put(
                    "analytical",
                    timed(|| Ok::<_, ReportError>(k_network(net, bounds)))?,
                );
                put(
                    "osl_analytical",
                    timed(|| Ok::<_, ReportError>(osl_network(net, bounds)))?,
                );
            }
            MethodName::Interval => {
                for &mode in &modes {
                    match mode {
                        Mode::Max => {
                            put(
                                "interval_max",
                                timed(|| run_bnb(Reduction::MaxAbs, &mut progress))?,
                            );
                            put(
                                "osl_interval",
                                timed(|| run_bnb(Reduction::MaxSigned, &mut progress))?,
                            );
                        }
                        Mode::Sqrt => put(
                            "interval_sqrt",
                            timed(|| run_bnb(Reduction::Frobenius, &mut progress))?,
                        ),
                    }
                }
            }
            MethodName::Point => {
                for &mode in &modes {
                    let key = format!("point_{mode}");
                    put(
                        &key,
                        timed(|| {
                            k_lower(
                                net,
                                bounds,
                                config.sampler,
                                config.seed,
                                config.samples,
                                mode,
                            )
                        })?,
                    );
                }
            }
        }
    }

    Ok(AnalysisReport {
        version: REPORT_VERSION,
        network: name.to_string(),
        counts,
        config: config.clone(),
        estimates,
    })
}

/// One line of the benchmark manifest (`name,inp,bounds,gap`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BenchmarkEntry {
    pub name: String,
    pub inp: String,
    pub bounds: String,
    pub gap: f64,
}

pub fn read_manifest(dir: &Path) -> Result<Vec<BenchmarkEntry>, ReportError> {
    let path = dir.join("networks.csv");
    let err = |message: String| ReportError::Read {
        path: path.display().to_string(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&path)
        .map_err(|e| err(e.to_string()))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| err(e.to_string())))
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchmarkOptions {
    pub networks: Option<Vec<String>>,
    /// Overrides the per-network gap from the manifest.
    pub gap: Option<f64>,
    pub max_boxes: u64,
    pub samples: usize,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub repeats: usize,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            networks: None,
            gap: None,
            max_boxes: DEFAULT_MAX_BOXES,
            samples: 100_000,
            sampler: SamplerKind::Sobol,
            seed: 0,
            repeats: 5,
        }
    }
}

/// One benchmark row; numeric fields are `None` when the network failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub network: String,
    pub counts: Option<ComponentCounts>,
    pub gap: f64,
    pub report: Option<AnalysisReport>,
    /// Median wall time per method over the repeats.
    pub timings: BTreeMap<String, f64>,
    pub error: Option<String>,
}

impl BenchmarkRow {
    fn value(&self, key: &str) -> Option<f64> {
        self.report.as_ref().and_then(|r| r.value(key))
    }

    /// Violations of `point_max <= analytical <= interval_max <=
    /// interval_sqrt` and `point_sqrt <= interval_sqrt`.
    pub fn ordering_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let pairs = [
            ("point_max", "analytical"),
            ("analytical", "interval_max"),
            ("interval_max", "interval_sqrt"),
            ("point_sqrt", "interval_sqrt"),
        ];
        for (a, b) in pairs {
            if let (Some(x), Some(y)) = (self.value(a), self.value(b)) {
                if x > y {
                    out.push(format!("{}: {a} {x:?} > {b} {y:?}", self.network));
                }
            }
        }
        out
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn bench_one(
    dir: &Path,
    entry: &BenchmarkEntry,
    opts: &BenchmarkOptions,
) -> Result<(ComponentCounts, AnalysisReport, BTreeMap<String, f64>), ReportError> {
    let (net, counts) = load_network(&dir.join(&entry.inp))?;
    let bounds = load_bounds(&dir.join(&entry.bounds), &net)?;
    let config = AnalysisConfig {
        methods: vec![
            MethodName::Analytical,
            MethodName::Interval,
            MethodName::Point,
        ],
        gap: opts.gap.unwrap_or(entry.gap),
        max_boxes: opts.max_boxes,
        samples: opts.samples,
        sampler: opts.sampler,
        seed: opts.seed,
        mode: ModeSelection::Both,
        default_bounds: false,
    };
    let mut times: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut first = None;
    for _ in 0..opts.repeats.max(1) {
        let r = analyze(&entry.name, &net, counts, &bounds, &config)?;
        for (k, t) in &r.estimates {
            times.entry(k.clone()).or_default().push(t.wall_time_s);
        }
        first.get_or_insert(r);
    }
    let timings = times.into_iter().map(|(k, v)| (k, median(v))).collect();
    Ok((counts, first.expect("at least one repeat"), timings))
}

/// Runs every manifest network (or the selected subset). A failing network
/// is recorded in its row and the run continues.
pub fn benchmark(dir: &Path, opts: &BenchmarkOptions) -> Result<Vec<BenchmarkRow>, ReportError> {
    let manifest = read_manifest(dir)?;
    if let Some(sel) = &opts.networks {
        if let Some(missing) = sel.iter().find(|n| !manifest.iter().any(|e| &e.name == *n)) {
            return Err(ReportError::Config(format!(
                "network {missing} is not in the manifest"
            )));
        }
    }
    let mut rows = Vec::new();
    for entry in &manifest {
        if let Some(sel) = &opts.networks {
            if !sel.contains(&entry.name) {
                continue;
            }
        }
        let gap = opts.gap.unwrap_or(entry.gap);
        rows.push(match bench_one(dir, entry, opts) {
            Ok((counts, report, timings)) => BenchmarkRow {
                network: entry.name.clone(),
                counts: Some(counts),
                gap,
                report: Some(report),
                timings,
                error: None,
            },
            Err(e) => BenchmarkRow {
                network: entry.name.clone(),
                counts: None,
                gap,
                report: None,
                timings: BTreeMap::new(),
                error: Some(e.to_string()),
            },
        });
    }
    Ok(rows)
}

const TABLE_VALUES: [&str; 5] = [
    "analytical",
    "point_max",
    "point_sqrt",
    "interval_max",
    "interval_sqrt",
];

/// Results table, one row per network. Contains no timings, so repeated
/// runs with the same seeds produce identical bytes.
pub fn benchmark_table_csv(rows: &[BenchmarkRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "network",
        "junctions",
        "reservoirs",
        "tanks",
        "pipes",
        "pumps",
        "valves",
        "gap",
    ];
    header.extend(TABLE_VALUES);
    header.extend(["interval_max_lower", "interval_sqrt_lower", "error"]);
    // writing to memory cannot fail
    w.write_record(&header).unwrap();
    for r in rows {
        let mut rec = vec![r.network.clone()];
        match r.counts {
            Some(c) => rec.extend(c.as_array().iter().map(|n| n.to_string())),
            None => rec.extend(std::iter::repeat_n(String::new(), 6)),
        }
        rec.push(fmt_num(r.gap));
        for k in TABLE_VALUES {
            rec.push(r.value(k).map_or(String::new(), fmt_num));
        }
        for k in ["interval_max", "interval_sqrt"] {
            let lower = r
                .report
                .as_ref()
                .and_then(|rep| rep.get(k))
                .and_then(|e| e.lower);
            rec.push(lower.map_or(String::new(), fmt_num));
        }
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// `network,method,median_s` rows.
pub fn benchmark_timing_csv(rows: &[BenchmarkRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing to memory cannot fail
    w.write_record(["network", "method", "median_s"]).unwrap();
    for r in rows {
        for (k, t) in &r.timings {
            w.write_record([r.network.clone(), k.clone(), fmt_num(*t)])
                .unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Convergence traces for each sampler, in the `n,sampler,mode,estimate`
/// layout.
pub fn convergence(
    net: &Network,
    bounds: &FlowBox,
    samplers: &[SamplerKind],
    seed: u64,
    grid: &[usize],
    mode: Mode,
) -> Result<Vec<(SamplerKind, Mode, usize, f64)>, ReportError> {
    let mut rows = Vec::new();
    for &s in samplers {
        for (n, est) in k_lower_trace(net, bounds, s, seed, grid, mode)? {
            rows.push((s, mode, n, est));
        }
    }
    Ok(rows)
}
