//! Certified bounds on the Jacobian norm by interval branch and bound.
//!
//! [`bnb_max`] maximises any [`Objective`] over a box: the cover of
//! candidate sub-boxes lives in a max-heap keyed by each box's interval upper
//! bound, the lower bound is the best objective value seen at a box
//! midpoint, and boxes whose upper bound falls below it are discarded.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::domain::FlowBox;
use crate::estimate::{LipschitzEstimate, Method, Mode, Termination};
use crate::interval::Interval;
use crate::model::{LinkRef, Network};

pub const DEFAULT_MAX_BOXES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnbError {
    #[error("gap tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("objective has dimension {objective}, domain has {domain}")]
    DimensionMismatch { objective: usize, domain: usize },
}

/// A scalar function with a point evaluation and an interval extension.
///
/// `eval_box` must enclose `eval_point` at every point of the box, including
/// the floating-point rounding of `eval_point` itself.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn eval_point(&self, x: &[f64]) -> f64;
    fn eval_box(&self, b: &[Interval]) -> Interval;

    /// Coordinate to bisect. `scale` holds the widths of the original
    /// domain. The default picks the widest coordinate relative to its
    /// original width; `None` if nothing can be split.
    fn split_coordinate(&self, b: &[Interval], scale: &[f64]) -> Option<usize> {
        widest_scaled(b, scale)
    }
}

fn widest_scaled(b: &[Interval], scale: &[f64]) -> Option<usize> {
    let mut best = None;
    let mut best_w = 0.0;
    for (k, iv) in b.iter().enumerate() {
        if iv.bisect().is_none() {
            continue;
        }
        let w = if scale[k] > 0.0 {
            iv.width() / scale[k]
        } else {
            0.0
        };
        if best.is_none() || w > best_w {
            best = Some(k);
            best_w = w;
        }
    }
    best
}

/// Objective built from two closures; handy for one-off functions.
pub struct FnObjective<P, B> {
    pub dim: usize,
    pub point: P,
    pub boxed: B,
}

impl<P, B> Objective for FnObjective<P, B>
where
    P: Fn(&[f64]) -> f64 + Sync,
    B: Fn(&[Interval]) -> Interval + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval_point(&self, x: &[f64]) -> f64 {
        (self.point)(x)
    }
    fn eval_box(&self, b: &[Interval]) -> Interval {
        (self.boxed)(b)
    }
}

/// Diagonal of a Jacobian whose entry `i` depends on coordinate `i` only.
pub trait DiagonalEntries: Sync {
    fn dim(&self) -> usize;
    fn entry(&self, i: usize, q: f64) -> f64;
    /// Must enclose `entry(i, q)` for every `q` in `q_range`.
    fn entry_enclosure(&self, i: usize, q_range: Interval) -> Interval;
}

impl DiagonalEntries for Network {
    fn dim(&self) -> usize {
        self.n_links()
    }

    fn entry(&self, i: usize, q: f64) -> f64 {
        self.derivative(i, q)
    }

    fn entry_enclosure(&self, i: usize, q: Interval) -> Interval {
        let p = Interval::point;
        match self.link_at(i) {
            LinkRef::Pipe(k) => {
                let l = &self.pipes[k];
                p(l.exponent) * p(l.resistance) * q.abs_pow(l.exponent - 1.0)
            }
            LinkRef::Pump(k) => {
                let m = &self.pumps[k];
                p(m.exponent)
                    * p(m.coeff)
                    * q.abs_pow(m.exponent - 1.0)
                    * p(m.speed).powf(2.0 - m.exponent)
            }
            LinkRef::Valve(k) => {
                let v = &self.valves[k];
                p(v.exponent) * p(v.openness) * p(v.resistance) * q.abs_pow(v.exponent - 1.0)
            }
        }
    }
}

/// Constant diagonal entries, independent of the point.
#[derive(Debug, Clone)]
pub struct ConstantDiagonal(pub Vec<f64>);

impl DiagonalEntries for ConstantDiagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn entry(&self, i: usize, _q: f64) -> f64 {
        self.0[i]
    }
    fn entry_enclosure(&self, i: usize, _q: Interval) -> Interval {
        Interval::point(self.0[i])
    }
}

/// How diagonal entries are combined into a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// `max_i |J_ii|`, the spectral norm of a diagonal matrix.
    MaxAbs,
    /// `max_i J_ii`, the logarithmic 2-norm of a diagonal matrix.
    MaxSigned,
    /// `sqrt(sum_i J_ii^2)`, the Frobenius norm.
    Frobenius,
}

impl Reduction {
    /// Point reduction, shared with the sampling estimators so both sides
    /// round identically.
    pub fn reduce<I: IntoIterator<Item = f64>>(self, entries: I) -> f64 {
        let it = entries.into_iter();
        match self {
            Reduction::MaxAbs => it.map(f64::abs).fold(0.0, f64::max),
            Reduction::MaxSigned => it.fold(f64::NEG_INFINITY, f64::max),
            Reduction::Frobenius => it.map(|e| e * e).sum::<f64>().sqrt(),
        }
    }

    fn reduce_intervals<I: IntoIterator<Item = Interval>>(self, entries: I) -> Interval {
        let mut it = entries.into_iter();
        match self {
            Reduction::MaxAbs => it
                .map(|e| e.abs())
                .fold(Interval::point(0.0), |a, e| a.max(&e)),
            Reduction::MaxSigned => {
                let first = it.next().unwrap_or(Interval::point(f64::NEG_INFINITY));
                it.fold(first, |a, e| a.max(&e))
            }
            Reduction::Frobenius => it
                .map(|e| e.sqr())
                .fold(Interval::point(0.0), |a, e| a + e)
                .sqrt(),
        }
    }
}

/// A norm of a diagonal Jacobian as a branch-and-bound objective.
///
/// Bisection targets a single term rather than the widest coordinate: for
/// the max norms, the term attaining the box's upper bound; for the
/// Frobenius norm, the term with the widest enclosure. Bisecting the widest
/// coordinate instead spends most of its effort on links that never bind,
/// which is exponential in the number of links.
pub struct SeparableObjective<'a, D: DiagonalEntries + ?Sized> {
    pub entries: &'a D,
    pub reduction: Reduction,
}

impl<'a, D: DiagonalEntries + ?Sized> SeparableObjective<'a, D> {
    pub fn new(entries: &'a D, reduction: Reduction) -> Self {
        SeparableObjective { entries, reduction }
    }

    fn term(&self, i: usize, q: Interval) -> Interval {
        let e = self.entries.entry_enclosure(i, q);
        match self.reduction {
            Reduction::MaxAbs => e.abs(),
            Reduction::MaxSigned => e,
            Reduction::Frobenius => e.sqr(),
        }
    }
}

impl<D: DiagonalEntries + ?Sized> Objective for SeparableObjective<'_, D> {
    fn dim(&self) -> usize {
        self.entries.dim()
    }

    fn eval_point(&self, x: &[f64]) -> f64 {
        self.reduction
            .reduce(x.iter().enumerate().map(|(i, &q)| self.entries.entry(i, q)))
    }

    fn eval_box(&self, b: &[Interval]) -> Interval {
        self.reduction.reduce_intervals(
            b.iter()
                .enumerate()
                .map(|(i, &q)| self.entries.entry_enclosure(i, q)),
        )
    }

    fn split_coordinate(&self, b: &[Interval], _scale: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut best_key = (false, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (i, &q) in b.iter().enumerate() {
            if q.bisect().is_none() {
                continue;
            }
            let t = self.term(i, q);
            let key = match self.reduction {
                // the term attaining the box maximum; only it can lower the bound
                Reduction::MaxAbs | Reduction::MaxSigned => (t.width() > 0.0, t.hi, t.width()),
                // the term contributing the most uncertainty to the sum
                Reduction::Frobenius => (true, t.width(), t.hi),
            };
            if best.is_none() || key > best_key {
                best = Some(i);
                best_key = key;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbConfig {
    pub gap_tol: f64,
    pub max_boxes: u64,
}

impl BnbConfig {
    pub fn new(gap_tol: f64) -> Self {
        BnbConfig {
            gap_tol,
            max_boxes: DEFAULT_MAX_BOXES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BnbResult {
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub boxes_processed: u64,
    pub terminated_by: Termination,
    /// Point at which `lower` was attained.
    pub argmax: Vec<f64>,
}

#[derive(Serialize)]
struct Progress {
    boxes: u64,
    lower: f64,
    upper: f64,
    gap: f64,
    wall_time: f64,
}

struct Node {
    upper: f64,
    seq: u64,
    cell: Vec<Interval>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger upper first; among equals, older boxes first
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn midpoint(cell: &[Interval]) -> Vec<f64> {
    cell.iter().map(Interval::mid).collect()
}

/// Maximises `objective` over `domain`.
pub fn bnb_max<O: Objective + ?Sized>(
    objective: &O,
    domain: &[Interval],
    config: &BnbConfig,
) -> Result<BnbResult, BnbError> {
    run(objective, domain, config, None)
}

/// As [`bnb_max`], writing a JSON progress line to `log` every `every`
/// boxes and once at the end.
pub fn bnb_max_logged<O: Objective + ?Sized>(
    objective: &O,
    domain: &[Interval],
    config: &BnbConfig,
    log: &mut dyn Write,
    every: u64,
) -> Result<BnbResult, BnbError> {
    run(objective, domain, config, Some((log, every.max(1))))
}

fn run<O: Objective + ?Sized>(
    objective: &O,
    domain: &[Interval],
    config: &BnbConfig,
    mut log: Option<(&mut dyn Write, u64)>,
) -> Result<BnbResult, BnbError> {
    if !(config.gap_tol > 0.0 && config.gap_tol.is_finite()) {
        return Err(BnbError::InvalidTolerance(config.gap_tol));
    }
    if objective.dim() != domain.len() {
        return Err(BnbError::DimensionMismatch {
            objective: objective.dim(),
            domain: domain.len(),
        });
    }
    let start = Instant::now();
    let scale: Vec<f64> = domain.iter().map(Interval::width).collect();

    let mut argmax = midpoint(domain);
    let mut lower = objective.eval_point(&argmax);
    let mut heap = BinaryHeap::new();
    let root_upper = objective.eval_box(domain).hi;
    heap.push(Node {
        upper: root_upper,
        seq: 0,
        cell: domain.to_vec(),
    });
    let mut seq = 1u64;
    let mut boxes = 1u64;
    // upper bounds of boxes that cannot be bisected any further
    let mut stuck = f64::NEG_INFINITY;
    let mut next_log = log.as_ref().map_or(u64::MAX, |l| l.1);

    let terminated_by = loop {
        while heap.peek().is_some_and(|n| n.upper < lower) {
            heap.pop();
        }
        let upper = heap.peek().map_or(stuck, |n| n.upper.max(stuck)).max(lower);
        if let Some((w, _)) = log.as_mut() {
            if boxes >= next_log {
                write_progress(*w, boxes, lower, upper, start);
                next_log = boxes + log.as_ref().map_or(u64::MAX, |l| l.1);
            }
        }
        if upper - lower <= config.gap_tol {
            break Termination::Gap;
        }
        let Some(node) = heap.pop() else {
            break Termination::Resolution;
        };
        if boxes >= config.max_boxes {
            heap.push(node);
            break Termination::MaxIterations;
        }
        let Some(k) = objective.split_coordinate(&node.cell, &scale) else {
            stuck = stuck.max(node.upper);
            continue;
        };
        let Some((left, right)) = node.cell[k].bisect() else {
            stuck = stuck.max(node.upper);
            continue;
        };
        for half in [left, right] {
            let mut cell = node.cell.clone();
            cell[k] = half;
            let up = objective.eval_box(&cell).hi;
            let mid = midpoint(&cell);
            let val = objective.eval_point(&mid);
            boxes += 1;
            if val > lower {
                lower = val;
                argmax = mid;
            }
            if up >= lower {
                heap.push(Node {
                    upper: up,
                    seq,
                    cell,
                });
                seq += 1;
            }
        }
    };

    let upper = heap.peek().map_or(stuck, |n| n.upper.max(stuck)).max(lower);
    if let Some((w, _)) = log.as_mut() {
        write_progress(*w, boxes, lower, upper, start);
    }
    Ok(BnbResult {
        upper,
        lower,
        gap: upper - lower,
        boxes_processed: boxes,
        terminated_by,
        argmax,
    })
}

fn write_progress(w: &mut dyn Write, boxes: u64, lower: f64, upper: f64, start: Instant) {
    let line = Progress {
        boxes,
        lower,
        upper,
        gap: upper - lower,
        wall_time: start.elapsed().as_secs_f64(),
    };
    // progress output is best effort
    if let Ok(s) = serde_json::to_string(&line) {
        let _ = writeln!(w, "{s}");
    }
}

pub fn domain_intervals(bounds: &FlowBox) -> Vec<Interval> {
    (0..bounds.len())
        .map(|k| {
            let (a, b) = bounds.interval(k);
            Interval::new(a, b)
        })
        .collect()
}

/// Enclosures of every Jacobian diagonal entry over `bounds`.
pub fn jac_entry_bounds(net: &Network, bounds: &FlowBox) -> Vec<Interval> {
    domain_intervals(bounds)
        .into_iter()
        .enumerate()
        .map(|(i, q)| net.entry_enclosure(i, q))
        .collect()
}

/// Runs branch and bound on a norm of the network Jacobian, optionally
/// logging progress every `every` boxes.
pub fn interval_estimate(
    net: &Network,
    bounds: &FlowBox,
    reduction: Reduction,
    config: &BnbConfig,
    log: Option<(&mut dyn Write, u64)>,
) -> Result<LipschitzEstimate, BnbError> {
    let mode = match reduction {
        Reduction::Frobenius => Mode::Sqrt,
        Reduction::MaxAbs | Reduction::MaxSigned => Mode::Max,
    };
    let obj = SeparableObjective::new(net, reduction);
    let dom = domain_intervals(bounds);
    let r = match log {
        Some((w, every)) => bnb_max_logged(&obj, &dom, config, w, every)?,
        None => bnb_max(&obj, &dom, config)?,
    };
    Ok(LipschitzEstimate {
        value: r.upper,
        method: Method::IntervalUpper,
        mode,
        gap: Some(r.gap),
        lower: Some(r.lower),
        terminated_by: Some(r.terminated_by),
        effort: r.boxes_processed,
        per_class: None,
    })
}

/// Certified upper bound on the Frobenius norm of the Jacobian. The square
/// root is taken inside the objective, so the gap refers to the norm itself.
pub fn k_upper_sqrt(
    net: &Network,
    bounds: &FlowBox,
    config: &BnbConfig,
) -> Result<LipschitzEstimate, BnbError> {
    interval_estimate(net, bounds, Reduction::Frobenius, config, None)
}

/// Certified upper bound on the largest Jacobian entry.
pub fn k_upper_max(
    net: &Network,
    bounds: &FlowBox,
    config: &BnbConfig,
) -> Result<LipschitzEstimate, BnbError> {
    interval_estimate(net, bounds, Reduction::MaxAbs, config, None)
}

/// Certified upper bound on the logarithmic norm of the Jacobian.
pub fn osl_upper(
    net: &Network,
    bounds: &FlowBox,
    config: &BnbConfig,
) -> Result<LipschitzEstimate, BnbError> {
    interval_estimate(net, bounds, Reduction::MaxSigned, config, None)
}
