//! Point-based lower bounds: the Jacobian norm maximised over random,
//! Halton or Sobol points mapped into the flow box.

mod halton;
mod sobol;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::Reduction;
use crate::domain::FlowBox;
use crate::estimate::{LipschitzEstimate, Method, Mode};
use crate::model::Network;

pub use halton::{primes, radical_inverse, Halton};
pub use sobol::{Sobol, DIRECTION_TABLE, MAX_DIMENSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("Sobol table supports {max} dimensions, {requested} requested")]
    DimensionTooLarge { requested: usize, max: usize },
    #[error("sample count must be at least 1")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Random,
    Halton,
    Sobol,
}

impl SamplerKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Some(SamplerKind::Random),
            "halton" => Some(SamplerKind::Halton),
            "sobol" => Some(SamplerKind::Sobol),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            SamplerKind::Random => "random",
            SamplerKind::Halton => "halton",
            SamplerKind::Sobol => "sobol",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A deterministic stream of points in `[0, 1)^d`.
///
/// The random kind draws each coordinate with `gen::<f64>()` from ChaCha8
/// (`rand_chacha`) seeded by `seed_from_u64(seed)`; the seed is ignored by
/// the other kinds.
#[derive(Debug, Clone)]
pub enum SampleSequence {
    Random { rng: Box<ChaCha8Rng>, dim: usize },
    Halton(Halton),
    Sobol(Sobol),
}

impl SampleSequence {
    pub fn new(kind: SamplerKind, dim: usize, seed: u64) -> Result<Self, SamplingError> {
        Ok(match kind {
            SamplerKind::Random => SampleSequence::Random {
                rng: Box::new(ChaCha8Rng::seed_from_u64(seed)),
                dim,
            },
            SamplerKind::Halton => SampleSequence::Halton(Halton::new(dim)),
            SamplerKind::Sobol => SampleSequence::Sobol(Sobol::new(dim)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SampleSequence::Random { dim, .. } => *dim,
            SampleSequence::Halton(h) => h.dim(),
            SampleSequence::Sobol(s) => s.dim(),
        }
    }

    pub fn next_into(&mut self, out: &mut [f64]) {
        match self {
            SampleSequence::Random { rng, .. } => {
                for o in out.iter_mut() {
                    *o = rng.gen::<f64>();
                }
            }
            SampleSequence::Halton(h) => h.next_into(out),
            SampleSequence::Sobol(s) => s.next_into(out),
        }
    }

    /// Next `n` points, row-major.
    pub fn take_points(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let mut p = vec![0.0; self.dim()];
                self.next_into(&mut p);
                p
            })
            .collect()
    }
}

pub fn halton(dim: usize, n: usize) -> Vec<Vec<f64>> {
    SampleSequence::Halton(Halton::new(dim)).take_points(n)
}

pub fn sobol(dim: usize, n: usize) -> Result<Vec<Vec<f64>>, SamplingError> {
    Ok(SampleSequence::Sobol(Sobol::new(dim)?).take_points(n))
}

pub fn random(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    SampleSequence::new(SamplerKind::Random, dim, seed)
        .expect("random sequences have no dimension limit")
        .take_points(n)
}

fn reduction(mode: Mode) -> Reduction {
    match mode {
        Mode::Max => Reduction::MaxAbs,
        Mode::Sqrt => Reduction::Frobenius,
    }
}

/// Jacobian norm at a single flow vector.
pub fn point_norm(net: &Network, q: &[f64], mode: Mode) -> f64 {
    reduction(mode).reduce(q.iter().enumerate().map(|(i, &x)| net.derivative(i, x)))
}

const CHUNK: usize = 4096;

/// Running maximum of the Jacobian norm over the first `n` points, recorded
/// at each checkpoint in `ns` (sorted ascending on return order).
///
/// Points are generated serially and evaluated in parallel; the maximum is
/// taken in sequence order, so the result does not depend on the thread
/// count.
pub fn k_lower_trace(
    net: &Network,
    bounds: &FlowBox,
    kind: SamplerKind,
    seed: u64,
    ns: &[usize],
    mode: Mode,
) -> Result<Vec<(usize, f64)>, SamplingError> {
    let mut checkpoints: Vec<usize> = ns.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.first().is_none_or(|&n| n == 0) {
        return Err(SamplingError::NoSamples);
    }
    let total = *checkpoints.last().unwrap();
    let dim = net.n_links();
    let mut seq = SampleSequence::new(kind, dim, seed)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    let mut best = 0.0f64;
    let mut done = 0;
    let mut unit = vec![0.0; dim];
    while done < total {
        let m = CHUNK.min(total - done);
        let mut flows = vec![0.0; m * dim];
        for row in flows.chunks_mut(dim.max(1)).take(m) {
            seq.next_into(&mut unit);
            bounds.map_unit(&unit, row);
        }
        let values: Vec<f64> = if dim == 0 {
            vec![0.0; m]
        } else {
            flows
                .par_chunks(dim)
                .map(|q| point_norm(net, q, mode))
                .collect()
        };
        for v in values {
            best = best.max(v);
            done += 1;
            if checkpoints[next] == done {
                out.push((done, best));
                next += 1;
            }
        }
    }
    Ok(out)
}

/// Largest Jacobian norm over the first `n` points of the sequence; a lower
/// bound on the Lipschitz constant (mode max) or on the Frobenius bound
/// (mode sqrt).
pub fn k_lower(
    net: &Network,
    bounds: &FlowBox,
    kind: SamplerKind,
    seed: u64,
    n: usize,
    mode: Mode,
) -> Result<LipschitzEstimate, SamplingError> {
    let trace = k_lower_trace(net, bounds, kind, seed, &[n], mode)?;
    Ok(LipschitzEstimate {
        value: trace[0].1,
        method: Method::PointLower,
        mode,
        gap: None,
        lower: None,
        terminated_by: None,
        effort: n as u64,
        per_class: None,
    })
}

/// Convergence trace rows as CSV: `n,sampler,mode,estimate`.
pub fn trace_csv(rows: &[(SamplerKind, Mode, usize, f64)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing to memory cannot fail
    w.write_record(["n", "sampler", "mode", "estimate"])
        .unwrap();
    for (kind, mode, n, est) in rows {
        w.write_record([
            n.to_string(),
            kind.token().to_string(),
            mode.token().to_string(),
            format!("{est:?}"),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// `10, 100, ..., 10^max_exp`.
pub fn decade_grid(max_exp: u32) -> Vec<usize> {
    (1..=max_exp).map(|e| 10usize.pow(e)).collect()
}
