//! Descriptor form `E z⁺ = A z + B_f f(z) + B_l l` of the network equations.
//!
//! State `z = (x1, x2, x3, v, u)`: junction heads, reservoir heads, tank
//! heads, pipe flows, pump-then-valve flows. Exogenous input `l = (d, h_R)`:
//! junction demands and reservoir heads. Row blocks, top to bottom: pipe
//! energy equations, pump/valve energy equations, tank updates, junction
//! mass balances, reservoir head constraints.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use super::{LinkRef, ModelError, Network, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeMode {
    /// Explicit Euler step of length `dt` seconds.
    Discrete { dt: f64 },
    /// `E ż = ...`; tank rows carry `±1/A`.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Coordinate-format matrix with entries in row-major order, no duplicates
/// and no explicit zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Triplet>,
}

impl SparseMatrix {
    fn from_map(rows: usize, cols: usize, map: BTreeMap<(usize, usize), f64>) -> Self {
        let entries = map
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|((row, col), value)| Triplet { row, col, value })
            .collect();
        SparseMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .binary_search_by(|t| (t.row, t.col).cmp(&(row, col)))
            .map(|i| self.entries[i].value)
            .unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for t in &self.entries {
            y[t.row] += t.value * x[t.col];
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for t in &self.entries {
            d[t.row][t.col] = t.value;
        }
        d
    }

    /// MatrixMarket coordinate text with 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.entries.len());
        for t in &self.entries {
            let _ = writeln!(s, "{} {} {:e}", t.row + 1, t.col + 1, t.value);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateBlocks {
    pub x1: Block,
    pub x2: Block,
    pub x3: Block,
    pub v: Block,
    pub u: Block,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowBlocks {
    pub pipes: Block,
    pub pumps_valves: Block,
    pub tanks: Block,
    pub junctions: Block,
    pub reservoirs: Block,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputBlocks {
    pub d: Block,
    pub h_r: Block,
}

/// Names every row and column so exported matrices can be interpreted
/// without this library.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaeLayout {
    pub mode: &'static str,
    pub dt: Option<f64>,
    pub z: StateBlocks,
    pub rows: RowBlocks,
    pub l: InputBlocks,
    pub z_names: Vec<String>,
    pub f_names: Vec<String>,
    pub l_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaeSystem {
    pub mode: TimeMode,
    pub e_z: SparseMatrix,
    pub a_z: SparseMatrix,
    pub b_f: SparseMatrix,
    pub b_l: SparseMatrix,
    pub layout: DaeLayout,
}

impl DaeSystem {
    pub fn dim(&self) -> usize {
        self.a_z.cols
    }

    /// `A z + B_f f + B_l l`.
    pub fn rhs(&self, z: &[f64], f: &[f64], l: &[f64]) -> Vec<f64> {
        let a = self.a_z.mul_vec(z);
        let bf = self.b_f.mul_vec(f);
        let bl = self.b_l.mul_vec(l);
        a.iter()
            .zip(&bf)
            .zip(&bl)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }

    /// Writes `E_z.mtx`, `A_z.mtx`, `B_f.mtx`, `B_l.mtx` and `layout.json`
    /// into `dir`, creating it if needed.
    pub fn export(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in [
            ("E_z", &self.e_z),
            ("A_z", &self.a_z),
            ("B_f", &self.b_f),
            ("B_l", &self.b_l),
        ] {
            std::fs::write(dir.join(format!("{name}.mtx")), m.to_matrix_market())?;
        }
        let json = serde_json::to_string_pretty(&self.layout).map_err(io::Error::other)?;
        std::fs::write(dir.join("layout.json"), json)
    }
}

/// Assembles the descriptor matrices for `net`.
pub fn build_dae(net: &Network, mode: TimeMode) -> Result<DaeSystem, ModelError> {
    if let TimeMode::Discrete { dt } = mode {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ModelError::InvalidTimeStep(dt));
        }
    }
    let (nj, nr, nt) = (net.n_junctions(), net.n_reservoirs(), net.n_tanks());
    let (np, nu) = (net.n_pipes(), net.n_pumps() + net.n_valves());
    let n = nj + nr + nt + np + nu;

    let blk = |offset, len| Block { offset, len };
    let z = StateBlocks {
        x1: blk(0, nj),
        x2: blk(nj, nr),
        x3: blk(nj + nr, nt),
        v: blk(nj + nr + nt, np),
        u: blk(nj + nr + nt + np, nu),
    };
    let rows = RowBlocks {
        pipes: blk(0, np),
        pumps_valves: blk(np, nu),
        tanks: blk(np + nu, nt),
        junctions: blk(np + nu + nt, nj),
        reservoirs: blk(np + nu + nt + nj, nr),
    };
    let l = InputBlocks {
        d: blk(0, nj),
        h_r: blk(nj, nr),
    };

    let head_col = |node: NodeRef| match node {
        NodeRef::Junction(i) => z.x1.offset + i,
        NodeRef::Reservoir(i) => z.x2.offset + i,
        NodeRef::Tank(i) => z.x3.offset + i,
    };
    let flow_col = |link: LinkRef| match link {
        LinkRef::Pipe(i) => z.v.offset + i,
        _ => z.u.offset + net.flat_index(link) - np,
    };

    let mut e = BTreeMap::new();
    let mut a = BTreeMap::new();
    let mut bf = BTreeMap::new();
    let mut bl = BTreeMap::new();
    let add = |m: &mut BTreeMap<(usize, usize), f64>, r, c, v: f64| {
        *m.entry((r, c)).or_insert(0.0) += v;
    };

    // energy equations: h_from - h_to = f  <=>  0 = -h_from + h_to + f
    for k in 0..net.n_links() {
        let link = net.link_at(k);
        let row = k;
        let (from, to) = net.endpoints(link);
        let is_pipe = matches!(link, LinkRef::Pipe(_));
        for (node, sign) in [(from, -1.0), (to, 1.0)] {
            // pump and valve rows carry no tank-head block
            if !is_pipe && matches!(node, NodeRef::Tank(_)) {
                continue;
            }
            add(&mut a, row, head_col(node), sign);
        }
        add(&mut bf, row, k, 1.0);
    }

    // tank updates, pipe flows only
    for (i, t) in net.tanks.iter().enumerate() {
        let row = rows.tanks.offset + i;
        let col = z.x3.offset + i;
        add(&mut e, row, col, 1.0);
        let scale = match mode {
            TimeMode::Discrete { dt } => {
                add(&mut a, row, col, 1.0);
                dt / t.area
            }
            TimeMode::Continuous => 1.0 / t.area,
        };
        let node = NodeRef::Tank(i);
        for &link in net.inflow_links(node) {
            if let LinkRef::Pipe(_) = link {
                add(&mut a, row, flow_col(link), scale);
            }
        }
        for &link in net.outflow_links(node) {
            if let LinkRef::Pipe(_) = link {
                add(&mut a, row, flow_col(link), -scale);
            }
        }
    }

    // junction balances: 0 = -inflow + outflow + d
    for i in 0..nj {
        let row = rows.junctions.offset + i;
        let node = NodeRef::Junction(i);
        for &link in net.inflow_links(node) {
            add(&mut a, row, flow_col(link), -1.0);
        }
        for &link in net.outflow_links(node) {
            add(&mut a, row, flow_col(link), 1.0);
        }
        add(&mut bl, row, l.d.offset + i, 1.0);
    }

    // reservoirs: 0 = -x2 + h_R
    for i in 0..nr {
        let row = rows.reservoirs.offset + i;
        add(&mut a, row, z.x2.offset + i, -1.0);
        add(&mut bl, row, l.h_r.offset + i, 1.0);
    }

    let mut z_names = Vec::with_capacity(n);
    z_names.extend(net.junction_ids.iter().map(|id| format!("x1:{id}")));
    z_names.extend(net.reservoir_ids.iter().map(|id| format!("x2:{id}")));
    z_names.extend(net.tanks.iter().map(|t| format!("x3:{}", t.id)));
    z_names.extend(net.pipes.iter().map(|p| format!("v:{}", p.id)));
    z_names.extend(net.pumps.iter().map(|p| format!("u:{}", p.id)));
    z_names.extend(net.valves.iter().map(|v| format!("u:{}", v.id)));
    let f_names = net.link_ids().iter().map(|id| format!("f:{id}")).collect();
    let l_names = net
        .junction_ids
        .iter()
        .map(|id| format!("d:{id}"))
        .chain(net.reservoir_ids.iter().map(|id| format!("hR:{id}")))
        .collect();

    let (mode_name, dt) = match mode {
        TimeMode::Discrete { dt } => ("discrete", Some(dt)),
        TimeMode::Continuous => ("continuous", None),
    };

    Ok(DaeSystem {
        mode,
        e_z: SparseMatrix::from_map(n, n, e),
        a_z: SparseMatrix::from_map(n, n, a),
        b_f: SparseMatrix::from_map(n, net.n_links(), bf),
        b_l: SparseMatrix::from_map(n, nj + nr, bl),
        layout: DaeLayout {
            mode: mode_name,
            dt,
            z,
            rows,
            l,
            z_names,
            f_names,
            l_names,
        },
    })
}
