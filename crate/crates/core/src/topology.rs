//! Communication graphs and their gossip matrices.
//!
//! A [`GossipMatrix`] is a dense symmetric doubly stochastic matrix supported
//! on a connected [`Graph`], together with the spectral quantities the
//! step-size formulas need: the second-largest singular value `sigma2`, the
//! spectral gap `rho = 1 - sigma2`, and `beta = ‖I - P‖₂`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry tolerance accepted by [`spectral_quantities`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Row/column sum tolerance for double stochasticity.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semi-definite.
pub const PSD_TOL: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Cycle,
    Complete,
    Path,
    Grid2d,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::Cycle,
        TopologyKind::Complete,
        TopologyKind::Path,
        TopologyKind::Grid2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Cycle => "cycle",
            TopologyKind::Complete => "complete",
            TopologyKind::Path => "path",
            TopologyKind::Grid2d => "grid2d",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(TopologyKind::Cycle),
            "complete" => Ok(TopologyKind::Complete),
            "path" => Ok(TopologyKind::Path),
            "grid2d" | "grid" => Ok(TopologyKind::Grid2d),
            other => Err(Error::Config(format!("unknown topology {other:?}"))),
        }
    }
}

/// Undirected simple graph on nodes `0..n`. Edges are stored as `(i, j)`
/// with `i < j`; self-loops are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidSize(format!("edge ({a},{b}) out of range for n={n}")));
            }
            if a == b {
                continue;
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Breadth-first search from node 0 reaches every node.
    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Hop distance from `source` to every node (usize::MAX if unreachable).
    pub fn hop_distances(&self, source: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.n];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

pub fn build_topology(kind: TopologyKind, n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("{kind} needs n >= 2, got {n}")));
    }
    let edges: Vec<(usize, usize)> = match kind {
        TopologyKind::Cycle => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        TopologyKind::Complete => (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect(),
        TopologyKind::Path => (0..n - 1).map(|i| (i, i + 1)).collect(),
        TopologyKind::Grid2d => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(Error::InvalidSize(format!("grid2d needs a perfect square, got {n}")));
            }
            let mut e = Vec::with_capacity(2 * n);
            for r in 0..side {
                for c in 0..side {
                    let u = r * side + c;
                    if c + 1 < side {
                        e.push((u, u + 1));
                    }
                    if r + 1 < side {
                        e.push((u, u + side));
                    }
                }
            }
            e
        }
    };
    Graph::new(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub sigma2: f64,
    pub rho: f64,
    pub beta: f64,
    pub min_eigenvalue: f64,
}

/// Computes `(sigma2, rho, beta)` of a symmetric matrix by dense symmetric
/// eigendecomposition. `sigma2` is the second-largest absolute eigenvalue.
pub fn spectral_quantities(rows: &[Vec<f64>]) -> Result<Spectrum> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidMatrix("matrix must be square and non-empty".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (rows[i][j] - rows[j][i]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "not symmetric at ({i},{j}): {} vs {}",
                    rows[i][j], rows[j][i]
                )));
            }
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let eig = m.symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();

    let mut magnitudes: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    let sigma2 = if n >= 2 { magnitudes[1] } else { 0.0 };
    let beta = values.iter().map(|v| (1.0 - v).abs()).fold(0.0, f64::max);
    let min_eigenvalue = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Spectrum {
        sigma2,
        rho: 1.0 - sigma2,
        beta,
        min_eigenvalue,
    })
}

/// Symmetric doubly stochastic mixing matrix with cached spectrum.
#[derive(Debug, Clone)]
pub struct GossipMatrix {
    w: Vec<Vec<f64>>,
    neighbors: Vec<Vec<usize>>,
    spectrum: Spectrum,
    psd_enforced: bool,
}

impl GossipMatrix {
    /// Validates symmetry and double stochasticity, then caches the spectrum.
    pub fn from_rows(w: Vec<Vec<f64>>) -> Result<Self> {
        let spectrum = spectral_quantities(&w)?;
        let n = w.len();
        for i in 0..n {
            let row: f64 = w[i].iter().sum();
            let col: f64 = (0..n).map(|k| w[k][i]).sum();
            if (row - 1.0).abs() > STOCHASTIC_TOL || (col - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "row/column {i} sums to {row}/{col}, expected 1"
                )));
            }
            if w[i].iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidMatrix(format!("negative entry in row {i}")));
            }
        }
        let neighbors = w
            .iter()
            .map(|row| (0..n).filter(|&j| row[j] > 0.0).collect())
            .collect();
        Ok(Self {
            w,
            neighbors,
            spectrum,
            psd_enforced: false,
        })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// Nodes `j` with `P_ij > 0`, including `i` itself when its diagonal is positive.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn spectrum(&self) -> Spectrum {
        self.spectrum
    }

    pub fn sigma2(&self) -> f64 {
        self.spectrum.sigma2
    }

    pub fn rho(&self) -> f64 {
        self.spectrum.rho
    }

    pub fn beta(&self) -> f64 {
        self.spectrum.beta
    }

    pub fn psd_enforced(&self) -> bool {
        self.psd_enforced
    }

    pub fn is_psd(&self) -> bool {
        self.spectrum.min_eigenvalue >= PSD_TOL
    }

    /// Σ_j P_ij v_j
    pub fn mix(&self, i: usize, vectors: &[Vec<f64>]) -> Vec<f64> {
        let d = vectors[i].len();
        let mut out = vec![0.0; d];
        for &j in &self.neighbors[i] {
            crate::vector::axpy(&mut out, self.w[i][j], &vectors[j]);
        }
        out
    }

    /// True when every positive entry is on the diagonal or an edge of `g`.
    pub fn supported_on(&self, g: &Graph) -> bool {
        let n = self.n();
        n == g.n()
            && (0..n).all(|i| {
                (0..n).all(|j| i == j || self.w[i][j] == 0.0 || g.has_edge(i, j))
            })
    }
}

/// `P = I − (D − A)/(δ_max + 1)`.
pub fn max_degree_weights(g: &Graph) -> Result<GossipMatrix> {
    if !g.is_connected() {
        return Err(Error::InvalidConstruction("graph is not connected".into()));
    }
    let n = g.n();
    let deg = g.degrees();
    let dmax = deg.iter().copied().max().unwrap_or(0);
    let off = 1.0 / (dmax as f64 + 1.0);
    let mut w = vec![vec![0.0; n]; n];
    for &(a, b) in g.edges() {
        w[a][b] = off;
        w[b][a] = off;
    }
    for i in 0..n {
        w[i][i] = 1.0 - deg[i] as f64 * off;
    }
    GossipMatrix::from_rows(w)
}

/// `(I + P)/2`: maps every eigenvalue λ to (1+λ)/2.
pub fn lazify(p: &GossipMatrix) -> Result<GossipMatrix> {
    let n = p.n();
    let w = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.5 * (if i == j { 1.0 } else { 0.0 } + p.get(i, j)))
                .collect()
        })
        .collect();
    let mut out = GossipMatrix::from_rows(w)?;
    out.psd_enforced = true;
    Ok(out)
}

/// Builds the graph and its max-degree matrix, lazified unless `lazy` is false.
pub fn gossip_matrix_for(kind: TopologyKind, n: usize, lazy: bool) -> Result<(Graph, GossipMatrix)> {
    let g = build_topology(kind, n)?;
    let p = max_degree_weights(&g)?;
    let p = if lazy { lazify(&p)? } else { p };
    Ok((g, p))
}
