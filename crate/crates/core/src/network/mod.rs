//! Simulated communication layer: graphs, mixing matrices, contraction
//! certificates and the consensus subroutines.

mod certify;
mod consensus;
mod schedule;

pub use certify::{certify_contraction, Certificate, TIME_VARYING_MARGIN};
pub use consensus::{chebyshev_consensus, consensus, consensus_rounds_needed};
pub use schedule::{MixingSchedule, ScheduleFile, ScheduleGenerator};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

/// Undirected simple graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Normalizes each edge to `(min, max)`, sorts and removes duplicates.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("graph"));
        }
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at node {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self { n, edges: list })
    }

    pub fn ring(n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::Empty("graph")),
            1 => Self::new(1, []),
            2 => Self::new(2, [(0, 1)]),
            _ => Self::new(n, (0..n).map(|i| (i, (i + 1) % n))),
        }
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn edgeless(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        let mut components = self.n;
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
            }
        }
        components == 1
    }
}

pub(crate) fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// `W_ij = 1/(1 + max(deg_i, deg_j))` on edges, diagonal completes rows to 1.
pub fn metropolis_weights<T: Scalar>(graph: &Graph) -> DMatrix<T> {
    let n = graph.n();
    let deg = graph.degrees();
    let mut w = DMatrix::zeros(n, n);
    for &(a, b) in graph.edges() {
        let v = T::one() / T::count(1 + deg[a].max(deg[b]));
        w[(a, b)] = v;
        w[(b, a)] = v;
    }
    for i in 0..n {
        let off = (0..n)
            .filter(|&j| j != i)
            .fold(T::zero(), |s, j| s + w[(i, j)]);
        w[(i, i)] = T::one() - off;
    }
    w
}

/// Largest deviation of row and column sums from 1.
pub fn stochasticity_defect<T: Scalar>(w: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..w.nrows() {
        worst = worst.max((w.row(i).sum() - T::one()).abs());
    }
    for j in 0..w.ncols() {
        worst = worst.max((w.column(j).sum() - T::one()).abs());
    }
    worst
}
