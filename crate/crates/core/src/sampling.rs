//! Node sampling, K-random inhomogeneous graphs, and spacing laws.

use std::io::Write;

use ndarray::Array2;
use rand::distributions::OpenClosed01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphon::{project_graphon, Graphon, Partition1D};

/// Seeded counter-based RNG stream. Identical `(seed, stream_id)` pairs
/// reproduce identical draws regardless of thread scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrigin {
    Random,
    Deterministic,
}

/// Sorted node positions `x_(1) <= ... <= x_(n)` in `]0,1]`, with the implied
/// left endpoint `x_(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    positions: Vec<f64>,
    origin: NodeOrigin,
}

impl NodeSet {
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn origin(&self) -> NodeOrigin {
        self.origin
    }

    /// All `n + 1` spacings `(x_(1) - 0, x_(2) - x_(1), ..., 1 - x_(n))`.
    /// They sum to 1 by telescoping.
    pub fn spacings(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.positions.len() + 1);
        let mut prev = 0.0;
        for &x in &self.positions {
            out.push(x - prev);
            prev = x;
        }
        out.push(1.0 - prev);
        out
    }

    /// Solver partition: cells `]x_(i-1), x_(i)]` for `i < n` and the last
    /// cell extended to `]x_(n-1), 1]` so the cells tile `[0,1]`.
    pub fn solver_partition(&self) -> Result<Partition1D> {
        let n = self.positions.len();
        let mut breaks = Vec::with_capacity(n + 1);
        breaks.push(0.0);
        breaks.extend_from_slice(&self.positions[..n - 1]);
        breaks.push(1.0);
        Partition1D::from_breakpoints(breaks)
    }

    /// Mesh size `delta(n)` of the solver partition.
    pub fn max_spacing(&self) -> f64 {
        let n = self.positions.len();
        let mut max = 0.0f64;
        let mut prev = 0.0;
        for &x in &self.positions[..n - 1] {
            max = max.max(x - prev);
            prev = x;
        }
        max.max(1.0 - prev)
    }
}

/// `n` i.i.d. uniform draws on `]0,1]`, sorted ascending.
pub fn sample_nodes(n: usize, stream: &RngStream) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::invalid("need at least one node"));
    }
    let mut rng = stream.rng();
    let mut positions: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(OpenClosed01)).collect();
    positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(NodeSet {
        positions,
        origin: NodeOrigin::Random,
    })
}

/// Equispaced nodes `x_(i) = i/n`.
pub fn deterministic_nodes(n: usize) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::invalid("need at least one node"));
    }
    Ok(NodeSet {
        positions: (1..=n).map(|i| i as f64 / n as f64).collect(),
        origin: NodeOrigin::Deterministic,
    })
}

/// Exact tail law of a single spacing: `P(D_i >= eps) = (1 - eps)^n`.
pub fn spacing_tail_probability(n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid("eps must lie in [0,1["));
    }
    Ok((1.0 - eps).powi(n as i32))
}

/// How edge probabilities are derived from the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Bernoulli parameter `q_n * K_hat_ij` with the clamped cell average.
    CellAverage,
    /// Bernoulli parameter `min(q_n * K(x_i, x_j), 1)`; convergence of the
    /// scheme under this mode additionally needs a.e. continuity of the data,
    /// so it is excluded from rate studies.
    Pointwise,
}

/// Sampled weighted graph: symmetric weights with `q_n * w_ij in {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomGraph {
    q_n: f64,
    weights: Array2<f64>,
    node_set: NodeSet,
    partition: Partition1D,
}

impl RandomGraph {
    pub fn n(&self) -> usize {
        self.node_set.n()
    }

    pub fn q_n(&self) -> f64 {
        self.q_n
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn node_set(&self) -> &NodeSet {
        &self.node_set
    }

    pub fn partition(&self) -> &Partition1D {
        &self.partition
    }

    /// Copy with the diagonal zeroed (the no-loops sensitivity switch).
    pub fn with_zeroed_diagonal(&self) -> RandomGraph {
        let mut g = self.clone();
        for i in 0..g.n() {
            g.weights[(i, i)] = 0.0;
        }
        g
    }

    /// Plain-text edge list: header `n q_n seed`, then one `i j weight` line
    /// per nonzero weight with `i <= j` (1-based).
    pub fn write_edge_list(&self, out: &mut impl Write, seed: u64) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.n(), self.q_n, seed)?;
        for i in 0..self.n() {
            for j in i..self.n() {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    writeln!(out, "{} {} {}", i + 1, j + 1, w)?;
                }
            }
        }
        Ok(())
    }
}

/// Sample a K-random inhomogeneous graph on the given nodes.
///
/// Pairs `i <= j` (loops included) are drawn independently; the draw order is
/// fixed so a given stream always yields the same graph.
pub fn sample_graph(
    nodes: &NodeSet,
    kernel: &Graphon,
    q_n: f64,
    stream: &RngStream,
    mode: SampleMode,
) -> Result<RandomGraph> {
    if !(q_n > 0.0) {
        return Err(Error::invalid("q_n must be positive"));
    }
    let n = nodes.n();
    let partition = nodes.solver_partition()?;
    let khat = match mode {
        SampleMode::CellAverage => Some(project_graphon(kernel, &partition, q_n)?),
        SampleMode::Pointwise => None,
    };
    let weight = 1.0 / q_n;
    let mut rng = stream.rng();
    let mut weights = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let prob = match &khat {
                Some(m) => q_n * m[(i, j)],
                None => (q_n * kernel.eval(nodes.positions[i], nodes.positions[j])).min(1.0),
            };
            let w = if rng.gen::<f64>() < prob { weight } else { 0.0 };
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    Ok(RandomGraph {
        q_n,
        weights,
        node_set: nodes.clone(),
        partition,
    })
}

/// Sparsity scaling `q_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsityRule {
    Constant(f64),
    /// `q_n = n^{-g(n)}` with `g(n) = c / log n`, which evaluates to the
    /// constant `exp(-c)`.
    PowerLaw { c: f64 },
}

impl SparsityRule {
    pub fn q(&self, _n: usize) -> f64 {
        match *self {
            SparsityRule::Constant(q) => q,
            SparsityRule::PowerLaw { c } => (-c).exp(),
        }
    }

    /// Both kinds are n-independent, so `inf q_n > 0` and `sup q_n < inf`
    /// reduce to a single positivity/finiteness check.
    pub fn validate(&self) -> Result<()> {
        let q = self.q(2);
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::invalid(format!(
                "sparsity rule yields q_n = {q}, violating 0 < inf q_n <= sup q_n < inf"
            )));
        }
        Ok(())
    }
}
