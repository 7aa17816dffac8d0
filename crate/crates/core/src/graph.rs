//! States, edges, Markov kernels, stationary distributions, and edge measures.
//!
//! The ground set for everything else: a finite strongly connected digraph
//! (X, E), the row-stochastic kernels supported exactly on E, and the joint
//! one-step law p(x)w(y|x) of a stationary transition.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::XorShift64Star;

/// Row-sum tolerance for kernels and total-mass tolerance for measures.
pub const MASS_TOL: f64 = 1e-12;
/// Residual bound enforced on the stationary distribution.
pub const STATIONARY_TOL: f64 = 1e-12;
/// Shift-invariance tolerance accepted by [`EdgeMeasure::to_kernel`].
pub const SHIFT_INVARIANCE_TOL: f64 = 1e-10;

/// A finite strongly connected directed graph with named states and a
/// canonically ordered edge list (lexicographic by state index).
#[derive(Debug, Clone)]
pub struct KernelGraph {
    states: Vec<String>,
    edges: Vec<(usize, usize)>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl PartialEq for KernelGraph {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states && self.edges == other.edges
    }
}
impl Eq for KernelGraph {}

impl KernelGraph {
    /// Builds the graph, sorting edges into canonical order.
    ///
    /// Rejects duplicate states, duplicate edges, unknown endpoints, and
    /// graphs that are not strongly connected.
    pub fn new<S: Into<String>>(states: Vec<S>, edges: Vec<(String, String)>) -> Result<Self> {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if states.len() < 2 {
            return Err(Error::TooFewStates(states.len()));
        }
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateState(s.clone()));
            }
        }
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (from, to) in &edges {
            let a = *index
                .get(from)
                .ok_or_else(|| Error::UnknownState(from.clone()))?;
            let b = *index
                .get(to)
                .ok_or_else(|| Error::UnknownState(to.clone()))?;
            idx_edges.push((a, b));
        }
        Self::from_indexed(states, idx_edges)
    }

    /// Same as [`KernelGraph::new`] but with edges given as state indices.
    pub fn from_indexed(states: Vec<String>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = states.len();
        if n < 2 {
            return Err(Error::TooFewStates(n));
        }
        edges.sort_unstable();
        for pair in edges.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateEdge(
                    states[pair[0].0].clone(),
                    states[pair[0].1].clone(),
                ));
            }
        }
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::UnknownState(format!("#{}", a.max(b))));
            }
        }
        if !is_strongly_connected(n, &edges) {
            return Err(Error::NotStronglyConnected);
        }
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (k, &(a, b)) in edges.iter().enumerate() {
            out_edges[a].push(k);
            in_edges[b].push(k);
        }
        Ok(Self {
            states,
            edges,
            out_edges,
            in_edges,
        })
    }

    /// Complete graph (self-loops included) on `n` states named "0".."n-1".
    pub fn complete(n: usize) -> Result<Self> {
        let states: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let edges = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .collect();
        Self::from_indexed(states, edges)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    /// Edges in canonical order, as (source, target) state indices.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// Edge indices leaving state `x`, in canonical order.
    pub fn out_edges(&self, x: usize) -> &[usize] {
        &self.out_edges[x]
    }

    /// Edge indices entering state `x`.
    pub fn in_edges(&self, x: usize) -> &[usize] {
        &self.in_edges[x]
    }

    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edges.binary_search(&(from, to)).ok()
    }

    /// Lays out per-edge values as a dense |X| x |X| matrix (0 off E).
    pub fn to_matrix(&self, values: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = self.num_states();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            m[(a, b)] = values[k];
        }
        m
    }
}

/// True iff every ordered pair of states is joined by a directed path.
///
/// Two breadth-first sweeps: reachability from state 0 forwards and
/// backwards covers all pairs.
pub fn is_strongly_connected(num_states: usize, edges: &[(usize, usize)]) -> bool {
    if num_states == 0 {
        return false;
    }
    let mut fwd = vec![Vec::new(); num_states];
    let mut bwd = vec![Vec::new(); num_states];
    for &(a, b) in edges {
        fwd[a].push(b);
        bwd[b].push(a);
    }
    let reaches_all = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; num_states];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == num_states
    };
    reaches_all(&fwd) && reaches_all(&bwd)
}

/// A probability distribution over the states of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "total mass {sum} is not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// KL divergence to another distribution, in nats. Both must be
    /// strictly positive.
    pub fn kl(&self, other: &Distribution) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        if self.probs.iter().any(|&p| p <= 0.0) || other.probs.iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidDistribution(
                "kl requires strictly positive distributions".into(),
            ));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(&p, &q)| p * (p / q).ln())
            .sum())
    }
}

/// A Markov kernel: strictly positive transition probabilities on the edges
/// of a graph, each out-row summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    graph: Arc<KernelGraph>,
    probs: Vec<f64>,
}

impl MarkovKernel {
    /// `probs` are per-edge values in the graph's canonical edge order.
    pub fn new(graph: Arc<KernelGraph>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != graph.num_edges() {
            return Err(Error::LengthMismatch {
                expected: graph.num_edges(),
                got: probs.len(),
            });
        }
        for (k, &p) in probs.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                let (a, b) = graph.edges()[k];
                return Err(Error::NotPositive {
                    from: graph.state_name(a).to_string(),
                    to: graph.state_name(b).to_string(),
                    value: p,
                });
            }
        }
        for x in 0..graph.num_states() {
            let sum: f64 = graph.out_edges(x).iter().map(|&k| probs[k]).sum();
            if (sum - 1.0).abs() > MASS_TOL {
                return Err(Error::RowNotNormalized {
                    state: graph.state_name(x).to_string(),
                    sum,
                });
            }
        }
        Ok(Self { graph, probs })
    }

    /// Uniform kernel: every out-row spreads its mass evenly.
    pub fn uniform(graph: Arc<KernelGraph>) -> Self {
        let mut probs = vec![0.0; graph.num_edges()];
        for x in 0..graph.num_states() {
            let deg = graph.out_edges(x).len() as f64;
            for &k in graph.out_edges(x) {
                probs[k] = 1.0 / deg;
            }
        }
        Self { graph, probs }
    }

    /// Random positive kernel, rows renormalized; entries bounded away
    /// from zero so supports stay exactly E.
    pub fn random(graph: Arc<KernelGraph>, rng: &mut XorShift64Star) -> Self {
        let mut probs: Vec<f64> = (0..graph.num_edges())
            .map(|_| rng.uniform_in(0.05, 1.0))
            .collect();
        for x in 0..graph.num_states() {
            let sum: f64 = graph.out_edges(x).iter().map(|&k| probs[k]).sum();
            for &k in graph.out_edges(x) {
                probs[k] /= sum;
            }
        }
        Self { graph, probs }
    }

    pub fn graph(&self) -> &Arc<KernelGraph> {
        &self.graph
    }

    /// Per-edge probabilities in canonical edge order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, from: usize, to: usize) -> Option<f64> {
        self.graph.edge_index(from, to).map(|k| self.probs[k])
    }

    pub fn same_graph(&self, other: &MarkovKernel) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || self.graph == other.graph
    }

    /// The unique stationary distribution, by GTH state reduction.
    ///
    /// GTH uses no subtractions, so it is componentwise accurate and needs
    /// no aperiodicity. The residual of p W = p is checked on exit.
    pub fn stationary_distribution(&self) -> Result<Distribution> {
        let n = self.graph.num_states();
        let mut a = self.graph.to_matrix(&self.probs);
        for k in (1..n).rev() {
            let s: f64 = (0..k).map(|j| a[(k, j)]).sum();
            for i in 0..k {
                a[(i, k)] /= s;
            }
            for i in 0..k {
                let aik = a[(i, k)];
                for j in 0..k {
                    a[(i, j)] += aik * a[(k, j)];
                }
            }
        }
        let mut mu = vec![0.0; n];
        mu[0] = 1.0;
        for k in 1..n {
            mu[k] = (0..k).map(|i| mu[i] * a[(i, k)]).sum();
        }
        let total: f64 = mu.iter().sum();
        for m in &mut mu {
            *m /= total;
        }
        // residual of p W = p in max norm
        let mut residual = 0.0f64;
        for y in 0..n {
            let mut py = 0.0;
            for &k in self.graph.in_edges(y) {
                let (x, _) = self.graph.edges()[k];
                py += mu[x] * self.probs[k];
            }
            residual = residual.max((py - mu[y]).abs());
        }
        if residual > STATIONARY_TOL {
            return Err(Error::ConvergenceFailure {
                residual,
                tolerance: STATIONARY_TOL,
                iterations: 0,
            });
        }
        Distribution::new(mu)
    }

    /// Edge measure p(x)w(y|x): the joint law of one stationary transition.
    pub fn edge_measure(&self) -> Result<EdgeMeasure> {
        let p = self.stationary_distribution()?;
        let probs = self
            .graph
            .edges()
            .iter()
            .zip(&self.probs)
            .map(|(&(x, _), &w)| p.probs()[x] * w)
            .collect();
        EdgeMeasure::new(self.graph.clone(), probs)
    }

    /// Natural log of each transition probability, in edge order.
    pub fn log_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|&p| p.ln()).collect()
    }

    /// Max-norm distance between kernels on the same graph.
    pub fn max_diff(&self, other: &MarkovKernel) -> Result<f64> {
        if !self.same_graph(other) {
            return Err(Error::GraphMismatch);
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Samples a state trajectory of `len` states; the start state is drawn
    /// from the stationary distribution.
    pub fn sample_trajectory(&self, len: usize, rng: &mut XorShift64Star) -> Result<Vec<usize>> {
        let p = self.stationary_distribution()?;
        let mut draw = |weights: &mut dyn Iterator<Item = (usize, f64)>| -> usize {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut last = 0;
            for (s, w) in weights {
                acc += w;
                last = s;
                if u < acc {
                    return s;
                }
            }
            last
        };
        let mut out = Vec::with_capacity(len);
        let mut x = draw(&mut p.probs().iter().copied().enumerate());
        out.push(x);
        for _ in 1..len {
            let next = draw(
                &mut self
                    .graph
                    .out_edges(x)
                    .iter()
                    .map(|&k| (self.graph.edges()[k].1, self.probs[k])),
            );
            out.push(next);
            x = next;
        }
        Ok(out)
    }
}

/// A probability measure on the edge set. The shift-invariant ones are
/// exactly the edge measures of kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMeasure {
    graph: Arc<KernelGraph>,
    probs: Vec<f64>,
}

impl EdgeMeasure {
    pub fn new(graph: Arc<KernelGraph>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != graph.num_edges() {
            return Err(Error::LengthMismatch {
                expected: graph.num_edges(),
                got: probs.len(),
            });
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(
                "edge measure entries must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "edge measure mass {sum} is not 1"
            )));
        }
        Ok(Self { graph, probs })
    }

    pub fn graph(&self) -> &Arc<KernelGraph> {
        &self.graph
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Max over states of |in-mass - out-mass|.
    pub fn shift_invariance_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.graph.num_states() {
            let inflow: f64 = self.graph.in_edges(x).iter().map(|&k| self.probs[k]).sum();
            let outflow: f64 = self.graph.out_edges(x).iter().map(|&k| self.probs[k]).sum();
            worst = worst.max((inflow - outflow).abs());
        }
        worst
    }

    /// Recovers the kernel with this edge measure: w(y|x) = p2(x,y) / row mass.
    ///
    /// Requires strict positivity on E and shift-invariance within
    /// [`SHIFT_INVARIANCE_TOL`].
    pub fn to_kernel(&self) -> Result<MarkovKernel> {
        let residual = self.shift_invariance_residual();
        if residual > SHIFT_INVARIANCE_TOL {
            return Err(Error::NotShiftInvariant {
                residual,
                tolerance: SHIFT_INVARIANCE_TOL,
            });
        }
        let mut probs = self.probs.clone();
        for x in 0..self.graph.num_states() {
            let row: f64 = self.graph.out_edges(x).iter().map(|&k| probs[k]).sum();
            if row <= 0.0 {
                return Err(Error::ZeroRow(self.graph.state_name(x).to_string()));
            }
            for &k in self.graph.out_edges(x) {
                probs[k] /= row;
            }
        }
        MarkovKernel::new(self.graph.clone(), probs)
    }

    pub fn max_diff(&self, other: &EdgeMeasure) -> Result<f64> {
        if self.graph != other.graph {
            return Err(Error::GraphMismatch);
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
