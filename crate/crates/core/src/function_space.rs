//! The linear space of real functions on the edge set and its orthogonal
//! split into shift-invariant functions and potential differences.
//!
//! A function f is shift-invariant when its in- and out-marginals agree at
//! every state; it is a potential difference when f(x,y) = k(y) - k(x) for
//! some state potential k. The two subspaces are orthogonal complements
//! under the Euclidean inner product on edges.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::KernelGraph;

/// A real-valued function on the edges of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    graph: Arc<KernelGraph>,
    values: Vec<f64>,
}

/// A real-valued function on the states of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePotential {
    graph: Arc<KernelGraph>,
    values: Vec<f64>,
}

/// Result of splitting an edge function into its shift-invariant and
/// potential-difference parts.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub shift_part: EdgeFunction,
    pub anti_part: EdgeFunction,
    /// Potential generating `anti_part`, gauged to 0 at the first state.
    pub potential: StatePotential,
}

impl EdgeFunction {
    pub fn new(graph: Arc<KernelGraph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.num_edges() {
            return Err(Error::LengthMismatch {
                expected: graph.num_edges(),
                got: values.len(),
            });
        }
        Ok(Self { graph, values })
    }

    pub fn zero(graph: Arc<KernelGraph>) -> Self {
        let values = vec![0.0; graph.num_edges()];
        Self { graph, values }
    }

    /// Indicator of the edge (from, to).
    pub fn indicator(graph: Arc<KernelGraph>, from: usize, to: usize) -> Result<Self> {
        let k = graph
            .edge_index(from, to)
            .ok_or_else(|| Error::UnsupportedTransition(
                graph.state_name(from).to_string(),
                graph.state_name(to).to_string(),
            ))?;
        let mut values = vec![0.0; graph.num_edges()];
        values[k] = 1.0;
        Ok(Self { graph, values })
    }

    pub fn graph(&self) -> &Arc<KernelGraph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_graph(&self, other: &EdgeFunction) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || self.graph == other.graph
    }

    /// In- and out-marginals: in(x) = sum over edges into x, out(x) = sum
    /// over edges out of x.
    pub fn marginals(&self) -> (StatePotential, StatePotential) {
        let n = self.graph.num_states();
        let mut inc = vec![0.0; n];
        let mut out = vec![0.0; n];
        for x in 0..n {
            inc[x] = self.graph.in_edges(x).iter().map(|&k| self.values[k]).sum();
            out[x] = self.graph.out_edges(x).iter().map(|&k| self.values[k]).sum();
        }
        (
            StatePotential::new(self.graph.clone(), inc).unwrap(),
            StatePotential::new(self.graph.clone(), out).unwrap(),
        )
    }

    /// Euclidean inner product over the edge set.
    pub fn inner_product(&self, other: &EdgeFunction) -> Result<f64> {
        if !self.same_graph(other) {
            return Err(Error::GraphMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.inner_product(self).unwrap().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Entrywise linear combination a*self + b*other.
    pub fn axpy(&self, a: f64, other: &EdgeFunction, b: f64) -> Result<EdgeFunction> {
        if !self.same_graph(other) {
            return Err(Error::GraphMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(EdgeFunction {
            graph: self.graph.clone(),
            values,
        })
    }

    pub fn scale(&self, a: f64) -> EdgeFunction {
        EdgeFunction {
            graph: self.graph.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn shift(&self, c: f64) -> EdgeFunction {
        EdgeFunction {
            graph: self.graph.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// Splits f into shift-invariant and potential-difference parts by
    /// least squares on the potential-difference basis (first state's
    /// potential pinned to 0).
    pub fn decompose(&self) -> Decomposition {
        let basis = anti_shift_basis(&self.graph);
        let f = DVector::from_column_slice(&self.values);
        let coeff = basis.clone().svd(true, true).solve(&f, 1e-13).unwrap();
        let anti_vec = &basis * &coeff;
        let mut potential = vec![0.0; self.graph.num_states()];
        potential[1..].copy_from_slice(coeff.as_slice());
        let anti_part = EdgeFunction {
            graph: self.graph.clone(),
            values: anti_vec.as_slice().to_vec(),
        };
        let shift_part = self.axpy(1.0, &anti_part, -1.0).unwrap();
        Decomposition {
            shift_part,
            anti_part,
            potential: StatePotential::new(self.graph.clone(), potential).unwrap(),
        }
    }

    /// Component of f orthogonal to potential differences and constants
    /// (the gauge directions that do not move the normalized kernel).
    pub fn residual_mod_gauge(&self) -> EdgeFunction {
        let basis = gauge_basis(&self.graph);
        let f = DVector::from_column_slice(&self.values);
        let coeff = basis.clone().svd(true, true).solve(&f, 1e-13).unwrap();
        let proj = &basis * &coeff;
        EdgeFunction {
            graph: self.graph.clone(),
            values: (f - proj).as_slice().to_vec(),
        }
    }
}

impl StatePotential {
    pub fn new(graph: Arc<KernelGraph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.num_states() {
            return Err(Error::LengthMismatch {
                expected: graph.num_states(),
                got: values.len(),
            });
        }
        Ok(Self { graph, values })
    }

    pub fn zero(graph: Arc<KernelGraph>) -> Self {
        let values = vec![0.0; graph.num_states()];
        Self { graph, values }
    }

    pub fn graph(&self) -> &Arc<KernelGraph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The edge function k(y) - k(x).
    pub fn anti_shift(&self) -> EdgeFunction {
        let values = self
            .graph
            .edges()
            .iter()
            .map(|&(x, y)| self.values[y] - self.values[x])
            .collect();
        EdgeFunction {
            graph: self.graph.clone(),
            values,
        }
    }
}

/// (dim F_S, dim F_A) = (|E| - |X| + 1, |X| - 1).
pub fn subspace_dimensions(graph: &KernelGraph) -> (usize, usize) {
    let e = graph.num_edges();
    let x = graph.num_states();
    (e - x + 1, x - 1)
}

/// |E| x (|X|-1) matrix whose columns are the potential differences of the
/// unit potentials at states 1.., in canonical edge order. Column rank is
/// |X|-1 on a strongly connected graph.
pub fn anti_shift_basis(graph: &KernelGraph) -> DMatrix<f64> {
    let e = graph.num_edges();
    let n = graph.num_states();
    let mut m = DMatrix::zeros(e, n - 1);
    for (k, &(x, y)) in graph.edges().iter().enumerate() {
        if y > 0 {
            m[(k, y - 1)] += 1.0;
        }
        if x > 0 {
            m[(k, x - 1)] -= 1.0;
        }
    }
    m
}

/// |E| x |X| matrix spanning the gauge directions: potential differences
/// plus the constant function.
pub fn gauge_basis(graph: &KernelGraph) -> DMatrix<f64> {
    let e = graph.num_edges();
    let n = graph.num_states();
    let mut m = DMatrix::zeros(e, n);
    m.view_mut((0, 0), (e, n - 1))
        .copy_from(&anti_shift_basis(graph));
    for k in 0..e {
        m[(k, n - 1)] = 1.0;
    }
    m
}

/// Orthonormal basis (as matrix columns) of the orthogonal complement of
/// the gauge directions: shift-invariant functions with no constant
/// component. Dimension |E| - |X|.
pub fn gauge_complement_basis(graph: &KernelGraph) -> DMatrix<f64> {
    let e = graph.num_edges();
    let n = graph.num_states();
    // gauge_basis has full column rank n, so its thin Q spans the gauge
    // subspace and I - QQ^T projects onto the complement
    let q = gauge_basis(graph).qr().q();
    let proj = DMatrix::identity(e, e) - &q * q.transpose();
    let se = proj.symmetric_eigen();
    let keep: Vec<usize> = (0..e).filter(|&i| se.eigenvalues[i] > 0.5).collect();
    debug_assert_eq!(keep.len(), e - n);
    let mut out = DMatrix::zeros(e, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &se.eigenvectors.column(i));
    }
    out
}
