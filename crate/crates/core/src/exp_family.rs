//! Parametric exponential families of Markov kernels: a carrier edge
//! function plus a basis, evaluated through the Perron-Frobenius normalizer.
//!
//! The kernel at theta is delta_map(C + sum_i theta^i F_i); its log
//! partition is the log Perron root and its potential comes from the
//! eigenvector, so a family is fully specified by (C, F_1..F_d).

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::function_space::{gauge_complement_basis, EdgeFunction, StatePotential};
use crate::graph::{KernelGraph, MarkovKernel};
use crate::pf::{self, NormalizationResult};

/// Relative singular-value cutoff for the effective dimension.
pub const RANK_TOL: f64 = 1e-9;

/// Natural (canonical) parameter of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalParam(pub Vec<f64>);

/// Expectation parameter: basis means under the edge measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationParam(pub Vec<f64>);

impl NaturalParam {
    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl ExpectationParam {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for NaturalParam {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<Vec<f64>> for ExpectationParam {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A kernel of the family together with its log partition and potential.
#[derive(Debug, Clone)]
pub struct FamilyPoint {
    pub theta: NaturalParam,
    pub kernel: MarkovKernel,
    pub psi: f64,
    pub kappa: StatePotential,
}

/// An exponential family of Markov kernels on a fixed graph.
#[derive(Debug, Clone)]
pub struct ExponentialFamily {
    graph: Arc<KernelGraph>,
    carrier: EdgeFunction,
    basis: Vec<EdgeFunction>,
}

impl ExponentialFamily {
    pub fn new(carrier: EdgeFunction, basis: Vec<EdgeFunction>) -> Result<Self> {
        for b in &basis {
            if !b.same_graph(&carrier) {
                return Err(Error::GraphMismatch);
            }
        }
        Ok(Self {
            graph: carrier.graph().clone(),
            carrier,
            basis,
        })
    }

    pub fn graph(&self) -> &Arc<KernelGraph> {
        &self.graph
    }

    pub fn carrier(&self) -> &EdgeFunction {
        &self.carrier
    }

    pub fn basis(&self) -> &[EdgeFunction] {
        &self.basis
    }

    /// Number of parameters (not necessarily the effective dimension).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The edge function C + sum_i theta^i F_i.
    pub fn tilt(&self, theta: &NaturalParam) -> Result<EdgeFunction> {
        if theta.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        let mut values = self.carrier.values().to_vec();
        for (t, b) in theta.0.iter().zip(&self.basis) {
            for (v, bv) in values.iter_mut().zip(b.values()) {
                *v += t * bv;
            }
        }
        EdgeFunction::new(self.graph.clone(), values)
    }

    /// Kernel, log partition, and potential at theta.
    pub fn kernel_at(&self, theta: &NaturalParam) -> Result<FamilyPoint> {
        let NormalizationResult {
            kernel,
            log_perron,
            potential,
            ..
        } = pf::delta_map(&self.tilt(theta)?)?;
        Ok(FamilyPoint {
            theta: theta.clone(),
            kernel,
            psi: log_perron,
            kappa: potential,
        })
    }

    /// Log partition psi(theta): log Perron root of the tilted matrix.
    pub fn log_partition(&self, theta: &NaturalParam) -> Result<f64> {
        Ok(pf::delta_map(&self.tilt(theta)?)?.log_perron)
    }

    /// Basis means under an edge measure: eta_i = sum_e measure(e) F_i(e).
    pub fn moments(&self, measure: &crate::graph::EdgeMeasure) -> Result<ExpectationParam> {
        if measure.graph().as_ref() != self.graph.as_ref() {
            return Err(Error::GraphMismatch);
        }
        Ok(ExpectationParam(
            self.basis
                .iter()
                .map(|b| {
                    b.values()
                        .iter()
                        .zip(measure.probs())
                        .map(|(f, p)| f * p)
                        .sum()
                })
                .collect(),
        ))
    }

    /// Rank of the basis modulo the gauge directions: the number of
    /// directions that actually move the kernel.
    pub fn effective_dimension(&self) -> usize {
        if self.basis.is_empty() {
            return 0;
        }
        let e = self.graph.num_edges();
        let mut m = DMatrix::zeros(e, self.basis.len());
        for (j, b) in self.basis.iter().enumerate() {
            let r = b.residual_mod_gauge();
            for (i, &v) in r.values().iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        let sv = m.svd(false, false).singular_values;
        let smax = sv.max();
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
    }

    /// True when the parametrization is minimal (effective dimension = d).
    pub fn is_minimal(&self) -> bool {
        self.effective_dimension() == self.dim()
    }

    pub(crate) fn require_minimal(&self) -> Result<()> {
        let rank = self.effective_dimension();
        if rank != self.dim() {
            return Err(Error::NotMinimal {
                rank,
                dim: self.dim(),
            });
        }
        Ok(())
    }

    /// The family covering every kernel on the graph: zero carrier and an
    /// orthonormal basis of the complement of the gauge directions, giving
    /// dimension |E| - |X|.
    pub fn full(graph: Arc<KernelGraph>) -> Self {
        let q = gauge_complement_basis(&graph);
        let basis = (0..q.ncols())
            .map(|j| {
                EdgeFunction::new(graph.clone(), q.column(j).as_slice().to_vec()).unwrap()
            })
            .collect();
        Self {
            graph: graph.clone(),
            carrier: EdgeFunction::zero(graph),
            basis,
        }
    }

    /// The 1-parameter family through two kernels: carrier log w0, basis
    /// log w1 - log w0, so t=0 and t=1 reproduce the endpoints.
    pub fn through(w0: &MarkovKernel, w1: &MarkovKernel) -> Result<Self> {
        if !w0.same_graph(w1) {
            return Err(Error::GraphMismatch);
        }
        let graph = w0.graph().clone();
        let l0 = EdgeFunction::new(graph.clone(), w0.log_probs())?;
        let l1 = EdgeFunction::new(graph.clone(), w1.log_probs())?;
        if pf::quotient_equal(&l0, &l1)? {
            return Err(Error::IdenticalKernels);
        }
        let dir = l1.axpy(1.0, &l0, -1.0)?;
        Self::new(l0, vec![dir])
    }
}
