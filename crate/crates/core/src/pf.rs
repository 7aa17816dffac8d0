//! Perron-Frobenius normalization: turning a positive edge function into a
//! Markov kernel via its Perron root and right eigenvector.
//!
//! `gamma_normalize` maps a positive f to the unique kernel w with
//! w(y|x) = f(x,y) gamma(y) / (Z gamma(x)); `delta_map` composes with exp so
//! any real edge function induces a kernel, with log w = f + k(y) - k(x) - psi
//! up to the gauge.

use crate::error::{Error, Result};
use crate::function_space::{EdgeFunction, StatePotential};
use crate::graph::MarkovKernel;

/// Successive-iterate tolerance of the power iteration.
pub const POWER_TOL: f64 = 1e-14;
/// Residual bound accepted for the eigenpair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-12;
/// Default iteration cap; override with MARKOV_INFOGEO_MAX_ITERS.
pub const DEFAULT_MAX_ITERS: usize = 100_000;
/// Residual accepted by `quotient_equal`.
pub const QUOTIENT_TOL: f64 = 1e-10;

fn max_iters() -> usize {
    std::env::var("MARKOV_INFOGEO_MAX_ITERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_ITERS)
}

/// Iteration count and final residual of an eigensolve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Output of a normalization: the kernel, log of the Perron root, and the
/// log eigenvector as a state potential gauged to 0 at the first state.
#[derive(Debug, Clone)]
pub struct NormalizationResult {
    pub kernel: MarkovKernel,
    pub log_perron: f64,
    pub potential: StatePotential,
    pub stats: SolveStats,
}

/// Normalizes a strictly positive edge function into a Markov kernel.
///
/// Z is the Perron root of the matrix carrying f on E (zero elsewhere) and
/// gamma its right eigenvector. The iteration runs on A + cI with c the
/// largest row sum, which converges for periodic support patterns too.
pub fn gamma_normalize(f: &EdgeFunction) -> Result<NormalizationResult> {
    for (k, &v) in f.values().iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            let (a, b) = f.graph().edges()[k];
            return Err(Error::NotPositive {
                from: f.graph().state_name(a).to_string(),
                to: f.graph().state_name(b).to_string(),
                value: v,
            });
        }
    }
    let graph = f.graph();
    let n = graph.num_states();
    let edges = graph.edges();
    let vals = f.values();

    let mut row_sum = vec![0.0f64; n];
    for (k, &(x, _)) in edges.iter().enumerate() {
        row_sum[x] += vals[k];
    }
    let shift = row_sum.iter().fold(0.0f64, |m, &s| m.max(s));

    let cap = max_iters();
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0f64; n];
    let mut lambda: f64;
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (x, slot) in next.iter_mut().enumerate() {
            *slot = shift * v[x];
        }
        for (k, &(x, y)) in edges.iter().enumerate() {
            next[x] += vals[k] * v[y];
        }
        lambda = next.iter().sum();
        let mut diff = 0.0f64;
        for (x, slot) in next.iter_mut().enumerate() {
            *slot /= lambda;
            diff = diff.max((*slot - v[x]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        if diff <= POWER_TOL || iterations >= cap {
            break;
        }
    }

    // residual of A v = Z v relative to the shifted eigenvalue
    let mut residual = 0.0f64;
    for x in 0..n {
        let mut av = shift * v[x];
        for &k in graph.out_edges(x) {
            av += vals[k] * v[edges[k].1];
        }
        residual = residual.max((av - lambda * v[x]).abs());
    }
    residual /= lambda;
    if residual > EIGEN_RESIDUAL_TOL {
        return Err(Error::ConvergenceFailure {
            residual,
            tolerance: EIGEN_RESIDUAL_TOL,
            iterations,
        });
    }

    let z = lambda - shift;
    let gamma0 = v[0];
    let mut probs = vec![0.0f64; edges.len()];
    for (k, &(x, y)) in edges.iter().enumerate() {
        probs[k] = vals[k] * v[y] / (z * v[x]);
    }
    for x in 0..n {
        let s: f64 = graph.out_edges(x).iter().map(|&k| probs[k]).sum();
        for &k in graph.out_edges(x) {
            probs[k] /= s;
        }
    }
    let kernel = MarkovKernel::new(graph.clone(), probs)?;
    let potential = StatePotential::new(
        graph.clone(),
        v.iter().map(|&g| (g / gamma0).ln()).collect(),
    )?;
    Ok(NormalizationResult {
        kernel,
        log_perron: z.ln(),
        potential,
        stats: SolveStats {
            iterations,
            residual,
        },
    })
}

/// Normalizes exp(f) for an arbitrary real edge function.
///
/// The largest value of f is subtracted before exponentiation and added
/// back to the log Perron root, so overflow cannot occur; if the spread of
/// f still underflows exp to zero the input must be rescaled.
pub fn delta_map(f: &EdgeFunction) -> Result<NormalizationResult> {
    let m = f.values().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !m.is_finite() {
        return Err(Error::Overflow(m));
    }
    let exp_vals: Vec<f64> = f.values().iter().map(|&v| (v - m).exp()).collect();
    if exp_vals.iter().any(|&v| v == 0.0) {
        let spread = m - f.values().iter().fold(f64::INFINITY, |a, &b| a.min(b));
        return Err(Error::Overflow(spread));
    }
    let g = EdgeFunction::new(f.graph().clone(), exp_vals)?;
    let mut result = gamma_normalize(&g)?;
    result.log_perron += m;
    Ok(result)
}

/// True iff f1 and f2 differ only by a potential difference plus a
/// constant, i.e. they induce the same kernel under `delta_map`.
pub fn quotient_equal(f1: &EdgeFunction, f2: &EdgeFunction) -> Result<bool> {
    if !f1.same_graph(f2) {
        return Err(Error::GraphMismatch);
    }
    let diff = f1.axpy(1.0, f2, -1.0)?;
    Ok(diff.residual_mod_gauge().max_abs() <= QUOTIENT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::KernelGraph;
    use crate::rng::XorShift64Star;
    use std::sync::Arc;

    fn k2() -> Arc<KernelGraph> {
        Arc::new(KernelGraph::complete(2).unwrap())
    }

    fn k2_kernel(a: f64, b: f64) -> MarkovKernel {
        MarkovKernel::new(k2(), vec![1.0 - a, a, b, 1.0 - b]).unwrap()
    }

    #[test]
    fn gamma_fixes_kernels() {
        let mut rng = XorShift64Star::new(2);
        for n in 2..=6 {
            let g = Arc::new(KernelGraph::complete(n).unwrap());
            let w = MarkovKernel::random(g.clone(), &mut rng);
            let f = EdgeFunction::new(g, w.probs().to_vec()).unwrap();
            let r = gamma_normalize(&f).unwrap();
            assert!(r.kernel.max_diff(&w).unwrap() <= 1e-12);
            assert!(r.log_perron.abs() <= 1e-12);
            for &k in r.potential.values() {
                assert!(k.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn all_ones_gives_uniform() {
        let f = EdgeFunction::new(k2(), vec![1.0; 4]).unwrap();
        let r = gamma_normalize(&f).unwrap();
        for &p in r.kernel.probs() {
            assert!((p - 0.5).abs() <= 1e-14);
        }
        assert!((r.log_perron - 2.0f64.ln()).abs() <= 1e-14);
    }

    #[test]
    fn scaling_shifts_log_perron_only() {
        let mut rng = XorShift64Star::new(8);
        let g = Arc::new(KernelGraph::complete(3).unwrap());
        let w = MarkovKernel::random(g.clone(), &mut rng);
        let f = EdgeFunction::new(g, w.probs().to_vec()).unwrap();
        let c = 3.7;
        let r = gamma_normalize(&f.scale(c)).unwrap();
        assert!(r.kernel.max_diff(&w).unwrap() <= 1e-12);
        assert!((r.log_perron - c.ln()).abs() <= 1e-12);
    }

    #[test]
    fn two_state_closed_form() {
        // f = [[1, e], [1, 1]]: Z = 1 + sqrt(e), gamma = (1, 1/sqrt(e)),
        // w(1|0) = w(0|1) = sqrt(e) / (1 + sqrt(e))
        let e = std::f64::consts::E;
        let f = EdgeFunction::new(k2(), vec![1.0, e, 1.0, 1.0]).unwrap();
        let r = gamma_normalize(&f).unwrap();
        let sqrt_e = e.sqrt();
        assert!((r.log_perron - (1.0 + sqrt_e).ln()).abs() < 1e-13);
        assert!((r.potential.values()[1] - (-0.5)).abs() < 1e-12);
        let want = sqrt_e / (1.0 + sqrt_e);
        assert!((r.kernel.prob(0, 1).unwrap() - want).abs() < 1e-13);
        assert!((r.kernel.prob(1, 0).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn reconstruction_identity() {
        let mut rng = XorShift64Star::new(21);
        for n in 2..=6 {
            let g = Arc::new(KernelGraph::complete(n).unwrap());
            let f = EdgeFunction::new(
                g.clone(),
                (0..g.num_edges()).map(|_| rng.uniform_in(0.2, 2.0)).collect(),
            )
            .unwrap();
            let r = gamma_normalize(&f).unwrap();
            let z = r.log_perron.exp();
            for (k, &(x, y)) in g.edges().iter().enumerate() {
                let gx = r.potential.values()[x].exp();
                let gy = r.potential.values()[y].exp();
                let back = r.kernel.probs()[k] * z * gx / gy;
                assert!((back - f.values()[k]).abs() <= 1e-10 * f.values()[k]);
            }
        }
    }

    #[test]
    fn delta_of_zero_is_uniform() {
        let r = delta_map(&EdgeFunction::zero(k2())).unwrap();
        for &p in r.kernel.probs() {
            assert!((p - 0.5).abs() <= 1e-14);
        }
        assert!((r.log_perron - 2.0f64.ln()).abs() <= 1e-14);
    }

    #[test]
    fn delta_of_log_kernel_is_identity() {
        let w = k2_kernel(0.3, 0.6);
        let f = EdgeFunction::new(k2(), w.log_probs()).unwrap();
        let r = delta_map(&f).unwrap();
        assert!(r.kernel.max_diff(&w).unwrap() <= 1e-12);
        assert!(r.log_perron.abs() <= 1e-12);
    }

    #[test]
    fn delta_gauge_equivariance() {
        let mut rng = XorShift64Star::new(13);
        let g = Arc::new(KernelGraph::complete(3).unwrap());
        let f = EdgeFunction::new(
            g.clone(),
            (0..9).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let kappa = StatePotential::new(
            g.clone(),
            (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let c = 0.9;
        let shifted = f.axpy(1.0, &kappa.anti_shift(), 1.0).unwrap().shift(c);
        let r0 = delta_map(&f).unwrap();
        let r1 = delta_map(&shifted).unwrap();
        assert!(r0.kernel.max_diff(&r1.kernel).unwrap() <= 1e-11);
        assert!((r1.log_perron - r0.log_perron - c).abs() <= 1e-11);
    }

    #[test]
    fn delta_log_kernel_stays_in_gauge_class() {
        let mut rng = XorShift64Star::new(29);
        let g = Arc::new(KernelGraph::complete(4).unwrap());
        let f = EdgeFunction::new(
            g.clone(),
            (0..16).map(|_| rng.uniform_in(-2.0, 2.0)).collect(),
        )
        .unwrap();
        let r = delta_map(&f).unwrap();
        let logw = EdgeFunction::new(g, r.kernel.log_probs()).unwrap();
        let diff = logw.axpy(1.0, &f, -1.0).unwrap();
        assert!(diff.residual_mod_gauge().max_abs() <= 1e-10);
    }

    #[test]
    fn quotient_equal_cases() {
        let mut rng = XorShift64Star::new(4);
        let f = EdgeFunction::new(
            k2(),
            (0..4).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        )
        .unwrap();
        assert!(quotient_equal(&f, &f.shift(3.7)).unwrap());
        let bumped = f
            .axpy(1.0, &EdgeFunction::indicator(k2(), 0, 1).unwrap(), 1.0)
            .unwrap();
        assert!(!quotient_equal(&f, &bumped).unwrap());
        let w1 = k2_kernel(0.25, 0.5);
        let w2 = k2_kernel(0.4, 0.4);
        let l1 = EdgeFunction::new(k2(), w1.log_probs()).unwrap();
        let l2 = EdgeFunction::new(k2(), w2.log_probs()).unwrap();
        assert!(!quotient_equal(&l1, &l2).unwrap());
    }

    #[test]
    fn idempotence_on_random_positive_functions() {
        let mut rng = XorShift64Star::new(77);
        for n in 2..=8 {
            let g = Arc::new(KernelGraph::complete(n).unwrap());
            let f = EdgeFunction::new(
                g.clone(),
                (0..g.num_edges()).map(|_| rng.uniform_in(0.1, 3.0)).collect(),
            )
            .unwrap();
            let w = gamma_normalize(&f).unwrap().kernel;
            let again = gamma_normalize(&EdgeFunction::new(g, w.probs().to_vec()).unwrap())
                .unwrap()
                .kernel;
            assert!(w.max_diff(&again).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_input() {
        let f = EdgeFunction::new(k2(), vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            gamma_normalize(&f).unwrap_err(),
            Error::NotPositive { .. }
        ));
    }

    #[test]
    fn periodic_support_converges() {
        // pure 3-cycle: the unshifted iteration would oscillate
        let g = Arc::new(
            KernelGraph::from_indexed(
                (0..3).map(|i| i.to_string()).collect(),
                vec![(0, 1), (1, 2), (2, 0)],
            )
            .unwrap(),
        );
        let f = EdgeFunction::new(g, vec![2.0, 0.5, 1.0]).unwrap();
        let r = gamma_normalize(&f).unwrap();
        // deterministic kernel: each row has a single edge
        for &p in r.kernel.probs() {
            assert!((p - 1.0).abs() <= 1e-12);
        }
        // Z = (2 * 0.5 * 1)^(1/3) = 1
        assert!((r.log_perron - 0.0).abs() <= 1e-12);
    }
}
