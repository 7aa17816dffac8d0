//! Geodesics, the canonical divergence, finite-horizon joint KL, and
//! maximum likelihood by moment matching.
//!
//! The e-geodesic through two kernels normalizes the entrywise power mix
//! w1^t w0^(1-t); the m-geodesic mixes edge measures linearly. The
//! canonical divergence is evaluated in its KL-rate form and, inside a
//! family, cross-checked against the Bregman form in dual coordinates.

use crate::dual_geometry::{self, theta_from_eta, FisherMatrix, NewtonSolve};
use crate::error::{Error, Result};
use crate::exp_family::{ExponentialFamily, NaturalParam};
use crate::function_space::EdgeFunction;
use crate::graph::{Distribution, EdgeMeasure, MarkovKernel};
use crate::numdiff;
use crate::pf;

/// Which geodesic family to follow between two kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicKind {
    Exponential,
    Mixture,
}

/// How a divergence value was obtained and how well the routes agree.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    /// KL-rate value, in nats.
    pub value: f64,
    /// Bregman-form value in family coordinates, when a family was given.
    pub bregman: Option<f64>,
    /// |value - bregman| when both routes ran.
    pub residual: Option<f64>,
}

/// Point of the e-geodesic through w0 and w1: the normalized entrywise
/// geometric mix. Defined for every real t; t=0 and t=1 reproduce the
/// endpoints.
pub fn e_geodesic_point(w0: &MarkovKernel, w1: &MarkovKernel, t: f64) -> Result<MarkovKernel> {
    if !w0.same_graph(w1) {
        return Err(Error::GraphMismatch);
    }
    let values = w0
        .probs()
        .iter()
        .zip(w1.probs())
        .map(|(&a, &b)| b.powf(t) * a.powf(1.0 - t))
        .collect();
    let f = EdgeFunction::new(w0.graph().clone(), values)?;
    Ok(pf::gamma_normalize(&f)?.kernel)
}

/// Point of the m-geodesic through w0 and w1: the kernel of the linear
/// edge-measure mix. Positivity of the mix is required, which holds for
/// all t in [0, 1] and may fail outside.
pub fn m_geodesic_point(w0: &MarkovKernel, w1: &MarkovKernel, t: f64) -> Result<MarkovKernel> {
    if !w0.same_graph(w1) {
        return Err(Error::GraphMismatch);
    }
    let p0 = w0.edge_measure()?;
    let p1 = w1.edge_measure()?;
    let mixed: Vec<f64> = p0
        .probs()
        .iter()
        .zip(p1.probs())
        .map(|(&a, &b)| (1.0 - t) * a + t * b)
        .collect();
    if let Some(k) = mixed.iter().position(|&v| v <= 0.0) {
        let (x, y) = w0.graph().edges()[k];
        return Err(Error::NotPositive {
            from: w0.graph().state_name(x).to_string(),
            to: w0.graph().state_name(y).to_string(),
            value: mixed[k],
        });
    }
    EdgeMeasure::new(w0.graph().clone(), mixed)?.to_kernel()
}

/// Edge measure of the m-geodesic point, without renormalizing to a kernel.
pub fn m_geodesic_measure(w0: &MarkovKernel, w1: &MarkovKernel, t: f64) -> Result<EdgeMeasure> {
    if !w0.same_graph(w1) {
        return Err(Error::GraphMismatch);
    }
    let p0 = w0.edge_measure()?;
    let p1 = w1.edge_measure()?;
    EdgeMeasure::new(
        w0.graph().clone(),
        p0.probs()
            .iter()
            .zip(p1.probs())
            .map(|(&a, &b)| (1.0 - t) * a + t * b)
            .collect(),
    )
}

/// KL divergence rate between two kernels on the same graph, in nats:
/// the edge-measure mean of log(w1/w2) under the first kernel.
pub fn divergence(w1: &MarkovKernel, w2: &MarkovKernel) -> Result<DivergenceReport> {
    if !w1.same_graph(w2) {
        return Err(Error::GraphMismatch);
    }
    let p2 = w1.edge_measure()?;
    let value = p2
        .probs()
        .iter()
        .zip(w1.probs().iter().zip(w2.probs()))
        .map(|(&p, (&a, &b))| p * (a / b).ln())
        .sum();
    Ok(DivergenceReport {
        value,
        bregman: None,
        residual: None,
    })
}

/// Divergence with the Bregman cross-check phi(w1) + psi(w2) - eta(w1).theta(w2)
/// evaluated in the coordinates of `family`, which must contain both kernels.
pub fn divergence_in_family(
    w1: &MarkovKernel,
    w2: &MarkovKernel,
    family: &ExponentialFamily,
) -> Result<DivergenceReport> {
    let mut report = divergence(w1, w2)?;
    let (theta1, eta1) = dual_geometry::coordinates_of(family, w1)?;
    let (theta2, _) = dual_geometry::coordinates_of(family, w2)?;
    let psi2 = family.log_partition(&theta2)?;
    let phi1 = dual_geometry::dual_potential(family, &theta1)?;
    let cross: f64 = eta1
        .as_slice()
        .iter()
        .zip(theta2.as_slice())
        .map(|(e, t)| e * t)
        .sum();
    let bregman = phi1 + psi2 - cross;
    report.residual = Some((report.value - bregman).abs());
    report.bregman = Some(bregman);
    Ok(report)
}

/// Exact KL divergence between the two n-step joint laws started from q1
/// and q2, by the chain rule: the initial KL plus, per step, the marginal-
/// weighted KL of the transition rows. O(n |X|^2).
pub fn kl_joint(
    w1: &MarkovKernel,
    w2: &MarkovKernel,
    q1: &Distribution,
    q2: &Distribution,
    n: usize,
) -> Result<f64> {
    if !w1.same_graph(w2) {
        return Err(Error::GraphMismatch);
    }
    let graph = w1.graph();
    let nstates = graph.num_states();
    if q1.len() != nstates || q2.len() != nstates {
        return Err(Error::LengthMismatch {
            expected: nstates,
            got: q1.len().max(q2.len()),
        });
    }
    if n == 0 {
        return Err(Error::InvalidDistribution(
            "joint horizon n must be at least 1".into(),
        ));
    }
    let mut total = q1.kl(q2)?;
    if n == 1 {
        return Ok(total);
    }
    // per-state KL of the transition rows
    let row_kl: Vec<f64> = (0..nstates)
        .map(|x| {
            graph
                .out_edges(x)
                .iter()
                .map(|&k| w1.probs()[k] * (w1.probs()[k] / w2.probs()[k]).ln())
                .sum()
        })
        .collect();
    let mut marginal = q1.probs().to_vec();
    let mut next = vec![0.0f64; nstates];
    for _ in 1..n {
        total += marginal
            .iter()
            .zip(&row_kl)
            .map(|(m, k)| m * k)
            .sum::<f64>();
        next.iter_mut().for_each(|v| *v = 0.0);
        for (k, &(x, y)) in graph.edges().iter().enumerate() {
            next[y] += marginal[x] * w1.probs()[k];
        }
        std::mem::swap(&mut marginal, &mut next);
    }
    Ok(total)
}

/// Fisher matrix of the n-step joint family at theta, as the Hessian in
/// the second argument of the joint KL, with the initial law frozen at the
/// stationary distribution of the centre kernel.
pub fn fisher_joint(
    family: &ExponentialFamily,
    theta: &NaturalParam,
    n: usize,
) -> Result<FisherMatrix> {
    let centre = family.kernel_at(theta)?.kernel;
    let q = centre.stationary_distribution()?;
    let h = numdiff::hessian_richardson(
        |t| {
            let other = family.kernel_at(&NaturalParam(t.to_vec()))?.kernel;
            kl_joint(&centre, &other, &q, &q, n)
        },
        theta.as_slice(),
        1e-3,
    )?;
    Ok(FisherMatrix(h))
}

/// Left side minus right side of the generalized Pythagorean relation at
/// w2: [D(w1|w2) + D(w2|w3) - D(w1|w3)] - (eta(w1)-eta(w2)).(theta(w3)-theta(w2)).
///
/// All three kernels must lie in the supplied minimal family.
pub fn pythagorean_gap(
    w1: &MarkovKernel,
    w2: &MarkovKernel,
    w3: &MarkovKernel,
    family: &ExponentialFamily,
) -> Result<f64> {
    let (_, eta1) = dual_geometry::coordinates_of(family, w1)?;
    let (theta2, eta2) = dual_geometry::coordinates_of(family, w2)?;
    let (theta3, _) = dual_geometry::coordinates_of(family, w3)?;
    let lhs = divergence(w1, w2)?.value + divergence(w2, w3)?.value - divergence(w1, w3)?.value;
    let rhs: f64 = eta1
        .as_slice()
        .iter()
        .zip(eta2.as_slice())
        .zip(theta3.as_slice().iter().zip(theta2.as_slice()))
        .map(|((e1, e2), (t3, t2))| (e1 - e2) * (t3 - t2))
        .sum();
    Ok(lhs - rhs)
}

/// Maximum likelihood fit of a family to a strictly positive shift-invariant
/// edge measure: matches basis moments, which is the stationary point of
/// the divergence from the target's kernel to the family.
pub fn fit_mle(family: &ExponentialFamily, target: &EdgeMeasure) -> Result<NewtonSolve> {
    if target.graph().as_ref() != family.graph().as_ref() {
        return Err(Error::GraphMismatch);
    }
    if let Some(k) = target.probs().iter().position(|&v| v <= 0.0) {
        let (x, y) = target.graph().edges()[k];
        return Err(Error::NotPositive {
            from: target.graph().state_name(x).to_string(),
            to: target.graph().state_name(y).to_string(),
            value: target.probs()[k],
        });
    }
    let residual = target.shift_invariance_residual();
    if residual > 1e-8 {
        return Err(Error::NotShiftInvariant {
            residual,
            tolerance: 1e-8,
        });
    }
    let eta = family.moments(target)?;
    theta_from_eta(family, &eta, None)
}

/// Transition counts of a trajectory, normalized and projected to the
/// nearest shift-invariant edge measure.
///
/// Raw counts from a finite path miss shift-invariance by an O(1/len)
/// endpoint defect; the counts are projected onto the shift-invariant
/// subspace, negatives clipped, and the result renormalized.
pub fn empirical_edge_measure(
    graph: &std::sync::Arc<crate::graph::KernelGraph>,
    trajectory: &[usize],
) -> Result<EdgeMeasure> {
    if trajectory.len() < 2 {
        return Err(Error::InvalidDistribution(
            "trajectory needs at least two states".into(),
        ));
    }
    let mut counts = vec![0.0f64; graph.num_edges()];
    for pair in trajectory.windows(2) {
        let k = graph.edge_index(pair[0], pair[1]).ok_or_else(|| {
            Error::UnsupportedTransition(
                graph
                    .states()
                    .get(pair[0])
                    .cloned()
                    .unwrap_or_else(|| format!("#{}", pair[0])),
                graph
                    .states()
                    .get(pair[1])
                    .cloned()
                    .unwrap_or_else(|| format!("#{}", pair[1])),
            )
        })?;
        counts[k] += 1.0;
    }
    let total = (trajectory.len() - 1) as f64;
    for c in &mut counts {
        *c /= total;
    }
    let raw = EdgeFunction::new(graph.clone(), counts)?;
    let mut projected = raw.decompose().shift_part.values().to_vec();
    for v in &mut projected {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let mass: f64 = projected.iter().sum();
    for v in &mut projected {
        *v /= mass;
    }
    EdgeMeasure::new(graph.clone(), projected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_geometry::expectation_param;
    use crate::exp_family::ExpectationParam;
    use crate::graph::KernelGraph;
    use crate::rng::XorShift64Star;
    use std::sync::Arc;

    fn k2() -> Arc<KernelGraph> {
        Arc::new(KernelGraph::complete(2).unwrap())
    }

    fn k2_kernel(a: f64, b: f64) -> MarkovKernel {
        MarkovKernel::new(k2(), vec![1.0 - a, a, b, 1.0 - b]).unwrap()
    }

    fn k2_pair() -> (MarkovKernel, MarkovKernel) {
        (MarkovKernel::uniform(k2()), k2_kernel(1.0 / 3.0, 1.0 / 3.0))
    }

    #[test]
    fn geodesics_hit_endpoints() {
        let (w0, w1) = k2_pair();
        assert!(e_geodesic_point(&w0, &w1, 0.0).unwrap().max_diff(&w0).unwrap() <= 1e-12);
        assert!(e_geodesic_point(&w0, &w1, 1.0).unwrap().max_diff(&w1).unwrap() <= 1e-12);
        assert!(m_geodesic_point(&w0, &w1, 0.0).unwrap().max_diff(&w0).unwrap() <= 1e-12);
        assert!(m_geodesic_point(&w0, &w1, 1.0).unwrap().max_diff(&w1).unwrap() <= 1e-12);
    }

    #[test]
    fn e_midpoint_closed_form() {
        let (w0, w1) = k2_pair();
        let mid = e_geodesic_point(&w0, &w1, 0.5).unwrap();
        let want = 1.0 / (1.0 + 2.0f64.sqrt());
        assert!((mid.prob(0, 1).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn m_midpoint_closed_form() {
        let (w0, w1) = k2_pair();
        let mid = m_geodesic_point(&w0, &w1, 0.5).unwrap();
        assert!((mid.prob(0, 1).unwrap() - 5.0 / 12.0).abs() < 1e-13);
    }

    #[test]
    fn e_geodesic_matches_family_through() {
        let mut rng = XorShift64Star::new(3);
        let g = Arc::new(KernelGraph::complete(3).unwrap());
        let w0 = MarkovKernel::random(g.clone(), &mut rng);
        let w1 = MarkovKernel::random(g, &mut rng);
        let fam = ExponentialFamily::through(&w0, &w1).unwrap();
        for t in [-0.5, 0.3, 0.8, 1.7] {
            let a = e_geodesic_point(&w0, &w1, t).unwrap();
            let b = fam.kernel_at(&NaturalParam(vec![t])).unwrap().kernel;
            assert!(a.max_diff(&b).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn m_geodesic_measure_is_the_mix() {
        let (w0, w1) = k2_pair();
        let t = 0.3;
        let mid = m_geodesic_point(&w0, &w1, t).unwrap();
        let direct = mid.edge_measure().unwrap();
        let mixed = m_geodesic_measure(&w0, &w1, t).unwrap();
        assert!(direct.max_diff(&mixed).unwrap() <= 1e-12);
    }

    #[test]
    fn m_geodesic_rejects_nonpositive_extrapolation() {
        let (w0, w1) = k2_pair();
        let err = m_geodesic_point(&w0, &w1, 8.0).unwrap_err();
        assert!(matches!(err, Error::NotPositive { .. }));
    }

    #[test]
    fn divergence_zero_iff_equal() {
        let (w0, w1) = k2_pair();
        assert!(divergence(&w0, &w0).unwrap().value.abs() <= 1e-15);
        assert!(divergence(&w0, &w1).unwrap().value > 1e-3);
    }

    #[test]
    fn divergence_closed_form() {
        let (w0, w1) = k2_pair();
        let want = 0.5 * (9.0f64 / 8.0).ln();
        assert!((divergence(&w0, &w1).unwrap().value - want).abs() < 1e-15);
    }

    #[test]
    fn divergence_is_asymmetric() {
        let w1 = k2_kernel(0.2, 0.5);
        let w2 = k2_kernel(0.6, 0.3);
        let a = divergence(&w1, &w2).unwrap().value;
        let b = divergence(&w2, &w1).unwrap().value;
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn bregman_route_agrees() {
        let fam = ExponentialFamily::full(k2());
        let (w0, w1) = k2_pair();
        let r = divergence_in_family(&w0, &w1, &fam).unwrap();
        assert!(r.residual.unwrap() <= 1e-9);
    }

    #[test]
    fn kl_joint_horizon_one_is_initial_kl() {
        let (w0, w1) = k2_pair();
        let q1 = Distribution::new(vec![0.7, 0.3]).unwrap();
        let q2 = Distribution::new(vec![0.4, 0.6]).unwrap();
        let got = kl_joint(&w0, &w1, &q1, &q2, 1).unwrap();
        assert!((got - q1.kl(&q2).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn kl_joint_stationary_identity() {
        let (w0, w1) = k2_pair();
        let p1 = w0.stationary_distribution().unwrap();
        let p2 = w1.stationary_distribution().unwrap();
        let d = divergence(&w0, &w1).unwrap().value;
        for n in [2usize, 17, 64, 256] {
            let lhs = kl_joint(&w0, &w1, &p1, &p2, n).unwrap();
            let rhs = p1.kl(&p2).unwrap() + (n as f64 - 1.0) * d;
            assert!((lhs - rhs).abs() <= 1e-12, "n={n}: {}", (lhs - rhs).abs());
        }
    }

    #[test]
    fn kl_joint_rate_error_halves() {
        let (w0, w1) = k2_pair();
        let q1 = Distribution::new(vec![0.9, 0.1]).unwrap();
        let q2 = Distribution::new(vec![0.2, 0.8]).unwrap();
        let d = divergence(&w0, &w1).unwrap().value;
        let dev = |n: usize| {
            (kl_joint(&w0, &w1, &q1, &q2, n).unwrap() / n as f64 - d).abs()
        };
        let (d128, d256) = (dev(128), dev(256));
        assert!(d256 <= 0.55 * d128, "d128={d128} d256={d256}");
    }

    #[test]
    fn fisher_joint_rate_converges() {
        let fam = crate::exp_family::ExponentialFamily::new(
            EdgeFunction::zero(k2()),
            vec![EdgeFunction::indicator(k2(), 0, 1).unwrap()],
        )
        .unwrap();
        let theta = NaturalParam(vec![0.7]);
        let g = dual_geometry::fisher_direct(&fam, &theta).unwrap();
        let dev = |n: usize| {
            let gn = fisher_joint(&fam, &theta, n).unwrap();
            (gn.0 / (n as f64) - &g.0).abs().max()
        };
        let (d128, d256) = (dev(128), dev(256));
        assert!(d256 <= 0.55 * d128, "d128={d128} d256={d256}");
    }

    #[test]
    fn pythagorean_gap_vanishes_in_family() {
        let fam = ExponentialFamily::full(k2());
        let mut rng = XorShift64Star::new(5);
        for _ in 0..5 {
            let w1 = MarkovKernel::random(k2(), &mut rng);
            let w2 = MarkovKernel::random(k2(), &mut rng);
            let w3 = MarkovKernel::random(k2(), &mut rng);
            let gap = pythagorean_gap(&w1, &w2, &w3, &fam).unwrap();
            assert!(gap.abs() <= 1e-8, "gap={gap}");
        }
    }

    #[test]
    fn pythagorean_gap_trivial_when_endpoints_meet() {
        let fam = ExponentialFamily::full(k2());
        let (w0, w1) = k2_pair();
        let gap = pythagorean_gap(&w0, &w0, &w1, &fam).unwrap();
        assert!(gap.abs() <= 1e-9);
    }

    #[test]
    fn mle_recovers_generating_parameter() {
        let mut rng = XorShift64Star::new(7);
        let g = Arc::new(KernelGraph::complete(3).unwrap());
        let fam = ExponentialFamily::full(g);
        let theta = NaturalParam((0..fam.dim()).map(|_| rng.uniform_in(-0.8, 0.8)).collect());
        let target = fam.kernel_at(&theta).unwrap().kernel.edge_measure().unwrap();
        let fit = fit_mle(&fam, &target).unwrap();
        for (a, b) in fit.theta.0.iter().zip(&theta.0) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn mle_is_stationary_point_of_divergence() {
        let mut rng = XorShift64Star::new(9);
        let g = Arc::new(KernelGraph::complete(3).unwrap());
        let fam = ExponentialFamily::full(g.clone());
        let w_star = MarkovKernel::random(g, &mut rng);
        let target = w_star.edge_measure().unwrap();
        let fit = fit_mle(&fam, &target).unwrap();
        let grad = numdiff::gradient(
            |t| {
                Ok(divergence(&w_star, &fam.kernel_at(&NaturalParam(t.to_vec()))?.kernel)?.value)
            },
            fit.theta.as_slice(),
            numdiff::GRAD_STEP,
        )
        .unwrap();
        for g in grad {
            assert!(g.abs() <= 1e-6, "gradient {g}");
        }
    }

    #[test]
    fn mle_beats_random_probes() {
        let mut rng = XorShift64Star::new(11);
        let fam = ExponentialFamily::full(k2());
        let w_star = MarkovKernel::random(k2(), &mut rng);
        // perturbed, re-projected target
        let p2 = w_star.edge_measure().unwrap();
        let noisy: Vec<f64> = p2
            .probs()
            .iter()
            .map(|&v| v + rng.uniform_in(-1e-3, 1e-3))
            .collect();
        let raw = EdgeFunction::new(k2(), noisy).unwrap();
        let mut proj = raw.decompose().shift_part.values().to_vec();
        for v in &mut proj {
            *v = v.max(0.0);
        }
        let mass: f64 = proj.iter().sum();
        for v in &mut proj {
            *v /= mass;
        }
        let target = EdgeMeasure::new(k2(), proj).unwrap();
        let w_target = target.to_kernel().unwrap();
        let fit = fit_mle(&fam, &target).unwrap();
        let best = divergence(&w_target, &fam.kernel_at(&fit.theta).unwrap().kernel)
            .unwrap()
            .value;
        for _ in 0..100 {
            let probe = NaturalParam(
                (0..fam.dim()).map(|_| rng.uniform_in(-1.5, 1.5)).collect(),
            );
            let d = divergence(&w_target, &fam.kernel_at(&probe).unwrap().kernel)
                .unwrap()
                .value;
            assert!(best <= d + 1e-12);
        }
    }

    #[test]
    fn mle_rejects_bad_targets() {
        let fam = ExponentialFamily::full(k2());
        let zeroed = EdgeMeasure::new(k2(), vec![0.5, 0.25, 0.25, 0.0]).unwrap();
        assert!(matches!(
            fit_mle(&fam, &zeroed).unwrap_err(),
            Error::NotPositive { .. }
        ));
        let skew = EdgeMeasure::new(k2(), vec![0.3, 0.4, 0.1, 0.2]).unwrap();
        assert!(matches!(
            fit_mle(&fam, &skew).unwrap_err(),
            Error::NotShiftInvariant { .. }
        ));
    }

    #[test]
    fn empirical_measure_alternating_path() {
        let g = k2();
        let m = empirical_edge_measure(&g, &[0, 1, 0, 1, 0]).unwrap();
        let want = [0.0, 0.5, 0.5, 0.0];
        for (a, b) in m.probs().iter().zip(want) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn empirical_measure_projects_endpoint_defect() {
        // path 0,0,1: raw counts (1/2, 1/2, 0, 0); projection moves 1/4
        // from the (0,1) edge onto (1,0)
        let g = k2();
        let m = empirical_edge_measure(&g, &[0, 0, 1]).unwrap();
        let want = [0.5, 0.25, 0.25, 0.0];
        for (a, b) in m.probs().iter().zip(want) {
            assert!((a - b).abs() <= 1e-14);
        }
        assert!(m.shift_invariance_residual() <= 1e-14);
    }

    #[test]
    fn empirical_measure_rejects_off_graph_transition() {
        let g = Arc::new(
            KernelGraph::from_indexed(
                (0..3).map(|i| i.to_string()).collect(),
                vec![(0, 1), (1, 2), (2, 0)],
            )
            .unwrap(),
        );
        let err = empirical_edge_measure(&g, &[0, 1, 0]).unwrap_err();
        assert!(matches!(err, Error::UnsupportedTransition(_, _)));
    }

    #[test]
    fn empirical_measure_converges_on_long_runs() {
        let mut rng = XorShift64Star::new(13);
        let w = MarkovKernel::random(k2(), &mut rng);
        let traj = w.sample_trajectory(100_000, &mut rng).unwrap();
        let emp = empirical_edge_measure(w.graph(), &traj).unwrap();
        let truth = w.edge_measure().unwrap();
        assert!(emp.max_diff(&truth).unwrap() <= 0.01);
    }

    #[test]
    fn orthogonal_projection_foot() {
        // w2 = fit of w1 onto a subfamily, w3 in the subfamily: both sides
        // of the relation vanish at the foot
        let mut rng = XorShift64Star::new(17);
        let g = Arc::new(KernelGraph::complete(3).unwrap());
        let full = ExponentialFamily::full(g.clone());
        let sub = ExponentialFamily::new(
            full.carrier().clone(),
            full.basis()[..3].to_vec(),
        )
        .unwrap();
        let w1 = MarkovKernel::random(g, &mut rng);
        let w2 = sub
            .kernel_at(&fit_mle(&sub, &w1.edge_measure().unwrap()).unwrap().theta)
            .unwrap()
            .kernel;
        let w3 = sub
            .kernel_at(&NaturalParam(vec![0.3, -0.2, 0.4]))
            .unwrap()
            .kernel;
        let lhs = divergence(&w1, &w2).unwrap().value + divergence(&w2, &w3).unwrap().value
            - divergence(&w1, &w3).unwrap().value;
        assert!(lhs.abs() <= 1e-8, "lhs={lhs}");
        let gap = pythagorean_gap(&w1, &w2, &w3, &full).unwrap();
        assert!((lhs - gap).abs() <= 1e-8);
    }

    #[test]
    fn eta_moments_match_fit_target() {
        let mut rng = XorShift64Star::new(19);
        let fam = ExponentialFamily::full(k2());
        let w = MarkovKernel::random(k2(), &mut rng);
        let target = w.edge_measure().unwrap();
        let fit = fit_mle(&fam, &target).unwrap();
        let eta_fit = expectation_param(&fam, &fit.theta).unwrap();
        let eta_want = fam.moments(&target).unwrap();
        for (a, b) in eta_fit.as_slice().iter().zip(eta_want.as_slice()) {
            assert!((a - b).abs() <= 1e-10);
        }
        // and theta_from_eta agrees with the fit
        let again = theta_from_eta(&fam, &ExpectationParam(eta_want.0.clone()), None).unwrap();
        for (a, b) in again.theta.0.iter().zip(&fit.theta.0) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}
