//! Seeded randomized verification of the library's invariants, the engine
//! behind `markov-infogeo verify`.
//!
//! Every check draws its instances from the xorshift generator, so a
//! (seed, sizes) pair reproduces the exact same report everywhere. Each
//! check reports the worst residual it saw against its tolerance.

use std::sync::Arc;

use serde::Serialize;

use crate::dual_geometry::{
    self, connection_coefficients, connection_coefficients_in_eta, expectation_param,
    fisher_direct, fisher_hessian, theta_from_eta, Connection,
};
use crate::exp_family::{ExpectationParam, ExponentialFamily, NaturalParam};
use crate::function_space::{anti_shift_basis, subspace_dimensions, EdgeFunction, StatePotential};
use crate::geodesy::{
    self, divergence, divergence_in_family, e_geodesic_point, fit_mle, kl_joint, m_geodesic_point,
};
use crate::graph::{Distribution, KernelGraph, MarkovKernel};
use crate::numdiff;
use crate::pf::{delta_map, gamma_normalize, quotient_equal};
use crate::rng::XorShift64Star;
use crate::Result;

/// Options of a verification run.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub sizes: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sizes: vec![2, 3, 4, 6],
        }
    }
}

/// Outcome of one invariant family.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: &str, cases: usize, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            cases,
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
        }
    }
}

pub fn overall_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

// ---------------------------------------------------------------------------
// instance generators
// ---------------------------------------------------------------------------

/// Complete graph plus a sparse strongly connected graph (a cycle with a
/// few random chords) for each requested size.
pub fn graphs_for_size(n: usize, rng: &mut XorShift64Star) -> Vec<Arc<KernelGraph>> {
    let mut out = vec![Arc::new(KernelGraph::complete(n).unwrap())];
    if n > 2 {
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        for a in 0..n {
            for b in 0..n {
                if a != b && !edges.contains(&(a, b)) && rng.uniform() < 0.35 {
                    edges.push((a, b));
                }
            }
        }
        out.push(Arc::new(
            KernelGraph::from_indexed((0..n).map(|i| i.to_string()).collect(), edges).unwrap(),
        ));
    }
    out
}

fn random_edge_function(graph: &Arc<KernelGraph>, rng: &mut XorShift64Star) -> EdgeFunction {
    EdgeFunction::new(
        graph.clone(),
        (0..graph.num_edges())
            .map(|_| rng.uniform_in(-1.0, 1.0))
            .collect(),
    )
    .unwrap()
}

fn random_positive_function(graph: &Arc<KernelGraph>, rng: &mut XorShift64Star) -> EdgeFunction {
    EdgeFunction::new(
        graph.clone(),
        (0..graph.num_edges())
            .map(|_| rng.uniform_in(0.1, 2.5))
            .collect(),
    )
    .unwrap()
}

fn random_potential(graph: &Arc<KernelGraph>, rng: &mut XorShift64Star) -> StatePotential {
    StatePotential::new(
        graph.clone(),
        (0..graph.num_states())
            .map(|_| rng.uniform_in(-1.0, 1.0))
            .collect(),
    )
    .unwrap()
}

/// Minimal, reasonably conditioned random family on a complete graph.
pub fn random_family(n: usize, d: usize, rng: &mut XorShift64Star) -> ExponentialFamily {
    let graph = Arc::new(KernelGraph::complete(n).unwrap());
    loop {
        let carrier = EdgeFunction::new(
            graph.clone(),
            (0..graph.num_edges())
                .map(|_| rng.uniform_in(-0.4, 0.4))
                .collect(),
        )
        .unwrap();
        let basis: Vec<EdgeFunction> = (0..d)
            .map(|_| random_edge_function(&graph, rng))
            .collect();
        let family = ExponentialFamily::new(carrier, basis).unwrap();
        if !family.is_minimal() {
            continue;
        }
        // keep the metric well conditioned at the origin so derived
        // checks (Newton, finite differences through the inverse map)
        // are meaningful
        let g = fisher_direct(&family, &NaturalParam::zeros(d)).unwrap();
        let eigs = g.0.clone().symmetric_eigen().eigenvalues;
        if eigs.min() > 0.05 * eigs.max() && eigs.min() > 5e-3 {
            return family;
        }
    }
}

fn random_theta(d: usize, span: f64, rng: &mut XorShift64Star) -> NaturalParam {
    NaturalParam((0..d).map(|_| rng.uniform_in(-span, span)).collect())
}

// ---------------------------------------------------------------------------
// check families
// ---------------------------------------------------------------------------

fn check_gamma_idempotence(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    while cases < 100 {
        for &n in &cfg.sizes {
            for graph in graphs_for_size(n, rng) {
                let w = MarkovKernel::random(graph.clone(), rng);
                let f = EdgeFunction::new(graph, w.probs().to_vec())?;
                let r = gamma_normalize(&f)?;
                worst = worst.max(r.kernel.max_diff(&w)?);
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("gamma-idempotence", cases, worst, 1e-10))
}

fn check_gamma_scale(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            for _ in 0..5 {
                let f = random_positive_function(&graph, rng);
                let c = rng.uniform_in(0.2, 5.0);
                let base = gamma_normalize(&f)?;
                let scaled = gamma_normalize(&f.scale(c))?;
                worst = worst.max(scaled.kernel.max_diff(&base.kernel)?);
                worst = worst.max((scaled.log_perron - base.log_perron - c.ln()).abs());
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("gamma-scale-equivariance", cases, worst, 1e-12))
}

fn check_gamma_reconstruction(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            for _ in 0..5 {
                let f = random_positive_function(&graph, rng);
                let r = gamma_normalize(&f)?;
                let z = r.log_perron.exp();
                for (k, &(x, y)) in graph.edges().iter().enumerate() {
                    let gx = r.potential.values()[x].exp();
                    let gy = r.potential.values()[y].exp();
                    let back = r.kernel.probs()[k] * z * gx / gy;
                    worst = worst.max((back - f.values()[k]).abs() / f.values()[k]);
                }
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("gamma-reconstruction", cases, worst, 1e-10))
}

fn check_delta_gauge(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            for _ in 0..5 {
                let f = random_edge_function(&graph, rng);
                let kappa = random_potential(&graph, rng);
                let c = rng.uniform_in(-2.0, 2.0);
                let shifted = f.axpy(1.0, &kappa.anti_shift(), 1.0)?.shift(c);
                let a = delta_map(&f)?;
                let b = delta_map(&shifted)?;
                worst = worst.max(a.kernel.max_diff(&b.kernel)?);
                worst = worst.max((b.log_perron - a.log_perron - c).abs());
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("delta-gauge-equivariance", cases, worst, 1e-10))
}

fn check_quotient_matches_kernels(
    cfg: &VerifyConfig,
    rng: &mut XorShift64Star,
) -> Result<CheckReport> {
    let mut mismatches = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            for _ in 0..4 {
                let f1 = random_edge_function(&graph, rng);
                // gauge-equivalent partner
                let kappa = random_potential(&graph, rng);
                let f2 = f1
                    .axpy(1.0, &kappa.anti_shift(), 1.0)?
                    .shift(rng.uniform_in(-1.0, 1.0));
                // genuinely different partner
                let f3 = random_edge_function(&graph, rng);
                for (other, _want_equal) in [(&f2, true), (&f3, false)] {
                    let eq = quotient_equal(&f1, other)?;
                    let same_kernel = delta_map(&f1)?
                        .kernel
                        .max_diff(&delta_map(other)?.kernel)?
                        <= 1e-8;
                    if eq != same_kernel {
                        mismatches += 1.0;
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(CheckReport::new(
        "quotient-equal-iff-same-kernel",
        cases,
        mismatches,
        0.0,
    ))
}

fn check_stationary_and_measure(
    cfg: &VerifyConfig,
    rng: &mut XorShift64Star,
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            for _ in 0..5 {
                let w = MarkovKernel::random(graph.clone(), rng);
                let p = w.stationary_distribution()?;
                // residual of p W = p
                for y in 0..graph.num_states() {
                    let mut flow = 0.0;
                    for &k in graph.in_edges(y) {
                        flow += p.probs()[graph.edges()[k].0] * w.probs()[k];
                    }
                    worst = worst.max((flow - p.probs()[y]).abs());
                }
                let p2 = w.edge_measure()?;
                worst = worst.max((p2.probs().iter().sum::<f64>() - 1.0).abs());
                worst = worst.max(p2.shift_invariance_residual());
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("stationary-and-edge-measure", cases, worst, 1e-12))
}

fn check_measure_kernel_round_trip(
    cfg: &VerifyConfig,
    rng: &mut XorShift64Star,
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    while cases < 100 {
        for &n in &cfg.sizes {
            for graph in graphs_for_size(n, rng) {
                let w = MarkovKernel::random(graph, rng);
                let back = w.edge_measure()?.to_kernel()?;
                worst = worst.max(w.max_diff(&back)?);
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("measure-kernel-round-trip", cases, worst, 1e-10))
}

fn check_stationary_power_limit(
    cfg: &VerifyConfig,
    rng: &mut XorShift64Star,
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        // complete graphs are aperiodic, so the power limit exists
        let graph = Arc::new(KernelGraph::complete(n).unwrap());
        for _ in 0..3 {
            let w = MarkovKernel::random(graph.clone(), rng);
            let p = w.stationary_distribution()?;
            let m = graph.to_matrix(w.probs());
            let mut power = m.clone();
            for _ in 0..200 {
                power = &power * &m;
            }
            for x in 0..n {
                for y in 0..n {
                    worst = worst.max((power[(x, y)] - p.probs()[y]).abs());
                }
            }
            cases += 1;
        }
    }
    Ok(CheckReport::new("stationary-power-limit", cases, worst, 1e-8))
}

fn check_decomposition(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            for _ in 0..5 {
                let f = random_edge_function(&graph, rng);
                let d = f.decompose();
                let norm2 = f.inner_product(&f)?.max(1e-12);
                worst =
                    worst.max(d.shift_part.inner_product(&d.anti_part)?.abs() / norm2);
                // parts add back to f
                let back = d.shift_part.axpy(1.0, &d.anti_part, 1.0)?;
                worst = worst.max(back.axpy(1.0, &f, -1.0)?.max_abs());
                // shift part has matching marginals
                let (inc, out) = d.shift_part.marginals();
                for x in 0..graph.num_states() {
                    worst = worst.max((inc.values()[x] - out.values()[x]).abs());
                }
                // linearity
                let g = random_edge_function(&graph, rng);
                let (a, b) = (rng.uniform_in(-2.0, 2.0), rng.uniform_in(-2.0, 2.0));
                let combo = f.axpy(a, &g, b)?.decompose();
                let expect = d.shift_part.axpy(a, &g.decompose().shift_part, b)?;
                worst = worst.max(combo.shift_part.axpy(1.0, &expect, -1.0)?.max_abs());
                // summation by parts
                let kappa = random_potential(&graph, rng);
                let lhs = f.inner_product(&kappa.anti_shift())?;
                let (fin, fout) = f.marginals();
                let rhs: f64 = (0..graph.num_states())
                    .map(|x| (fin.values()[x] - fout.values()[x]) * kappa.values()[x])
                    .sum();
                worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("orthogonal-decomposition", cases, worst, 1e-12))
}

fn check_subspace_dimensions(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut mismatches = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            let (dim_fs, dim_fa) = subspace_dimensions(&graph);
            let e = graph.num_edges();
            let x = graph.num_states();
            if dim_fs != e - x + 1 || dim_fa != x - 1 {
                mismatches += 1.0;
            }
            let rank = anti_shift_basis(&graph).svd(false, false).rank(1e-10);
            if rank != x - 1 {
                mismatches += 1.0;
            }
            let full = ExponentialFamily::full(graph.clone());
            if full.effective_dimension() != e - x {
                mismatches += 1.0;
            }
            cases += 1;
        }
    }
    Ok(CheckReport::new("subspace-dimensions", cases, mismatches, 0.0))
}

fn check_family_reconstruction(
    cfg: &VerifyConfig,
    rng: &mut XorShift64Star,
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        let d = 2.min(n * n - n);
        let family = random_family(n, d, rng);
        for _ in 0..4 {
            let theta = random_theta(d, 1.0, rng);
            let point = family.kernel_at(&theta)?;
            let tilt = family.tilt(&theta)?;
            for (k, &(x, y)) in family.graph().edges().iter().enumerate() {
                let lhs = point.kernel.probs()[k].ln();
                let rhs = tilt.values()[k] + point.kappa.values()[y]
                    - point.kappa.values()[x]
                    - point.psi;
                worst = worst.max((lhs - rhs).abs());
            }
            cases += 1;
        }
    }
    Ok(CheckReport::new("family-point-reconstruction", cases, worst, 1e-10))
}

fn check_fisher_cross(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let per_size = (50 / cfg.sizes.len()).max(1);
    for &n in &cfg.sizes {
        for _ in 0..per_size {
            let d = 2.min(n * n - n);
            let family = random_family(n, d, rng);
            let theta = random_theta(d, 1.0, rng);
            let a = fisher_direct(&family, &theta)?;
            let b = fisher_hessian(&family, &theta)?;
            worst = worst.max(a.max_abs_diff(&b));
            // positive definiteness and symmetry surface as residuals too
            if a.min_eigenvalue() < -1e-10 || b.min_eigenvalue() < -1e-8 {
                worst = worst.max(1.0);
            }
            worst = worst.max(a.symmetry_residual());
            cases += 1;
        }
    }
    Ok(CheckReport::new("fisher-cross-oracle", cases, worst, 1e-5))
}

fn check_legendre(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let per_size = (50 / cfg.sizes.len()).max(1);
    for &n in &cfg.sizes {
        for _ in 0..per_size {
            let d = 2.min(n * n - n);
            let family = random_family(n, d, rng);
            let theta = random_theta(d, 0.8, rng);
            let eta = expectation_param(&family, &theta)?;
            // eta = grad psi
            let grad = numdiff::gradient(
                |t| family.log_partition(&NaturalParam(t.to_vec())),
                theta.as_slice(),
                numdiff::GRAD_STEP,
            )?;
            for (e, g) in eta.as_slice().iter().zip(&grad) {
                worst = worst.max((e - g).abs());
            }
            // d eta / d theta = G
            let g = fisher_direct(&family, &theta)?;
            let jac = numdiff::vector_jacobian(
                |t| Ok(expectation_param(&family, &NaturalParam(t.to_vec()))?.0),
                theta.as_slice(),
                numdiff::GRAD_STEP,
            )?;
            for j in 0..d {
                for i in 0..d {
                    worst = worst.max((jac[j][i] - g.entry(i, j)).abs());
                }
            }
            // d theta / d eta = G^{-1}; the inverse map is polished well
            // below the finite-difference step so the quotient is clean
            let ginv = g.0.clone().try_inverse().expect("minimal family");
            let invert = |e: &[f64]| {
                dual_geometry::newton_eta_inverse(
                    &family,
                    &ExpectationParam(e.to_vec()),
                    Some(&theta),
                    1e-13,
                )
            };
            let jac_back = numdiff::vector_jacobian(
                |e| Ok(invert(e)?.theta.0),
                eta.as_slice(),
                numdiff::GRAD_STEP,
            )?;
            for j in 0..d {
                for i in 0..d {
                    worst = worst.max((jac_back[j][i] - ginv[(i, j)]).abs());
                }
            }
            // theta = grad_eta phi
            let grad_phi = numdiff::gradient(
                |e| dual_geometry::dual_potential(&family, &invert(e)?.theta),
                eta.as_slice(),
                numdiff::GRAD_STEP,
            )?;
            for (t, gp) in theta.as_slice().iter().zip(&grad_phi) {
                worst = worst.max((t - gp).abs());
            }
            cases += 1;
        }
    }
    Ok(CheckReport::new("legendre-duality", cases, worst, 1e-4))
}

fn check_newton_round_trip(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let per_size = (50 / cfg.sizes.len()).max(1);
    for &n in &cfg.sizes {
        for _ in 0..per_size {
            let d = 3.min(n * n - n);
            let family = random_family(n, d, rng);
            let theta = random_theta(d, 1.0, rng);
            let eta = expectation_param(&family, &theta)?;
            let solve = theta_from_eta(&family, &eta, None)?;
            for (a, b) in solve.theta.0.iter().zip(&theta.0) {
                worst = worst.max((a - b).abs());
            }
            cases += 1;
        }
    }
    Ok(CheckReport::new("newton-round-trip", cases, worst, 1e-8))
}

fn check_full_family_surjectivity(
    cfg: &VerifyConfig,
    rng: &mut XorShift64Star,
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            let family = ExponentialFamily::full(graph.clone());
            for _ in 0..20 {
                let w = MarkovKernel::random(graph.clone(), rng);
                let fit = fit_mle(&family, &w.edge_measure()?)?;
                let back = family.kernel_at(&fit.theta)?.kernel;
                worst = worst.max(back.max_diff(&w)?);
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("full-family-surjectivity", cases, worst, 1e-8))
}

fn check_geodesics(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            for _ in 0..3 {
                let w0 = MarkovKernel::random(graph.clone(), rng);
                let w1 = MarkovKernel::random(graph.clone(), rng);
                worst = worst.max(e_geodesic_point(&w0, &w1, 0.0)?.max_diff(&w0)?);
                worst = worst.max(e_geodesic_point(&w0, &w1, 1.0)?.max_diff(&w1)?);
                worst = worst.max(m_geodesic_point(&w0, &w1, 0.0)?.max_diff(&w0)?);
                worst = worst.max(m_geodesic_point(&w0, &w1, 1.0)?.max_diff(&w1)?);
                // e-geodesic stays in the family through its endpoints
                if let Ok(family) = ExponentialFamily::through(&w0, &w1) {
                    let t = rng.uniform_in(-0.3, 1.3);
                    let a = e_geodesic_point(&w0, &w1, t)?;
                    let b = family.kernel_at(&NaturalParam(vec![t]))?.kernel;
                    worst = worst.max(a.max_diff(&b)? * 1e-2); // 1e-10 scale vs 1e-12
                }
                // m-geodesic measure is the linear mix
                let t = rng.uniform();
                let mid = m_geodesic_point(&w0, &w1, t)?;
                let mixed = geodesy::m_geodesic_measure(&w0, &w1, t)?;
                worst = worst.max(mid.edge_measure()?.max_diff(&mixed)?);
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("geodesic-endpoints-and-mixes", cases, worst, 1e-12))
}

fn check_divergence(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        for graph in graphs_for_size(n, rng) {
            let family = ExponentialFamily::full(graph.clone());
            for _ in 0..3 {
                let w1 = MarkovKernel::random(graph.clone(), rng);
                let w2 = MarkovKernel::random(graph.clone(), rng);
                let d12 = divergence(&w1, &w2)?.value;
                let d21 = divergence(&w2, &w1)?.value;
                if d12 < 0.0 || d21 < 0.0 {
                    worst = worst.max(1.0);
                }
                worst = worst.max(divergence(&w1, &w1)?.value.abs() / 1e-3);
                // bregman agreement, scaled into the shared tolerance
                let rep = divergence_in_family(&w1, &w2, &family)?;
                worst = worst.max(rep.residual.unwrap() / 1e-9 * 1e-12);
                cases += 1;
            }
        }
    }
    Ok(CheckReport::new("divergence-properties", cases, worst, 1e-12))
}

fn check_kl_joint_limits(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        let graph = Arc::new(KernelGraph::complete(n).unwrap());
        let w1 = MarkovKernel::random(graph.clone(), rng);
        let w2 = MarkovKernel::random(graph.clone(), rng);
        let p1 = w1.stationary_distribution()?;
        let p2 = w2.stationary_distribution()?;
        let d = divergence(&w1, &w2)?.value;
        // exact identity under stationary initial laws
        for horizon in [2usize, 64, 256] {
            let lhs = kl_joint(&w1, &w2, &p1, &p2, horizon)?;
            let rhs = p1.kl(&p2)? + (horizon as f64 - 1.0) * d;
            worst = worst.max((lhs - rhs).abs());
        }
        // O(1/n) rate for generic initial laws
        let q1 = Distribution::new({
            let mut v: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 1.0)).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        })?;
        let dev = |m: usize| -> Result<f64> {
            Ok((kl_joint(&w1, &w2, &q1, &p2, m)? / m as f64 - d).abs())
        };
        let (d128, d256) = (dev(128)?, dev(256)?);
        if d256 > 0.55 * d128 && d128 > 1e-13 {
            worst = worst.max(1.0);
        }
        cases += 1;
    }
    Ok(CheckReport::new("kl-joint-limits", cases, worst, 1e-12))
}

fn check_fisher_limit(_cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut failures = 0.0f64;
    let mut cases = 0;
    for n in [2usize, 3] {
        let d = 2.min(n * n - n);
        let family = random_family(n, d, rng);
        let theta = random_theta(d, 0.6, rng);
        let g = fisher_direct(&family, &theta)?;
        let dev = |m: usize| -> Result<f64> {
            let gm = geodesy::fisher_joint(&family, &theta, m)?;
            Ok((gm.0 / (m as f64) - &g.0).abs().max())
        };
        let (d128, d256) = (dev(128)?, dev(256)?);
        if d256 > 0.55 * d128 && d128 > 1e-10 {
            failures += 1.0;
        }
        cases += 1;
    }
    Ok(CheckReport::new("fisher-joint-limit", cases, failures, 0.0))
}

fn check_flatness(_cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..10 {
        let n = 2 + rng.below(2);
        let d = 2.min(n * n - n);
        let family = random_family(n, d, rng);
        let theta = random_theta(d, 0.7, rng);
        let ce = connection_coefficients(&family, &theta, Connection::Exponential)?;
        worst = worst.max(ce.max_abs());
        let cm = connection_coefficients_in_eta(&family, &theta, Connection::Mixture)?;
        worst = worst.max(cm.max_abs());
        cases += 1;
    }
    Ok(CheckReport::new("dual-flatness", cases, worst, 2e-4))
}

fn check_pythagorean(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let per_size = (50 / cfg.sizes.len()).max(1);
    for &n in &cfg.sizes {
        let graph = Arc::new(KernelGraph::complete(n).unwrap());
        let family = ExponentialFamily::full(graph.clone());
        for _ in 0..per_size {
            let w1 = MarkovKernel::random(graph.clone(), rng);
            let w2 = MarkovKernel::random(graph.clone(), rng);
            let w3 = MarkovKernel::random(graph.clone(), rng);
            worst = worst.max(geodesy::pythagorean_gap(&w1, &w2, &w3, &family)?.abs());
            cases += 1;
        }
    }
    Ok(CheckReport::new("pythagorean-gap", cases, worst, 1e-8))
}

fn check_mle(cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in &cfg.sizes {
        let graph = Arc::new(KernelGraph::complete(n).unwrap());
        let family = ExponentialFamily::full(graph.clone());
        for _ in 0..3 {
            let theta = random_theta(family.dim(), 0.5, rng);
            let target = family.kernel_at(&theta)?.kernel.edge_measure()?;
            let fit = fit_mle(&family, &target)?;
            for (a, b) in fit.theta.0.iter().zip(&theta.0) {
                worst = worst.max((a - b).abs());
            }
            cases += 1;
        }
    }
    Ok(CheckReport::new("mle-moment-matching", cases, worst, 1e-8))
}

fn check_empirical_measure(_cfg: &VerifyConfig, rng: &mut XorShift64Star) -> Result<CheckReport> {
    let graph = Arc::new(KernelGraph::complete(2).unwrap());
    let w = MarkovKernel::random(graph.clone(), rng);
    let traj = w.sample_trajectory(100_000, rng)?;
    let emp = geodesy::empirical_edge_measure(&graph, &traj)?;
    let truth = w.edge_measure()?;
    let worst = emp.max_diff(&truth)?.max(emp.shift_invariance_residual() / 1e-12 * 0.01);
    Ok(CheckReport::new("empirical-measure-ergodic", 1, worst, 0.01))
}

/// Runs every invariant family and returns one report per family.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    type Check = fn(&VerifyConfig, &mut XorShift64Star) -> Result<CheckReport>;
    let checks: Vec<(u64, Check)> = vec![
        (1, check_gamma_idempotence),
        (2, check_gamma_scale),
        (3, check_gamma_reconstruction),
        (4, check_delta_gauge),
        (5, check_quotient_matches_kernels),
        (6, check_stationary_and_measure),
        (7, check_measure_kernel_round_trip),
        (8, check_stationary_power_limit),
        (9, check_decomposition),
        (10, check_subspace_dimensions),
        (11, check_family_reconstruction),
        (12, check_fisher_cross),
        (13, check_legendre),
        (14, check_newton_round_trip),
        (15, check_full_family_surjectivity),
        (16, check_geodesics),
        (17, check_divergence),
        (18, check_kl_joint_limits),
        (19, check_fisher_limit),
        (20, check_flatness),
        (21, check_pythagorean),
        (22, check_mle),
        (23, check_empirical_measure),
    ];
    let mut reports = Vec::with_capacity(checks.len());
    for (salt, check) in checks {
        let mut rng = XorShift64Star::new(cfg.seed.wrapping_mul(0x100).wrapping_add(salt));
        reports.push(check(cfg, &mut rng)?);
    }
    Ok(reports)
}

/// Per-kernel invariants, for `verify` runs on user-supplied kernels.
pub fn check_kernel(w: &MarkovKernel) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let p = w.stationary_distribution()?;
    let mut residual = 0.0f64;
    for y in 0..w.graph().num_states() {
        let mut flow = 0.0;
        for &k in w.graph().in_edges(y) {
            flow += p.probs()[w.graph().edges()[k].0] * w.probs()[k];
        }
        residual = residual.max((flow - p.probs()[y]).abs());
    }
    out.push(CheckReport::new("stationary-residual", 1, residual, 1e-12));
    let p2 = w.edge_measure()?;
    out.push(CheckReport::new(
        "edge-measure-shift-invariance",
        1,
        p2.shift_invariance_residual(),
        1e-12,
    ));
    out.push(CheckReport::new(
        "measure-kernel-round-trip",
        1,
        p2.to_kernel()?.max_diff(w)?,
        1e-10,
    ));
    let f = EdgeFunction::new(w.graph().clone(), w.probs().to_vec())?;
    out.push(CheckReport::new(
        "gamma-idempotence",
        1,
        gamma_normalize(&f)?.kernel.max_diff(w)?,
        1e-10,
    ));
    Ok(out)
}
