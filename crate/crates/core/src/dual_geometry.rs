//! Fisher metrics, expectation coordinates, Legendre duality, and the
//! e/m connection coefficients of an exponential family.
//!
//! The Fisher matrix is computed two independent ways: as the stationary
//! second moment of the score (`fisher_direct`) and as the Hessian of the
//! log partition (`fisher_hessian`). Expectation coordinates are basis
//! means under the edge measure; their inverse map runs a damped Newton
//! iteration preconditioned by the Fisher matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exp_family::{ExpectationParam, ExponentialFamily, NaturalParam};
use crate::graph::MarkovKernel;
use crate::numdiff;

/// Newton residual required of the eta -> theta inversion.
pub const NEWTON_TOL: f64 = 1e-10;
/// Default Newton iteration cap; override with MARKOV_INFOGEO_MAX_ITERS.
pub const NEWTON_MAX_ITERS: usize = 200;
/// Kernel reconstruction residual accepted by [`coordinates_of`].
pub const IN_FAMILY_TOL: f64 = 1e-6;

fn newton_max_iters() -> usize {
    std::env::var("MARKOV_INFOGEO_MAX_ITERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(NEWTON_MAX_ITERS)
}

/// A d x d Fisher information matrix.
#[derive(Debug, Clone)]
pub struct FisherMatrix(pub DMatrix<f64>);

impl FisherMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Smallest eigenvalue of the symmetrized matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        sym.symmetric_eigen().eigenvalues.min()
    }

    pub fn max_abs_diff(&self, other: &FisherMatrix) -> f64 {
        (&self.0 - &other.0).abs().max()
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.0 - self.0.transpose()).abs().max()
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.0.nrows())
            .map(|i| (0..self.0.ncols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

/// Outcome of the Newton inversion eta -> theta.
#[derive(Debug, Clone)]
pub struct NewtonSolve {
    pub theta: NaturalParam,
    pub iterations: usize,
    pub residual: f64,
}

/// Fisher matrix as the edge-measure second moment of the score,
/// with scores obtained by central differences of the log kernel.
pub fn fisher_direct(family: &ExponentialFamily, theta: &NaturalParam) -> Result<FisherMatrix> {
    let d = family.dim();
    let center = family.kernel_at(theta)?;
    let p2 = center.kernel.edge_measure()?;
    let scores = numdiff::vector_jacobian(
        |t| {
            Ok(family
                .kernel_at(&NaturalParam(t.to_vec()))?
                .kernel
                .log_probs())
        },
        theta.as_slice(),
        numdiff::GRAD_STEP,
    )?;
    let mut g = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v: f64 = p2
                .probs()
                .iter()
                .zip(scores[i].iter().zip(&scores[j]))
                .map(|(&p, (si, sj))| p * si * sj)
                .sum();
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(FisherMatrix(g))
}

/// Fisher matrix as the Hessian of the log partition, by central second
/// differences with one Richardson level.
pub fn fisher_hessian(family: &ExponentialFamily, theta: &NaturalParam) -> Result<FisherMatrix> {
    let h = numdiff::hessian_richardson(
        |t| family.log_partition(&NaturalParam(t.to_vec())),
        theta.as_slice(),
        numdiff::HESS_STEP,
    )?;
    Ok(FisherMatrix(h))
}

/// Expectation parameter: eta_i = sum over edges of p2 * F_i at theta.
pub fn expectation_param(
    family: &ExponentialFamily,
    theta: &NaturalParam,
) -> Result<ExpectationParam> {
    let p2 = family.kernel_at(theta)?.kernel.edge_measure()?;
    family.moments(&p2)
}

/// Dual potential phi(theta) = theta . eta(theta) - psi(theta).
pub fn dual_potential(family: &ExponentialFamily, theta: &NaturalParam) -> Result<f64> {
    let point = family.kernel_at(theta)?;
    let eta = family.moments(&point.kernel.edge_measure()?)?;
    let dot: f64 = theta
        .as_slice()
        .iter()
        .zip(eta.as_slice())
        .map(|(t, e)| t * e)
        .sum();
    Ok(dot - point.psi)
}

/// Damped Newton for eta -> theta; stops when the eta residual drops below
/// `tol` or progress stalls. Enforces no tolerance itself.
pub(crate) fn newton_eta_inverse(
    family: &ExponentialFamily,
    eta: &ExpectationParam,
    theta0: Option<&NaturalParam>,
    tol: f64,
) -> Result<NewtonSolve> {
    family.require_minimal()?;
    let d = family.dim();
    if eta.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: eta.len(),
        });
    }
    let mut theta = theta0.cloned().unwrap_or_else(|| NaturalParam::zeros(d));
    let residual_of = |t: &NaturalParam| -> Result<(Vec<f64>, f64)> {
        let cur = expectation_param(family, t)?;
        let gap: Vec<f64> = eta
            .as_slice()
            .iter()
            .zip(cur.as_slice())
            .map(|(want, got)| want - got)
            .collect();
        let norm = gap.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((gap, norm))
    };
    let (mut gap, mut residual) = residual_of(&theta)?;
    let cap = newton_max_iters();
    let mut iterations = 0;
    while residual > tol && iterations < cap {
        iterations += 1;
        // when the iterate escapes toward the moment-set boundary the
        // metric degenerates or the tilt overflows; stall instead of
        // surfacing those as structural errors
        let g = match fisher_direct(family, &theta) {
            Ok(g) => g,
            Err(Error::Overflow(_)) | Err(Error::ConvergenceFailure { .. }) => break,
            Err(e) => return Err(e),
        };
        let rhs = nalgebra::DVector::from_column_slice(&gap);
        let step = match g.0.lu().solve(&rhs) {
            Some(s) => s,
            None => break,
        };
        let mut lambda = 1.0;
        let mut advanced = false;
        for _ in 0..=30 {
            let cand = NaturalParam(
                theta
                    .as_slice()
                    .iter()
                    .zip(step.iter())
                    .map(|(t, s)| t + lambda * s)
                    .collect(),
            );
            match residual_of(&cand) {
                Ok((g2, r2)) if r2 < residual => {
                    theta = cand;
                    gap = g2;
                    residual = r2;
                    advanced = true;
                    break;
                }
                _ => lambda /= 2.0,
            }
        }
        if !advanced {
            break;
        }
    }
    Ok(NewtonSolve {
        theta,
        iterations,
        residual,
    })
}

/// Inverts the expectation map: finds theta with eta(theta) = eta.
///
/// Fails with `NoConvergence` when the residual cannot be brought below
/// [`NEWTON_TOL`], which signals an eta outside the realizable moment set.
pub fn theta_from_eta(
    family: &ExponentialFamily,
    eta: &ExpectationParam,
    theta0: Option<&NaturalParam>,
) -> Result<NewtonSolve> {
    let solve = newton_eta_inverse(family, eta, theta0, NEWTON_TOL)?;
    if solve.residual > NEWTON_TOL {
        return Err(Error::NoConvergence {
            residual: solve.residual,
            iterations: solve.iterations,
            last_theta: solve.theta.0,
        });
    }
    Ok(solve)
}

/// Recovers the (theta, eta) coordinates of a kernel inside a family by
/// moment matching, then checks the kernel is actually reproduced.
pub fn coordinates_of(
    family: &ExponentialFamily,
    kernel: &MarkovKernel,
) -> Result<(NaturalParam, ExpectationParam)> {
    if family.graph().as_ref() != kernel.graph().as_ref() {
        return Err(Error::GraphMismatch);
    }
    let eta = family.moments(&kernel.edge_measure()?)?;
    let solve = match theta_from_eta(family, &eta, None) {
        Ok(s) => s,
        Err(Error::NoConvergence { residual, .. }) => return Err(Error::NotInFamily(residual)),
        Err(e) => return Err(e),
    };
    let back = family.kernel_at(&solve.theta)?;
    let gap = back.kernel.max_diff(kernel)?;
    if gap > IN_FAMILY_TOL {
        return Err(Error::NotInFamily(gap));
    }
    Ok((solve.theta, eta))
}

/// Which connection's coefficients to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    Exponential,
    Mixture,
}

/// Coefficients Gamma_{ij,k}, symmetric in (i, j).
#[derive(Debug, Clone)]
pub struct ConnectionCoefficients {
    d: usize,
    vals: Vec<f64>,
}

impl ConnectionCoefficients {
    fn zeros(d: usize) -> Self {
        Self {
            d,
            vals: vec![0.0; d * d * d],
        }
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.vals[(i * self.d + j) * self.d + k] = v;
        self.vals[(j * self.d + i) * self.d + k] = v;
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.vals[(i * self.d + j) * self.d + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Log kernel and edge measure at one parameter point.
fn kernel_fields(family: &ExponentialFamily, theta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let kernel = family.kernel_at(&NaturalParam(theta.to_vec()))?.kernel;
    let p2 = kernel.edge_measure()?;
    Ok((kernel.log_probs(), p2.probs().to_vec()))
}

fn connection_from_maps<F>(eval: F, x0: &[f64], which: Connection) -> Result<ConnectionCoefficients>
where
    F: Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)>,
{
    let d = x0.len();
    // e-connection pairs d2(log w) with d1(p2); the m-connection swaps them
    let second_map = |x: &[f64]| -> Result<Vec<f64>> {
        let (logw, p2) = eval(x)?;
        Ok(match which {
            Connection::Exponential => logw,
            Connection::Mixture => p2,
        })
    };
    let first_map = |x: &[f64]| -> Result<Vec<f64>> {
        let (logw, p2) = eval(x)?;
        Ok(match which {
            Connection::Exponential => p2,
            Connection::Mixture => logw,
        })
    };
    let firsts = numdiff::vector_jacobian(first_map, x0, numdiff::CONN_STEP)?;
    let seconds = numdiff::vector_second_partials(second_map, x0, numdiff::CONN_STEP)?;
    let mut out = ConnectionCoefficients::zeros(d);
    for ((i, j), dd) in seconds {
        for k in 0..d {
            let v = dd.iter().zip(&firsts[k]).map(|(a, b)| a * b).sum();
            out.set(i, j, k, v);
        }
    }
    Ok(out)
}

/// Connection coefficients in the natural coordinates.
pub fn connection_coefficients(
    family: &ExponentialFamily,
    theta: &NaturalParam,
    which: Connection,
) -> Result<ConnectionCoefficients> {
    connection_from_maps(|t| kernel_fields(family, t), theta.as_slice(), which)
}

/// Connection coefficients in the expectation coordinates at the point
/// eta(theta); each evaluation inverts eta back to theta with a tight
/// Newton polish seeded from the centre.
pub fn connection_coefficients_in_eta(
    family: &ExponentialFamily,
    theta: &NaturalParam,
    which: Connection,
) -> Result<ConnectionCoefficients> {
    let eta0 = expectation_param(family, theta)?;
    let eval = |e: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let solve =
            newton_eta_inverse(family, &ExpectationParam(e.to_vec()), Some(theta), 5e-14)?;
        if solve.residual > 1e-9 {
            return Err(Error::NoConvergence {
                residual: solve.residual,
                iterations: solve.iterations,
                last_theta: solve.theta.0,
            });
        }
        kernel_fields(family, solve.theta.as_slice())
    };
    connection_from_maps(eval, eta0.as_slice(), which)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::EdgeFunction;
    use crate::graph::KernelGraph;
    use crate::rng::XorShift64Star;
    use std::sync::Arc;

    fn k2() -> Arc<KernelGraph> {
        Arc::new(KernelGraph::complete(2).unwrap())
    }

    fn k2_family() -> ExponentialFamily {
        ExponentialFamily::new(
            EdgeFunction::zero(k2()),
            vec![EdgeFunction::indicator(k2(), 0, 1).unwrap()],
        )
        .unwrap()
    }

    fn random_family(n: usize, d: usize, rng: &mut XorShift64Star) -> ExponentialFamily {
        let g = Arc::new(KernelGraph::complete(n).unwrap());
        loop {
            let carrier = EdgeFunction::new(
                g.clone(),
                (0..g.num_edges())
                    .map(|_| rng.uniform_in(-0.4, 0.4))
                    .collect(),
            )
            .unwrap();
            let basis: Vec<_> = (0..d)
                .map(|_| {
                    EdgeFunction::new(
                        g.clone(),
                        (0..g.num_edges())
                            .map(|_| rng.uniform_in(-1.0, 1.0))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect();
            let fam = ExponentialFamily::new(carrier, basis).unwrap();
            if fam.is_minimal() {
                return fam;
            }
        }
    }

    #[test]
    fn fisher_closed_form_at_zero() {
        // psi = log(1 + e^(t/2)) so psi''(0) = 1/16
        let fam = k2_family();
        let g = fisher_direct(&fam, &NaturalParam(vec![0.0])).unwrap();
        assert!((g.entry(0, 0) - 1.0 / 16.0).abs() < 1e-9);
        let h = fisher_hessian(&fam, &NaturalParam(vec![0.0])).unwrap();
        assert!((h.entry(0, 0) - 1.0 / 16.0).abs() < 1e-7);
    }

    #[test]
    fn fisher_closed_form_at_two() {
        let fam = k2_family();
        let e = std::f64::consts::E;
        let want = e / (4.0 * (1.0 + e) * (1.0 + e));
        let h = fisher_hessian(&fam, &NaturalParam(vec![2.0])).unwrap();
        assert!((h.entry(0, 0) - want).abs() < 1e-7);
        let g = fisher_direct(&fam, &NaturalParam(vec![2.0])).unwrap();
        assert!((g.entry(0, 0) - want).abs() < 1e-7);
    }

    #[test]
    fn fisher_of_degenerate_family_vanishes() {
        // basis inside the gauge directions: the score is zero
        let kappa = crate::function_space::StatePotential::new(k2(), vec![0.0, 0.8]).unwrap();
        let fam =
            ExponentialFamily::new(EdgeFunction::zero(k2()), vec![kappa.anti_shift()]).unwrap();
        let g = fisher_direct(&fam, &NaturalParam(vec![0.0])).unwrap();
        assert!(g.entry(0, 0).abs() < 1e-12);
        assert!(!fam.is_minimal());
    }

    #[test]
    fn cross_oracle_agreement() {
        let mut rng = XorShift64Star::new(51);
        for _ in 0..5 {
            let fam = random_family(3, 2, &mut rng);
            let theta = NaturalParam(vec![rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]);
            let a = fisher_direct(&fam, &theta).unwrap();
            let b = fisher_hessian(&fam, &theta).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-5);
            assert!(a.symmetry_residual() < 1e-12);
            assert!(a.min_eigenvalue() > -1e-10);
        }
    }

    #[test]
    fn expectation_closed_forms() {
        let fam = k2_family();
        let eta0 = expectation_param(&fam, &NaturalParam(vec![0.0])).unwrap();
        assert!((eta0.as_slice()[0] - 0.25).abs() < 1e-12);
        // eta(10) = (1/2) e^5 / (1 + e^5)
        let eta10 = expectation_param(&fam, &NaturalParam(vec![10.0])).unwrap();
        let u = 5.0f64.exp();
        assert!((eta10.as_slice()[0] - 0.5 * u / (1.0 + u)).abs() < 1e-10);
        // monotone toward 1/2
        let mut last = 0.0;
        for t in [0.0, 1.0, 3.0, 10.0] {
            let e = expectation_param(&fam, &NaturalParam(vec![t])).unwrap().0[0];
            assert!(e > last && e < 0.5);
            last = e;
        }
    }

    #[test]
    fn eta_equals_gradient_of_psi() {
        let mut rng = XorShift64Star::new(61);
        let fam = random_family(3, 2, &mut rng);
        let theta = NaturalParam(vec![0.3, -0.5]);
        let eta = expectation_param(&fam, &theta).unwrap();
        let grad = numdiff::gradient(
            |t| fam.log_partition(&NaturalParam(t.to_vec())),
            theta.as_slice(),
            numdiff::GRAD_STEP,
        )
        .unwrap();
        for (e, g) in eta.as_slice().iter().zip(&grad) {
            assert!((e - g).abs() < 1e-6);
        }
    }

    #[test]
    fn newton_closed_form_inverse() {
        let fam = k2_family();
        // eta = 1/4 at theta = 0
        let s = theta_from_eta(&fam, &ExpectationParam(vec![0.25]), None).unwrap();
        assert!(s.theta.0[0].abs() < 1e-8);
        // eta = 1/3 at theta = 2 ln 2
        let s = theta_from_eta(&fam, &ExpectationParam(vec![1.0 / 3.0]), None).unwrap();
        assert!((s.theta.0[0] - 2.0 * 2.0f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn newton_round_trip() {
        let mut rng = XorShift64Star::new(71);
        for _ in 0..5 {
            let fam = random_family(3, 2, &mut rng);
            let theta = NaturalParam(vec![rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]);
            let eta = expectation_param(&fam, &theta).unwrap();
            let back = theta_from_eta(&fam, &eta, None).unwrap();
            for (a, b) in back.theta.0.iter().zip(&theta.0) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn newton_rejects_degenerate_family() {
        let kappa = crate::function_space::StatePotential::new(k2(), vec![0.0, 0.8]).unwrap();
        let fam =
            ExponentialFamily::new(EdgeFunction::zero(k2()), vec![kappa.anti_shift()]).unwrap();
        let err = theta_from_eta(&fam, &ExpectationParam(vec![0.0]), None).unwrap_err();
        assert!(matches!(err, Error::NotMinimal { .. }));
    }

    #[test]
    fn newton_flags_unreachable_moments() {
        // eta must lie in (0, 1/2) for the k2 family
        let fam = k2_family();
        let err = theta_from_eta(&fam, &ExpectationParam(vec![0.9]), None).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn dual_potential_closed_forms() {
        let fam = k2_family();
        let phi0 = dual_potential(&fam, &NaturalParam(vec![0.0])).unwrap();
        assert!((phi0 + 2.0f64.ln()).abs() < 1e-12);
        let t = 2.0 * 2.0f64.ln();
        let phi = dual_potential(&fam, &NaturalParam(vec![t])).unwrap();
        let want = t / 3.0 - 3.0f64.ln();
        assert!((phi - want).abs() < 1e-10);
    }

    #[test]
    fn theta_is_eta_gradient_of_phi() {
        let fam = k2_family();
        let theta = NaturalParam(vec![0.8]);
        let eta = expectation_param(&fam, &theta).unwrap();
        let grad = numdiff::gradient(
            |e| {
                let s = theta_from_eta(&fam, &ExpectationParam(e.to_vec()), Some(&theta))?;
                dual_potential(&fam, &s.theta)
            },
            eta.as_slice(),
            numdiff::GRAD_STEP,
        )
        .unwrap();
        assert!((grad[0] - 0.8).abs() < 1e-5);
    }

    #[test]
    fn coordinates_round_trip() {
        let mut rng = XorShift64Star::new(81);
        let fam = random_family(3, 2, &mut rng);
        let theta = NaturalParam(vec![0.6, -0.2]);
        let w = fam.kernel_at(&theta).unwrap().kernel;
        let (t, _) = coordinates_of(&fam, &w).unwrap();
        for (a, b) in t.0.iter().zip(&theta.0) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn coordinates_reject_foreign_kernel() {
        let mut rng = XorShift64Star::new(91);
        let fam = k2_family();
        let g3 = Arc::new(KernelGraph::complete(3).unwrap());
        let w3 = MarkovKernel::random(g3, &mut rng);
        assert!(matches!(
            coordinates_of(&fam, &w3).unwrap_err(),
            Error::GraphMismatch
        ));
    }

    #[test]
    fn e_connection_vanishes_in_theta() {
        let mut rng = XorShift64Star::new(101);
        let fam = random_family(3, 2, &mut rng);
        let theta = NaturalParam(vec![0.2, 0.4]);
        let c = connection_coefficients(&fam, &theta, Connection::Exponential).unwrap();
        assert!(c.max_abs() < 2e-4);
    }

    #[test]
    fn m_connection_vanishes_in_eta() {
        let mut rng = XorShift64Star::new(111);
        let fam = random_family(3, 2, &mut rng);
        let theta = NaturalParam(vec![0.2, -0.3]);
        let c = connection_coefficients_in_eta(&fam, &theta, Connection::Mixture).unwrap();
        assert!(c.max_abs() < 2e-4);
    }

    #[test]
    fn connections_satisfy_duality() {
        // d_k g_ij = Gamma^e_{ki,j} + Gamma^m_{kj,i}
        let mut rng = XorShift64Star::new(121);
        let fam = random_family(3, 2, &mut rng);
        let theta = NaturalParam(vec![0.1, 0.3]);
        let ce = connection_coefficients(&fam, &theta, Connection::Exponential).unwrap();
        let cm = connection_coefficients(&fam, &theta, Connection::Mixture).unwrap();
        let dg = numdiff::vector_jacobian(
            |t| {
                let g = fisher_direct(&fam, &NaturalParam(t.to_vec()))?;
                Ok(g.0.as_slice().to_vec())
            },
            theta.as_slice(),
            1e-3,
        )
        .unwrap();
        let d = 2;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    // nalgebra stores column-major: entry (i,j) sits at j*d+i
                    let lhs = dg[k][j * d + i];
                    let rhs = ce.get(k, i, j) + cm.get(k, j, i);
                    assert!((lhs - rhs).abs() < 2e-4);
                }
            }
        }
    }
}
