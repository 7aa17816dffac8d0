//! Independent oracles for the integration tests: reachability by
//! Floyd-Warshall, stationary vectors by dense linear solve, Perron roots
//! by characteristic polynomials and QR iteration, and local finite
//! differences. These deliberately avoid the library's own solver paths.

use std::sync::Arc;

use markov_infogeo::graph::{KernelGraph, MarkovKernel};
use markov_infogeo::rng::XorShift64Star;
use nalgebra::DMatrix;

/// All-pairs reachability closure.
pub fn floyd_warshall(num_states: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; num_states]; num_states];
    for x in 0..num_states {
        reach[x][x] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..num_states {
        for i in 0..num_states {
            for j in 0..num_states {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach
}

pub fn strongly_connected_by_closure(num_states: usize, edges: &[(usize, usize)]) -> bool {
    let reach = floyd_warshall(num_states, edges);
    (0..num_states).all(|i| (0..num_states).all(|j| reach[i][j]))
}

/// Stationary vector by replacing one balance equation with the total-mass
/// constraint and solving densely.
pub fn stationary_by_linear_solve(w: &MarkovKernel) -> Vec<f64> {
    let n = w.graph().num_states();
    let mut a = DMatrix::zeros(n, n);
    // rows: (W^T - I) p = 0 for the first n-1 states, then sum p = 1
    for (k, &(x, y)) in w.graph().edges().iter().enumerate() {
        if y < n - 1 {
            a[(y, x)] += w.probs()[k];
        }
    }
    for x in 0..n {
        if x < n - 1 {
            a[(x, x)] -= 1.0;
        }
        a[(n - 1, x)] = 1.0;
    }
    let mut b = nalgebra::DVector::zeros(n);
    b[n - 1] = 1.0;
    let p = a.lu().solve(&b).expect("irreducible kernel");
    p.as_slice().to_vec()
}

/// Perron root of a positive 2x2 matrix by the quadratic formula.
pub fn perron_root_2x2(m: &DMatrix<f64>) -> f64 {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0
}

/// Largest real eigenvalue of a 3x3 nonnegative matrix via the
/// trigonometric solution of the characteristic cubic.
pub fn perron_root_3x3(m: &DMatrix<f64>) -> f64 {
    // characteristic polynomial: lambda^3 - c2 lambda^2 + c1 lambda - c0
    let c2 = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let minor = |i: usize, j: usize, k: usize, l: usize| m[(i, i)] * m[(j, j)]
        - m[(k, l)] * m[(l, k)];
    let c1 = minor(0, 1, 0, 1) + minor(0, 2, 0, 2) + minor(1, 2, 1, 2);
    let c0 = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
    // depressed cubic t^3 + pt + q with lambda = t + c2/3
    let p = c1 - c2 * c2 / 3.0;
    let q = -c0 + c1 * c2 / 3.0 - 2.0 * c2 * c2 * c2 / 27.0;
    let shift = c2 / 3.0;
    if p.abs() < 1e-300 {
        return shift + (-q).cbrt();
    }
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc >= 0.0 {
        // three real roots; the Perron root is the largest
        let r = 2.0 * (-p / 3.0).sqrt();
        let phi = (3.0 * q / (p * r)).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| shift + r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        // one real root (Cardano)
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        shift + (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    }
}

/// Spectral radius by unshifted QR iteration; adequate for the small
/// positive matrices the tests use.
pub fn spectral_radius_by_qr(m: &DMatrix<f64>, sweeps: usize) -> f64 {
    let mut a = m.clone();
    for _ in 0..sweeps {
        let qr = a.qr();
        let q = qr.q();
        let r = qr.r();
        a = r * q;
    }
    (0..a.nrows()).map(|i| a[(i, i)]).fold(f64::NEG_INFINITY, f64::max)
}

/// Central-difference gradient used as a test-local oracle.
pub fn fd_gradient<F>(f: F, x: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut out = Vec::with_capacity(x.len());
    let mut pt = x.to_vec();
    for i in 0..x.len() {
        let h = step * (1.0 + x[i].abs());
        pt[i] = x[i] + h;
        let fp = f(&pt);
        pt[i] = x[i] - h;
        let fm = f(&pt);
        pt[i] = x[i];
        out.push((fp - fm) / (2.0 * h));
    }
    out
}

/// Central-difference Jacobian of a vector map, `out[k][.] = d f / d x_k`.
pub fn fd_jacobian<F>(f: F, x: &[f64], step: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut out = Vec::with_capacity(x.len());
    let mut pt = x.to_vec();
    for k in 0..x.len() {
        let h = step * (1.0 + x[k].abs());
        pt[k] = x[k] + h;
        let fp = f(&pt);
        pt[k] = x[k] - h;
        let fm = f(&pt);
        pt[k] = x[k];
        out.push(
            fp.iter()
                .zip(&fm)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect(),
        );
    }
    out
}

/// Cycle-plus-random-chords strongly connected sparse graph.
pub fn sparse_graph(n: usize, rng: &mut XorShift64Star) -> Arc<KernelGraph> {
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for a in 0..n {
        for b in 0..n {
            if a != b && !edges.contains(&(a, b)) && rng.uniform() < 0.3 {
                edges.push((a, b));
            }
        }
    }
    Arc::new(KernelGraph::from_indexed((0..n).map(|i| i.to_string()).collect(), edges).unwrap())
}
