//! Central finite differences used for derivatives of family quantities.
//!
//! Steps are relative: h_i = base * (1 + |x_i|). The Hessian helper applies
//! one level of Richardson extrapolation.

use nalgebra::DMatrix;

use crate::error::Result;

pub const GRAD_STEP: f64 = 1e-5;
// 1e-3 keeps the Richardson combination's roundoff amplification below
// the 1e-7 accuracy the Hessian route must reach; truncation is O(h^4)
// after extrapolation and stays negligible
pub const HESS_STEP: f64 = 1e-3;
pub const CONN_STEP: f64 = 1e-4;

pub fn steps(x: &[f64], base: f64) -> Vec<f64> {
    x.iter().map(|v| base * (1.0 + v.abs())).collect()
}

/// Gradient of a scalar function by central differences.
pub fn gradient<F>(f: F, x: &[f64], base: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let hs = steps(x, base);
    let mut out = Vec::with_capacity(x.len());
    let mut pt = x.to_vec();
    for i in 0..x.len() {
        pt[i] = x[i] + hs[i];
        let fp = f(&pt)?;
        pt[i] = x[i] - hs[i];
        let fm = f(&pt)?;
        pt[i] = x[i];
        out.push((fp - fm) / (2.0 * hs[i]));
    }
    Ok(out)
}

/// Hessian of a scalar function by central second differences at step `h`.
fn hessian_at<F>(f: &F, x: &[f64], hs: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let d = x.len();
    let f0 = f(x)?;
    let mut h = DMatrix::zeros(d, d);
    let mut pt = x.to_vec();
    for i in 0..d {
        pt[i] = x[i] + hs[i];
        let fp = f(&pt)?;
        pt[i] = x[i] - hs[i];
        let fm = f(&pt)?;
        pt[i] = x[i];
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (hs[i] * hs[i]);
        for j in (i + 1)..d {
            pt[i] = x[i] + hs[i];
            pt[j] = x[j] + hs[j];
            let fpp = f(&pt)?;
            pt[j] = x[j] - hs[j];
            let fpm = f(&pt)?;
            pt[i] = x[i] - hs[i];
            let fmm = f(&pt)?;
            pt[j] = x[j] + hs[j];
            let fmp = f(&pt)?;
            pt[i] = x[i];
            pt[j] = x[j];
            let v = (fpp + fmm - fpm - fmp) / (4.0 * hs[i] * hs[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Hessian with one Richardson level: (4 H_{h/2} - H_h) / 3.
pub fn hessian_richardson<F>(f: F, x: &[f64], base: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let hs = steps(x, base);
    let coarse = hessian_at(&f, x, &hs)?;
    let halved: Vec<f64> = hs.iter().map(|h| h / 2.0).collect();
    let fine = hessian_at(&f, x, &halved)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// First partials of a vector-valued function: out[k] = d f / d x_k.
pub fn vector_jacobian<F>(f: F, x: &[f64], base: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let hs = steps(x, base);
    let mut out = Vec::with_capacity(x.len());
    let mut pt = x.to_vec();
    for k in 0..x.len() {
        pt[k] = x[k] + hs[k];
        let fp = f(&pt)?;
        pt[k] = x[k] - hs[k];
        let fm = f(&pt)?;
        pt[k] = x[k];
        out.push(
            fp.iter()
                .zip(&fm)
                .map(|(p, m)| (p - m) / (2.0 * hs[k]))
                .collect(),
        );
    }
    Ok(out)
}

/// Second partials of a vector-valued function: out[(i,j)] = d^2 f / dx_i dx_j
/// for i <= j.
pub fn vector_second_partials<F>(
    f: F,
    x: &[f64],
    base: f64,
) -> Result<Vec<((usize, usize), Vec<f64>)>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let d = x.len();
    let hs = steps(x, base);
    let f0 = f(x)?;
    let mut out = Vec::new();
    let mut pt = x.to_vec();
    for i in 0..d {
        pt[i] = x[i] + hs[i];
        let fp = f(&pt)?;
        pt[i] = x[i] - hs[i];
        let fm = f(&pt)?;
        pt[i] = x[i];
        let diag = fp
            .iter()
            .zip(&fm)
            .zip(&f0)
            .map(|((p, m), z)| (p - 2.0 * z + m) / (hs[i] * hs[i]))
            .collect();
        out.push(((i, i), diag));
        for j in (i + 1)..d {
            pt[i] = x[i] + hs[i];
            pt[j] = x[j] + hs[j];
            let fpp = f(&pt)?;
            pt[j] = x[j] - hs[j];
            let fpm = f(&pt)?;
            pt[i] = x[i] - hs[i];
            let fmm = f(&pt)?;
            pt[j] = x[j] + hs[j];
            let fmp = f(&pt)?;
            pt[i] = x[i];
            pt[j] = x[j];
            let mixed = (0..fpp.len())
                .map(|e| (fpp[e] + fmm[e] - fpm[e] - fmp[e]) / (4.0 * hs[i] * hs[j]))
                .collect();
            out.push(((i, j), mixed));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &[f64]| Ok(x[0] * x[0] + 3.0 * x[0] * x[1]);
        let g = gradient(f, &[1.0, 2.0], 1e-5).unwrap();
        assert!((g[0] - 8.0).abs() < 1e-9);
        assert!((g[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn hessian_of_smooth_function() {
        let f = |x: &[f64]| Ok((x[0] * x[1]).sin());
        let h = hessian_richardson(f, &[0.3, -0.2], HESS_STEP).unwrap();
        let (a, b): (f64, f64) = (0.3, -0.2);
        let s = (a * b).sin();
        let c = (a * b).cos();
        assert!((h[(0, 0)] - (-b * b * s)).abs() < 5e-9);
        assert!((h[(1, 1)] - (-a * a * s)).abs() < 5e-9);
        assert!((h[(0, 1)] - (c - a * b * s)).abs() < 5e-9);
    }
}
