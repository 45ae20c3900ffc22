//! Numerical fitting of parametrized gate templates.
//!
//! A damped Gauss-Newton (Levenberg-Marquardt) loop over a real residual
//! vector, with a central-difference Jacobian. Templates here have at most a
//! few dozen parameters, so the normal equations are solved densely.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once `‖r‖` falls below this.
    pub target: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iter: 400, target: 1e-13, restarts: 40, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub params: Vec<f64>,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn jacobian(f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], m: usize) -> DMatrix<f64> {
    const H: f64 = 1e-7;
    let mut j = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + H;
        let fp = f(&xp);
        xp[k] = x[k] - H;
        let fm = f(&xp);
        xp[k] = x[k];
        for i in 0..m {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * H);
        }
    }
    j
}

/// Minimizes `‖f(x)‖` starting from `x0`.
pub fn levenberg_marquardt(f: &impl Fn(&[f64]) -> Vec<f64>, x0: &[f64], opts: &LmOptions) -> Fit {
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut cost = norm(&r);
    let mut mu = 1e-3;
    for _ in 0..opts.max_iter {
        if cost < opts.target {
            break;
        }
        let j = jacobian(f, &x, r.len());
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rn = f(&xn);
            let cn = norm(&rn);
            if cn < cost {
                x = xn;
                r = rn;
                cost = cn;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Fit { params: x, residual: cost }
}

/// Runs [`levenberg_marquardt`] from seeded random starts in `[-π, π]^n`
/// until one reaches `opts.target`; returns the best fit found.
pub fn fit_with_restarts(f: &impl Fn(&[f64]) -> Vec<f64>, n_params: usize, opts: &LmOptions) -> Fit {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = Fit { params: vec![0.0; n_params], residual: f64::INFINITY };
    for _ in 0..opts.restarts.max(1) {
        let x0: Vec<f64> = (0..n_params)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let fit = levenberg_marquardt(f, &x0, opts);
        if fit.residual < best.residual {
            best = fit;
        }
        if best.residual < opts.target {
            break;
        }
    }
    best
}

/// Real residual vector `vec(m − target)` split into real and imaginary parts.
pub fn matrix_residual(m: &ComplexMatrix, target: &ComplexMatrix) -> Vec<f64> {
    m.as_slice()
        .iter()
        .zip(target.as_slice())
        .flat_map(|(a, b)| {
            let d = a - b;
            [d.re, d.im]
        })
        .collect()
}

/// Like [`matrix_residual`] but against `e^{iγ}·target` with the optimal γ.
pub fn matrix_residual_up_to_phase(m: &ComplexMatrix, target: &ComplexMatrix) -> Vec<f64> {
    let ph = crate::linalg::best_phase(m, target);
    matrix_residual(m, &target.scale(ph))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_a_rosenbrock_valley() {
        let f = |x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]];
        let fit = levenberg_marquardt(&f, &[-1.2, 1.0], &LmOptions::default());
        assert!(fit.residual < 1e-10);
        assert!((fit.params[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn restarts_are_deterministic() {
        let f = |x: &[f64]| vec![x[0].sin() - 0.3, x[1].cos() - 0.2];
        let o = LmOptions { seed: 9, ..LmOptions::default() };
        let a = fit_with_restarts(&f, 2, &o);
        let b = fit_with_restarts(&f, 2, &o);
        assert_eq!(a.params, b.params);
        assert!(a.residual < 1e-12);
    }
}
