//! Fits the low-dimensional similarity curve `1 / (1 + a * x^(2b))` to the
//! piecewise target set by `min_dist` and `spread`.

use alloc::vec::Vec;

use super::ReduceError;

pub const GRID_POINTS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveFit {
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual over the fitting grid.
    pub rmse: f64,
}

/// Low-dimensional similarity for squared distance is `phi(sqrt(d2))`.
#[inline]
pub fn phi(x: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * libm::pow(x, 2.0 * b))
}

/// The `(x, y)` samples the curve is fitted to: 300 evenly spaced points on
/// `[0, 3 * spread]`, target 1 up to `min_dist` and exponential decay after.
pub fn target_curve(min_dist: f64, spread: f64) -> Vec<(f64, f64)> {
    let hi = 3.0 * spread;
    (0..GRID_POINTS)
        .map(|i| {
            let x = hi * i as f64 / (GRID_POINTS - 1) as f64;
            let y = if x <= min_dist { 1.0 } else { libm::exp(-(x - min_dist) / spread) };
            (x, y)
        })
        .collect()
}

pub fn rmse(samples: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let sse: f64 = samples.iter().map(|&(x, y)| { let r = phi(x, a, b) - y; r * r }).sum();
    libm::sqrt(sse / samples.len() as f64)
}

/// Levenberg-Marquardt least squares starting from `(1, 1)`.
pub fn fit_layout_params(min_dist: f64, spread: f64) -> Result<CurveFit, ReduceError> {
    if !(spread > 0.0) || !(min_dist >= 0.0) || min_dist >= 4.0 * spread {
        return Err(ReduceError::CurveArgs { min_dist, spread });
    }
    let samples = target_curve(min_dist, spread);
    let sse = |a: f64, b: f64| -> f64 {
        samples.iter().map(|&(x, y)| { let r = phi(x, a, b) - y; r * r }).sum()
    };

    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut cost = sse(a, b);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..1000 {
        // normal equations J^T J and J^T r
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in &samples {
            let p = if x > 0.0 { libm::pow(x, 2.0 * b) } else { 0.0 };
            let den = 1.0 + a * p;
            let r = 1.0 / den - y;
            let da = -p / (den * den);
            let db = if x > 0.0 { -a * p * 2.0 * libm::log(x) / (den * den) } else { 0.0 };
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        for _ in 0..50 {
            let m00 = jaa * (1.0 + lambda);
            let m11 = jbb * (1.0 + lambda);
            let det = m00 * m11 - jab * jab;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(m11 * ga - jab * gb) / det;
            let step_b = -(m00 * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            let nc = if na > 0.0 && nb > 0.0 { sse(na, nb) } else { f64::INFINITY };
            if nc.is_finite() && nc <= cost {
                let rel = libm::fabs(step_a) / a.max(1e-12) + libm::fabs(step_b) / b.max(1e-12);
                a = na;
                b = nb;
                let dc = cost - nc;
                cost = nc;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-12 || dc <= 1e-15 * cost.max(1e-300) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            // no downhill step at any damping: stationary point
            converged = true;
            break;
        }
    }
    if !converged || !a.is_finite() || !b.is_finite() || a <= 0.0 || b <= 0.0 {
        return Err(ReduceError::CurveFit { min_dist, spread, a, b });
    }
    Ok(CurveFit { a, b, rmse: libm::sqrt(cost / samples.len() as f64) })
}
