//! Gauss–Legendre rules on `[-1, 1]` and their affine image on a knot span.

use std::f64::consts::PI;

use thiserror::Error;

pub const MAX_POINTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("unsupported point count {0} (expected 1..={MAX_POINTS})")]
    UnsupportedOrder(usize),
    #[error("degenerate interval [{0}, {1}]")]
    DegenerateSpan(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule, QuadratureError> {
    if n == 0 || n > MAX_POINTS {
        return Err(QuadratureError::UnsupportedOrder(n));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points and weights mapped onto `[a, b]`.
    pub fn map_to_span(&self, a: f64, b: f64) -> Result<Vec<(f64, f64)>, QuadratureError> {
        if !(a < b) {
            return Err(QuadratureError::DegenerateSpan(a, b));
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (mid + half * x, half * w))
            .collect())
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> Result<f64, QuadratureError> {
        Ok(self.map_to_span(a, b)?.into_iter().map(|(x, w)| w * f(x)).sum())
    }
}
