//! Limited-memory BFGS with a backtracking Armijo line search.
//!
//! Fully deterministic: no randomness, fixed evaluation order. Every accepted
//! step strictly decreases the objective, so running longer never ends at a
//! higher value.

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

const MEMORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `‖∇‖_max` fell below the tolerance.
    GradTol,
    MaxIter,
    /// No step along the search direction decreased the objective.
    LineSearch,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: DVector<f64>,
    pub value: f64,
    pub grad_max: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

/// Minimise `f` from `x0`. `f` returns `(value, gradient)`; a non-finite value
/// aborts with `Err(last finite value)`.
pub fn minimize<F>(mut f: F, x0: DVector<f64>, max_iter: usize, grad_tol: f64) -> Result<Outcome, f64>
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() {
        return Err(f64::NAN);
    }
    let mut hist: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut iterations = 0;
    let stop = loop {
        if g.amax() <= grad_tol {
            break StopReason::GradTol;
        }
        if iterations >= max_iter {
            break StopReason::MaxIter;
        }

        let mut d = two_loop(&g, &hist);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            hist.clear();
            d = -&g;
            slope = g.dot(&d);
        }
        let mut t = if hist.is_empty() { 1.0 / g.norm().max(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let x_new = &x + &d * t;
            let (f_new, g_new) = f(&x_new);
            if !f_new.is_finite() {
                return Err(fx);
            }
            if f_new <= fx + ARMIJO_C1 * t * slope && f_new < fx {
                accepted = Some((x_new, f_new, g_new));
                break;
            }
            t *= BACKTRACK;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break StopReason::LineSearch;
        };

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * y.norm_squared().max(f64::MIN_POSITIVE) {
            if hist.len() == MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        iterations += 1;
    };
    Ok(Outcome { grad_max: g.amax(), x, value: fx, iterations, stop })
}

fn two_loop(g: &DVector<f64>, hist: &VecDeque<(DVector<f64>, DVector<f64>, f64)>) -> DVector<f64> {
    let mut q = g.clone();
    let mut alpha = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alpha.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        q *= s.dot(y) / y.norm_squared();
    }
    for ((s, y, rho), a) in hist.iter().zip(alpha.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.axpy(a - b, s, 1.0);
    }
    -q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimises_rosenbrock() {
        let rosen = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ]);
            (f, g)
        };
        let out = minimize(rosen, DVector::from_vec(vec![-1.2, 1.0]), 500, 1e-8).unwrap();
        assert_eq!(out.stop, StopReason::GradTol);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reports_non_finite() {
        let f = |_: &DVector<f64>| (f64::NAN, DVector::zeros(1));
        assert!(minimize(f, DVector::zeros(1), 10, 1e-6).is_err());
    }
}
