//! Least-squares relaxation attack.
//!
//! Issues a batch of random subset queries, then minimizes
//! Σ_q (Σ_{i∈q} x_i − answer(q))² over the box [0,1]^n by projected
//! gradient descent and rounds each coordinate at 0.5. Polynomial in n where
//! brute force is exponential, at the price of a heuristic (not worst-case)
//! error guarantee.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::db::{BinaryDatabase, SubsetQuery};
use crate::error::{Error, Result};
use crate::oracle::NoisyOracle;

use super::ReconstructionResult;

/// Stopping rule for the projected gradient loop.
#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions {
    pub max_iters: usize,
    /// Stop once one iteration improves the objective by less than this.
    pub tol: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-10,
        }
    }
}

/// Draws `count` subsets uniformly from the 2^n subsets of [0, n): each
/// index joins each query independently with probability 1/2.
pub fn uniform_random_queries(n: usize, count: usize, seed: u64) -> Vec<SubsetQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| SubsetQuery::new((0..n).filter(|_| rng.gen_bool(0.5))))
        .collect()
}

/// Relax-and-round reconstruction over a prepared query batch (usually from
/// [`uniform_random_queries`]).
pub fn relax_and_round_reconstruct(
    oracle: &mut NoisyOracle,
    n: usize,
    queries: &[SubsetQuery],
    options: &RelaxOptions,
) -> Result<ReconstructionResult> {
    if queries.is_empty() {
        return Err(Error::InvalidParameter("relaxation needs at least one query".into()));
    }
    if n == 0 || n > oracle.n() {
        return Err(Error::InvalidParameter(format!(
            "length {n} invalid for oracle of length {}",
            oracle.n()
        )));
    }

    let start = Instant::now();
    let before = oracle.query_count();
    let answers: Vec<f64> = queries
        .iter()
        .map(|q| oracle.answer(q))
        .collect::<Result<_>>()?;

    // Normal-equation form: with A the 0/1 query matrix, the objective is
    // xᵀMx − 2vᵀx + const for M = AᵀA, v = Aᵀ·answers. Gradient 2(Mx − v).
    let mut gram = vec![0.0f64; n * n];
    let mut v = vec![0.0f64; n];
    for (q, &a) in queries.iter().zip(&answers) {
        let idx: Vec<usize> = q.indices().collect();
        for &i in &idx {
            v[i] += a;
            for &j in &idx {
                gram[i * n + j] += 1.0;
            }
        }
    }

    let lipschitz = 2.0 * power_iteration_lambda_max(&gram, n) * 1.05;
    let step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };

    let mut x = vec![0.5f64; n];
    let mut grad = vec![0.0f64; n];
    let mut prev = objective(&gram, &v, &x, n);
    let mut converged = false;
    for _ in 0..options.max_iters {
        // grad = 2(Mx − v), then project the step back onto [0,1]^n
        for i in 0..n {
            let row = &gram[i * n..(i + 1) * n];
            let mx: f64 = row.iter().zip(&x).map(|(m, xi)| m * xi).sum();
            grad[i] = 2.0 * (mx - v[i]);
        }
        for i in 0..n {
            x[i] = (x[i] - step * grad[i]).clamp(0.0, 1.0);
        }
        let cur = objective(&gram, &v, &x, n);
        if prev - cur < options.tol {
            converged = true;
            break;
        }
        prev = cur;
    }

    let bits = x.iter().map(|&xi| xi >= 0.5).collect(); // ties round to 1
    let mut result = ReconstructionResult::new(
        "relax-and-round",
        BinaryDatabase::from_bits(bits)?,
        oracle.query_count() - before,
        start.elapsed(),
    );
    result.converged = Some(converged);
    Ok(result)
}

/// xᵀMx − 2vᵀx (the residual norm up to a constant, enough for the
/// improvement test).
fn objective(gram: &[f64], v: &[f64], x: &[f64], n: usize) -> f64 {
    let mut quad = 0.0;
    for i in 0..n {
        let row = &gram[i * n..(i + 1) * n];
        let mx: f64 = row.iter().zip(x).map(|(m, xj)| m * xj).sum();
        quad += x[i] * mx;
    }
    let lin: f64 = v.iter().zip(x).map(|(vi, xi)| vi * xi).sum();
    quad - 2.0 * lin
}

/// Largest eigenvalue of the (symmetric PSD) Gram matrix by power iteration.
fn power_iteration_lambda_max(gram: &[f64], n: usize) -> f64 {
    // deterministic start with a small tilt so no eigenvector is missed
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) / (n as f64 + 1.0)).collect();
    let mut lambda = 0.0;
    for _ in 0..50 {
        let mut w = vec![0.0f64; n];
        for i in 0..n {
            let row = &gram[i * n..(i + 1) * n];
            w[i] = row.iter().zip(&v).map(|(m, vj)| m * vj).sum();
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for x in &mut w {
            *x /= norm;
        }
        lambda = norm;
        v = w;
    }
    lambda
}
