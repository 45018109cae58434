//! Pegasos-style subgradient trainer for the linear soft-margin classifier.
//!
//! Objective, with the bias treated as a regularized coordinate:
//!
//! ```text
//! J(w, b) = lambda/2 (|w|^2 + b^2) + 1/n sum_i max(0, 1 - y_i (w.x_i + b))
//! ```
//!
//! with `lambda = 1/(C*n)`. One update per example per epoch, in an order
//! fixed by a seeded shuffle, at step size `1/(lambda*t)` where `t` counts
//! updates from 1. The returned weights are the best epoch-end iterate by
//! objective value, so the result never scores worse than the zero vector.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_shapes, common_fingerprint, LinearModel, TrainConfig};
use crate::error::Result;
use crate::features::FeatureVector;

/// Dense-block standardization statistics (population mean and std; constant
/// columns keep std 1 so they standardize to zero).
fn dense_stats(vectors: &[FeatureVector], dense_dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = vectors.len() as f64;
    let mut mean = vec![0.0; dense_dim];
    for v in vectors {
        for (j, x) in v.dense.iter().enumerate() {
            mean[j] += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut std = vec![0.0; dense_dim];
    for v in vectors {
        for (j, x) in v.dense.iter().enumerate() {
            let d = x - mean[j];
            std[j] += d * d;
        }
    }
    for s in &mut std {
        *s = (*s / n).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    (mean, std)
}

/// A vector standardized and flattened to (sparse pairs, dense values) with
/// dense coordinates offset by `sparse_dim`.
struct Example {
    coords: Vec<(usize, f64)>,
    y: f64,
}

fn dot(weights: &[f64], ex: &Example) -> f64 {
    ex.coords.iter().map(|&(i, v)| weights[i] * v).sum()
}

/// Value of the regularized hinge objective at `(weights, bias)`.
///
/// `xs` are taken as-is (no standardization); `sparse_dim` fixes where the
/// dense block starts inside `weights`.
pub fn svm_objective(
    weights: &[f64],
    bias: f64,
    sparse_dim: usize,
    xs: &[FeatureVector],
    ys: &[f64],
    lambda: f64,
) -> f64 {
    let n = xs.len() as f64;
    let mut hinge = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let mut s = bias;
        for &(i, v) in &x.sparse {
            s += weights[i as usize] * v;
        }
        for (j, &v) in x.dense.iter().enumerate() {
            s += weights[sparse_dim + j] * v;
        }
        hinge += (1.0 - y * s).max(0.0);
    }
    let norm2 = weights.iter().map(|w| w * w).sum::<f64>() + bias * bias;
    lambda / 2.0 * norm2 + hinge / n
}

/// Subgradient of [`svm_objective`] at `(weights, bias)`, using the
/// `margin < 1` convention at the hinge kink. Returns `(grad_w, grad_b)`.
pub fn svm_gradient(
    weights: &[f64],
    bias: f64,
    sparse_dim: usize,
    xs: &[FeatureVector],
    ys: &[f64],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut grad: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    let mut grad_b = lambda * bias;
    for (x, &y) in xs.iter().zip(ys) {
        let mut s = bias;
        for &(i, v) in &x.sparse {
            s += weights[i as usize] * v;
        }
        for (j, &v) in x.dense.iter().enumerate() {
            s += weights[sparse_dim + j] * v;
        }
        if y * s < 1.0 {
            for &(i, v) in &x.sparse {
                grad[i as usize] -= y * v / n;
            }
            for (j, &v) in x.dense.iter().enumerate() {
                grad[sparse_dim + j] -= y * v / n;
            }
            grad_b -= y / n;
        }
    }
    (grad, grad_b)
}

pub(super) fn train_binary(
    vectors: &[FeatureVector],
    ys: &[f64],
    config: &TrainConfig,
) -> Result<LinearModel> {
    let fingerprint = common_fingerprint(vectors)?;
    let (sparse_dim, dense_dim) = check_shapes(vectors)?;
    let dim = sparse_dim + dense_dim;
    let n = vectors.len();
    let lambda = 1.0 / (config.c * n as f64);

    let (mean, std) = dense_stats(vectors, dense_dim);
    let examples: Vec<Example> = vectors
        .iter()
        .zip(ys)
        .map(|(v, &y)| {
            let mut coords: Vec<(usize, f64)> =
                v.sparse.iter().map(|&(i, x)| (i as usize, x)).collect();
            for (j, &x) in v.dense.iter().enumerate() {
                coords.push((sparse_dim + j, (x - mean[j]) / std[j]));
            }
            Example { coords, y }
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);

    // w is kept as s*v so the per-update decay is O(1)
    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;

    let objective_of = |v: &[f64], scale: f64, bias: f64| {
        let n_f = n as f64;
        let mut hinge = 0.0;
        for ex in &examples {
            let s = scale * dot(v, ex) + bias;
            hinge += (1.0 - ex.y * s).max(0.0);
        }
        let norm2 = scale * scale * v.iter().map(|w| w * w).sum::<f64>() + bias * bias;
        lambda / 2.0 * norm2 + hinge / n_f
    };

    let mut best_obj = objective_of(&v, scale, bias); // zero weights: 1.0
    let mut best_w = vec![0.0f64; dim];
    let mut best_bias = 0.0f64;
    let mut prev_obj = f64::INFINITY;
    let mut epochs_run = 0u32;

    let mut t = 1u64;
    for epoch in 0..config.max_epochs {
        for &i in &order {
            let ex = &examples[i];
            let margin = ex.y * (scale * dot(&v, ex) + bias);
            let eta = 1.0 / (lambda * t as f64);
            let decay = 1.0 - 1.0 / t as f64;
            if t == 1 {
                // the iterate is still the zero vector; decay is a no-op
            } else {
                scale *= decay;
                bias *= decay;
            }
            if margin < 1.0 {
                let step = eta * ex.y;
                for &(j, x) in &ex.coords {
                    v[j] += step * x / scale;
                }
                bias += step;
            }
            if scale < 1e-9 {
                for w in &mut v {
                    *w *= scale;
                }
                scale = 1.0;
            }
            t += 1;
        }
        epochs_run = epoch + 1;
        let obj = objective_of(&v, scale, bias);
        if obj < best_obj {
            best_obj = obj;
            best_w = v.iter().map(|w| w * scale).collect();
            best_bias = bias;
        }
        if (prev_obj - obj).abs() <= config.tol {
            break;
        }
        prev_obj = obj;
    }

    Ok(LinearModel {
        weights: best_w,
        bias: best_bias,
        sparse_dim,
        dense_mean: mean,
        dense_std: std,
        fingerprint,
        config: config.clone(),
        objective: best_obj,
        epochs_run,
    })
}
