//! L2-regularized logistic regression.
//!
//! Objective: mean log-loss over documents plus `lambda / 2 * |w|^2`; the
//! bias is not penalized.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::DocTermMatrix;

use super::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// Fixed step, halved whenever a step would raise the loss.
    GradientDescent { step: f64 },
    /// Limited-memory BFGS with backtracking (Armijo) line search.
    Lbfgs { memory: usize },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Lbfgs { memory: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrOptions {
    pub schedule: Schedule,
    /// Converged once the gradient's Euclidean norm drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LrOptions {
    fn default() -> Self {
        Self {
            schedule: Schedule::default(),
            tolerance: 1e-6,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticRegression {
    pub fn n_terms(&self) -> usize {
        self.weights.len()
    }

    pub fn margin(&self, row: &[(u32, u32)]) -> f64 {
        self.bias
            + row
                .iter()
                .map(|&(t, c)| self.weights[t as usize] * f64::from(c))
                .sum::<f64>()
    }

    pub fn score(&self, row: &[(u32, u32)]) -> f64 {
        sigmoid(self.margin(row))
    }
}

/// Loss trajectory of one fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace {
    pub losses: Vec<f64>,
    pub grad_norm: f64,
}

/// Parameters packed as `[w_0 .. w_{V-1}, bias]`.
pub struct Objective<'a> {
    matrix: &'a DocTermMatrix,
    targets: Vec<f64>,
    lambda: f64,
}

// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl<'a> Objective<'a> {
    pub fn new(matrix: &'a DocTermMatrix, labels: &[bool], lambda: f64) -> Self {
        Self {
            matrix,
            targets: labels.iter().map(|&l| f64::from(u8::from(l))).collect(),
            lambda,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.n_terms() + 1
    }

    fn margin(&self, params: &[f64], row: &[(u32, u32)]) -> f64 {
        let bias = params[params.len() - 1];
        bias + row
            .iter()
            .map(|&(t, c)| params[t as usize] * f64::from(c))
            .sum::<f64>()
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let n = self.targets.len() as f64;
        let data: f64 = self
            .matrix
            .rows()
            .iter()
            .zip(&self.targets)
            .map(|(row, &y)| {
                let z = self.margin(params, row);
                softplus(z) - y * z
            })
            .sum();
        let w = &params[..params.len() - 1];
        data / n + 0.5 * self.lambda * w.iter().map(|x| x * x).sum::<f64>()
    }

    /// Loss and its gradient.
    pub fn evaluate(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let n = self.targets.len() as f64;
        let v = params.len() - 1;
        let mut grad = vec![0.0; params.len()];
        let mut data = 0.0;
        for (row, &y) in self.matrix.rows().iter().zip(&self.targets) {
            let z = self.margin(params, row);
            data += softplus(z) - y * z;
            let residual = (sigmoid(z) - y) / n;
            for &(t, c) in row {
                grad[t as usize] += residual * f64::from(c);
            }
            grad[v] += residual;
        }
        let mut penalty = 0.0;
        for (g, w) in grad[..v].iter_mut().zip(&params[..v]) {
            *g += self.lambda * w;
            penalty += w * w;
        }
        (data / n + 0.5 * self.lambda * penalty, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

pub fn train_lr(
    matrix: &DocTermMatrix,
    labels: &[bool],
    lambda: f64,
    options: &LrOptions,
) -> Result<(LogisticRegression, FitTrace)> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} must be non-negative"
        )));
    }
    if labels.len() != matrix.n_docs() || labels.is_empty() {
        return Err(Error::InvalidArgument(
            "one label per document required".into(),
        ));
    }
    let objective = Objective::new(matrix, labels, lambda);
    let start = vec![0.0; objective.dim()];
    let (params, trace) = match options.schedule {
        Schedule::GradientDescent { step } => gradient_descent(&objective, start, step, options)?,
        Schedule::Lbfgs { memory } => lbfgs(&objective, start, memory.max(1), options)?,
    };
    let bias = params[params.len() - 1];
    let mut weights = params;
    weights.pop();
    Ok((
        LogisticRegression {
            lambda,
            weights,
            bias,
        },
        trace,
    ))
}

fn gradient_descent(
    objective: &Objective,
    mut params: Vec<f64>,
    mut step: f64,
    options: &LrOptions,
) -> Result<(Vec<f64>, FitTrace)> {
    let (mut loss, mut grad) = objective.evaluate(&params);
    let mut trace = FitTrace {
        losses: vec![loss],
        grad_norm: norm(&grad),
    };
    for _ in 0..options.max_iterations {
        if trace.grad_norm < options.tolerance {
            return Ok((params, trace));
        }
        let candidate = axpy(&params, -step, &grad);
        let (c_loss, c_grad) = objective.evaluate(&candidate);
        if c_loss > loss {
            step *= 0.5;
            if step < 1e-300 {
                break;
            }
            continue;
        }
        params = candidate;
        loss = c_loss;
        grad = c_grad;
        trace.losses.push(loss);
        trace.grad_norm = norm(&grad);
    }
    if trace.grad_norm < options.tolerance {
        return Ok((params, trace));
    }
    Err(Error::NotConverged {
        iterations: options.max_iterations,
        grad_norm: trace.grad_norm,
    })
}

fn lbfgs(
    objective: &Objective,
    mut params: Vec<f64>,
    memory: usize,
    options: &LrOptions,
) -> Result<(Vec<f64>, FitTrace)> {
    const ARMIJO: f64 = 1e-4;
    let (mut loss, mut grad) = objective.evaluate(&params);
    let mut trace = FitTrace {
        losses: vec![loss],
        grad_norm: norm(&grad),
    };
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let mut iterations = 0;
    while iterations < options.max_iterations {
        if trace.grad_norm < options.tolerance {
            return Ok((params, trace));
        }
        iterations += 1;

        // Two-loop recursion for the search direction.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q = axpy(&q, -a, y);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|x| *x *= gamma);
        } else {
            let scale = 1.0 / trace.grad_norm.max(1.0);
            q.iter_mut().for_each(|x| *x *= scale);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q = axpy(&q, a - b, s);
        }
        let mut direction: Vec<f64> = q.iter().map(|x| -x).collect();
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            history.clear();
            direction = grad.iter().map(|g| -g / trace.grad_norm.max(1.0)).collect();
            slope = dot(&grad, &direction);
        }

        let mut t = 1.0;
        let accepted = loop {
            let candidate = axpy(&params, t, &direction);
            let c_loss = objective.loss(&candidate);
            if c_loss <= loss + ARMIJO * t * slope {
                break Some(candidate);
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some(candidate) = accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };
        let (c_loss, c_grad) = objective.evaluate(&candidate);
        let s: Vec<f64> = candidate.iter().zip(&params).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = c_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if history.len() == memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        params = candidate;
        loss = c_loss;
        grad = c_grad;
        trace.losses.push(loss);
        trace.grad_norm = norm(&grad);
    }
    if trace.grad_norm < options.tolerance {
        return Ok((params, trace));
    }
    Err(Error::NotConverged {
        iterations,
        grad_norm: trace.grad_norm,
    })
}
