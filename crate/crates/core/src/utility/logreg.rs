use serde::{Deserialize, Serialize};

use super::vocab::SparseVector;
use super::UtilityError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogRegHyper {
    fn default() -> Self {
        LogRegHyper {
            learning_rate: 0.1,
            epochs: 300,
            l2: 1e-4,
        }
    }
}

/// Regularized multinomial cross-entropy over a fixed training set.
///
/// Parameters are a row-major `classes x features` weight matrix and a bias
/// per class. The loss is the mean negative log-likelihood plus
/// `l2 / 2 * ||W||^2`; biases are not penalized.
pub struct Objective<'a> {
    x: &'a [SparseVector],
    y: &'a [usize],
    n_classes: usize,
    n_features: usize,
    l2: f64,
}

impl<'a> Objective<'a> {
    pub fn new(
        x: &'a [SparseVector],
        y: &'a [usize],
        n_classes: usize,
        n_features: usize,
        l2: f64,
    ) -> Result<Self, UtilityError> {
        if x.len() != y.len() {
            return Err(UtilityError::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if let Some(v) = x.iter().find(|v| v.dim() != n_features) {
            return Err(UtilityError::DimensionMismatch {
                expected: n_features,
                found: v.dim(),
            });
        }
        assert!(y.iter().all(|&c| c < n_classes), "class index out of range");
        Ok(Objective {
            x,
            y,
            n_classes,
            n_features,
            l2,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_classes * (self.n_features + 1)
    }

    /// Loss and its gradient `(d/dW, d/db)` at the given parameters.
    pub fn loss_and_gradient(&self, weights: &[f64], bias: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let (k, f) = (self.n_classes, self.n_features);
        let n = self.x.len() as f64;
        let mut gw = vec![0.0; k * f];
        let mut gb = vec![0.0; k];
        let mut nll = 0.0;
        let mut logits = vec![0.0; k];
        for (xi, &yi) in self.x.iter().zip(self.y) {
            for c in 0..k {
                logits[c] = bias[c] + xi.dot(&weights[c * f..(c + 1) * f]);
            }
            let lse = log_sum_exp(&logits);
            nll += lse - logits[yi];
            for c in 0..k {
                let resid = (logits[c] - lse).exp() - if c == yi { 1.0 } else { 0.0 };
                gb[c] += resid / n;
                for &(j, v) in xi.entries() {
                    gw[c * f + j] += resid * v / n;
                }
            }
        }
        let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * 0.5 * self.l2;
        for (g, w) in gw.iter_mut().zip(weights) {
            *g += self.l2 * w;
        }
        (nll / n + penalty, gw, gb)
    }

    pub fn loss(&self, weights: &[f64], bias: &[f64]) -> f64 {
        self.loss_and_gradient(weights, bias).0
    }

    /// Upper bound on the Lipschitz constant of the gradient: the softmax
    /// Hessian has spectral norm at most 1/2 per sample.
    pub fn smoothness_bound(&self) -> f64 {
        let mean_sq = self.x.iter().map(|v| v.squared_norm() + 1.0).sum::<f64>() / self.x.len().max(1) as f64;
        0.5 * mean_sq + self.l2
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Softmax regression over rating classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    /// Distinct rating values in ascending order; class `c` predicts `classes[c]`.
    pub classes: Vec<f64>,
    pub n_features: usize,
    /// Row-major `classes x features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub hyper: LogRegHyper,
    pub seed: u64,
    /// Step size actually used: `min(learning_rate, 1 / L)`.
    pub step_size: f64,
    /// Training loss before each update and after the last one.
    pub loss_history: Vec<f64>,
}

impl LogRegModel {
    fn check_dim(&self, x: &SparseVector) -> Result<(), UtilityError> {
        if x.dim() != self.n_features {
            return Err(UtilityError::DimensionMismatch {
                expected: self.n_features,
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Result<Vec<f64>, UtilityError> {
        self.check_dim(x)?;
        let f = self.n_features;
        let logits: Vec<f64> = (0..self.classes.len())
            .map(|c| self.bias[c] + x.dot(&self.weights[c * f..(c + 1) * f]))
            .collect();
        let lse = log_sum_exp(&logits);
        Ok(logits.iter().map(|z| (z - lse).exp()).collect())
    }

    /// Argmax class; ties go to the lowest rating.
    pub fn predict(&self, x: &SparseVector) -> Result<f64, UtilityError> {
        let p = self.predict_proba(x)?;
        let mut best = 0;
        for c in 1..p.len() {
            if p[c] > p[best] {
                best = c;
            }
        }
        Ok(self.classes[best])
    }
}

pub fn predict_rating(model: &LogRegModel, x: &SparseVector) -> Result<f64, UtilityError> {
    model.predict(x)
}

/// Full-batch gradient descent from zero weights.
///
/// The step is capped at `1 / L` for the smoothness bound `L` of the
/// objective, which makes the per-epoch loss non-increasing. The seed is
/// recorded but unused: zero initialization and full batches are already
/// deterministic.
pub fn train_logreg(
    x: &[SparseVector],
    y: &[f64],
    hyper: LogRegHyper,
    seed: u64,
) -> Result<LogRegModel, UtilityError> {
    if x.len() != y.len() {
        return Err(UtilityError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(UtilityError::EmptyInput);
    }
    let n_features = x[0].dim();
    let mut classes: Vec<f64> = y.to_vec();
    classes.sort_by(f64::total_cmp);
    classes.dedup();
    if classes.len() < 2 {
        return Err(UtilityError::DegenerateLabels);
    }
    let labels: Vec<usize> = y
        .iter()
        .map(|v| classes.iter().position(|c| c == v).expect("label is one of the classes"))
        .collect();
    let objective = Objective::new(x, &labels, classes.len(), n_features, hyper.l2)?;
    let step = hyper.learning_rate.min(1.0 / objective.smoothness_bound());

    let k = classes.len();
    let mut weights = vec![0.0; k * n_features];
    let mut bias = vec![0.0; k];
    let mut loss_history = Vec::with_capacity(hyper.epochs + 1);
    for _ in 0..hyper.epochs {
        let (loss, gw, gb) = objective.loss_and_gradient(&weights, &bias);
        loss_history.push(loss);
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= step * g;
        }
        for (b, g) in bias.iter_mut().zip(&gb) {
            *b -= step * g;
        }
    }
    loss_history.push(objective.loss(&weights, &bias));
    Ok(LogRegModel {
        classes,
        n_features,
        weights,
        bias,
        hyper,
        seed,
        step_size: step,
        loss_history,
    })
}
