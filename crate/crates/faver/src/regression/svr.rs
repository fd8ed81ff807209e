//! Epsilon-insensitive support vector regression via sequential dual
//! optimization.
//!
//! The dual is minimized over `2n` box-constrained variables (one
//! positive-side and one negative-side multiplier per sample) under the
//! single equality constraint, using maximal-violating-pair working-set
//! selection: each step picks the most violating pair of the KKT conditions
//! and solves the two-variable subproblem analytically. Training stops when
//! the maximal violation drops below [`KKT_TOL`] or after [`MAX_ITER`]
//! iterations — non-convergence is reported on the model, not an error.
//!
//! Inputs are standardized per dimension before training; zero-variance
//! dimensions are dropped deterministically and recorded on the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// KKT stopping tolerance of the dual solver.
pub const KKT_TOL: f64 = 1e-3;

/// Iteration cap of the dual solver.
pub const MAX_ITER: usize = 100_000;

/// Dimensions with a standard deviation below this are treated as constant.
const STD_FLOOR: f64 = 1e-12;

/// Kernel of an SVR model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    fn apply(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// Hyperparameters for one SVR training run. `epsilon: None` resolves to
/// `0.1 * std(y)` at train time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyperparams {
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: Option<f64>,
}

/// A trained SVR branch with its standardization and solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: f64,
    /// Training-set mean per retained dimension.
    pub mean: Vec<f64>,
    /// Training-set standard deviation per retained dimension (population).
    pub std: Vec<f64>,
    /// Indices of retained (non-constant) dimensions in the input vectors.
    pub kept_dims: Vec<usize>,
    /// Standardized support vectors.
    pub support_vectors: Vec<Vec<f64>>,
    /// Dual coefficients (alpha - alpha*), one per support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Final maximal KKT violation of the dual.
    pub final_violation: f64,
    /// Final value of the minimized dual objective.
    pub dual_objective: f64,
}

impl SvrModel {
    /// Predicts one sample given the full-dimensional feature vector.
    pub fn predict_one(&self, features: &[f64]) -> Result<f64> {
        let z = self.standardize(features)?;
        let mut f = self.bias;
        for (sv, &coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            f += coef * self.kernel.apply(sv, &z);
        }
        Ok(f)
    }

    fn standardize(&self, features: &[f64]) -> Result<Vec<f64>> {
        let mut z = Vec::with_capacity(self.kept_dims.len());
        for (k, &dim) in self.kept_dims.iter().enumerate() {
            let v = *features.get(dim).ok_or_else(|| {
                Error::Data(format!("feature vector has no dimension {dim}"))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!("non-finite feature at dimension {dim}")));
            }
            z.push((v - self.mean[k]) / self.std[k]);
        }
        Ok(z)
    }
}

/// Trains an epsilon-SVR on rows `x` with targets `y`.
pub fn train_svr(x: &[Vec<f64>], y: &[f64], params: &SvrHyperparams) -> Result<SvrModel> {
    let n = x.len();
    if n < 8 {
        return Err(Error::InvalidInput(format!("{n} samples; at least 8 are required")));
    }
    if y.len() != n {
        return Err(Error::InvalidInput("x and y row counts differ".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite training target".into()));
    }
    let d = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Data(format!("row {i} has {} dims, expected {d}", row.len())));
        }
        if let Some(dim) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature in row {i}, dimension {dim}")));
        }
    }
    if !(params.c.is_finite() && params.c > 0.0) {
        return Err(Error::InvalidInput(format!("C must be positive, got {}", params.c)));
    }

    // Per-dimension standardization on the training set only.
    let nf = n as f64;
    let mut kept_dims = Vec::new();
    let mut mean = Vec::new();
    let mut std = Vec::new();
    for dim in 0..d {
        let m = x.iter().map(|r| r[dim]).sum::<f64>() / nf;
        let var = x.iter().map(|r| (r[dim] - m) * (r[dim] - m)).sum::<f64>() / nf;
        let s = var.sqrt();
        if s > STD_FLOOR {
            kept_dims.push(dim);
            mean.push(m);
            std.push(s);
        }
    }
    let z: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            kept_dims
                .iter()
                .enumerate()
                .map(|(k, &dim)| (row[dim] - mean[k]) / std[k])
                .collect()
        })
        .collect();

    let y_mean = y.iter().sum::<f64>() / nf;
    let y_std = (y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / nf).sqrt();
    let epsilon = match params.epsilon {
        Some(e) if e.is_finite() && e >= 0.0 => e,
        Some(e) => return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {e}"))),
        None => 0.1 * y_std,
    };

    let kernel = params.kernel;
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let k = kernel.apply(&z[i], &z[j]);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }

    let solution = solve_dual(&gram, y, params.c, epsilon);

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, &beta) in solution.beta.iter().enumerate() {
        if beta != 0.0 {
            support_vectors.push(z[i].clone());
            dual_coefs.push(beta);
        }
    }

    Ok(SvrModel {
        kernel,
        c: params.c,
        epsilon,
        mean,
        std,
        kept_dims,
        support_vectors,
        dual_coefs,
        bias: solution.bias,
        converged: solution.converged,
        iterations: solution.iterations,
        final_violation: solution.violation,
        dual_objective: solution.objective,
    })
}

struct DualSolution {
    beta: Vec<f64>,
    bias: f64,
    converged: bool,
    iterations: usize,
    violation: f64,
    objective: f64,
}

/// Minimizes `1/2 z'Qz + p'z` over `z in [0, C]^{2n}`, `sum(s_t z_t) = 0`,
/// where `t < n` are the positive-side multipliers (`s = +1`) and `t >= n`
/// the negative-side ones (`s = -1`), `Q[t,u] = s_t s_u K[i,j]`, and
/// `p[t] = eps - y_i` / `eps + y_i` respectively.
fn solve_dual(gram: &[f64], y: &[f64], c: f64, eps: f64) -> DualSolution {
    let n = y.len();
    let m = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let row = |t: usize| t % n;

    let mut z = vec![0.0; m];
    let mut grad: Vec<f64> = (0..m)
        .map(|t| if t < n { eps - y[t] } else { eps + y[t - n] })
        .collect();

    let mut iterations = 0usize;
    let mut violation = f64::INFINITY;
    let mut converged = false;

    while iterations < MAX_ITER {
        // Maximal violating pair over -s_t * grad_t.
        let mut up_best = f64::NEG_INFINITY;
        let mut up_idx = usize::MAX;
        let mut low_best = f64::INFINITY;
        let mut low_idx = usize::MAX;
        for t in 0..m {
            let s = sign(t);
            let v = -s * grad[t];
            let in_up = if s > 0.0 { z[t] < c } else { z[t] > 0.0 };
            let in_low = if s > 0.0 { z[t] > 0.0 } else { z[t] < c };
            if in_up && v > up_best {
                up_best = v;
                up_idx = t;
            }
            if in_low && v < low_best {
                low_best = v;
                low_idx = t;
            }
        }
        violation = up_best - low_best;
        if violation <= KKT_TOL || up_idx == usize::MAX || low_idx == usize::MAX {
            converged = violation <= KKT_TOL;
            break;
        }
        iterations += 1;

        let (i, j) = (up_idx, low_idx);
        let (si, sj) = (sign(i), sign(j));
        let kii = gram[row(i) * n + row(i)];
        let kjj = gram[row(j) * n + row(j)];
        let kij = gram[row(i) * n + row(j)];
        // The pair direction z_i += si*d, z_j -= sj*d changes beta by
        // (+d, -d) regardless of the sides, so the curvature has no sign
        // factors. Zero curvature (duplicate rows) descends to the box edge.
        let quad = (kii + kjj - 2.0 * kij).max(1e-12);
        let mut delta = (up_best - low_best) / quad;

        // Box limits along the direction.
        let room_i = if si > 0.0 { c - z[i] } else { z[i] };
        let room_j = if sj > 0.0 { z[j] } else { c - z[j] };
        delta = delta.min(room_i).min(room_j);

        z[i] += si * delta;
        z[j] -= sj * delta;

        let di = si * delta;
        let dj = -sj * delta;
        let (ri, rj) = (row(i), row(j));
        for (t, g) in grad.iter_mut().enumerate() {
            let st = sign(t);
            let rt = row(t);
            *g += st * (si * gram[rt * n + ri] * di + sj * gram[rt * n + rj] * dj);
        }
    }
    if iterations >= MAX_ITER && !converged {
        eprintln!(
            "warning: SVR dual solver stopped after {MAX_ITER} iterations \
             with KKT violation {violation:.3e}"
        );
    }

    // beta_i = alpha_i - alpha*_i.
    let beta: Vec<f64> = (0..n).map(|i| z[i] - z[i + n]).collect();

    // Bias from free variables; fall back to the midpoint of the feasible
    // interval when every multiplier sits on a bound.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..m {
        if z[t] > 0.0 && z[t] < c {
            free_sum += -sign(t) * grad[t];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut up_best = f64::NEG_INFINITY;
        let mut low_best = f64::INFINITY;
        for t in 0..m {
            let s = sign(t);
            let v = -s * grad[t];
            if if s > 0.0 { z[t] < c } else { z[t] > 0.0 } {
                up_best = up_best.max(v);
            }
            if if s > 0.0 { z[t] > 0.0 } else { z[t] < c } {
                low_best = low_best.min(v);
            }
        }
        (up_best + low_best) / 2.0
    };

    // Minimized objective: since grad = Qz + p, z'Qz = z'(grad - p).
    let p = |t: usize| if t < n { eps - y[t] } else { eps + y[t - n] };
    let objective: f64 = (0..m).map(|t| 0.5 * z[t] * (grad[t] + p(t))).sum();

    DualSolution { beta, bias, converged, iterations, violation, objective }
}
