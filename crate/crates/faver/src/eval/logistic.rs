//! Four-parameter logistic regression used to linearize objective predictions
//! onto the subjective score scale before PLCC/RMSE:
//!
//! ```text
//! f(x) = b2 + (b1 - b2) / (1 + exp(-(x - b3) / |b4|))
//! ```
//!
//! Fitting minimizes the sum of squared errors with a derivative-free simplex
//! descent over `(b3, b4)`; for any `(b3, b4)` the remaining two parameters
//! enter linearly and are profiled out by an exact least-squares solve, which
//! keeps residuals orthogonal to the fitted values and makes the optimizer
//! robust with only two free dimensions.

use crate::error::{Error, Result};

/// Relative SSE improvement below which the simplex stops.
const SSE_REL_TOL: f64 = 1e-10;

/// Iteration cap per simplex start.
const MAX_ITER: usize = 10_000;

/// Result of a 4-parameter logistic fit.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    /// `(b1, b2, b3, b4)`.
    pub beta: [f64; 4],
    /// Predictions mapped through the fitted curve.
    pub mapped: Vec<f64>,
    pub sse: f64,
    /// False when the simplex hit the iteration cap before the tolerance.
    pub converged: bool,
}

impl LogisticFit {
    pub fn map(&self, x: f64) -> f64 {
        logistic(x, self.beta)
    }
}

fn logistic(x: f64, beta: [f64; 4]) -> f64 {
    let [b1, b2, b3, b4] = beta;
    let u = (-(x - b3) / b4.abs().max(1e-300)).clamp(-500.0, 500.0);
    b2 + (b1 - b2) / (1.0 + u.exp())
}

/// For fixed `(b3, b4)`, solves the 2-variable least squares
/// `min ||a*s(x) + c - mos||^2` exactly and returns `(sse, b1, b2)` where
/// `b1 = a + c`, `b2 = c`.
fn profile_linear(pred: &[f64], mos: &[f64], b3: f64, b4: f64) -> (f64, f64, f64) {
    let n = pred.len() as f64;
    let s: Vec<f64> = pred
        .iter()
        .map(|&x| {
            let u = (-(x - b3) / b4.abs().max(1e-300)).clamp(-500.0, 500.0);
            1.0 / (1.0 + u.exp())
        })
        .collect();
    let sm = s.iter().sum::<f64>() / n;
    let ym = mos.iter().sum::<f64>() / n;
    let mut sss = 0.0;
    let mut ssy = 0.0;
    for (&si, &yi) in s.iter().zip(mos) {
        sss += (si - sm) * (si - sm);
        ssy += (si - sm) * (yi - ym);
    }
    let (a, c) = if sss > 1e-30 {
        let a = ssy / sss;
        (a, ym - a * sm)
    } else {
        (0.0, ym)
    };
    let sse: f64 = s
        .iter()
        .zip(mos)
        .map(|(&si, &yi)| {
            let r = a * si + c - yi;
            r * r
        })
        .sum();
    (sse, a + c, c)
}

/// One Nelder-Mead run over `(b3, b4)` from the given start.
fn simplex_descent(pred: &[f64], mos: &[f64], start: [f64; 2], scale: [f64; 2]) -> ([f64; 2], f64, bool) {
    let f = |p: [f64; 2]| profile_linear(pred, mos, p[0], p[1]).0;
    let mut pts = [start, [start[0] + scale[0], start[1]], [start[0], start[1] + scale[1]]];
    let mut vals = [f(pts[0]), f(pts[1]), f(pts[2])];
    let mut converged = false;

    for _ in 0..MAX_ITER {
        // Order best..worst.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let (best, mid, worst) = (idx[0], idx[1], idx[2]);
        let spread = (vals[worst] - vals[best]).abs();
        if spread <= SSE_REL_TOL * vals[best].abs().max(1e-300) {
            converged = true;
            break;
        }
        let centroid = [
            (pts[best][0] + pts[mid][0]) / 2.0,
            (pts[best][1] + pts[mid][1]) / 2.0,
        ];
        let reflect = [
            centroid[0] + (centroid[0] - pts[worst][0]),
            centroid[1] + (centroid[1] - pts[worst][1]),
        ];
        let fr = f(reflect);
        if fr < vals[best] {
            let expand = [
                centroid[0] + 2.0 * (centroid[0] - pts[worst][0]),
                centroid[1] + 2.0 * (centroid[1] - pts[worst][1]),
            ];
            let fe = f(expand);
            if fe < fr {
                pts[worst] = expand;
                vals[worst] = fe;
            } else {
                pts[worst] = reflect;
                vals[worst] = fr;
            }
        } else if fr < vals[mid] {
            pts[worst] = reflect;
            vals[worst] = fr;
        } else {
            let contract = [
                centroid[0] + 0.5 * (pts[worst][0] - centroid[0]),
                centroid[1] + 0.5 * (pts[worst][1] - centroid[1]),
            ];
            let fc = f(contract);
            if fc < vals[worst] {
                pts[worst] = contract;
                vals[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                for k in 0..3 {
                    if k != best {
                        pts[k] = [
                            pts[best][0] + 0.5 * (pts[k][0] - pts[best][0]),
                            pts[best][1] + 0.5 * (pts[k][1] - pts[best][1]),
                        ];
                        vals[k] = f(pts[k]);
                    }
                }
            }
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    (pts[idx[0]], vals[idx[0]], converged)
}

/// Fits the 4-parameter logistic to `(pred, mos)` by nonlinear least squares.
///
/// Starts from the data-driven initialization `b3 = mean(pred)`,
/// `b4 = std(pred)/4` and from a near-affine configuration with a very wide
/// spread, which guarantees the fitted curve does at least as well as the
/// best straight line. Requires at least 8 points and non-constant
/// predictions.
pub fn logistic_fit(pred: &[f64], mos: &[f64]) -> Result<LogisticFit> {
    if pred.len() != mos.len() {
        return Err(Error::InvalidInput("vectors differ in length".into()));
    }
    if pred.len() < 8 {
        return Err(Error::InvalidInput(format!("{} points; at least 8 required", pred.len())));
    }
    let n = pred.len() as f64;
    let mean = pred.iter().sum::<f64>() / n;
    let std = (pred.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    if std <= 0.0 {
        return Err(Error::DegenerateInput("constant predictions".into()));
    }
    let lo = pred.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pred.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;

    let starts = [
        // Data-driven start.
        ([mean, std / 4.0], [std / 4.0, std / 8.0]),
        // Near-affine start: over the data range the curve is a straight
        // line to within O((range/b4)^2), so this start can only lose to the
        // best affine map by a vanishing margin.
        ([mean, 300.0 * range], [std / 4.0, 30.0 * range]),
    ];
    let mut best: Option<([f64; 2], f64, bool)> = None;
    for (start, scale) in starts {
        let candidate = simplex_descent(pred, mos, start, scale);
        best = Some(match best {
            None => candidate,
            Some(b) if candidate.1 < b.1 => candidate,
            Some(b) => b,
        });
    }
    let ([b3, b4], _, converged) = best.unwrap();
    let (sse, b1, b2) = profile_linear(pred, mos, b3, b4);
    let beta = [b1, b2, b3, b4];
    let mapped = pred.iter().map(|&x| logistic(x, beta)).collect();
    Ok(LogisticFit { beta, mapped, sse, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_forward_model() {
        let beta = [92.0, 8.0, 0.2, 0.9];
        let pred: Vec<f64> = (0..40).map(|i| -2.0 + i as f64 * 0.1).collect();
        let mos: Vec<f64> = pred.iter().map(|&x| logistic(x, beta)).collect();
        let fit = logistic_fit(&pred, &mos).unwrap();
        assert!(fit.sse < 1e-8, "SSE = {}", fit.sse);
    }

    #[test]
    fn identity_data_maps_to_itself() {
        let pred: Vec<f64> = (0..32).map(|i| i as f64 * 0.25 + 1.0).collect();
        let fit = logistic_fit(&pred, &pred).unwrap();
        let rmse = (fit.sse / pred.len() as f64).sqrt();
        assert!(rmse < 1e-6, "RMSE = {rmse}");
    }

    #[test]
    fn constant_predictions_are_rejected() {
        let pred = vec![5.0; 10];
        let mos: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(matches!(logistic_fit(&pred, &mos), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn mapped_plcc_at_least_matches_the_affine_fit() {
        // Noisy monotone data; the logistic must not lose to a straight line.
        let pred: Vec<f64> = (0..24).map(|i| i as f64 * 0.4).collect();
        let mos: Vec<f64> = pred
            .iter()
            .enumerate()
            .map(|(i, &x)| 2.0 * x + 3.0 + ((i * 37) as f64).sin())
            .collect();
        let fit = logistic_fit(&pred, &mos).unwrap();
        let plcc_mapped = crate::eval::pearson(&fit.mapped, &mos).unwrap();
        let plcc_raw = crate::eval::pearson(&pred, &mos).unwrap().abs();
        assert!(plcc_mapped >= plcc_raw - 1e-6, "{plcc_mapped} < {plcc_raw}");
    }
}
