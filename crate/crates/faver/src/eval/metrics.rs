//! Rank and linear correlation metrics.

use crate::error::{Error, Result};

/// Pearson linear correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("vectors differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!("{} points; at least 3 required", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateInput("zero variance; correlation undefined".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Average ranks (1-based), tied values sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the mean 1-based rank.
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank-order correlation: Pearson correlation of average-ranked
/// data. Constant input has undefined rank correlation and is an error.
pub fn srocc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("vectors differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!("{} points; at least 3 required", x.len())));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Pearson correlation and root mean squared error of mapped predictions
/// against subjective scores.
pub fn plcc_rmse(mapped: &[f64], mos: &[f64]) -> Result<(f64, f64)> {
    let plcc = pearson(mapped, mos)?;
    let mse = mapped.iter().zip(mos).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        / mapped.len() as f64;
    Ok((plcc, mse.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_monotone_data() {
        assert_eq!(srocc(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(srocc(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap(), -1.0);
    }

    #[test]
    fn one_swap_gives_0_8() {
        // 1 - 6*sum(d^2)/(n(n^2-1)) = 1 - 12/60.
        let s = srocc(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((s - 0.8).abs() < 1e-12);
    }

    #[test]
    fn ties_share_mean_rank() {
        let ranks = average_ranks(&[5.0, 1.0, 5.0, 2.0]);
        assert_eq!(ranks, vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn constant_input_is_undefined() {
        assert!(srocc(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn srocc_is_monotone_invariant() {
        let x = [0.3, -1.2, 2.4, 0.9, 1.1, -0.5];
        let y = [10.0, 4.0, 30.0, 17.0, 12.0, 8.0];
        let base = srocc(&x, &y).unwrap();
        let exp_x: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let cube_y: Vec<f64> = y.iter().map(|v| v.powi(3)).collect();
        assert!((srocc(&exp_x, &y).unwrap() - base).abs() < 1e-12);
        assert!((srocc(&x, &cube_y).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn plcc_rmse_on_shifted_identity() {
        let mapped = [3.0, 5.0, 7.0, 9.0];
        let mos = [1.0, 3.0, 5.0, 7.0];
        let (plcc, rmse) = plcc_rmse(&mapped, &mos).unwrap();
        assert!((plcc - 1.0).abs() < 1e-12);
        assert!((rmse - 2.0).abs() < 1e-12);
    }
}
