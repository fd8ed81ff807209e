//! Shared test oracles. Everything here is deliberately independent of the
//! library's computation paths: dense loops instead of separable passes,
//! quantile-function samplers instead of moment formulas, and a projected
//! gradient method instead of the working-set dual solver.

#![allow(dead_code)]

use faver::plane::Plane;
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Symmetric (half-sample) reflection, written independently of the library.
pub fn reflect_oracle(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let mut k = i.rem_euclid(period);
    if k >= n as isize {
        k = period - 1 - k;
    }
    k as usize
}

/// Dense 2-D correlation with symmetric padding: the quadruple loop the
/// library's filters must agree with.
pub fn correlate2_oracle(p: &Plane, kernel: &[Vec<f64>]) -> Plane {
    let kh = kernel.len();
    let kw = kernel[0].len();
    let (ry, rx) = ((kh / 2) as isize, (kw / 2) as isize);
    Plane::from_fn(p.height(), p.width(), |r, c| {
        let mut acc = 0.0;
        for (kr, row) in kernel.iter().enumerate() {
            for (kc, &k) in row.iter().enumerate() {
                let rr = reflect_oracle(r as isize + kr as isize - ry, p.height());
                let cc = reflect_oracle(c as isize + kc as isize - rx, p.width());
                acc += k * p.get(rr, cc);
            }
        }
        acc
    })
}

/// 2-D Gaussian window sampled at integer offsets, unit sum.
pub fn gaussian_kernel_oracle(sigma: f64, radius: usize) -> Vec<Vec<f64>> {
    let mut kernel = vec![vec![0.0; 2 * radius + 1]; 2 * radius + 1];
    let mut sum = 0.0;
    for (r, row) in kernel.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let dy = r as f64 - radius as f64;
            let dx = c as f64 - radius as f64;
            *v = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            sum += *v;
        }
    }
    for row in &mut kernel {
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    kernel
}

/// Deterministic pseudo-random plane in the 0..255 range.
pub fn random_plane(height: usize, width: usize, seed: u64) -> Plane {
    use rand::Rng;
    let mut rng = faver::derive_rng(seed, "oracle-plane", 0);
    Plane::from_fn(height, width, |_, _| rng.gen_range(0.0..255.0))
}

pub fn max_abs_diff(a: &Plane, b: &Plane) -> f64 {
    assert_eq!((a.height(), a.width()), (b.height(), b.width()));
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Inverse-CDF samplers for the generalized Gaussian families.

/// Inverse of the regularized lower incomplete gamma function: solves
/// `gamma_lr(a, x) = p` by bracketed bisection refined with Newton steps
/// (the derivative is the gamma density).
pub fn inv_gamma_lr(a: f64, p: f64) -> f64 {
    assert!(a > 0.0 && (0.0..1.0).contains(&p));
    if p == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = a.max(1.0);
    while gamma_lr(a, hi) < p {
        hi *= 2.0;
        assert!(hi < 1e300, "bracket blew up for a={a}, p={p}");
    }
    // Tighten by bisection, then polish with Newton.
    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        if gamma_lr(a, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ln_gamma_a = ln_gamma(a);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..24 {
        let f = gamma_lr(a, x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let log_pdf = (a - 1.0) * x.ln() - x - ln_gamma_a;
        let step = f / log_pdf.exp().max(1e-300);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-14 * x.abs() {
            return next;
        }
        x = next;
    }
    x
}

/// Generalized Gaussian quantile sampler with shape `alpha` and standard
/// deviation `sigma`.
pub struct GgdSampler {
    alpha: f64,
    beta: f64,
}

impl GgdSampler {
    pub fn new(alpha: f64, sigma: f64) -> Self {
        let beta = sigma * ((ln_gamma(1.0 / alpha) - ln_gamma(3.0 / alpha)) / 2.0).exp();
        GgdSampler { alpha, beta }
    }

    /// Maps a uniform variate through the inverse CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        let (side, q) = if u < 0.5 { (-1.0, 1.0 - 2.0 * u) } else { (1.0, 2.0 * u - 1.0) };
        if q == 0.0 {
            return 0.0;
        }
        let g = inv_gamma_lr(1.0 / self.alpha, q);
        side * self.beta * g.powf(1.0 / self.alpha)
    }

    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = faver::derive_rng(seed, "ggd-sampler", 0);
        (0..n).map(|_| self.quantile(rng.gen_range(1e-12..1.0 - 1e-12))).collect()
    }
}

/// Asymmetric generalized Gaussian quantile sampler.
pub struct AggdSampler {
    nu: f64,
    beta_l: f64,
    beta_r: f64,
}

impl AggdSampler {
    pub fn new(nu: f64, sigma_l: f64, sigma_r: f64) -> Self {
        let scale = ((ln_gamma(1.0 / nu) - ln_gamma(3.0 / nu)) / 2.0).exp();
        AggdSampler { nu, beta_l: sigma_l * scale, beta_r: sigma_r * scale }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let p_left = self.beta_l / (self.beta_l + self.beta_r);
        if u < p_left {
            let q = 1.0 - u / p_left;
            if q <= 0.0 {
                return 0.0;
            }
            -self.beta_l * inv_gamma_lr(1.0 / self.nu, q).powf(1.0 / self.nu)
        } else {
            let q = (u - p_left) / (1.0 - p_left);
            if q <= 0.0 {
                return 0.0;
            }
            self.beta_r * inv_gamma_lr(1.0 / self.nu, q).powf(1.0 / self.nu)
        }
    }

    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = faver::derive_rng(seed, "aggd-sampler", 0);
        (0..n).map(|_| self.quantile(rng.gen_range(1e-12..1.0 - 1e-12))).collect()
    }
}

/// Standard normal samples via Box-Muller.
pub fn normal_samples(n: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = faver::derive_rng(seed, "normal-sampler", 0);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(n);
    out
}

/// Unit-scale Laplace samples via the analytic inverse CDF.
pub fn laplace_samples(n: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = faver::derive_rng(seed, "laplace-sampler", 0);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-12..1.0 - 1e-12) - 0.5;
            -u.signum() * (1.0 - 2.0 * u.abs()).ln()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Reference quadratic program for the SVR dual.

/// Reference solution of the SVR dual by accelerated projected gradient
/// (FISTA) with exact projection onto `{z in [0, C]^{2n} : sum(s z) = 0}`.
/// A completely different algorithmic route from the working-set solver.
pub struct SvrDualReference {
    pub objective: f64,
}

pub fn solve_svr_dual_reference(
    gram: &[Vec<f64>],
    y: &[f64],
    c: f64,
    eps: f64,
    iterations: usize,
) -> SvrDualReference {
    let n = y.len();
    let m = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let p: Vec<f64> = (0..m).map(|t| if t < n { eps - y[t] } else { eps + y[t - n] }).collect();

    let qz = |z: &[f64]| -> Vec<f64> {
        let beta: Vec<f64> = (0..n).map(|i| z[i] - z[i + n]).collect();
        let kb: Vec<f64> =
            (0..n).map(|i| gram[i].iter().zip(&beta).map(|(k, b)| k * b).sum()).collect();
        (0..m).map(|t| sign(t) * kb[t % n]).collect()
    };
    let objective = |z: &[f64]| -> f64 {
        let qzv = qz(z);
        z.iter().zip(&qzv).map(|(zi, qi)| 0.5 * zi * qi).sum::<f64>()
            + z.iter().zip(&p).map(|(zi, pi)| zi * pi).sum::<f64>()
    };

    // Projection onto the box intersected with the hyperplane: bisection on
    // the multiplier of the equality constraint.
    let project = |v: &[f64]| -> Vec<f64> {
        let clip = |lambda: f64, t: usize| (v[t] - lambda * sign(t)).clamp(0.0, c);
        let h = |lambda: f64| (0..m).map(|t| sign(t) * clip(lambda, t)).sum::<f64>();
        let bound = v.iter().fold(0.0f64, |a, &b| a.max(b.abs())) + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda = 0.5 * (lo + hi);
        (0..m).map(|t| clip(lambda, t)).collect()
    };

    // Lipschitz constant of the gradient from power iteration on Q.
    let mut v: Vec<f64> = (0..m).map(|t| ((t * 37 + 11) % 101) as f64 / 101.0 - 0.5).collect();
    let mut lip = 1.0;
    for _ in 0..60 {
        let w = qz(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-30 {
            break;
        }
        lip = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-30);
        v = w.iter().map(|x| x / norm).collect();
    }
    let step = 1.0 / (lip * 1.05 + 1e-9);

    let mut z = vec![0.0; m];
    let mut momentum = z.clone();
    let mut t_k = 1.0f64;
    let mut best = objective(&z);
    for _ in 0..iterations {
        let grad: Vec<f64> = qz(&momentum).iter().zip(&p).map(|(q, pi)| q + pi).collect();
        let candidate: Vec<f64> =
            momentum.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect();
        let z_next = project(&candidate);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
        let coef = (t_k - 1.0) / t_next;
        momentum = z_next.iter().zip(&z).map(|(a, b)| a + coef * (a - b)).collect();
        z = z_next;
        t_k = t_next;
        let obj = objective(&z);
        if obj < best {
            best = obj;
        } else if obj > best + best.abs() * 0.5 + 1.0 {
            // Restart momentum if it overshoots badly.
            momentum = z.clone();
            t_k = 1.0;
        }
    }
    SvrDualReference { objective: best }
}

// ---------------------------------------------------------------------------
// Synthetic protocol datasets.

use faver::regression::FeatureRecord;
use faver::spatial::SPATIAL_DIM;
use faver::temporal::TEMPORAL_DIM;

/// Feature records whose MOS is a deterministic smooth function of a shared
/// low-dimensional latent embedded linearly into both branches.
pub fn constructive_dataset(contents: usize, variants: usize, seed: u64) -> Vec<FeatureRecord> {
    use rand::Rng;
    let mut rng = faver::derive_rng(seed, "constructive-dataset", 0);
    let mut records = Vec::new();
    for c in 0..contents {
        let base: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        for v in 0..variants {
            let severity = v as f64 / (variants.max(2) - 1) as f64;
            let z = [base[0], base[1] * 0.5, base[2] * 0.25 + severity * 1.5 - 0.75];
            let spatial: Vec<f64> = (0..SPATIAL_DIM)
                .map(|k| {
                    let a = ((k * 13 + 1) as f64).sin();
                    let b = ((k * 29 + 7) as f64).sin();
                    let c2 = ((k * 53 + 3) as f64).sin();
                    a * z[0] + b * z[1] + c2 * z[2]
                })
                .collect();
            let temporal: Vec<f64> = (0..TEMPORAL_DIM)
                .map(|k| {
                    let a = ((k * 17 + 5) as f64).cos();
                    let b = ((k * 31 + 11) as f64).cos();
                    let c2 = ((k * 43 + 2) as f64).cos();
                    a * z[0] + b * z[1] + c2 * z[2]
                })
                .collect();
            let drive = z[0] + 0.6 * z[1] - 1.4 * z[2];
            let mos = 20.0 + 60.0 / (1.0 + (-1.5 * drive).exp());
            records.push(FeatureRecord {
                video_id: format!("c{c:02}v{v}"),
                content_id: format!("content-{c:02}"),
                framerate: 30.0,
                crf: Some(v as f64 * 10.0),
                mos: Some(mos),
                spatial,
                temporal,
            });
        }
    }
    records
}

/// Same shape, but MOS is i.i.d. noise independent of the features.
pub fn noise_mos_dataset(contents: usize, variants: usize, seed: u64) -> Vec<FeatureRecord> {
    use rand::Rng;
    let mut records = constructive_dataset(contents, variants, seed);
    let mut rng = faver::derive_rng(seed, "noise-mos", 1);
    for r in &mut records {
        r.mos = Some(rng.gen_range(0.0..100.0));
    }
    records
}
