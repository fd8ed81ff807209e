//! Row-major 2-D sample planes and the small convolution kit used by the
//! feature extractors.
//!
//! All filtering in this crate is correlation-style (no kernel flip) with
//! symmetric reflection at the borders; product and derivative maps that the
//! statistics are fitted on are computed on the valid region only and do not
//! use padding at all.

use std::fmt;

/// A 2-D plane of `f64` samples, stored row-major.
#[derive(Clone, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Plane({}x{})", self.height, self.width)
    }
}

impl Plane {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::constant(height, width, 0.0)
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "plane dimensions must be nonzero");
        Plane { height, width, data: vec![value; height * width] }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Plane { height, width, data }
    }

    /// Wraps an existing row-major buffer; `data.len()` must equal `height * width`.
    pub fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), height * width, "buffer does not match dimensions");
        assert!(height > 0 && width > 0, "plane dimensions must be nonzero");
        Plane { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Maps an out-of-range index back into `[0, n)` by symmetric (half-sample)
/// reflection: `-1 -> 0`, `-2 -> 1`, `n -> n-1`, `n+1 -> n-2`, ...
#[inline]
pub(crate) fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    debug_assert!(n > 0);
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Correlates each row with `taps` (odd length, centered), reflecting at the edges.
pub(crate) fn correlate_rows_symmetric(p: &Plane, taps: &[f64]) -> Plane {
    debug_assert!(taps.len() % 2 == 1);
    let radius = (taps.len() / 2) as isize;
    let (h, w) = (p.height(), p.width());
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let row = p.row(r);
        for c in 0..w as isize {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                let cc = reflect(c + t as isize - radius, w);
                acc += tap * row[cc];
            }
            out.push(acc);
        }
    }
    Plane::from_raw(h, w, out)
}

/// Correlates each column with `taps` (odd length, centered), reflecting at the edges.
pub(crate) fn correlate_cols_symmetric(p: &Plane, taps: &[f64]) -> Plane {
    debug_assert!(taps.len() % 2 == 1);
    let radius = (taps.len() / 2) as isize;
    let (h, w) = (p.height(), p.width());
    let mut out = vec![0.0; h * w];
    for r in 0..h as isize {
        for (t, &tap) in taps.iter().enumerate() {
            let rr = reflect(r + t as isize - radius, h);
            let src = p.row(rr);
            let dst = &mut out[(r as usize) * w..(r as usize + 1) * w];
            for c in 0..w {
                dst[c] += tap * src[c];
            }
        }
    }
    Plane::from_raw(h, w, out)
}

/// Separable correlation: same 1-D taps along rows then columns.
pub(crate) fn correlate_separable_symmetric(p: &Plane, taps: &[f64]) -> Plane {
    correlate_cols_symmetric(&correlate_rows_symmetric(p, taps), taps)
}

/// Dense 2-D correlation with a centered odd-sized kernel, reflecting at the edges.
pub(crate) fn correlate2_symmetric(p: &Plane, kernel: &Plane) -> Plane {
    debug_assert!(kernel.height() % 2 == 1 && kernel.width() % 2 == 1);
    let ry = (kernel.height() / 2) as isize;
    let rx = (kernel.width() / 2) as isize;
    let (h, w) = (p.height(), p.width());
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let mut acc = 0.0;
            for kr in 0..kernel.height() as isize {
                let rr = reflect(r + kr - ry, h);
                for kc in 0..kernel.width() as isize {
                    let cc = reflect(c + kc - rx, w);
                    acc += kernel.get(kr as usize, kc as usize) * p.get(rr, cc);
                }
            }
            out.push(acc);
        }
    }
    Plane::from_raw(h, w, out)
}

/// 1-D Gaussian taps at integer offsets `-radius..=radius`, normalized to unit sum.
pub(crate) fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let mut taps: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_maps_neighbourhood() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(0, 5), 0);
        assert_eq!(reflect(4, 5), 4);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        // Deep reflection wraps with period 2n.
        assert_eq!(reflect(-6, 5), 4);
        assert_eq!(reflect(10, 5), 0);
    }

    #[test]
    fn separable_matches_dense_on_gaussian() {
        let taps = gaussian_taps(1.0, 2);
        let kernel = Plane::from_fn(5, 5, |r, c| taps[r] * taps[c]);
        let p = Plane::from_fn(9, 11, |r, c| ((r * 31 + c * 17) % 13) as f64 - 6.0);
        let sep = correlate_separable_symmetric(&p, &taps);
        let dense = correlate2_symmetric(&p, &kernel);
        for (a, b) in sep.data().iter().zip(dense.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_taps_preserve_constants() {
        let taps = gaussian_taps(0.5, 1);
        let p = Plane::constant(6, 6, 42.0);
        let out = correlate_separable_symmetric(&p, &taps);
        for &v in out.data() {
            assert!((v - 42.0).abs() < 1e-12);
        }
    }
}
