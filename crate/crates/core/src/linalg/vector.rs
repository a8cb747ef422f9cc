//! Small dense-vector kernels on plain slices.

pub type DenseVector = Vec<f64>;

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    // Four accumulators keep the loop vectorizable without fast-math.
    let mut s = [0.0f64; 4];
    let chunks = x.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        s[0] += x[i] * y[i];
        s[1] += x[i + 1] * y[i + 1];
        s[2] += x[i + 2] * y[i + 2];
        s[3] += x[i + 3] * y[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..x.len() {
        tail += x[i] * y[i];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub fn scale(a: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

/// `a * x + b * y` into a fresh vector.
pub fn lincomb(a: f64, x: &[f64], b: f64, y: &[f64]) -> DenseVector {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
}

/// Sum of `coeffs[k] * vecs[k]`.
pub fn combine(coeffs: &[f64], vecs: &[&[f64]]) -> DenseVector {
    assert_eq!(coeffs.len(), vecs.len());
    assert!(!vecs.is_empty());
    let mut out = vec![0.0; vecs[0].len()];
    for (c, v) in coeffs.iter().zip(vecs) {
        if *c != 0.0 {
            axpy(*c, v, &mut out);
        }
    }
    out
}

pub fn is_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
