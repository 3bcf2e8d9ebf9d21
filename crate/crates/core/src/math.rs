//! Thin wrappers over [`libm`] plus the few numerical helpers shared across
//! modules.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn atanh(x: f64) -> f64 {
    libm::atanh(x)
}

#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// `-p ln p` with the `0 ln 0 = 0` convention.
#[inline]
pub fn neg_xlogx(p: f64) -> f64 {
    if p > 0.0 {
        -p * ln(p)
    } else {
        0.0
    }
}

/// Compensated (Neumaier) sum.
pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if abs(s) >= abs(x) { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Binary entropy in nats.
pub fn binary_entropy(q: f64) -> f64 {
    neg_xlogx(q) + neg_xlogx(1.0 - q)
}

/// `ln Σ exp(x_i)`; `-inf` entries are skipped, an all-`-inf` input yields `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let s = sum(xs.iter().map(|&x| exp(x - max)));
    max + ln(s)
}

/// Normalizes log-weights in place into probabilities. Returns `ln Z`.
pub fn softmax_in_place(logw: &mut [f64]) -> f64 {
    let lz = log_sum_exp(logw);
    if lz.is_finite() {
        for w in logw.iter_mut() {
            *w = exp(*w - lz);
        }
    }
    lz
}

/// Composite Simpson weights on `points` equally spaced nodes of `[0, 1]`.
/// `points` must be odd and at least 3.
pub fn simpson_weights(points: usize) -> alloc::vec::Vec<f64> {
    debug_assert!(points >= 3 && points % 2 == 1);
    let h = 1.0 / (points - 1) as f64;
    (0..points)
        .map(|k| {
            let c = if k == 0 || k == points - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}
