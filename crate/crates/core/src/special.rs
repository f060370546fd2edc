//! Gaussian helpers built on `libm`'s `erf`/`erfc`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `P(a < Z < b)` for a standard normal `Z`.
///
/// Uses whichever of `erf`/`erfc` keeps the difference well conditioned, so
/// intervals deep in a tail keep their relative precision down to the
/// underflow of `erfc` (|z| ≈ 37).
pub fn std_normal_interval(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    let (a, b) = (a * FRAC_1_SQRT_2, b * FRAC_1_SQRT_2);
    if a >= 0.0 {
        0.5 * (erfc(a) - erfc(b))
    } else if b <= 0.0 {
        0.5 * (erfc(-b) - erfc(-a))
    } else {
        0.5 * (erf(b) - erf(a))
    }
}

/// Mean and variance of a standard normal truncated to `[a, b]`.
///
/// Narrow intervals are integrated with Gauss–Legendre nodes relative to the
/// interval midpoint; the textbook `(φ(a) − φ(b)) / Z` expressions cancel
/// catastrophically there.
pub fn truncated_std_normal_moments(a: f64, b: f64) -> (f64, f64) {
    debug_assert!(a < b);
    if b - a < 1.0 && a.is_finite() && b.is_finite() {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (&x, &w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
            for s in [-1.0, 1.0] {
                let u = s * x * half;
                // Density relative to φ(mid); the common factor cancels.
                let f = w * (-(mid * u) - 0.5 * u * u).exp();
                m0 += f;
                m1 += f * u;
                m2 += f * u * u;
            }
        }
        let mean_u = m1 / m0;
        let var = (m2 / m0 - mean_u * mean_u).max(0.0);
        return (mid + mean_u, var);
    }
    // Reflect so that the interval never lies entirely in the upper tail.
    if a > 0.0 {
        let (m, v) = truncated_std_normal_moments(-b, -a);
        return (-m, v);
    }
    let z = std_normal_interval(a, b);
    let pa = if a.is_finite() { std_normal_pdf(a) } else { 0.0 };
    let pb = if b.is_finite() { std_normal_pdf(b) } else { 0.0 };
    let apa = if a.is_finite() { a * pa } else { 0.0 };
    let bpb = if b.is_finite() { b * pb } else { 0.0 };
    let mean = (pa - pb) / z;
    let var = (1.0 + (apa - bpb) / z - mean * mean).max(0.0);
    (mean, var)
}

// Positive half of the 32-point Gauss–Legendre rule on [-1, 1].
const GL16_NODES: [f64; 16] = [
    0.04830766568773831,
    0.1444719615827965,
    0.23928736225213706,
    0.33186860228212767,
    0.42135127613063533,
    0.5068999089322294,
    0.5877157572407623,
    0.6630442669302152,
    0.7321821187402897,
    0.7944837959679424,
    0.84936761373257,
    0.8963211557660522,
    0.9349060759377397,
    0.9647622555875064,
    0.9856115115452684,
    0.9972638618494816,
];

const GL16_WEIGHTS: [f64; 16] = [
    0.09654008851472781,
    0.09563872007927483,
    0.09384439908080457,
    0.09117387869576386,
    0.08765209300440391,
    0.08331192422694685,
    0.07819389578707031,
    0.07234579410884845,
    0.06582222277636175,
    0.058684093478535704,
    0.050998059262376244,
    0.042835898022226426,
    0.034273862913021626,
    0.025392065309262427,
    0.016274394730905965,
    0.007018610009469298,
];
