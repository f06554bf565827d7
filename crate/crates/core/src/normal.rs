//! Standard normal distribution and quantile functions.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erf_inv, erfc_inv};

/// Standard normal CDF, `Φ(x)`.
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile, `Φ⁻¹(p)`, for `p` in `[0, 1]`.
pub fn quantile(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // rational approximation, then one Newton step against the exact CDF
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    let density = pdf(x);
    if density > 0.0 {
        x - (cdf(x) - p) / density
    } else {
        x
    }
}

/// `P(-h <= Z <= h)` for a standard normal `Z` and `h >= 0`.
pub fn central_mass(h: f64) -> f64 {
    if h == f64::INFINITY {
        return 1.0;
    }
    libm::erf(h / SQRT_2)
}

/// Half-width `h` with `P(|Z| <= h) = mass`.
pub fn central_half_width(mass: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&mass));
    if mass >= 1.0 {
        return f64::INFINITY;
    }
    let h = SQRT_2 * erf_inv(mass);
    let density = 2.0 * pdf(h);
    if density > 0.0 {
        h - (central_mass(h) - mass) / density
    } else {
        h
    }
}
