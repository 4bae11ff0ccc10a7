//! Error-function family and Gaussian helpers.

use std::f64::consts::PI;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfc(x) = 2 - erfc(-x)
        let e = x * x;
        if e > 700.0 {
            return f64::INFINITY;
        }
        return 2.0 * e.exp() - erfcx(-x);
    }
    if x < 5.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // continued fraction x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))
    let mut f = x;
    for k in (1..=60).rev() {
        f = x + 0.5 * k as f64 / f;
    }
    1.0 / (PI.sqrt() * f)
}

/// One-dimensional heat kernel `(4 pi s)^{-1/2} exp(-w^2 / 4s)`.
pub fn gauss1(s: f64, w: f64) -> f64 {
    (-w * w / (4.0 * s)).exp() / (4.0 * PI * s).sqrt()
}

/// `int_lo^hi gauss1(s, w) dw`, evaluated without cancellation in the tails.
pub fn gauss_mass(s: f64, lo: f64, hi: f64) -> f64 {
    let sg = 2.0 * s.sqrt();
    let (a, b) = (lo / sg, hi / sg);
    if a >= 0.0 {
        0.5 * (erfc(a) - erfc(b))
    } else if b <= 0.0 {
        0.5 * (erfc(-b) - erfc(-a))
    } else {
        0.5 * (erf(b) - erf(a))
    }
}

/// First moment `int_lo^hi w gauss1(s, w) dw`.
pub fn gauss_first_moment(s: f64, lo: f64, hi: f64) -> f64 {
    2.0 * s * (gauss1(s, lo) - gauss1(s, hi))
}

/// `ln Gamma(x + 1)` for the integer-valued arguments used by the diagnostics.
pub fn ln_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

pub fn ln_binomial(k: usize, j: usize) -> f64 {
    ln_factorial(k) - ln_factorial(j) - ln_factorial(k - j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfcx_matches_direct_product_and_asymptotics() {
        for &x in &[0.0f64, 0.3, 1.0, 2.5, 4.9] {
            let direct = (x * x).exp() * erfc(x);
            assert!((erfcx(x) - direct).abs() <= 1e-14 * direct);
        }
        // both branches agree at the switch point
        let below = (25.0f64).exp() * erfc(5.0);
        let mut f = 5.0;
        for k in (1..=60).rev() {
            f = 5.0 + 0.5 * k as f64 / f;
        }
        let cf = 1.0 / (PI.sqrt() * f);
        assert!((below - cf).abs() < 1e-12 * cf);
        // large-x asymptote 1/(sqrt(pi) x) (1 - 1/(2x^2))
        let x = 1e4;
        let asym = 1.0 / (PI.sqrt() * x) * (1.0 - 0.5 / (x * x));
        assert!((erfcx(x) - asym).abs() < 1e-15);
        assert!((erfcx(-1.0) - (2.0 * 1f64.exp() - erfcx(1.0))).abs() < 1e-14);
    }

    #[test]
    fn gauss_mass_is_stable_in_both_tails() {
        let s = 0.01;
        let m = gauss_mass(s, 2.0, 3.0);
        let direct = 0.5 * (erfc(2.0 / 0.2) - erfc(3.0 / 0.2));
        assert!(m > 0.0 && (m - direct).abs() <= 1e-12 * direct);
        assert!((gauss_mass(s, -3.0, -2.0) - m).abs() <= 1e-12 * m);
        assert!((gauss_mass(s, -50.0, 50.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_moment_matches_quadrature() {
        let s = 0.3;
        let (lo, hi) = (-0.2, 1.1);
        let n = 20000;
        let dw = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let w = lo + (i as f64 + 0.5) * dw;
            acc += w * gauss1(s, w) * dw;
        }
        assert!((gauss_first_moment(s, lo, hi) - acc).abs() < 1e-8);
    }
}
