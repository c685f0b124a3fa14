use std::f64::consts::PI;

use super::EULER_GAMMA;
use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    // fold into [-1/2, 1/2] so the argument stays small
    let t = if r < 0.5 {
        r
    } else if r < 1.5 {
        1.0 - r
    } else {
        r - 2.0
    };
    (PI * t).sin()
}

/// n! as a float; exact up to 22!, correctly rounded products beyond.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Γ(x) for real x. Poles (x ∈ {0, −1, −2, …}) return NaN.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x == x.floor() && x <= 171.0 {
        return factorial(x as u32 - 1);
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

// B_{2k} / (2k) for k = 1..8
const DIGAMMA_ASYMPTOTIC: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// Digamma ψ(x) = Γ'(x)/Γ(x) for x > 0.
///
/// Upward recurrence ψ(x) = ψ(x+1) − 1/x until x ≥ 10, then the
/// Bernoulli asymptotic series.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("digamma requires x > 0, got {x}"));
    }
    if x == 1.0 {
        return Ok(-EULER_GAMMA);
    }
    let mut shift = 0.0;
    let mut x = x;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut tail = 0.0;
    for c in DIGAMMA_ASYMPTOTIC {
        tail += c * pow;
        pow *= inv2;
    }
    Ok(shift + x.ln() - 0.5 / x - tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_half_integers() {
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-15);
        assert!(rel(gamma(1.5), PI.sqrt() / 2.0) < 1e-15);
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-2.5), -8.0 * PI.sqrt() / 15.0) < 1e-14);
        assert_eq!(gamma(6.0), 120.0);
        assert!(gamma(-2.0).is_nan());
    }

    #[test]
    fn gamma_recurrence() {
        for &x in &[0.1, 0.3, 0.77, 1.3, 2.3, 4.9, 7.25] {
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 5e-15, "x={x}");
        }
    }

    #[test]
    fn digamma_values() {
        assert_eq!(digamma(1.0).unwrap(), -EULER_GAMMA);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-15);
        let d3 = digamma(3.0).unwrap();
        assert!((d3 - (1.5 - EULER_GAMMA)).abs() < 1e-15);
        let l3 = 3f64.ln();
        assert!(d3 >= l3 - 1.0 / 3.0 && d3 <= l3 - 1.0 / 6.0);
        // ψ(1/2) = −γ − 2 log 2
        assert!(rel(digamma(0.5).unwrap(), -EULER_GAMMA - 2.0 * 2f64.ln()) < 1e-14);
    }

    #[test]
    fn digamma_domain() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
        assert!(digamma(f64::NAN).is_err());
    }

    #[test]
    fn sin_pi_zeros() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(sin_pi(-2.0), 0.0);
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(1.5) + 1.0).abs() < 1e-16);
        assert!((sin_pi(-0.25) + 0.5f64.sqrt()).abs() < 1e-15);
    }
}
