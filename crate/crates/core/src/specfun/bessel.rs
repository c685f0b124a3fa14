use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gamma::gamma;
use crate::error::{domain, Error, Result};

/// Largest |ν| accepted by [`bessel_k`].
pub const MAX_ORDER: f64 = 6.0;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const TEMME_CROSSOVER: f64 = 2.0;
const INTEGER_TOL: f64 = 1e-12;

/// Which power of z multiplies K_ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaledKind {
    /// K_ν(z)
    Plain,
    /// K̂_ν(z) = z^{-ν} K_ν(z)
    Hat,
    /// K̃_ν(z) = z^{ν} K_ν(z)
    Tilde,
}

impl FromStr for ScaledKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Self::Plain),
            "hat" => Ok(Self::Hat),
            "tilde" => Ok(Self::Tilde),
            other => Err(Error::Config(format!(
                "unknown kind '{other}', expected plain|hat|tilde"
            ))),
        }
    }
}

impl fmt::Display for ScaledKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plain => "plain",
            Self::Hat => "hat",
            Self::Tilde => "tilde",
        })
    }
}

/// A real order ν together with its integer classification.
///
/// ν is treated as a non-negative integer when it lies within 10⁻¹² of one;
/// the integer branch of every formula is then used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Order {
    nu: f64,
    integer: Option<u32>,
}

impl Order {
    pub fn new(nu: f64) -> Self {
        let n = nu.round();
        let integer = if nu > -0.5 && (nu - n).abs() < INTEGER_TOL {
            Some(n as u32)
        } else {
            None
        };
        Self { nu, integer }
    }

    pub fn nu(&self) -> f64 {
        match self.integer {
            Some(n) => n as f64,
            None => self.nu,
        }
    }

    pub fn is_nonneg_integer(&self) -> bool {
        self.integer.is_some()
    }

    pub fn as_integer(&self) -> Option<u32> {
        self.integer
    }
}

impl From<f64> for Order {
    fn from(nu: f64) -> Self {
        Order::new(nu)
    }
}

impl From<Order> for f64 {
    fn from(o: Order) -> f64 {
        o.nu()
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nu())
    }
}

/// Modified Bessel function of the first kind, by its ascending series
/// Σ (z/2)^{2j+ν} / (j! Γ(j+ν+1)).
///
/// For ν > −1 every term is positive, so the sum is free of cancellation.
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("bessel_i requires z > 0, got {z}"));
    }
    if !(nu > -1.0) || !nu.is_finite() {
        return domain(format!("bessel_i requires nu > -1, got {nu}"));
    }
    let half = 0.5 * z;
    let q = half * half;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    // the peak term sits near j ≈ z/2, so the cap has to grow with z
    let cap = 60 + (3.0 * z) as usize;
    for j in 1..=cap {
        let jf = j as f64;
        term *= q / (jf * (jf + nu));
        sum += term;
        if term < EPS * sum {
            break;
        }
    }
    Ok(sum)
}

/// K_ν(z) and its scaled variants.
///
/// Internally K_μ, K_{μ+1} with |μ| ≤ 1/2 come from Temme's series for
/// z ≤ 2 (which at μ = 0 is the log-bearing integer-order expansion) and
/// from Steed's continued fraction for z > 2; forward recurrence then lifts
/// the order. The result is continuous in ν across integers.
pub fn bessel_k(kind: ScaledKind, nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("bessel_k requires z > 0, got {z}"));
    }
    if !nu.is_finite() || nu.abs() > MAX_ORDER {
        return Err(Error::UnsupportedOrder(nu, MAX_ORDER));
    }
    let scaled = k_scaled(nu.abs(), z);
    let k = match kind {
        ScaledKind::Plain => scaled * (-z).exp(),
        // combine the power and exponential in log space to dodge overflow
        ScaledKind::Hat => scaled * (-z - nu * z.ln()).exp(),
        ScaledKind::Tilde => scaled * (-z + nu * z.ln()).exp(),
    };
    Ok(k)
}

/// e^{z} K_ν(z) for ν ≥ 0.
fn k_scaled(nu: f64, z: f64) -> f64 {
    let n = nu.round();
    let mu = nu - n;
    let (mut k_mu, mut k_next) = if z <= TEMME_CROSSOVER {
        let (a, b) = temme(mu, z);
        let e = z.exp();
        (a * e, b * e)
    } else {
        steed(mu, z)
    };
    let two_over_z = 2.0 / z;
    for i in 0..n as usize {
        let next = (mu + 1.0 + i as f64) * two_over_z * k_next + k_mu;
        k_mu = k_next;
        k_next = next;
    }
    k_mu
}

// Taylor coefficients of 1/Γ(z) about 0: 1/Γ(z) = Σ_{k≥1} c_k z^k.
const RGAMMA_TAYLOR: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_9,
    -0.042_002_635_034_095_24,
    0.166_538_611_382_291_48,
    -0.042_197_734_555_544_33,
    -0.009_621_971_527_876_973,
    0.007_218_943_246_663_1,
    -0.001_165_167_591_859_065_2,
    -0.000_215_241_674_114_950_98,
    0.000_128_050_282_388_116_2,
    -0.000_020_134_854_780_788_24,
    -1.250_493_482_142_670_6e-6,
    1.133_027_231_981_696e-6,
    -2.056_338_416_977_607e-7,
    6.116_095_104_481_416e-9,
    5.002_007_644_469_223e-9,
    -1.181_274_570_487_02e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_206e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_506_6e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
    -1.181_259_301_697_458_8e-16,
];

/// (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) where
/// gam1 = (1/Γ(1−μ) − 1/Γ(1+μ)) / (2μ), gam2 = (1/Γ(1−μ) + 1/Γ(1+μ)) / 2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+μ) = Σ_{k≥1} c_k μ^{k−1}; split into even and odd powers of μ
    let mu2 = mu * mu;
    let mut odd = 0.0; // Σ c_{2i+1} μ^{2i}
    let mut even = 0.0; // Σ c_{2i+2} μ^{2i}
    for i in (0..RGAMMA_TAYLOR.len() / 2).rev() {
        odd = odd * mu2 + RGAMMA_TAYLOR[2 * i];
        even = even * mu2 + RGAMMA_TAYLOR[2 * i + 1];
    }
    let plus = odd + mu * even;
    let minus = odd - mu * even;
    (-even, odd, plus, minus)
}

/// Temme's series: (K_μ(x), K_{μ+1}(x)) for |μ| ≤ 1/2, x ≤ 2.
fn temme(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu * mu);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS && del1.abs() < sum1.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// Steed's continued fraction: (e^x K_μ(x), e^x K_{μ+1}(x)) for x > 2.
fn steed(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * x)).sqrt() / s;
    let k_next = k_mu * (mu + x + 0.5 - h) / x;
    (k_mu, k_next)
}
