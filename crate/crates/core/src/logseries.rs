//! Truncated expansions Σ c·z^a·(log z)^p.
//!
//! Holds the small-argument expansions of K̂_ν and K̃_μ and the products
//! needed for per-mode energies.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{digamma, factorial, gamma, Order};

/// Exponents closer than this are treated as equal.
pub const EXPONENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponent: f64,
    pub log_power: u32,
    pub coeff: f64,
}

impl Term {
    pub fn new(exponent: f64, log_power: u32, coeff: f64) -> Self {
        Self {
            exponent,
            log_power,
            coeff,
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        let mut v = self.coeff * z.powf(self.exponent);
        if self.log_power > 0 {
            v *= z.ln().powi(self.log_power as i32);
        }
        v
    }
}

/// Every omitted term has exponent strictly above `truncation_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLaurentSeries {
    terms: Vec<Term>,
    truncation_order: f64,
}

impl LogLaurentSeries {
    pub fn new(terms: Vec<Term>, truncation_order: f64) -> Self {
        let mut s = Self {
            terms,
            truncation_order,
        };
        s.normalize();
        s
    }

    /// A series that is exact (nothing omitted).
    pub fn exact(terms: Vec<Term>) -> Self {
        Self::new(terms, f64::INFINITY)
    }

    pub fn zero() -> Self {
        Self::exact(Vec::new())
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn truncation_order(&self) -> f64 {
        self.truncation_order
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> Option<f64> {
        self.terms.first().map(|t| t.exponent)
    }

    /// Coefficient of z^a (log z)^p, zero if absent.
    pub fn coeff(&self, exponent: f64, log_power: u32) -> f64 {
        self.terms
            .iter()
            .find(|t| (t.exponent - exponent).abs() <= EXPONENT_TOL && t.log_power == log_power)
            .map_or(0.0, |t| t.coeff)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.exponent, t.log_power, t.coeff * k))
            .collect();
        Self::new(terms, self.truncation_order)
    }

    /// Multiply by z^s.
    pub fn shift(&self, s: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.exponent + s, t.log_power, t.coeff))
            .collect();
        Self::new(terms, self.truncation_order + s)
    }

    /// Keep only terms with exponent ≤ order.
    pub fn truncate(&self, order: f64) -> Self {
        let order = order.min(self.truncation_order);
        let terms = self
            .terms
            .iter()
            .copied()
            .filter(|t| t.exponent <= order + EXPONENT_TOL)
            .collect();
        Self::new(terms, order)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.truncation_order.min(other.truncation_order);
        let terms = self.terms.iter().chain(&other.terms).copied().collect();
        Self::new(terms, order).truncate(order)
    }

    /// Substitute z = r·ε and re-expand in ε, splitting (log r + log ε)^p
    /// binomially.
    pub fn rescale(&self, r: f64) -> Self {
        let lr = r.ln();
        let mut terms = Vec::new();
        for t in &self.terms {
            let base = t.coeff * r.powf(t.exponent);
            let p = t.log_power;
            for q in 0..=p {
                let c = base * binomial(p, q) * lr.powi((p - q) as i32);
                terms.push(Term::new(t.exponent, q, c));
            }
        }
        Self::new(terms, self.truncation_order)
    }

    /// Terms with exponent < 0, or with a log at exponent 0.
    pub fn singular_part(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .copied()
            .filter(|t| t.exponent < -EXPONENT_TOL || (t.exponent.abs() <= EXPONENT_TOL && t.log_power > 0))
            .collect();
        Self::exact(terms)
    }

    /// Everything except the plain constant term.
    pub fn without_constant(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .copied()
            .filter(|t| !(t.exponent.abs() <= EXPONENT_TOL && t.log_power == 0))
            .collect();
        Self::new(terms, self.truncation_order)
    }

    fn normalize(&mut self) {
        self.terms.retain(|t| t.coeff != 0.0);
        self.terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        let mut start = 0;
        while start < self.terms.len() {
            let a0 = self.terms[start].exponent;
            let mut end = start + 1;
            while end < self.terms.len() && self.terms[end].exponent - a0 <= EXPONENT_TOL {
                end += 1;
            }
            let group = &mut self.terms[start..end];
            group.sort_by(|x, y| {
                x.log_power
                    .cmp(&y.log_power)
                    .then_with(|| x.coeff.total_cmp(&y.coeff))
            });
            let mut i = 0;
            while i < group.len() {
                let p = group[i].log_power;
                let mut c = 0.0;
                while i < group.len() && group[i].log_power == p {
                    c += group[i].coeff;
                    i += 1;
                }
                if c != 0.0 {
                    merged.push(Term::new(a0, p, c));
                }
            }
            start = end;
        }
        self.terms = merged;
    }
}

/// Product truncated at `order`. The result's truncation order is also
/// limited by what the factors know.
pub fn mul(a: &LogLaurentSeries, b: &LogLaurentSeries, order: f64) -> LogLaurentSeries {
    let mut trunc = order;
    if let Some(mb) = b.min_exponent() {
        trunc = trunc.min(a.truncation_order + mb);
    }
    if let Some(ma) = a.min_exponent() {
        trunc = trunc.min(b.truncation_order + ma);
    }
    let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
    for x in &a.terms {
        for y in &b.terms {
            let e = x.exponent + y.exponent;
            if e <= trunc + EXPONENT_TOL {
                terms.push(Term::new(e, x.log_power + y.log_power, x.coeff * y.coeff));
            }
        }
    }
    // Summation order must not depend on operand order.
    terms.sort_by(|s, t| {
        s.exponent
            .total_cmp(&t.exponent)
            .then(s.log_power.cmp(&t.log_power))
            .then(s.coeff.total_cmp(&t.coeff))
    });
    LogLaurentSeries::new(terms, trunc)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Divergence structure Σ a_k ε^{-λ_k} + a₀ log(1/ε) + finite + corrections.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SingularModel {
    /// Negative exponents of the divergent powers.
    pub power_exponents: Vec<f64>,
    /// Whether a log(1/ε) term is present.
    pub has_log: bool,
    /// Positive exponents a of ε^a correction terms.
    pub correction_exponents: Vec<f64>,
    /// Positive exponents a of ε^a·log ε correction terms.
    pub log_corrections: Vec<f64>,
    /// Positive exponents a of ε^a·(log ε)² correction terms.
    #[serde(default)]
    pub log2_corrections: Vec<f64>,
}

impl SingularModel {
    pub fn new(
        power_exponents: Vec<f64>,
        has_log: bool,
        correction_exponents: Vec<f64>,
        log_corrections: Vec<f64>,
        log2_corrections: Vec<f64>,
    ) -> Result<Self> {
        let m = Self {
            power_exponents: sorted_dedup(power_exponents),
            has_log,
            correction_exponents: sorted_dedup(correction_exponents),
            log_corrections: sorted_dedup(log_corrections),
            log2_corrections: sorted_dedup(log2_corrections),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.power_exponents.iter().find(|a| !(**a < 0.0)) {
            return Err(Error::Structure(format!(
                "singular exponent {a} must be negative"
            )));
        }
        let positive = self
            .correction_exponents
            .iter()
            .chain(&self.log_corrections)
            .chain(&self.log2_corrections);
        for a in positive {
            if !(*a > 0.0) {
                return Err(Error::Structure(format!(
                    "correction exponent {a} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// Only the divergent part, without corrections.
    pub fn singular_only(&self) -> Self {
        Self {
            power_exponents: self.power_exponents.clone(),
            has_log: self.has_log,
            ..Self::default()
        }
    }

    pub fn basis_len(&self) -> usize {
        1 + usize::from(self.has_log)
            + self.power_exponents.len()
            + self.correction_exponents.len()
            + self.log_corrections.len()
            + self.log2_corrections.len()
    }
}

fn sorted_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= EXPONENT_TOL);
    v
}

/// Result of splitting a series into divergent part, finite part and
/// corrections.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub model: SingularModel,
    pub finite: f64,
    /// Coefficient of log(1/ε), i.e. minus the coefficient of log z.
    pub finite_log_coeff: f64,
}

pub fn split_singular(s: &LogLaurentSeries) -> Result<SplitSeries> {
    let mut powers = Vec::new();
    let mut corrections = Vec::new();
    let mut log_corr = Vec::new();
    let mut log2_corr = Vec::new();
    let mut finite = 0.0;
    let mut log_coeff = 0.0;
    let mut has_log = false;
    for t in s.terms() {
        let a = t.exponent;
        if a.abs() <= EXPONENT_TOL {
            match t.log_power {
                0 => finite = t.coeff,
                1 => {
                    has_log = true;
                    log_coeff = -t.coeff;
                }
                p => {
                    return Err(Error::Structure(format!(
                        "log power {p} at exponent 0 has no finite-part reading"
                    )))
                }
            }
        } else if a < 0.0 {
            if t.log_power > 0 {
                return Err(Error::Structure(format!("log term at negative exponent {a}")));
            }
            powers.push(a);
        } else {
            match t.log_power {
                0 => corrections.push(a),
                1 => log_corr.push(a),
                2 => log2_corr.push(a),
                p => {
                    return Err(Error::Structure(format!(
                        "log power {p} at exponent {a} is not supported"
                    )))
                }
            }
        }
    }
    Ok(SplitSeries {
        model: SingularModel::new(powers, has_log, corrections, log_corr, log2_corr)?,
        finite,
        finite_log_coeff: log_coeff,
    })
}

/// Expansion of K̂_ν(z) = z^{-ν}K_ν(z) through exponent `order`.
pub fn series_khat(nu: Order, order: f64) -> Result<LogLaurentSeries> {
    let v = nu.nu();
    if !(v > -1.0 && v <= 6.0) {
        return domain(format!("series_khat needs nu in (-1, 6], got {v}"));
    }
    if !(order >= 0.0) {
        return domain(format!("series order must be nonnegative, got {order}"));
    }
    Ok(khat_terms(nu, order))
}

/// Expansion of K̃_μ(z) = z^{μ}K_μ(z) through exponent `order`.
pub fn series_ktilde(mu: f64, order: f64) -> Result<LogLaurentSeries> {
    if !(mu > 0.0 && mu <= 7.0) {
        return domain(format!("series_ktilde needs mu in (0, 7], got {mu}"));
    }
    if !(order >= 0.0) {
        return domain(format!("series order must be nonnegative, got {order}"));
    }
    let mu_order = Order::new(mu);
    Ok(khat_terms(mu_order, order - 2.0 * mu_order.nu()).shift(2.0 * mu_order.nu()))
}

fn khat_terms(nu: Order, order: f64) -> LogLaurentSeries {
    let mut terms = Vec::new();
    match nu.as_integer() {
        Some(n) => {
            let nf = n as f64;
            for k in 0..n {
                let a = -2.0 * (nf - k as f64);
                if a > order + EXPONENT_TOL {
                    break;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let c = sign * factorial(n - k - 1) / (2f64.powi(2 * k as i32 - n as i32 + 1) * factorial(k));
                terms.push(Term::new(a, 0, c));
            }
            let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
            let mut j = 0u32;
            while 2.0 * j as f64 <= order + EXPONENT_TOL {
                let denom = 2f64.powi((2 * j + n) as i32) * factorial(j) * factorial(n + j);
                let a = 2.0 * j as f64;
                terms.push(Term::new(a, 1, -sign_n / denom));
                let psi = digamma((j + 1) as f64).expect("positive argument")
                    + digamma((n + j + 1) as f64).expect("positive argument");
                terms.push(Term::new(a, 0, sign_n * (0.5 * psi + LN_2) / denom));
                j += 1;
            }
        }
        None => {
            let v = nu.nu();
            let mut j = 0u32;
            loop {
                let a = 2.0 * j as f64 - 2.0 * v;
                if a > order + EXPONENT_TOL {
                    break;
                }
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                let c = sign * gamma(v - j as f64) / (2.0 * 2f64.powf(2.0 * j as f64 - v) * factorial(j));
                terms.push(Term::new(a, 0, c));
                j += 1;
            }
            let head = gamma(-v) * gamma(1.0 + v);
            let mut j = 0u32;
            while 2.0 * j as f64 <= order + EXPONENT_TOL {
                let c =
                    head / (2.0 * 2f64.powf(2.0 * j as f64 + v) * factorial(j) * gamma(j as f64 + v + 1.0));
                terms.push(Term::new(2.0 * j as f64, 0, c));
                j += 1;
            }
        }
    }
    LogLaurentSeries::new(terms, order)
}

/// Finite part F(ν) of K̂_ν at z → 0: the constant term (excluding the
/// log z piece for integer ν).
pub fn khat_finite_part(nu: Order) -> f64 {
    khat_terms(nu, 0.0).coeff(0.0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_k, ScaledKind, EULER_GAMMA};
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn khat_half_matches_exponential() {
        let s = series_khat(Order::new(0.5), 2.0).unwrap();
        let c = (PI / 2.0).sqrt();
        assert!(close(s.coeff(-1.0, 0), c, 1e-15));
        assert!(close(s.coeff(0.0, 0), -c, 1e-15));
        assert!(close(s.coeff(1.0, 0), c / 2.0, 1e-15));
        assert!(close(s.coeff(2.0, 0), -c / 6.0, 1e-15));
    }

    #[test]
    fn khat_integer_heads() {
        let s1 = series_khat(Order::new(1.0), 0.0).unwrap();
        assert_eq!(s1.coeff(-2.0, 0), 1.0);
        let s0 = series_khat(Order::new(0.0), 0.0).unwrap();
        assert!(close(s0.coeff(0.0, 1), -1.0, 1e-15));
        assert!(close(s0.coeff(0.0, 0), LN_2 - EULER_GAMMA, 1e-15));
        assert!(s0.terms().len() == 2);
    }

    #[test]
    fn log_terms_only_for_integers() {
        for v in [0.3, 0.5, 1.5, 2.7] {
            let s = series_khat(Order::new(v), 8.0).unwrap();
            assert!(s.terms().iter().all(|t| t.log_power == 0));
        }
        for n in [0.0, 1.0, 2.0, 3.0] {
            let s = series_khat(Order::new(n), 8.0).unwrap();
            let logs: Vec<f64> = s
                .terms()
                .iter()
                .filter(|t| t.log_power > 0)
                .map(|t| {
                    assert_eq!(t.log_power, 1);
                    t.exponent
                })
                .collect();
            assert_eq!(logs, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        }
    }

    #[test]
    fn recomposition_against_direct() {
        for v in [0.3, 0.5, 1.0, 1.5, 2.0] {
            let s = series_khat(Order::new(v), 8.0).unwrap();
            for k in 0..=30 {
                let z = 10f64.powf(-4.0 + 3.0 * k as f64 / 30.0);
                let direct = bessel_k(ScaledKind::Hat, v, z).unwrap();
                let rel = (s.eval(z) - direct).abs() / direct.abs();
                assert!(rel < 1e-9, "nu={v} z={z} rel={rel}");
            }
        }
    }

    #[test]
    fn ktilde_constants() {
        let s = series_ktilde(1.5, 2.0).unwrap();
        assert!(close(s.coeff(0.0, 0), 2f64.sqrt() * gamma(1.5), 1e-15));
        assert!(s.terms()[1].exponent == 2.0);
        let s1 = series_ktilde(1.0, 2.0).unwrap();
        assert!(close(s1.coeff(0.0, 0), 1.0, 1e-15));
        assert!(close(s1.coeff(2.0, 1), 0.5, 1e-15));
        let s2 = series_ktilde(2.0, 6.0).unwrap();
        let z = 1e-3;
        let d = bessel_k(ScaledKind::Tilde, 2.0, z).unwrap();
        assert!((s2.eval(z) - d).abs() <= 1e-12 * d);
    }

    #[test]
    fn ktilde_rejects_nonpositive() {
        assert!(series_ktilde(0.0, 2.0).is_err());
        assert!(series_khat(Order::new(0.5), -1.0).is_err());
    }

    #[test]
    fn mul_examples() {
        let a = LogLaurentSeries::exact(vec![Term::new(-1.0, 0, 1.0)]);
        let b = LogLaurentSeries::exact(vec![Term::new(1.0, 0, 2.0)]);
        let p = mul(&a, &b, 4.0);
        assert_eq!(p.terms(), &[Term::new(0.0, 0, 2.0)]);
        let l = LogLaurentSeries::exact(vec![Term::new(0.0, 1, 1.0)]);
        assert_eq!(mul(&l, &l, 0.0).terms(), &[Term::new(0.0, 2, 1.0)]);

        let kh = series_khat(Order::new(0.5), 4.0).unwrap();
        let kt = series_ktilde(1.5, 4.0).unwrap();
        let c = 1.0 / (2f64.sqrt() * gamma(1.5));
        let e = mul(&kh, &kt, 2.0).scale(c * c);
        assert!(close(e.coeff(-1.0, 0), 1.0, 1e-14));
        assert!(close(e.coeff(0.0, 0), -1.0, 1e-14));
        assert!(close(e.coeff(1.0, 0), 0.0, 1e-14));
        assert!(close(e.coeff(2.0, 0), 2.0 / 3.0, 1e-14));
    }

    #[test]
    fn mul_truncation_tracks_factors() {
        let kh = series_khat(Order::new(1.0), 2.0).unwrap();
        let kt = series_ktilde(2.0, 10.0).unwrap();
        let p = mul(&kh, &kt, 10.0);
        // K̂_1 known through z², times K̃_2 starting at z⁰
        assert_eq!(p.truncation_order(), 2.0);
    }

    #[test]
    fn split_examples() {
        let s = LogLaurentSeries::exact(vec![
            Term::new(-2.0, 0, 3.0),
            Term::new(0.0, 0, 7.0),
            Term::new(2.0, 0, 1.0),
        ]);
        let sp = split_singular(&s).unwrap();
        assert_eq!(sp.model.power_exponents, vec![-2.0]);
        assert_eq!(sp.model.correction_exponents, vec![2.0]);
        assert_eq!(sp.finite, 7.0);

        let k0 = series_khat(Order::new(0.0), 0.0).unwrap();
        let sp = split_singular(&k0).unwrap();
        assert!(sp.model.has_log);
        assert!(close(sp.finite_log_coeff, 1.0, 1e-15));
        assert!(close(sp.finite, LN_2 - EULER_GAMMA, 1e-15));

        let sp = split_singular(&LogLaurentSeries::zero()).unwrap();
        assert_eq!(sp.model, SingularModel::default());
        assert_eq!(sp.finite, 0.0);

        let bad = LogLaurentSeries::exact(vec![Term::new(0.0, 2, 1.0)]);
        assert!(matches!(split_singular(&bad), Err(Error::Structure(_))));
    }

    #[test]
    fn rescale_matches_substitution() {
        let s = series_khat(Order::new(1.0), 6.0).unwrap();
        let r = 1.7;
        let t = s.rescale(r);
        for eps in [1e-3, 1e-2, 0.1] {
            assert!(close(t.eval(eps), s.eval(r * eps), 1e-13));
        }
    }

    #[test]
    fn normalize_merges_close_exponents() {
        let s = LogLaurentSeries::exact(vec![
            Term::new(1.0, 0, 1.0),
            Term::new(1.0 + 1e-12, 0, 2.0),
            Term::new(0.5, 1, 0.0),
        ]);
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].coeff, 3.0);
    }
}
