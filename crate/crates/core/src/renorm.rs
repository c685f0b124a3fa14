//! Finite-part extraction from sampled divergent curves, Hadamard-regularized
//! integrals, and the closed-form bilinear K_ν integral used as an oracle.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::logseries::SingularModel;
use crate::quad::GaussLegendre;
use crate::specfun::{digamma, Order};

/// Samples ε ↦ E(ε) with ε strictly decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: CurveMeta,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveMeta {
    pub nu: Option<f64>,
    pub description: String,
}

impl EnergyCurve {
    pub fn new(eps: Vec<f64>, values: Vec<f64>, meta: CurveMeta) -> Result<Self> {
        if eps.len() != values.len() {
            return domain(format!(
                "curve has {} eps values but {} samples",
                eps.len(),
                values.len()
            ));
        }
        if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return domain("curve eps values must be positive and finite");
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return domain("curve eps values must be strictly decreasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("curve values must be finite");
        }
        Ok(Self { eps, values, meta })
    }

    /// Sample `f` on `eps`.
    pub fn sample<F: FnMut(f64) -> Result<f64>>(eps: &[f64], mut f: F, meta: CurveMeta) -> Result<Self> {
        let values = eps.iter().map(|&e| f(e)).collect::<Result<Vec<_>>>()?;
        Self::new(eps.to_vec(), values, meta)
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

/// `count` geometric points from `max` down to `min`.
pub fn geometric_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && min.is_finite() && max.is_finite()) {
        return domain(format!("grid bounds need 0 < min < max, got [{min}, {max}]"));
    }
    if count < 2 {
        return domain(format!("grid needs at least 2 points, got {count}"));
    }
    let step = (min / max).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|k| {
            if k == count - 1 {
                min
            } else {
                max * (step * k as f64).exp()
            }
        })
        .collect())
}

/// 48 points in [1e-3, 1e-1].
pub fn default_grid() -> Vec<f64> {
    geometric_grid(1e-3, 1e-1, 48).expect("valid default grid")
}

/// One column of the least-squares basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisTerm {
    Constant,
    LogInverse,
    Power(f64),
    Correction(f64),
    LogCorrection(f64),
    Log2Correction(f64),
}

impl BasisTerm {
    pub fn eval(&self, eps: f64) -> f64 {
        match *self {
            Self::Constant => 1.0,
            Self::LogInverse => -eps.ln(),
            Self::Power(a) | Self::Correction(a) => eps.powf(a),
            Self::LogCorrection(a) => eps.powf(a) * eps.ln(),
            Self::Log2Correction(a) => eps.powf(a) * eps.ln().powi(2),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Constant => "1".to_string(),
            Self::LogInverse => "log(1/eps)".to_string(),
            Self::Power(a) | Self::Correction(a) => format!("eps^{a}"),
            Self::LogCorrection(a) => format!("eps^{a}*log(eps)"),
            Self::Log2Correction(a) => format!("eps^{a}*log(eps)^2"),
        }
    }
}

pub fn basis(model: &SingularModel) -> Vec<BasisTerm> {
    let mut b = vec![BasisTerm::Constant];
    if model.has_log {
        b.push(BasisTerm::LogInverse);
    }
    b.extend(model.power_exponents.iter().map(|&a| BasisTerm::Power(a)));
    b.extend(
        model
            .correction_exponents
            .iter()
            .map(|&a| BasisTerm::Correction(a)),
    );
    b.extend(model.log_corrections.iter().map(|&a| BasisTerm::LogCorrection(a)));
    b.extend(
        model
            .log2_corrections
            .iter()
            .map(|&a| BasisTerm::Log2Correction(a)),
    );
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub finite_part: f64,
    pub coefficients: BTreeMap<String, f64>,
    pub max_residual: f64,
    pub condition_estimate: f64,
}

const MAX_CONDITION: f64 = 1e14;

/// Least-squares fit of the model basis; the constant coefficient is the
/// renormalized limit.
pub fn renorm_limit_fit(curve: &EnergyCurve, model: &SingularModel) -> Result<FitResult> {
    model.validate()?;
    let terms = basis(model);
    let n = terms.len();
    let m = curve.len();
    if m < n + 4 {
        return domain(format!(
            "fit with {n} basis terms needs at least {} samples, got {m}",
            n + 4
        ));
    }
    let mut a = DMatrix::<f64>::zeros(m, n);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, (&e, &v)) in curve.eps.iter().zip(&curve.values).enumerate() {
        let row: Vec<f64> = terms.iter().map(|t| t.eval(e)).collect();
        let w = 1.0 / row.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        for (j, x) in row.iter().enumerate() {
            a[(i, j)] = x * w;
        }
        rhs[i] = v * w;
    }
    let mut col_scale = vec![1.0; n];
    for (j, s) in col_scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = 1.0 / norm;
            a.column_mut(j).scale_mut(*s);
        }
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let (imin, smin) = sv.iter().enumerate().fold(
        (0, f64::INFINITY),
        |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
    );
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    if !(condition <= MAX_CONDITION) {
        let null = v_t.row(imin);
        let peak = null.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let names = terms
            .iter()
            .zip(null.iter())
            .filter(|(_, x)| x.abs() >= 0.1 * peak)
            .map(|(t, _)| t.name())
            .collect();
        return Err(Error::Conditioning(names));
    }
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let utb = u.transpose() * &rhs;
    let mut y = DVector::<f64>::zeros(n);
    for k in 0..n {
        y[k] = utb[k] / sv[k];
    }
    let scaled = v_t.transpose() * y;
    let coef: Vec<f64> = (0..n).map(|j| scaled[j] * col_scale[j]).collect();

    let mut max_residual = 0.0f64;
    for (&e, &v) in curve.eps.iter().zip(&curve.values) {
        let fit: f64 = terms.iter().zip(&coef).map(|(t, c)| c * t.eval(e)).sum();
        max_residual = max_residual.max((fit - v).abs());
    }
    let coefficients = terms.iter().zip(&coef).map(|(t, c)| (t.name(), *c)).collect();
    Ok(FitResult {
        finite_part: coef[0],
        coefficients,
        max_residual,
        condition_estimate: condition,
    })
}

/// Settings for ∫_ε^∞ on a geometric ε grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailQuadrature {
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,
    /// Exponential decay rate of the integrand; the cutoff is 50/rate.
    pub decay_rate: f64,
    pub nodes: usize,
}

impl Default for TailQuadrature {
    fn default() -> Self {
        Self {
            eps_min: 1e-3,
            eps_max: 1e-1,
            eps_count: 48,
            decay_rate: 1.0,
            nodes: 20,
        }
    }
}

impl TailQuadrature {
    pub fn cutoff(&self) -> f64 {
        50.0 / self.decay_rate
    }
}

/// Correction family ε^{2k}(log ε)^p, k=1..3, p=0..2, used when the caller's
/// model specifies no corrections of its own.
pub fn even_log_corrections(model: &SingularModel) -> SingularModel {
    let mut m = model.clone();
    if m.correction_exponents.is_empty() && m.log_corrections.is_empty() && m.log2_corrections.is_empty() {
        m.correction_exponents = vec![2.0, 4.0, 6.0];
        m.log_corrections = vec![2.0, 4.0, 6.0];
        m.log2_corrections = vec![2.0, 4.0, 6.0];
    }
    m
}

/// Hadamard finite part of ∫_0^∞ f(y) dy.
///
/// Computes ∫_ε^Y f on the ε grid with Y = 50/decay_rate and fits the model.
/// If the model carries no correction terms, the family from
/// [`even_log_corrections`] is added.
pub fn hadamard_tail_integral<F: Fn(f64) -> f64>(
    integrand: F,
    model: &SingularModel,
    quad: &TailQuadrature,
) -> Result<f64> {
    let grid = geometric_grid(quad.eps_min, quad.eps_max, quad.eps_count)?;
    let cutoff = quad.cutoff();
    if cutoff <= quad.eps_max {
        return domain("tail cutoff must exceed the largest eps");
    }
    let gl = GaussLegendre::new(quad.nodes);
    let panel = |a: f64, b: f64| -> f64 {
        // geometric sub-panels keep each piece within a factor 2
        let pieces = ((b / a).log2().ceil() as usize).max(1);
        let ratio = (b / a).powf(1.0 / pieces as f64);
        let mut lo = a;
        let mut acc = 0.0;
        for k in 0..pieces {
            let hi = if k + 1 == pieces { b } else { lo * ratio };
            acc += gl.integrate(lo, hi, &integrand);
            lo = hi;
        }
        acc
    };
    // ∫_{eps_max}^{Y}: geometric up to 1/rate, then unit-rate panels
    let knee = (1.0 / quad.decay_rate).max(quad.eps_max);
    let mut outer = panel(quad.eps_max, knee);
    let width = 1.0 / quad.decay_rate;
    let mut lo = knee;
    while lo < cutoff {
        let hi = (lo + width).min(cutoff);
        outer += gl.integrate(lo, hi, &integrand);
        lo = hi;
    }
    let tail = integrand(cutoff).abs() / quad.decay_rate;
    let bound = 1e-12 * outer.abs().max(f64::MIN_POSITIVE);
    if tail > bound {
        return Err(Error::Truncation { cutoff, tail, bound });
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut acc = outer;
    values.push(acc);
    for w in grid.windows(2) {
        acc += panel(w[1], w[0]);
        values.push(acc);
    }
    let curve = EnergyCurve::new(
        grid,
        values,
        CurveMeta {
            nu: None,
            description: "hadamard tail integral".to_string(),
        },
    )?;
    Ok(renorm_limit_fit(&curve, &even_log_corrections(model))?.finite_part)
}

/// ∫_0^{∞,Had} |K_ν(by)|² y dy for integer ν ≥ 0.
pub fn derezinski_bilinear(nu: f64, b: f64) -> Result<f64> {
    let order = Order::new(nu);
    let n = match order.as_integer() {
        Some(n) => n,
        None => return domain(format!("bilinear closed form needs integer nu, got {nu}")),
    };
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("b must be positive, got {b}"));
    }
    let nf = n as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let bracket = 1.0 + nf * (b * b / 4.0).ln() + 2.0 * nf * (1.0 - digamma(1.0 + nf)?);
    Ok(sign * 0.5 * bracket / (b * b))
}

/// Divergence structure of ∫_ε^∞ |K_ν(by)|² y dy.
pub fn derezinski_model(nu: u32) -> SingularModel {
    let powers = (1..nu).map(|k| -2.0 * k as f64).collect();
    SingularModel {
        power_exponents: powers,
        has_log: nu >= 1,
        ..SingularModel::default()
    }
}
