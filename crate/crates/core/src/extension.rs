//! The extension problem in frequency space: solution, Neumann flux,
//! per-mode and paired energies with their small-ε expansions, and a
//! physical-space Poisson-kernel check for ν = 0, d = 1.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::logseries::{
    mul, series_khat, series_ktilde, split_singular, LogLaurentSeries, SingularModel, Term, EXPONENT_TOL,
};
use crate::renorm::{BasisTerm, CurveMeta, EnergyCurve};
use crate::specfun::{bessel_k, gamma, Order, ScaledKind};
use crate::spectral::{pairing, MultiplierSymbol, SpectralProfile};

/// Largest ν for which K̃_{1+ν} stays within the Bessel order range.
pub const MAX_NU: f64 = 5.0;

fn check_nu(nu: Order) -> Result<f64> {
    let v = nu.nu();
    if !(v > -1.0 && v <= MAX_NU) {
        return domain(format!("nu must lie in (-1, {MAX_NU}], got {v}"));
    }
    Ok(v)
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("{name} must be positive, got {x}"));
    }
    Ok(())
}

/// 1/(2^ν Γ(1+ν)), the unit-flux normalization.
pub fn flux_constant(nu: Order) -> f64 {
    let v = nu.nu();
    1.0 / (2f64.powf(v) * gamma(1.0 + v))
}

/// φ(y) = λ^ν/(2^ν Γ(1+ν)) K̂_ν(√λ y).
pub fn phi_sturm(nu: Order, lambda: f64, y: f64) -> Result<f64> {
    let v = check_nu(nu)?;
    check_positive("lambda", lambda)?;
    check_positive("y", y)?;
    Ok(lambda.powf(v) * flux_constant(nu) * bessel_k(ScaledKind::Hat, v, lambda.sqrt() * y)?)
}

/// û_f(r, y) = K̂_ν(ry) r^{2ν} f̂(r) / (2^ν Γ(1+ν)).
pub fn u_hat(nu: Order, f: &SpectralProfile, r: f64, y: f64) -> Result<f64> {
    let v = check_nu(nu)?;
    check_positive("r", r)?;
    check_positive("y", y)?;
    Ok(flux_constant(nu) * bessel_k(ScaledKind::Hat, v, r * y)? * r.powf(2.0 * v) * f.eval(r))
}

/// -y^{1+2ν} ∂_y û_f(r, y) = K̃_{1+ν}(ry) f̂(r) / (2^ν Γ(1+ν)).
pub fn flux_hat(nu: Order, f: &SpectralProfile, r: f64, y: f64) -> Result<f64> {
    let v = check_nu(nu)?;
    check_positive("r", r)?;
    check_positive("y", y)?;
    Ok(flux_constant(nu) * bessel_k(ScaledKind::Tilde, 1.0 + v, r * y)? * f.eval(r))
}

/// Per-frequency energy (2^νΓ(1+ν))^{-2} K̂_ν(rε) K̃_{1+ν}(rε) r^{2ν}.
pub fn mode_energy(nu: Order, r: f64, eps: f64) -> Result<f64> {
    let v = check_nu(nu)?;
    check_positive("r", r)?;
    check_positive("eps", eps)?;
    let z = r * eps;
    let c = flux_constant(nu);
    Ok(c * c * bessel_k(ScaledKind::Hat, v, z)? * bessel_k(ScaledKind::Tilde, 1.0 + v, z)? * r.powf(2.0 * v))
}

/// Small-z expansion of mode_energy(ν, 1, z), through exponent `order`.
pub fn mode_series(nu: Order, order: f64) -> Result<LogLaurentSeries> {
    let v = check_nu(nu)?;
    let hat = series_khat(nu, order)?;
    let tilde = series_ktilde(1.0 + v, order + (2.0 * v).max(0.0))?;
    let c = flux_constant(nu);
    Ok(mul(&hat, &tilde, order).scale(c * c))
}

/// Expansion of ε ↦ mode_energy(ν, r, ε) at fixed r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEnergyExpansion {
    pub nu: Order,
    pub r: f64,
    pub series: LogLaurentSeries,
    pub model: SingularModel,
    pub finite: f64,
}

impl ModeEnergyExpansion {
    pub fn new(nu: Order, r: f64, order: f64) -> Result<Self> {
        check_positive("r", r)?;
        let series = mode_series(nu, order)?.rescale(r).scale(r.powf(2.0 * nu.nu()));
        let split = split_singular(&series.singular_part())?;
        Ok(Self {
            nu,
            r,
            finite: series.coeff(0.0, 0),
            model: split.model,
            series,
        })
    }

    /// Sum of the divergent terms at ε.
    pub fn singular_value(&self, eps: f64) -> f64 {
        self.series.singular_part().eval(eps)
    }

    /// Sum of every term except the constant at ε.
    pub fn nonconstant_value(&self, eps: f64) -> f64 {
        self.series.without_constant().eval(eps)
    }

    /// Singular model plus every expansion term with 0 < a ≤ order as a
    /// correction, for least-squares extraction.
    pub fn fit_model(&self, order: f64) -> SingularModel {
        fit_model_from(&self.series, order, false)
    }
}

/// Fit model for paired energies: integrating over r turns each (log ε)^p
/// term into every power q ≤ p.
pub fn paired_fit_model(nu: Order, order: f64) -> Result<SingularModel> {
    Ok(fit_model_from(&mode_series(nu, order)?, order, true))
}

fn fit_model_from(series: &LogLaurentSeries, order: f64, lower_logs: bool) -> SingularModel {
    let mut m = SingularModel {
        power_exponents: Vec::new(),
        has_log: false,
        correction_exponents: Vec::new(),
        log_corrections: Vec::new(),
        log2_corrections: Vec::new(),
    };
    for t in series.terms() {
        let a = t.exponent;
        if a.abs() <= EXPONENT_TOL {
            if t.log_power > 0 {
                m.has_log = true;
            }
            continue;
        }
        if a < 0.0 {
            if !m.power_exponents.iter().any(|b| (b - a).abs() <= EXPONENT_TOL) {
                m.power_exponents.push(a);
            }
            continue;
        }
        if a > order + EXPONENT_TOL {
            continue;
        }
        let lowest = if lower_logs { 0 } else { t.log_power };
        for p in lowest..=t.log_power {
            let bucket = match p {
                0 => &mut m.correction_exponents,
                1 => &mut m.log_corrections,
                _ => &mut m.log2_corrections,
            };
            if !bucket.iter().any(|b| (b - a).abs() <= EXPONENT_TOL) {
                bucket.push(a);
            }
        }
    }
    m.correction_exponents.sort_by(f64::total_cmp);
    m.log_corrections.sort_by(f64::total_cmp);
    m.log2_corrections.sort_by(f64::total_cmp);
    m.power_exponents.sort_by(f64::total_cmp);
    m
}

/// E(ε) for each ε: the pairing of f, g against mode_energy(ν, ·, ε).
pub fn energy_curve(
    nu: Order,
    f: &SpectralProfile,
    g: &SpectralProfile,
    eps_grid: &[f64],
) -> Result<EnergyCurve> {
    let v = check_nu(nu)?;
    let meta = CurveMeta {
        nu: Some(v),
        description: format!("E(eps) for {} x {}", f.label, g.label),
    };
    EnergyCurve::sample(eps_grid, |eps| energy_at(nu, f, g, eps), meta)
}

pub fn energy_at(nu: Order, f: &SpectralProfile, g: &SpectralProfile, eps: f64) -> Result<f64> {
    let v = check_nu(nu)?;
    check_positive("eps", eps)?;
    let symbol = MultiplierSymbol::custom(
        format!("mode_energy(eps={eps})"),
        Some((2.0 * v).min(0.0)),
        move |r| mode_energy(nu, r, eps).unwrap_or(f64::NAN),
    );
    let e = pairing(f, g, &symbol)?;
    if !e.is_finite() {
        return Err(Error::Divergence(format!("energy at eps={eps} is not finite")));
    }
    Ok(e)
}

/// Coefficient of ε^a (log ε)^q in E(ε).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTerm {
    pub exponent: f64,
    pub log_power: u32,
    pub coefficient: f64,
}

/// Small-ε expansion of the paired energy E(ε).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyExpansion {
    pub nu: f64,
    /// Divergent structure only.
    pub model: SingularModel,
    /// Every non-constant term through the expansion order.
    pub terms: Vec<PairedTerm>,
    pub order: f64,
}

impl EnergyExpansion {
    /// Coefficients of the divergent basis terms, keyed like fit output.
    pub fn singular_coefficients(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.exponent < -EXPONENT_TOL && t.log_power == 0 {
                out.push((BasisTerm::Power(t.exponent).name(), t.coefficient));
            } else if t.exponent.abs() <= EXPONENT_TOL && t.log_power == 1 {
                out.push((BasisTerm::LogInverse.name(), -t.coefficient));
            }
        }
        out
    }

    /// Σ of every non-constant term at ε.
    pub fn nonconstant_value(&self, eps: f64) -> f64 {
        let le = eps.ln();
        self.terms
            .iter()
            .map(|t| t.coefficient * eps.powf(t.exponent) * le.powi(t.log_power as i32))
            .sum()
    }

    /// Singular model plus corrections through `order`, for fitting.
    pub fn fit_model(&self, order: f64) -> SingularModel {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.exponent, t.log_power, 1.0))
            .collect();
        fit_model_from(&LogLaurentSeries::exact(terms), order, false)
    }
}

/// The r-dependent coefficient of ε^a (log ε)^q in mode_energy(ν, r, ε):
/// r^{2ν+a} Σ_p s_{a,p} C(p,q) (log r)^{p-q}.
fn coefficient_symbol(nu: f64, exponent: f64, q: u32, group: Vec<(u32, f64)>) -> MultiplierSymbol {
    let label = format!("coef(eps^{exponent} log^{q})");
    MultiplierSymbol::custom(label, Some(2.0 * nu + exponent), move |r: f64| {
        let lr = r.ln();
        let mut acc = 0.0;
        for &(p, s) in &group {
            if p >= q {
                let binom = (0..q).fold(1.0, |b, i| b * (p - i) as f64 / (i + 1) as f64);
                acc += s * binom * lr.powi((p - q) as i32);
            }
        }
        acc * r.powf(2.0 * nu + exponent)
    })
}

/// Divergent structure of E(ε) with every term's coefficient obtained by
/// pairing its r-dependent coefficient against f̂ĝ.
pub fn energy_singular_model(
    nu: Order,
    f: &SpectralProfile,
    g: &SpectralProfile,
    order: f64,
) -> Result<EnergyExpansion> {
    let v = check_nu(nu)?;
    let series = mode_series(nu, order)?;
    let mut groups: Vec<(f64, Vec<(u32, f64)>)> = Vec::new();
    for t in series.terms() {
        match groups.last_mut() {
            Some((a, g)) if (*a - t.exponent).abs() <= EXPONENT_TOL => g.push((t.log_power, t.coeff)),
            _ => groups.push((t.exponent, vec![(t.log_power, t.coeff)])),
        }
    }
    let mut terms = Vec::new();
    for (a, group) in groups {
        let pmax = group.iter().map(|(p, _)| *p).max().unwrap_or(0);
        for q in 0..=pmax {
            if a.abs() <= EXPONENT_TOL && q == 0 {
                continue;
            }
            let sym = coefficient_symbol(v, a, q, group.clone());
            let coefficient = pairing(f, g, &sym)?;
            if coefficient != 0.0 {
                terms.push(PairedTerm {
                    exponent: a,
                    log_power: q,
                    coefficient,
                });
            }
        }
    }
    let singular: Vec<Term> = terms
        .iter()
        .filter(|t| t.exponent < -EXPONENT_TOL || (t.exponent.abs() <= EXPONENT_TOL && t.log_power > 0))
        .map(|t| Term::new(t.exponent, t.log_power, t.coefficient))
        .collect();
    let model = split_singular(&LogLaurentSeries::exact(singular))?.model;
    Ok(EnergyExpansion {
        nu: v,
        model,
        terms,
        order,
    })
}

/// Samples of f on x_k = x0 + k·h.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl UniformGrid {
    pub fn sample<F: Fn(f64) -> f64>(x0: f64, x1: f64, n: usize, f: F) -> Result<Self> {
        if n < 3 || !(x1 > x0) {
            return domain("grid needs x1 > x0 and at least 3 points");
        }
        let h = (x1 - x0) / (n - 1) as f64;
        let values = (0..n).map(|k| f(x0 + k as f64 * h)).collect();
        Ok(Self { x0, h, values })
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    /// Every other sample, for the 2h error estimate.
    pub fn coarsen(&self) -> Self {
        Self {
            x0: self.x0,
            h: 2.0 * self.h,
            values: self.values.iter().step_by(2).copied().collect(),
        }
    }

    fn trapezoid<F: Fn(f64) -> f64>(&self, kernel: F) -> f64 {
        let n = self.values.len();
        let mut acc = 0.0;
        for (k, fv) in self.values.iter().enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += w * fv * kernel(self.x(k));
        }
        acc * self.h
    }
}

fn with_error_check<F: Fn(&UniformGrid) -> f64>(grid: &UniformGrid, tol: f64, f: F) -> Result<f64> {
    let fine = f(grid);
    let coarse = f(&grid.coarsen());
    let estimate = (fine - coarse).abs();
    if estimate > tol * fine.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Accuracy {
            estimate,
            tolerance: tol,
        });
    }
    Ok(fine)
}

/// Relative tolerance for the Poisson-kernel quadratures.
pub const POISSON_TOL: f64 = 1e-6;

/// u(x, y) = ½ ∫ f(z) ((x-z)² + y²)^{-1/2} dz, the ν = 0 extension in d = 1.
pub fn poisson_u0(grid: &UniformGrid, x: f64, y: f64) -> Result<f64> {
    check_positive("y", y)?;
    with_error_check(grid, POISSON_TOL, |g| {
        0.5 * g.trapezoid(|z| ((x - z).powi(2) + y * y).powf(-0.5))
    })
}

/// -y ∂_y u(x, y) = ½ y² ∫ f(z) ((x-z)² + y²)^{-3/2} dz.
pub fn poisson_flux(grid: &UniformGrid, x: f64, y: f64) -> Result<f64> {
    check_positive("y", y)?;
    with_error_check(grid, POISSON_TOL, |g| {
        0.5 * y * y * g.trapezoid(|z| ((x - z).powi(2) + y * y).powf(-1.5))
    })
}

/// ∫ u(x, ε)·(-ε ∂_y u)(x, ε) dx over x ∈ [-half_width, half_width].
pub fn poisson_energy(grid: &UniformGrid, eps: f64, half_width: f64, h: f64) -> Result<f64> {
    check_positive("eps", eps)?;
    check_positive("half_width", half_width)?;
    check_positive("h", h)?;
    let n = (2.0 * half_width / h).round() as usize;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for k in 0..=n {
        let x = -half_width + k as f64 * 2.0 * half_width / n as f64;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let v = poisson_u0(grid, x, eps)? * poisson_flux(grid, x, eps)?;
        fine += w * v;
        if k % 2 == 0 {
            let wc = if k == 0 || k == n { 0.5 } else { 1.0 };
            coarse += wc * v;
        }
    }
    let step = 2.0 * half_width / n as f64;
    let fine = fine * step;
    let coarse = coarse * 2.0 * step;
    if n.is_multiple_of(2) {
        let estimate = (fine - coarse).abs();
        if estimate > 1e-3 * fine.abs() {
            return Err(Error::Accuracy {
                estimate,
                tolerance: 1e-3,
            });
        }
    }
    Ok(fine)
}
