//! Radial frequency-side test data, Fourier multipliers and Plancherel
//! pairings, with 𝓕f(ξ) = ∫ e^{iξ·x} f(x) dx.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{radial_panels, GaussLegendre};
use crate::specfun::gamma;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial Fourier transform f̂(|ξ|) of a Schwartz function on ℝ^d.
#[derive(Clone)]
pub struct SpectralProfile {
    pub d: u32,
    pub fhat: RadialFn,
    /// |f̂(r)| ≤ 1e-16·f̂(0) beyond this radius.
    pub decay_radius: f64,
    pub label: String,
}

impl fmt::Debug for SpectralProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralProfile")
            .field("d", &self.d)
            .field("decay_radius", &self.decay_radius)
            .field("label", &self.label)
            .finish()
    }
}

impl SpectralProfile {
    pub fn eval(&self, r: f64) -> f64 {
        (self.fhat)(r)
    }
}

/// f(x) = exp(-|x|²/(2w²)), f̂(r) = (2π)^{d/2} w^d exp(-w²r²/2).
pub fn gaussian_profile(d: u32, w: f64) -> Result<SpectralProfile> {
    if !(1..=3).contains(&d) {
        return domain(format!("dimension must be 1, 2 or 3, got {d}"));
    }
    if !(w > 0.0 && w.is_finite()) {
        return domain(format!("width must be positive, got {w}"));
    }
    let amp = (2.0 * PI).powf(d as f64 / 2.0) * w.powi(d as i32);
    let decay_radius = (2.0 * 1e16f64.ln()).sqrt() / w;
    Ok(SpectralProfile {
        d,
        fhat: Arc::new(move |r| amp * (-0.5 * w * w * r * r).exp()),
        decay_radius,
        label: format!("gaussian(d={d},w={w})"),
    })
}

/// ∫ f g dx for two Gaussians of widths w₁, w₂ in dimension d.
pub fn gaussian_overlap(d: u32, w1: f64, w2: f64) -> f64 {
    let s = w1 * w1 * w2 * w2 / (w1 * w1 + w2 * w2);
    (2.0 * PI * s).powf(d as f64 / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymbolKind {
    /// r^{2σ}
    Frac { sigma: f64 },
    /// log r²
    Log,
    /// c₀ + c_log·log r²
    Affine { c0: f64, clog: f64 },
}

impl FromStr for SymbolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad symbol '{s}', expected frac:σ|log|affine:c0,clog"));
        if s == "log" {
            return Ok(Self::Log);
        }
        if let Some(rest) = s.strip_prefix("frac:") {
            let sigma = rest.trim().parse().map_err(|_| bad())?;
            return Ok(Self::Frac { sigma });
        }
        if let Some(rest) = s.strip_prefix("affine:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            let c0 = a.trim().parse().map_err(|_| bad())?;
            let clog = b.trim().parse().map_err(|_| bad())?;
            return Ok(Self::Affine { c0, clog });
        }
        Err(bad())
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Frac { sigma } => write!(f, "frac:{sigma}"),
            Self::Log => write!(f, "log"),
            Self::Affine { c0, clog } => write!(f, "affine:{c0},{clog}"),
        }
    }
}

/// Fourier multiplier m(|ξ|).
#[derive(Clone)]
pub struct MultiplierSymbol {
    pub m: RadialFn,
    /// Value used at r = 0; pairings only sample r > 0.
    pub zero_mode: f64,
    /// m(r) ~ r^a as r → 0, when known; used for the integrability check.
    pub small_r_exponent: Option<f64>,
    pub label: String,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("zero_mode", &self.zero_mode)
            .field("small_r_exponent", &self.small_r_exponent)
            .field("label", &self.label)
            .finish()
    }
}

impl MultiplierSymbol {
    pub fn eval(&self, r: f64) -> f64 {
        if r == 0.0 {
            self.zero_mode
        } else {
            (self.m)(r)
        }
    }

    pub fn custom<F>(label: impl Into<String>, small_r_exponent: Option<f64>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            m: Arc::new(f),
            zero_mode: 0.0,
            small_r_exponent,
            label: label.into(),
        }
    }

    pub fn one() -> Self {
        make_symbol(SymbolKind::Frac { sigma: 0.0 })
    }

    pub fn scaled(&self, k: f64) -> Self {
        let m = Arc::clone(&self.m);
        Self {
            m: Arc::new(move |r| k * m(r)),
            zero_mode: k * self.zero_mode,
            small_r_exponent: self.small_r_exponent,
            label: format!("{k}*{}", self.label),
        }
    }

    /// Pointwise product of two symbols.
    pub fn product(&self, other: &Self) -> Self {
        let (a, b) = (Arc::clone(&self.m), Arc::clone(&other.m));
        let small = match (self.small_r_exponent, other.small_r_exponent) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        Self {
            m: Arc::new(move |r| a(r) * b(r)),
            zero_mode: self.zero_mode * other.zero_mode,
            small_r_exponent: small,
            label: format!("{}*{}", self.label, other.label),
        }
    }
}

pub fn make_symbol(kind: SymbolKind) -> MultiplierSymbol {
    match kind {
        SymbolKind::Frac { sigma } => {
            let zero_mode = if sigma > 0.0 {
                0.0
            } else if sigma == 0.0 {
                1.0
            } else {
                f64::INFINITY
            };
            let m: RadialFn = if sigma == 0.0 {
                Arc::new(|_| 1.0)
            } else {
                Arc::new(move |r: f64| r.powf(2.0 * sigma))
            };
            MultiplierSymbol {
                m,
                zero_mode,
                small_r_exponent: Some(2.0 * sigma),
                label: kind.to_string(),
            }
        }
        SymbolKind::Log => MultiplierSymbol {
            m: Arc::new(|r: f64| 2.0 * r.ln()),
            zero_mode: 0.0,
            small_r_exponent: Some(0.0),
            label: kind.to_string(),
        },
        SymbolKind::Affine { c0, clog } => MultiplierSymbol {
            m: Arc::new(move |r: f64| c0 + clog * 2.0 * r.ln()),
            zero_mode: 0.0,
            small_r_exponent: Some(0.0),
            label: kind.to_string(),
        },
    }
}

/// Surface area of the unit sphere S^{d-1}; ω₀ = 2.
pub fn sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

const GRADED_PANELS: usize = 100;
const GRADED_NODES: usize = 16;
const UNIFORM_PANELS: usize = 11;
const UNIFORM_NODES: usize = 32;

/// Nodes and weights for ∫₀^R, graded toward 0.
pub fn radial_rule(r_max: f64) -> Vec<(f64, f64)> {
    let edges = radial_panels(r_max, GRADED_PANELS, UNIFORM_PANELS);
    let fine = GaussLegendre::new(GRADED_NODES);
    let coarse = GaussLegendre::new(UNIFORM_NODES);
    let mut pts = Vec::new();
    for (k, w) in edges.windows(2).enumerate() {
        let rule = if k < GRADED_PANELS { &fine } else { &coarse };
        pts.extend(rule.points(w[0], w[1]));
    }
    pts
}

/// (2π)^{-d} ω_{d-1} ∫₀^∞ m(r) f̂(r) ĝ(r) r^{d-1} dr.
pub fn pairing(f: &SpectralProfile, g: &SpectralProfile, m: &MultiplierSymbol) -> Result<f64> {
    if f.d != g.d {
        return Err(Error::DimensionMismatch(f.d, g.d));
    }
    let d = f.d;
    if let Some(a) = m.small_r_exponent {
        if a + d as f64 <= 0.0 {
            return Err(Error::Divergence(format!(
                "symbol {} ~ r^{a} is not integrable at 0 in dimension {d}",
                m.label
            )));
        }
    }
    let r_max = f.decay_radius.min(g.decay_radius);
    let integrand = |r: f64| m.eval(r) * f.eval(r) * g.eval(r) * r.powi(d as i32 - 1);
    let mut acc = 0.0;
    let mut scale = 0.0f64;
    for (r, w) in radial_rule(r_max) {
        let v = w * integrand(r);
        acc += v;
        scale = scale.max(v.abs());
    }
    let edge = integrand(r_max).abs() * r_max;
    if !edge.is_finite() || edge > 1e-10 * acc.abs().max(scale) {
        return Err(Error::Divergence(format!(
            "symbol {} outgrows the profile decay at r = {r_max}",
            m.label
        )));
    }
    Ok(acc * sphere_area(d) / (2.0 * PI).powi(d as i32))
}
