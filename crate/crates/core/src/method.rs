//! Interchangeable renormalized-limit extractors, selected by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extension::{
    energy_at, energy_curve, energy_singular_model, mode_energy, paired_fit_model, ModeEnergyExpansion,
};
use crate::renorm::{default_grid, geometric_grid, renorm_limit_fit, CurveMeta, EnergyCurve};
use crate::specfun::Order;
use crate::spectral::SpectralProfile;

/// A way of taking the renormalized limit ε → 0 of an energy.
pub trait LimitMethod: Send + Sync {
    fn name(&self) -> &str;

    /// Finite part of ε ↦ mode_energy(ν, r, ε).
    fn mode_symbol(&self, nu: Order, r: f64) -> Result<f64>;

    /// Finite part of the paired energy E(ε) for profiles f, g.
    fn pairing_limit(&self, nu: Order, f: &SpectralProfile, g: &SpectralProfile) -> Result<f64>;
}

/// Least-squares fit of sampled energies against the singular basis plus
/// the expansion's correction terms.
#[derive(Debug, Clone)]
pub struct FitMethod {
    /// ε samples for paired energies; rε samples for per-mode energies.
    pub grid: Vec<f64>,
    /// rε samples for per-mode energies when ν > 3/2, where the divergent
    /// terms swamp the constant unless rε stays larger.
    pub wide_grid: Vec<f64>,
    /// Highest correction exponent; `None` picks by ν.
    pub order: Option<f64>,
}

impl Default for FitMethod {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            wide_grid: geometric_grid(3e-3, 0.3, 48).expect("valid grid"),
            order: None,
        }
    }
}

impl FitMethod {
    fn high(nu: Order) -> bool {
        nu.nu() > 1.5 + 1e-9
    }

    /// Correction order for paired energies: round-off in the ε^{-2ν}
    /// columns outweighs truncation beyond ν = 3/2.
    pub fn order_for(&self, nu: Order) -> f64 {
        self.order.unwrap_or(if Self::high(nu) { 4.0 } else { 6.0 })
    }
}

impl LimitMethod for FitMethod {
    fn name(&self) -> &str {
        "fit"
    }

    fn mode_symbol(&self, nu: Order, r: f64) -> Result<f64> {
        let order = self.order.unwrap_or(6.0);
        let expansion = ModeEnergyExpansion::new(nu, r, order)?;
        let window = if Self::high(nu) {
            &self.wide_grid
        } else {
            &self.grid
        };
        // same rε window for every r keeps the relative accuracy r-independent
        let eps: Vec<f64> = window.iter().map(|z| z / r).collect();
        let curve = EnergyCurve::sample(
            &eps,
            |e| mode_energy(nu, r, e),
            CurveMeta {
                nu: Some(nu.nu()),
                description: format!("mode energy at r={r}"),
            },
        )?;
        Ok(renorm_limit_fit(&curve, &expansion.fit_model(order))?.finite_part)
    }

    fn pairing_limit(&self, nu: Order, f: &SpectralProfile, g: &SpectralProfile) -> Result<f64> {
        let order = self.order_for(nu);
        let model = paired_fit_model(nu, order)?;
        let curve = energy_curve(nu, f, g, &self.grid)?;
        Ok(renorm_limit_fit(&curve, &model)?.finite_part)
    }
}

/// Removes every non-constant expansion term from the energy and reads off
/// the remainder, confirmed by halving ε.
#[derive(Debug, Clone)]
pub struct SubtractMethod {
    /// Sampling point rε for per-mode extraction.
    pub z0: f64,
    /// Expansion order for per-mode extraction.
    pub order: f64,
    /// Sampling ε for paired energies.
    pub pairing_eps: f64,
    /// Expansion order for paired energies.
    pub pairing_order: f64,
    /// Accept when |v(ε) - v(ε/2)| ≤ tol·max(1, |v|).
    pub richardson_tol: f64,
}

impl Default for SubtractMethod {
    fn default() -> Self {
        Self {
            z0: 0.25,
            order: 24.0,
            pairing_eps: 0.05,
            pairing_order: 16.0,
            richardson_tol: 1e-7,
        }
    }
}

impl SubtractMethod {
    fn richardson(&self, eps: f64, v: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let a = v(eps)?;
        let b = v(0.5 * eps)?;
        let diff = (a - b).abs();
        if !(diff <= self.richardson_tol * b.abs().max(1.0)) {
            return Err(Error::Convergence(format!(
                "subtracted energy moved by {diff:e} between eps={eps} and eps={}",
                0.5 * eps
            )));
        }
        Ok(b)
    }
}

impl LimitMethod for SubtractMethod {
    fn name(&self) -> &str {
        "subtract"
    }

    fn mode_symbol(&self, nu: Order, r: f64) -> Result<f64> {
        let expansion = ModeEnergyExpansion::new(nu, r, self.order)?;
        self.richardson(self.z0 / r, |eps| {
            Ok(mode_energy(nu, r, eps)? - expansion.nonconstant_value(eps))
        })
    }

    fn pairing_limit(&self, nu: Order, f: &SpectralProfile, g: &SpectralProfile) -> Result<f64> {
        let expansion = energy_singular_model(nu, f, g, self.pairing_order)?;
        self.richardson(self.pairing_eps, |eps| {
            Ok(energy_at(nu, f, g, eps)? - expansion.nonconstant_value(eps))
        })
    }
}

/// Name → method lookup.
#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<String, Arc<dyn LimitMethod>>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(FitMethod::default()));
        r.register(Arc::new(SubtractMethod::default()));
        r
    }
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
        }
    }

    /// Adds or replaces the method under its own name.
    pub fn register(&mut self, method: Arc<dyn LimitMethod>) {
        self.methods.insert(method.name().to_string(), method);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn LimitMethod>> {
        self.methods.get(name).cloned().ok_or_else(|| {
            Error::Config(format!(
                "unknown method '{name}', available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.methods.keys().cloned().collect()
    }
}
