use std::f64::consts::PI;

use ndext::extension::{flux_hat, mode_energy, poisson_u0, ModeEnergyExpansion, UniformGrid};
use ndext::method::{FitMethod, LimitMethod, MethodRegistry, SubtractMethod};
use ndext::quad::GaussLegendre;
use ndext::specfun::{bessel_k, Order, ScaledKind};
use ndext::spectral::gaussian_profile;
use ndext::verify::{verify_run, Status, VerifyConfig};
use ndext::Error;

#[test]
fn exact_subtraction_leaves_the_finite_term() {
    for nu in [0.0, 0.5, 1.0, 1.5, 2.0] {
        for r in [0.5, 1.0, 2.0] {
            let exp = ModeEnergyExpansion::new(Order::new(nu), r, 24.0).unwrap();
            for z in [0.25, 0.125, 0.0625] {
                let eps = z / r;
                let rest = mode_energy(Order::new(nu), r, eps).unwrap() - exp.nonconstant_value(eps);
                assert!(
                    (rest - exp.finite).abs() <= 1e-8 * exp.finite.abs().max(1.0),
                    "nu={nu} r={r} eps={eps}: {rest} vs {}",
                    exp.finite
                );
            }
        }
    }
}

#[test]
fn flux_matches_neumann_data_at_boundary() {
    let f = gaussian_profile(1, 1.0).unwrap();
    for nu in [-0.5, 0.0, 0.5, 1.0, 2.0] {
        for k in 0..=20 {
            let r = 0.1 * 100f64.powf(k as f64 / 20.0);
            let ratio = flux_hat(Order::new(nu), &f, r, 1e-8).unwrap() / f.eval(r);
            assert!((ratio - 1.0).abs() <= 1e-5, "nu={nu} r={r}: {ratio}");
        }
    }
}

#[test]
fn default_verification_has_no_failures() {
    let report = verify_run(&VerifyConfig::default(), &MethodRegistry::default()).unwrap();
    let symbol_entries = report
        .entries
        .iter()
        .filter(|e| e.target.starts_with("r="))
        .count();
    assert!(symbol_entries >= 24);
    for e in &report.entries {
        assert!(matches!(e.status, Status::Pass | Status::Flag), "{e:?}");
    }
}

#[test]
fn verification_is_deterministic() {
    let config = VerifyConfig {
        nus: vec![0.0, 1.5],
        ..VerifyConfig::default()
    };
    let a = verify_run(&config, &MethodRegistry::default()).unwrap();
    let b = verify_run(&config, &MethodRegistry::default()).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn power_law_holds_for_both_methods() {
    let fit = FitMethod::default();
    let sub = SubtractMethod::default();
    let methods: [&dyn LimitMethod; 2] = [&fit, &sub];
    for m in methods {
        let q: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&r| m.mode_symbol(Order::new(1.5), r).unwrap() / r.powi(3))
            .collect();
        let spread = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - q.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= 1e-6 * q[1].abs(), "{}: {q:?}", m.name());
    }
}

#[test]
fn subtract_reports_nonconvergence() {
    let strict = SubtractMethod {
        richardson_tol: 0.0,
        z0: 2.0,
        ..SubtractMethod::default()
    };
    match strict.mode_symbol(Order::new(1.0), 1.0) {
        Err(Error::Convergence(_)) => {}
        other => panic!("expected convergence error, got {other:?}"),
    }
}

#[test]
fn poisson_extension_has_bessel_fourier_transform() {
    // û(r, y) = K₀(ry) f̂(r). The far field ½∫f/√(x²+y²) transforms to
    // K₀(ry) f̂(0), so u minus that decays fast enough for a finite window.
    let y = 1.0;
    let grid = UniformGrid::sample(-9.0, 9.0, 1801, |x| (-0.5 * x * x).exp()).unwrap();
    let mass = (2.0 * PI).sqrt();
    let gl = GaussLegendre::new(24);
    let mut transform = 0.0;
    let (len, panels) = (60.0, 120);
    for k in 0..panels {
        let a = len * k as f64 / panels as f64;
        let b = len * (k + 1) as f64 / panels as f64;
        transform += 2.0
            * gl.integrate(a, b, |x| {
                let far = 0.5 * mass / (x * x + y * y).sqrt();
                (poisson_u0(&grid, x, y).unwrap() - far) * x.cos()
            });
    }
    let fhat = |r: f64| mass * (-0.5 * r * r).exp();
    let expected = bessel_k(ScaledKind::Plain, 0.0, y).unwrap() * (fhat(1.0) - fhat(0.0));
    assert!((transform - expected).abs() <= 1e-3, "{transform} vs {expected}");
}
