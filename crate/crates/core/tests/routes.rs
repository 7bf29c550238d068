use std::f64::consts::PI;

use sylvester_core::quad::{EvalMethod, QuadratureConfig};
use sylvester_core::sylvester::{
    self, cauchy_asymptotic, closed_form_lookup, Distribution, Family, Method, Registry,
    SylvesterError,
};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::with_tolerances(1e-10, 1e-12)
}

fn quadrature(dist: &Distribution) -> f64 {
    sylvester::sylvester_probability(dist, Method::Quadrature, &cfg())
        .unwrap()
        .value
}

/// Every distribution with d <= 8 that some registry entry covers.
fn registry_keys() -> Vec<Distribution> {
    let mut out = Vec::new();
    for d in 1..=8u32 {
        out.push(Distribution::gaussian(d));
        for beta in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            out.push(Distribution::beta(d, beta));
        }
        out.push(Distribution::beta_prime(d, f64::from(d) / 2.0 + 1.0));
    }
    out.retain(|dist| closed_form_lookup(dist).is_some());
    out
}

#[test]
fn quadrature_agrees_with_every_closed_form() {
    let keys = registry_keys();
    assert!(keys.len() >= 30, "only {} keys", keys.len());
    for dist in keys {
        if dist.family == Family::Beta && dist.d == 1 && dist.beta.unwrap() < -0.5 {
            continue;
        }
        let exact = closed_form_lookup(&dist).unwrap().value;
        let q = sylvester::sylvester_probability(&dist, Method::Quadrature, &cfg()).unwrap();
        let limit = 1e-6f64.max(3.0 * q.abs_error_estimate);
        assert!(
            (q.value - exact).abs() <= limit,
            "{}: quadrature {} vs closed form {}",
            dist.label(),
            q.value,
            exact
        );
        // The closed forms are exact; the agreement is in fact much tighter.
        assert!(
            (q.value - exact).abs() <= 1e-10 * exact.abs() + 1e-14,
            "{}",
            dist.label()
        );
    }
}

#[test]
fn front_end_examples() {
    let g2 =
        sylvester::sylvester_probability(&Distribution::gaussian(2), Method::Quadrature, &cfg())
            .unwrap();
    assert!((g2.value - (1.0 - 6.0 / PI * (1.0f64 / 3.0).asin())).abs() < 1e-9);
    assert_eq!(g2.method, EvalMethod::Quadrature);

    let sphere = quadrature(&Distribution::beta(2, -1.0));
    assert!(sphere.abs() < 1e-6);

    let auto =
        sylvester::sylvester_probability(&Distribution::beta_prime(2, 2.0), Method::Auto, &cfg())
            .unwrap();
    assert_eq!(auto.method, EvalMethod::ClosedForm);
    assert!((auto.value - 0.4).abs() < 1e-15);

    assert!((quadrature(&Distribution::beta(1, 0.7)) - 1.0).abs() < 1e-8);
}

#[test]
fn closed_form_examples() {
    let arcsine3 = closed_form_lookup(&Distribution::beta(3, -0.5))
        .unwrap()
        .value;
    assert!((arcsine3 - (539.0 / (144.0 * PI * PI) - 1.0 / 3.0)).abs() < 1e-16);
    let semi4 = closed_form_lookup(&Distribution::beta(4, 0.5))
        .unwrap()
        .value;
    assert_eq!(semi4, 112_433_094_897.0 / 8_598_524_526_592.0);
    let kingman2 = closed_form_lookup(&Distribution::beta(2, 0.0))
        .unwrap()
        .value;
    assert!((kingman2 - 35.0 / (12.0 * PI * PI)).abs() < 1e-15);
    let beta_one2 = closed_form_lookup(&Distribution::beta(2, 1.0))
        .unwrap()
        .value;
    // 2π·4·17·22 / (7·2^36) · C(5, 5/2)^3 · C(16, 8), with C(5, 5/2) = Γ(6)/Γ(7/2)².
    let g72 = 15.0 / 8.0 * PI.sqrt();
    let c = 120.0 / (g72 * g72);
    let oracle = 2.0 * PI * 4.0 * 17.0 * 22.0 / (7.0 * 2f64.powi(36)) * c.powi(3) * 12870.0;
    assert!(
        (beta_one2 - oracle).abs() < 1e-14,
        "{beta_one2} vs {oracle}"
    );
    assert!(closed_form_lookup(&Distribution::beta_prime(3, 2.0)).is_none());
}

#[test]
fn closed_form_method_requires_an_entry() {
    let err =
        sylvester::sylvester_probability(&Distribution::beta(3, 0.3), Method::ClosedForm, &cfg())
            .unwrap_err();
    assert!(matches!(err, SylvesterError::NotInRegistry(_)));
}

#[test]
fn invalid_parameters_are_rejected() {
    for dist in [
        Distribution::beta(2, -1.2),
        Distribution::beta_prime(2, 1.0),
        Distribution::beta_prime(2, 1.1),
        Distribution {
            family: Family::Gaussian,
            d: 2,
            beta: Some(1.0),
        },
        Distribution::gaussian(0),
        Distribution::gaussian(39),
    ] {
        let err = sylvester::sylvester_probability(&dist, Method::Quadrature, &cfg()).unwrap_err();
        assert!(
            matches!(err, SylvesterError::Domain(_)),
            "{}: {err:?}",
            dist.label()
        );
    }
}

#[test]
fn cauchy_asymptotic_values() {
    // 2√3 · d · π^(-d-1) evaluated by hand.
    let s3 = 3f64.sqrt();
    for (d, want) in [
        (2, 4.0 * s3 / PI.powi(3)),
        (3, 6.0 * s3 / PI.powi(4)),
        (10, 20.0 * s3 / PI.powi(11)),
    ] {
        let r = cauchy_asymptotic(d);
        assert_eq!(r.method, EvalMethod::Asymptotic);
        assert!(((r.value - want) / want).abs() < 1e-14);
    }
    // Never substituted for a probability.
    assert!(closed_form_lookup(&Distribution::beta_prime(4, 2.5)).is_none());
}

#[test]
fn gaussian_is_the_double_limit() {
    for d in [2u32, 3] {
        let gauss = quadrature(&Distribution::gaussian(d));
        for make in [
            Distribution::beta as fn(u32, f64) -> Distribution,
            Distribution::beta_prime,
        ] {
            let g10 = (quadrature(&make(d, 10.0)) - gauss).abs();
            let g100 = (quadrature(&make(d, 100.0)) - gauss).abs();
            assert!(g100 < 0.02 && g100 < g10, "d = {d}: {g10} {g100}");
        }
    }
}

#[test]
fn monotonicity_sweep_report() {
    // Conjectured, so violations are printed rather than failed.
    for d in [2u32, 3] {
        let df = f64::from(d);
        let lo = 0.5 * (df + 1.0 / (df + 2.0)) + 0.02;
        let grids = [
            (
                Family::Beta,
                (0..30)
                    .map(|i| -0.95 + 11.0 * f64::from(i) / 29.0)
                    .collect::<Vec<_>>(),
            ),
            (
                Family::BetaPrime,
                (0..30).map(|i| lo + 12.0 * f64::from(i) / 29.0).collect(),
            ),
        ];
        for (family, grid) in grids {
            let values: Vec<f64> = grid
                .iter()
                .map(|&b| quadrature(&Distribution::new(family, d, Some(b)).unwrap()))
                .collect();
            let violations = values
                .windows(2)
                .filter(|w| {
                    if family == Family::Beta {
                        w[1] < w[0]
                    } else {
                        w[1] > w[0]
                    }
                })
                .count();
            println!("{family} d={d}: {violations} monotonicity violations on 30 points");
        }
    }
}

#[test]
fn corrupted_registry_is_visible() {
    let dist = Distribution::beta(2, 0.0);
    let bad = Registry::standard().with_override(&dist, 0.5);
    let r = sylvester::sylvester_probability_with(&bad, &dist, Method::Auto, &cfg()).unwrap();
    assert_eq!(r.value, 0.5);
    assert!((quadrature(&dist) - 0.5).abs() > 0.1);
}
