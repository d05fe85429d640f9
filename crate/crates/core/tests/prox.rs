mod common;

use common::{prox_oracle, rel};
use proptest::prelude::*;
use theta_norms::prox::{prox_objective, prox_sq_theta_with_theta};
use theta_norms::{
    prox_sq, prox_sq_ksupport, prox_sq_ksupport_baseline, prox_sq_theta, BoxParams, KSupportParams,
    NormParams, ProxRequest,
};

fn boxed() -> impl Strategy<Value = (Vec<f64>, BoxParams)> {
    (1usize..=12)
        .prop_flat_map(|d| prop::collection::vec(-10.0f64..10.0, d))
        .prop_flat_map(|w| (Just(w), 0.01f64..1.0, 0.1f64..2.0, 0.0f64..=1.0))
        .prop_map(|(w, a, span, t)| {
            let d = w.len() as f64;
            let c = d * a + t * d * span;
            (w, BoxParams::new(a, a + span, c).unwrap())
        })
}

fn lambda() -> impl Strategy<Value = f64> {
    (-2.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #[test]
    fn matches_pairwise_exchange_oracle((w, p) in boxed(), lambda in lambda()) {
        let x = prox_sq_theta(&w, lambda, &p).unwrap();
        let got = prox_objective(&x, &w, lambda, &NormParams::Box(p)).unwrap();
        prop_assert!((got - prox_oracle(&w, lambda, &p)).abs() <= 1e-9 * (1.0 + got));
    }

    #[test]
    fn nonexpansive((w, p) in boxed(), lambda in lambda(), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let v: Vec<f64> = common::gaussian(&mut r, w.len()).iter().zip(&w).map(|(g, x)| x + g).collect();
        let px = prox_sq_theta(&w, lambda, &p).unwrap();
        let pv = prox_sq_theta(&v, lambda, &p).unwrap();
        prop_assert!(dist(&px, &pv) <= dist(&w, &v) * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn moreau_residual_on_interior_coordinates((w, p) in boxed(), lambda in lambda()) {
        let (x, asg) = prox_sq_theta_with_theta(&w, lambda, &p).unwrap();
        let theta = asg.theta_original();
        for i in 0..w.len() {
            let t = theta[i];
            if t > p.a() * (1.0 + 1e-9) && t < p.b() * (1.0 - 1e-9) {
                prop_assert!((x[i] + lambda * x[i] / t - w[i]).abs() <= 1e-8 * (1.0 + w[i].abs()));
            }
        }
    }

    #[test]
    fn theta_spends_the_budget_when_it_binds((w, p) in boxed(), lambda in lambda()) {
        let (_, asg) = prox_sq_theta_with_theta(&w, lambda, &p).unwrap();
        prop_assert!(asg.sum() <= p.c() * (1.0 + 1e-10));
        if asg.alpha.is_finite() {
            prop_assert!(rel(asg.sum(), p.c()) <= 1e-10);
        }
    }

    #[test]
    fn shrinks_toward_zero_keeping_signs((w, p) in boxed(), lambda in lambda()) {
        let x = prox_sq_theta(&w, lambda, &p).unwrap();
        for (xi, wi) in x.iter().zip(&w) {
            prop_assert!(xi.abs() <= wi.abs() + 1e-15);
            prop_assert!(xi * wi >= 0.0);
        }
    }

    #[test]
    fn ksupport_matches_baseline(
        w in (1usize..=40).prop_flat_map(|d| prop::collection::vec(-10.0f64..10.0, d)),
        k_frac in 0.0f64..1.0,
        lambda in lambda(),
    ) {
        let k = 1 + ((w.len() - 1) as f64 * k_frac) as usize;
        let x = prox_sq_ksupport(&w, lambda, k).unwrap();
        let y = prox_sq_ksupport_baseline(&w, lambda, k).unwrap();
        let scale = w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-10 * scale), "{x:?} vs {y:?}");
    }
}

#[test]
fn worked_example() {
    let p = BoxParams::new(0.1, 1.0, 1.1).unwrap();
    let x = prox_sq_theta(&[2.0, 1.0], 0.5, &p).unwrap();
    assert!((x[0] - 9.0 / 7.0).abs() < 1e-14 && (x[1] - 2.0 / 7.0).abs() < 1e-14);
}

#[test]
fn ksupport_k_equal_d_is_ridge() {
    let w = [3.0, -1.0, 0.5];
    let x = prox_sq_ksupport(&w, 2.0, 3).unwrap();
    for (xi, wi) in x.iter().zip(&w) {
        assert!((xi - wi / 3.0).abs() < 1e-14);
    }
}

#[test]
fn dispatch_and_request_agree() {
    let w = vec![1.5, -0.2, 0.7, 3.0];
    let params = NormParams::KSupport(KSupportParams::new(2).unwrap());
    let direct = prox_sq(&w, 0.3, &params).unwrap();
    assert_eq!(
        ProxRequest::new(w.clone(), 0.3, params).eval().unwrap(),
        direct
    );
    assert_eq!(direct, prox_sq_ksupport(&w, 0.3, 2).unwrap());
}

#[test]
fn rejects_bad_lambda() {
    let p = BoxParams::new(0.1, 1.0, 1.0).unwrap();
    for lambda in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(prox_sq_theta(&[1.0], lambda, &p).is_err());
        assert!(prox_sq_ksupport_baseline(&[1.0], lambda, 1).is_err());
    }
}
