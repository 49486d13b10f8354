//! Forward pipeline, documents and recovery through the public API.

use beltrami_core::hodge_dn::factorize_dn;
use beltrami_core::jets::{random_metric_jet, Jet3, MetricJet, RandomJetSpec, N};
use beltrami_core::nt_map::{nt_symbol, NTSymbol, NtMode};
use beltrami_core::recovery::{
    forward_nt, normal_derivative_table, recover_first_orders_explicit, recover_jet,
    RecoveryOptions,
};
use beltrami_core::{Error, Rational};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn random_jet(seed: u64, order: usize) -> MetricJet<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_metric_jet(
        &mut rng,
        RandomJetSpec {
            order,
            ..Default::default()
        },
    )
}

#[test]
fn euclidean_principal_symbol_is_i_xi_over_norm() {
    let m = MetricJet::<Rational>::euclidean(4);
    for (lambda, mode) in [(q(1, 1), NtMode::Beltrami), (q(0, 1), NtMode::Harmonic)] {
        let s = forward_nt(&m, &lambda, 0).unwrap();
        assert_eq!(s.mode, mode);
        for xi in [[1.0, 0.0], [3.0, -4.0], [-0.2, 0.7]] {
            let r = f64::hypot(xi[0], xi[1]);
            let v = s.sigma.eval_degree(0, [0.0; 3], xi).unwrap();
            for c in 0..2 {
                assert!((v[c] - Complex64::new(0.0, xi[c] / r)).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn symbol_documents_recover_like_the_original() {
    let m = random_jet(11, 5);
    let s = forward_nt(&m, &q(2, 3), -2).unwrap();
    let text = s.to_json();
    let back = NTSymbol::<Rational>::from_json(&text).unwrap();
    assert!(back.source.is_none());
    assert_eq!(back.to_json(), text);
    let a = recover_jet(&s, 2).unwrap();
    let b = recover_jet(&back, 2).unwrap();
    for k in 0..=2 {
        assert_eq!(a.table(k), b.table(k));
    }
}

#[test]
fn metric_documents_round_trip_through_recovery() {
    let order = 4;
    let mut f = Jet3::<Rational>::one(order);
    f.add_scaled(&q(1, 1), &Jet3::variable(N, order));
    let m = MetricJet::from_tangential(f.clone(), Jet3::zero(order), f).unwrap();
    let m = MetricJet::<Rational>::from_json(&m.to_json()).unwrap();
    let s = forward_nt(&m, &q(1, 1), -2).unwrap();
    let e = recover_first_orders_explicit(&s, 3).unwrap();
    // g^{αβ} = δ/(1 + xⁿ), so 𝒟 = ½ g_αβ ∂ₙg^{αβ} = −1.
    assert_eq!(e.mean_curvature, Jet3::constant(q(-1, 1), 2));
    let r = recover_jet(&s, 2).unwrap();
    let rebuilt = r.metric_jet().unwrap();
    for k in 0..=2 {
        let want = normal_derivative_table(&m, k)
            .unwrap()
            .map(|j| j.truncate(3 - k));
        let got = normal_derivative_table(&rebuilt, k)
            .unwrap()
            .map(|j| j.truncate(3 - k));
        assert_eq!(got, want, "order {k}");
    }
}

#[test]
fn shallow_inputs_are_reported() {
    let m = MetricJet::<Rational>::euclidean(2);
    assert!(matches!(
        forward_nt(&m, &q(1, 1), -3),
        Err(Error::OrderTooLow { .. })
    ));
    let s = forward_nt(&random_jet(3, 4), &q(1, 1), -1).unwrap();
    assert!(recover_jet(&s, 2).is_err());
    let opts = RecoveryOptions {
        tangential_order: Some(1),
        ..RecoveryOptions::new(1)
    };
    assert!(matches!(
        beltrami_core::recovery::recover_jet_with(&s, &opts),
        Err(Error::ShapeMismatch(_))
    ));
}

#[test]
fn nt_symbol_needs_a_deep_enough_factorization() {
    let m = random_jet(5, 4);
    let b = factorize_dn(&m, &q(1, 1), -1).unwrap();
    assert!(nt_symbol(&b, -2).is_ok());
    assert!(nt_symbol(&b, -4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn first_order_round_trip_is_exact(seed in any::<u64>(), num in -3i64..=3) {
        let m = random_jet(seed, 3);
        let lambda = q(num, 2);
        let s = forward_nt(&m, &lambda, -1).unwrap();
        let r = recover_jet(&s, 1).unwrap();
        for k in 0..=1 {
            let want = normal_derivative_table(&m, k).unwrap().map(|j| j.truncate(2 - k));
            prop_assert_eq!(r.table(k).unwrap(), &want);
        }
    }

    #[test]
    fn float_symbols_track_exact_ones(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        prop_assume!(a.hypot(b) > 0.1);
        let m = random_jet(seed, 4);
        let mf = m.map(|x| x.to_f64()).unwrap();
        let exact = forward_nt(&m, &q(1, 1), -2).unwrap();
        let float = forward_nt(&mf, &1.0, -2).unwrap();
        for deg in [0, -1, -2] {
            let u = exact.sigma.eval_degree(deg, [0.0; 3], [a, b]).unwrap();
            let v = float.sigma.eval_degree(deg, [0.0; 3], [a, b]).unwrap();
            for (x, y) in u.iter().zip(&v) {
                prop_assert!((x - y).norm() <= 1e-9 * (1.0 + x.norm()));
            }
        }
    }
}
