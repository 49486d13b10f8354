use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hodge_dn::factorize_dn;
use crate::jets::{mean_curvature, random_metric_jet, RandomJetSpec};
use crate::scalar::Rational;
use crate::test_support::{polynomial_inverse_metric, q};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn assert_close(a: Complex64, b: Complex64, what: &str) {
    assert!(
        (a - b).norm() < 1e-12 * (1.0 + b.norm()),
        "{what}: {a} vs {b}"
    );
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

fn pipeline(
    m: &MetricJet<Rational>,
    lambda: Rational,
    bottom: i32,
) -> (DNSymbol<Rational>, NTSymbol<Rational>) {
    let b = factorize_dn(m, &lambda, bottom).unwrap();
    let s = nt_symbol(&b, bottom - 1).unwrap();
    (b, s)
}

#[test]
fn principal_part_is_unit_covector() {
    for seed in [1, 2, 3] {
        let (_, s) = pipeline(&random_jet(seed, 3), q(3, 2), -1);
        let zeta = SymbolSeries::zeta(s.sigma.norm().clone()).shift_degree(-1);
        assert_eq!(s.sigma.component(0), zeta.component(0));
        assert_eq!(s.bottom(), -2);
    }
}

#[test]
fn flat_subprincipal_part_is_a_rotation() {
    // With b₀ = 0 and σ₀ constant, r σ₋₁ = λ J σ₀, i.e.
    // σ₋₁,ν = iλ ε^{νβ} ξ_β / |ξ|².
    let lambda = 1.5;
    let m = MetricJet::<Rational>::euclidean(4);
    let (_, s) = pipeline(&m, q(3, 2), -2);
    for xi in [[1.0f64, 0.0], [0.6, -0.8], [-2.0, 3.0]] {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        let got = s.sigma.eval_degree(-1, [0.0; 3], xi).unwrap();
        assert_close(got[0], I * lambda * xi[1] / r2, "ν = 1");
        assert_close(got[1], -I * lambda * xi[0] / r2, "ν = 2");
    }
}

#[test]
fn flat_harmonic_symbol_is_exactly_the_principal_part() {
    let m = MetricJet::<Rational>::euclidean(5);
    let (b, s) = pipeline(&m, q(0, 1), -3);
    assert_eq!(s.mode, NtMode::Harmonic);
    assert_eq!(s.bottom(), -4);
    let lower = s.sigma.truncate_bottom(-4);
    for deg in -4..0 {
        assert!(lower.component(deg).unwrap().is_zero(), "degree {deg}");
    }
    assert!(nt_normal_residual(&s, &b).unwrap().is_zero_to(-3));
}

#[test]
fn flat_beltrami_normal_residual_vanishes() {
    let m = MetricJet::<Rational>::euclidean(4);
    let (b, s) = pipeline(&m, q(2, 1), -2);
    let res = nt_normal_residual(&s, &b).unwrap();
    assert_eq!(res.top(), 1);
    assert_eq!(res.bottom(), -2);
    assert!(res.is_zero_to(-2));
}

#[test]
fn normal_residual_vanishes_for_random_metrics_in_both_modes() {
    for seed in [5, 6] {
        let m = random_jet(seed, 4);
        for lambda in [q(2, 3), q(0, 1)] {
            let (b, s) = pipeline(&m, lambda.clone(), -2);
            let res = nt_normal_residual(&s, &b).unwrap();
            assert_eq!(res.bottom(), -2);
            assert!(res.is_zero_to(-2), "seed {seed}, λ = {}", lambda.to_text());
        }
    }
}

#[test]
fn corrupted_symbol_is_detected() {
    let m = random_jet(8, 3);
    let (b, mut s) = pipeline(&m, q(1, 1), -1);
    let comp = s.sigma.component_mut(-1).unwrap();
    let entry = comp.entries[1]
        .entry((0, 1))
        .or_insert_with(|| Jet3::zero(0));
    *entry = entry.add_scalar(&q(1, 1000));
    let res = nt_normal_residual(&s, &b).unwrap();
    assert!(!res.is_zero_to(-1));
}

#[test]
fn normal_derivative_of_inverse_root_determinant() {
    // Direct differentiation gives ∂ₙ|g|^{−1/2} = 𝒟 |g|^{−1/2}; the shortcut
    // 𝒟 / (2|g|) only agrees when 𝒟 vanishes.
    let m = random_jet(13, 3);
    let s = m.inv_sqrt_det().unwrap();
    let dn = s.derivative(N).unwrap();
    let d = mean_curvature(&m).unwrap();
    assert!(dn.close_to(&d.mul(&s.truncate(2)), 0.0));
    let shortcut = d
        .mul(&m.det().reciprocal().unwrap().truncate(2))
        .scale(&q(1, 2));
    assert!(!d.is_zero());
    assert!(!dn
        .restrict_boundary()
        .close_to(&shortcut.restrict_boundary(), 1e-12));
}

#[test]
fn first_order_metrics_give_closed_form_subprincipal_part() {
    // g^{αβ} = δ + xⁿu, λ = 0: σ₋₁,ν = −(iξ_ν / 4|ξ|²)(tr u − u(ξ,ξ)/|ξ|²).
    for u in [[1, 0, 0], [2, -1, 3], [0, 1, -2]] {
        let m = polynomial_inverse_metric(4, [1, 0, 1], u, [0, 0, 0]);
        let (_, s) = pipeline(&m, q(0, 1), -1);
        let tr = (u[0] + u[2]) as f64;
        for xi in [[1.0f64, 0.0], [0.6, -0.8], [-1.5, 2.5]] {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            let uxx = u[0] as f64 * xi[0] * xi[0]
                + 2.0 * u[1] as f64 * xi[0] * xi[1]
                + u[2] as f64 * xi[1] * xi[1];
            let got = s.sigma.eval_degree(-1, [0.0; 3], xi).unwrap();
            for nu in 0..2 {
                let want = -I * xi[nu] / (4.0 * r2) * (tr - uxx / r2);
                assert_close(got[nu], want, "σ₋₁");
            }
        }
    }
}

#[test]
fn second_order_metrics_give_closed_form_second_term() {
    // g^{αβ} = δ + ½(xⁿ)²v, λ = 0: σ₋₂,ν = (iξ_ν / 8|ξ|³)(tr v − v(ξ,ξ)/|ξ|²).
    for v in [[1, 0, 0], [2, -1, 3], [0, 1, -2]] {
        let m = polynomial_inverse_metric(4, [1, 0, 1], [0, 0, 0], v);
        let (_, s) = pipeline(&m, q(0, 1), -1);
        let tr = (v[0] + v[2]) as f64;
        for xi in [[1.0f64, 0.0], [0.6, -0.8], [-1.5, 2.5]] {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            let r = r2.sqrt();
            let vxx = v[0] as f64 * xi[0] * xi[0]
                + 2.0 * v[1] as f64 * xi[0] * xi[1]
                + v[2] as f64 * xi[1] * xi[1];
            let got = s.sigma.eval_degree(-2, [0.0; 3], xi).unwrap();
            for nu in 0..2 {
                let want = I * xi[nu] / (8.0 * r2 * r) * (tr - vxx / r2);
                assert_close(got[nu], want, "σ₋₂");
            }
        }
    }
}

#[test]
fn depth_is_checked() {
    let m = MetricJet::<Rational>::euclidean(3);
    let b = factorize_dn(&m, &q(1, 1), -1).unwrap();
    assert!(nt_symbol(&b, -2).is_ok());
    assert!(matches!(
        nt_symbol(&b, -3),
        Err(Error::InsufficientDepth { .. })
    ));
    assert!(nt_symbol(&b, 1).is_err());
}

#[test]
fn json_roundtrip_keeps_mode_and_lambda() {
    let (_, s) = pipeline(&random_jet(4, 3), q(-5, 2), -1);
    let text = s.to_json();
    let back = NTSymbol::<Rational>::from_json(&text).unwrap();
    assert_eq!(back.mode, NtMode::Beltrami);
    assert_eq!(back.lambda, q(-5, 2));
    assert_eq!(back.order, 3);
    assert!(back.sigma.close_to(&s.sigma, 0.0));
    let doc: HeaderedDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.header["mode"], "beltrami");

    let tampered = text.replace("\"beltrami\"", "\"harmonic\"");
    assert!(matches!(
        NTSymbol::<Rational>::from_json(&tampered),
        Err(Error::Format(_))
    ));
}

#[test]
fn float_and_exact_symbols_agree() {
    let m = random_jet(17, 3);
    let (_, exact) = pipeline(&m, q(1, 2), -1);
    let mf = m.map(|x| x.to_f64()).unwrap();
    let bf = factorize_dn(&mf, &0.5, -1).unwrap();
    let float = nt_symbol(&bf, -2).unwrap();
    assert!(float
        .sigma
        .close_to(&exact.sigma.map(|x| x.to_f64()).unwrap(), 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn principal_part_is_homogeneous_of_degree_zero(
        seed in 0u64..1000,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        t in 0.1f64..10.0,
    ) {
        prop_assume!(a.abs() + b.abs() > 1e-3);
        let m = random_jet(seed, 2).map(|x| x.to_f64()).unwrap();
        let d = factorize_dn(&m, &1.0, 0).unwrap();
        let s = nt_symbol(&d, -1).unwrap();
        let x = [0.01, -0.02, 0.0];
        let p = s.sigma.eval_degree(0, x, [a, b]).unwrap();
        let q = s.sigma.eval_degree(0, x, [t * a, t * b]).unwrap();
        for k in 0..2 {
            prop_assert!((p[k] - q[k]).norm() < 1e-10);
        }
    }
}
