use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::jets::{random_metric_jet, RandomJetSpec};
use crate::scalar::Rational;
use crate::test_support::{polynomial_inverse_metric, q};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

fn mat2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn sym(m: [i64; 3]) -> [[f64; 2]; 2] {
    [[m[0] as f64, m[1] as f64], [m[1] as f64, m[2] as f64]]
}

fn assert_close(a: Complex64, b: Complex64, what: &str) {
    assert!(
        (a - b).norm() < 1e-12 * (1.0 + b.norm()),
        "{what}: {a} vs {b}"
    );
}

#[test]
fn flat_operator_symbols() {
    let m = MetricJet::<Rational>::euclidean(4);
    let ops = build_operator_symbols(&m, &q(0, 1)).unwrap();
    assert!(ops.e.is_zero_to(0));
    assert!(ops.q1.is_zero_to(1));
    assert!(ops.q0.is_zero_to(0));
    let r2 = SymbolSeries::r_power(ops.q2.norm().clone(), 3, 2);
    assert!(ops.q2.close_to(&r2, 0.0));

    let ops = build_operator_symbols(&m, &q(2, 1)).unwrap();
    let minus_four = SymbolSeries::identity(ops.q0.norm().clone(), 3).scale(&q(-4, 1));
    assert!(ops.q0.close_to(&minus_four, 0.0));
}

#[test]
fn q1_of_conformal_slab_by_hand() {
    // g_αβ = (1 + xⁿ)δ_αβ: at the base point Γ^n_αν = −½δ_αν and
    // Γ^μ_αn = ½δ^μ_α, tangential Christoffels vanish, so
    // q₁[ν][n] = 2Γ^n_{βν}(iξ_β) = −iξ_ν and q₁[n][μ] = 2Γ^μ_{βn}(iξ_β) = iξ_μ.
    let k = 4;
    let f = &Jet3::<Rational>::one(k) + &Jet3::variable(N, k);
    let m = MetricJet::from_tangential(f.clone(), Jet3::zero(k), f).unwrap();
    let ops = build_operator_symbols(&m, &q(1, 1)).unwrap();
    for xi in [[1.0, 0.0], [0.6, -0.8], [-2.0, 3.0]] {
        let v = ops.q1.eval_degree(1, [0.0; 3], xi).unwrap();
        for l in 0..3 {
            for p in 0..3 {
                let expected = match (l, p) {
                    (nu, N) if nu < 2 => -I * xi[nu],
                    (N, mu) if mu < 2 => I * xi[mu],
                    _ => c(0.0),
                };
                assert_close(v[l * 3 + p], expected, &format!("q1[{l}][{p}]"));
            }
        }
    }
}

#[test]
fn operator_symbols_need_second_order_jets() {
    let m = MetricJet::<Rational>::euclidean(1);
    assert!(matches!(
        build_operator_symbols(&m, &q(0, 1)),
        Err(Error::OrderTooLow { .. })
    ));
}

#[test]
fn flat_factorization_is_the_norm() {
    let m = MetricJet::<Rational>::euclidean(5);
    let d = factorize_dn(&m, &q(0, 1), -3).unwrap();
    let r = SymbolSeries::r_power(d.b.norm().clone(), 3, 1);
    assert_eq!(d.bottom(), -3);
    assert!(d.b.close_to(&r, 0.0));
    assert!(d.b.component(0).unwrap().is_zero());
}

#[test]
fn flat_helmholtz_matches_binomial_series() {
    // √(r² − λ²) = r − λ²/(2r) − λ⁴/(8r³) − …
    let m = MetricJet::<Rational>::euclidean(5);
    let lambda = q(3, 2);
    let d = factorize_dn(&m, &lambda, -3).unwrap();
    let l2 = lambda.clone() * lambda.clone();
    let norm = d.b.norm().clone();
    let id = |p: i32, s: Rational| SymbolSeries::r_power(norm.clone(), 3, p).scale(&s);
    assert!(d.b.component(0).unwrap().is_zero());
    assert!(d.b.block(0..3, 0..3).truncate_bottom(-1).close_to(
        &id(1, q(1, 1)).add(&id(-1, -l2.clone() / q(2, 1))).unwrap(),
        0.0
    ));
    assert!(d.b.component(-2).unwrap().is_zero());
    let b3 = SymbolSeries::from_components(
        norm.clone(),
        3,
        3,
        -3,
        vec![d.b.component(-3).unwrap().clone()],
    )
    .unwrap();
    assert!(b3.close_to(&id(-3, -(l2.clone() * l2) / q(8, 1)), 0.0));
}

#[test]
fn frequency_first_enters_at_degree_minus_one() {
    let m = MetricJet::<Rational>::euclidean(4);
    let d0 = factorize_dn(&m, &q(0, 1), -1).unwrap();
    let d2 = factorize_dn(&m, &q(2, 1), -1).unwrap();
    for deg in [1, 0] {
        assert_eq!(d0.b.component(deg), d2.b.component(deg));
    }
    assert_ne!(d0.b.component(-1), d2.b.component(-1));
}

#[test]
fn b0_blocks_match_closed_forms_for_normal_only_metrics() {
    // With g^{αβ} = G + xⁿu the lower-order remainder vanishes, so
    //   b₀ⁿⁿ = ½𝒟 − ¼u(ω,ω),            b₀ᵗⁿ_ν = iω_α g^{αβ}Γ^n_{βν},
    //   b₀ⁿᵗ^μ = iω_α g^{αβ}Γ^μ_{nβ},     b₀ᵗᵗ^μ_ν = Γ^μ_{nν} + δ(½𝒟 − ¼u(ω,ω)).
    let cases = [
        ([1, 0, 1], [1, 0, -1]),
        ([2, 1, 1], [-1, 2, 3]),
        ([1, -1, 2], [0, 1, 0]),
    ];
    for (g, u) in cases {
        let m = polynomial_inverse_metric(4, g, u, [0, 0, 0]);
        let d = factorize_dn(&m, &q(1, 1), 0).unwrap();
        let big_g = sym(g);
        let u = sym(u);
        let low = inv2(big_g);
        // ∂ₙg_αβ = −g u g at the base point.
        let dg_low = mat2(mat2(low, u), low).map(|row| row.map(|x| -x));
        let gamma_n = dg_low.map(|row| row.map(|x| -0.5 * x)); // Γ^n_αβ
        let gamma_t = mat2(big_g, dg_low).map(|row| row.map(|x| 0.5 * x)); // Γ^μ_{nν} as [μ][ν]
        let mean = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| big_g[a][b] * gamma_n[a][b])
            .sum::<f64>();
        for xi in [[1.0f64, 0.0], [0.6, -0.8], [-1.5, 2.5]] {
            let r = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| big_g[a][b] * xi[a] * xi[b])
                .sum::<f64>()
                .sqrt();
            let w = [xi[0] / r, xi[1] / r];
            let uww: f64 = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| u[a][b] * w[a] * w[b])
                .sum();
            let scalar = 0.5 * mean - 0.25 * uww;
            let v = d.b.eval_degree(0, [0.0; 3], xi).unwrap();
            assert_close(v[8], c(scalar), "nn");
            for nu in 0..2 {
                let tn: f64 = (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| w[a] * big_g[a][b] * gamma_n[b][nu])
                    .sum();
                assert_close(v[nu * 3 + 2], I * tn, "tn");
                let nt: f64 = (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| w[a] * big_g[a][b] * gamma_t[nu][b])
                    .sum();
                assert_close(v[6 + nu], I * nt, "nt");
                for mu in 0..2 {
                    let delta = if mu == nu { scalar } else { 0.0 };
                    assert_close(v[nu * 3 + mu], c(gamma_t[mu][nu] + delta), "tt");
                }
            }
        }
    }
}

#[test]
fn b_minus_one_linear_part_for_second_order_metrics() {
    // g^{αβ} = δ + ½(xⁿ)²v with λ = 0: at the base point
    //   b₋₁ᵗᵗ[ν][μ] = (1/2r)(½v_{μν} − ¼δ tr v + ¼δ v(ω,ω)),
    //   b₋₁ᵗⁿ[ν]   = −(i/4r) ω_β v_{βν},   b₋₁ⁿᵗ[μ] = (i/4r) ω_β v_{μβ},
    //   b₋₁ⁿⁿ      = (1/2r)(¼ tr v + ¼ v(ω,ω)).
    for v in [[1, 0, 0], [2, -1, 3], [0, 1, -2]] {
        let m = polynomial_inverse_metric(4, [1, 0, 1], [0, 0, 0], v);
        let d = factorize_dn(&m, &q(0, 1), -1).unwrap();
        let v = sym(v);
        let tr = v[0][0] + v[1][1];
        for xi in [[1.0f64, 0.0], [0.6, -0.8], [-1.5, 2.5]] {
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let w = [xi[0] / r, xi[1] / r];
            let vww: f64 = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| v[a][b] * w[a] * w[b])
                .sum();
            let got = d.b.eval_degree(-1, [0.0; 3], xi).unwrap();
            assert_close(got[8], c((0.25 * tr + 0.25 * vww) / (2.0 * r)), "nn");
            for nu in 0..2 {
                let vw = w[0] * v[0][nu] + w[1] * v[1][nu];
                assert_close(got[nu * 3 + 2], -I * vw / (4.0 * r), "tn");
                assert_close(got[6 + nu], I * vw / (4.0 * r), "nt");
                for mu in 0..2 {
                    let delta = if mu == nu {
                        -0.25 * tr + 0.25 * vww
                    } else {
                        0.0
                    };
                    assert_close(
                        got[nu * 3 + mu],
                        c((0.5 * v[mu][nu] + delta) / (2.0 * r)),
                        "tt",
                    );
                }
            }
        }
    }
}

#[test]
fn blocks_of_flat_symbol() {
    let m = MetricJet::<Rational>::euclidean(4);
    let d = factorize_dn(&m, &q(1, 1), -2).unwrap();
    let blocks = dn_blocks(&d);
    assert!(blocks.tn.is_zero_to(-2) && blocks.nt.is_zero_to(-2));
    assert!(blocks.reassemble().unwrap().close_to(&d.b, 0.0));
}

#[test]
fn recursion_rejects_exhausted_jets() {
    let m = MetricJet::<Rational>::euclidean(3);
    assert!(factorize_dn(&m, &q(0, 1), -2).is_ok());
    assert!(matches!(
        factorize_dn(&m, &q(0, 1), -3),
        Err(Error::OrderTooLow { .. })
    ));
}

#[test]
fn json_carries_the_header() {
    let m = MetricJet::<Rational>::euclidean(3);
    let d = factorize_dn(&m, &q(1, 2), -1).unwrap();
    let doc: HeaderedDoc = serde_json::from_str(&d.to_json()).unwrap();
    assert_eq!(doc.header["lambda"], "1/2");
    assert_eq!(doc.header["K"], 3);
    assert_eq!(doc.header["bottom"], -1);
    let b = SymbolSeries::<Rational>::from_doc(&doc.symbol).unwrap();
    assert!(b.close_to(&d.b, 0.0));
}

#[test]
fn float_and_exact_recursions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = random_metric_jet::<Rational, _>(
        &mut rng,
        RandomJetSpec {
            order: 4,
            ..Default::default()
        },
    );
    let exact = factorize_dn(&m, &q(1, 1), -2).unwrap();
    let mf = m.map(|x| x.to_f64()).unwrap();
    let float = factorize_dn(&mf, &1.0, -2).unwrap();
    let converted = exact.b.map(|x| x.to_f64()).unwrap();
    assert!(float.b.close_to(&converted, 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn factorization_residual_vanishes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric_jet::<Rational, _>(&mut rng, RandomJetSpec { order: 4, ..Default::default() });
        let ops = build_operator_symbols(&m, &q(2, 3)).unwrap();
        let d = factorize_with(&ops, &m, &q(2, 3), -2).unwrap();
        let r = d.b.component(1).unwrap();
        let expected = SymbolSeries::r_power(d.b.norm().clone(), 3, 1);
        prop_assert_eq!(Some(r), expected.component(1));
        let res = factorization_residual(&d, &ops).unwrap();
        prop_assert_eq!(res.bottom(), -1);
        prop_assert!(res.is_zero_to(-1));
    }
}
