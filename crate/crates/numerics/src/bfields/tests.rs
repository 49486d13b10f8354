use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

const E3: Vec3 = [0.0, 0.0, 1.0];

fn unit_loop(n: usize) -> CurrentLoop {
    make_loop([0.0; 3], E3, 1.0, n, LoopMetric::Euclidean).unwrap()
}

fn hausdorff(a: &[Vec3], b: &[Vec3]) -> f64 {
    let one_way = |a: &[Vec3], b: &[Vec3]| {
        a.iter()
            .map(|p| {
                b.iter()
                    .map(|q| norm(sub(*p, *q)))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Complete elliptic integrals `K(m)`, `E(m)` by the arithmetic-geometric mean.
fn elliptic_ke(m: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0, (1.0 - m).sqrt());
    let mut sum = m / 2.0;
    let mut pow = 0.5;
    for _ in 0..40 {
        let c = (a - b) / 2.0;
        let (an, bn) = ((a + b) / 2.0, (a * b).sqrt());
        pow *= 2.0;
        sum += pow * c * c;
        a = an;
        b = bn;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Textbook field `(B_ρ, B_z)` of a unit circular current of radius `a`.
fn textbook_loop_field(a: f64, rho: f64, z: f64) -> (f64, f64) {
    let q = (a + rho).powi(2) + z * z;
    let m = 4.0 * a * rho / q;
    let (k, e) = elliptic_ke(m);
    let d = (a - rho).powi(2) + z * z;
    let bz = (k + (a * a - rho * rho - z * z) / d * e) / (2.0 * PI * q.sqrt());
    let brho = if rho == 0.0 {
        0.0
    } else {
        z / (2.0 * PI * rho * q.sqrt()) * (-k + (a * a + rho * rho + z * z) / d * e)
    };
    (brho, bz)
}

#[test]
fn euclidean_nodes_are_the_circle() {
    let c = [0.5, -1.0, 2.0];
    let lp = make_loop(c, E3, 1.0, 64, LoopMetric::Euclidean).unwrap();
    for (k, p) in lp.nodes.iter().enumerate() {
        let t = 2.0 * PI * k as f64 / 64.0;
        let want = [c[0] + t.cos(), c[1] + t.sin(), c[2]];
        assert!(norm(sub(*p, want)) < 1e-15);
    }
    assert!(lp.closure_defect() <= 1e-12);
}

#[test]
fn loop_preconditions() {
    assert!(make_loop([0.0; 3], E3, 0.0, 64, LoopMetric::Euclidean).is_err());
    assert!(make_loop([0.0; 3], E3, 1.0, 8, LoopMetric::Euclidean).is_err());
    assert!(make_loop([0.0; 3], [0.0, 0.0, 2.0], 1.0, 64, LoopMetric::Euclidean).is_err());
}

#[test]
fn loops_do_not_depend_on_the_frame() {
    let omega = [2.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0];
    let c = [0.1, 0.2, 0.3];
    let a = make_loop(c, omega, 0.5, 48, LoopMetric::Euclidean).unwrap();
    let b =
        make_loop_with_axis(c, omega, 0.5, 48, LoopMetric::Euclidean, [0.3, 0.9, -0.2]).unwrap();
    assert!(hausdorff(&a.nodes, &b.nodes) > 1e-3);
    assert!(b.nodes.iter().all(|p| a.distance(*p) <= 1e-12));
    let dense = |lp: &CurrentLoop| lp.resampled(4096).unwrap().nodes;
    assert!(hausdorff(&dense(&a), &dense(&b)) <= 2.0 * PI * 0.5 / 4096.0);
    for x in [[0.9, 0.0, 0.1], [-0.3, 0.4, 0.6]] {
        let (fa, fb) = (
            bfield_eval(&a, 1.0, x).unwrap(),
            bfield_eval(&b, 1.0, x).unwrap(),
        );
        assert!(norm(sub(fa.value, fb.value)) <= 1e-9 * norm(fa.value));
    }
}

#[test]
fn geodesic_loop_in_a_flat_metric_matches_the_circle() {
    let flat = LoopMetric::Analytic(Arc::new(|_x: Vec3| {
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }));
    let omega = [0.0, 0.6, 0.8];
    let g = make_loop([0.2, 0.0, -0.1], omega, 0.3, 32, flat).unwrap();
    let e = make_loop([0.2, 0.0, -0.1], omega, 0.3, 32, LoopMetric::Euclidean).unwrap();
    for (a, b) in g.nodes.iter().zip(&e.nodes) {
        assert!(norm(sub(*a, *b)) < 1e-10);
    }
    for (a, b) in g.tangents.iter().zip(&e.tangents) {
        assert!(norm(sub(*a, *b)) < 1e-9);
    }
}

#[test]
fn geodesic_loop_in_a_curved_metric_has_the_prescribed_radius() {
    // Conformally flat metric (1 + x₁/2)² δ: geodesic distance from the
    // center to each node equals δ, so nodes move off the Euclidean circle.
    let curved = LoopMetric::Analytic(Arc::new(|x: Vec3| {
        let f = (1.0 + 0.5 * x[0]).powi(2);
        [[f, 0.0, 0.0], [0.0, f, 0.0], [0.0, 0.0, f]]
    }));
    let lp = make_loop([0.0; 3], E3, 0.2, 32, curved).unwrap();
    let flat = unit_loop(32);
    assert!(lp
        .nodes
        .iter()
        .zip(&flat.nodes)
        .any(|(a, b)| norm(sub(*a, b.map(|v| 0.2 * v))) > 1e-4));
    assert!(lp.closure_defect() < 1e-9);
}

#[test]
fn exact_forms_integrate_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lp = make_loop(
        [0.3, -0.2, 0.1],
        [0.0, 0.6, 0.8],
        0.7,
        128,
        LoopMetric::Euclidean,
    )
    .unwrap();
    for _ in 0..20 {
        let k: Vec3 = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let (amp, phase) = (rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.0));
        // χ = amp · sin(k·x + phase), A = dχ.
        let a = |x: Vec3| {
            let c = amp * (dot(k, x) + phase).cos();
            k.map(|v| v * c)
        };
        assert!(loop_functional(&lp, a).abs() <= 1e-12);
    }
}

#[test]
fn area_form_gives_the_enclosed_area() {
    for delta in [0.5, 1.0, 2.0] {
        let lp = make_loop([0.0; 3], E3, delta, 64, LoopMetric::Euclidean).unwrap();
        let v = loop_functional(&lp, |x| [-0.5 * x[1], 0.5 * x[0], 0.0]);
        assert!((v - PI * delta * delta).abs() < 1e-12);
    }
}

#[test]
fn polynomial_forms_converge_to_the_dense_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let coeffs: Vec<[f64; 4]> = (0..3)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
        .collect();
    let a = |x: Vec3| -> Vec3 {
        std::array::from_fn(|i| {
            let c = coeffs[i];
            c[0] + c[1] * x[0] * x[1] + c[2] * x[2].powi(3) + c[3] * x[0].powi(2) * x[1]
        })
    };
    let omega = [0.48, 0.6, 0.64];
    let build = |n| make_loop([0.2, 0.1, 0.0], omega, 0.8, n, LoopMetric::Euclidean).unwrap();
    let reference = loop_functional(&build(4096), a);
    assert!((loop_functional(&build(32), a) - reference).abs() < 1e-10);
}

#[test]
fn biot_savart_limit_matches_the_textbook_field() {
    for delta in [0.5, 1.0] {
        let lp = make_loop([0.0; 3], E3, delta, 64, LoopMetric::Euclidean).unwrap();
        for z in [0.0, 0.3, 1.5] {
            let b = bfield_eval(&lp, 0.0, [0.0, 0.0, z]).unwrap();
            let want = delta * delta / (2.0 * (delta * delta + z * z).powf(1.5));
            assert!((b.value[2] - want).abs() < 1e-8 * want);
            assert!(b.value[0].abs() + b.value[1].abs() < 1e-12);
            assert!(b.converged);
        }
        for (rho, z) in [(0.3, 0.2), (1.7, -0.4), (0.9, 0.5)] {
            let b = bfield_eval(&lp, 0.0, [rho * delta, 0.0, z * delta]).unwrap();
            let (br, bz) = textbook_loop_field(delta, rho * delta, z * delta);
            assert!((b.value[0] - br).abs() < 1e-8 * bz.abs().max(br.abs()));
            assert!((b.value[2] - bz).abs() < 1e-8 * bz.abs().max(br.abs()));
        }
    }
}

#[test]
fn center_field_scales_inversely_with_radius() {
    let at = |delta: f64| {
        let lp = make_loop([0.0; 3], E3, delta, 64, LoopMetric::Euclidean).unwrap();
        norm(bfield_eval(&lp, 0.0, [0.0; 3]).unwrap().value)
    };
    for delta in [0.1, 0.4] {
        assert!((at(delta) / at(2.0 * delta) - 2.0).abs() < 1e-8);
        assert!((at(delta) - 1.0 / (2.0 * delta)).abs() < 1e-8 / delta);
    }
}

#[test]
fn beltrami_equation_holds_away_from_the_loop() {
    let lp = make_loop(
        [0.1, 0.0, -0.2],
        [0.0, 0.6, 0.8],
        0.5,
        64,
        LoopMetric::Euclidean,
    )
    .unwrap();
    for lambda in [0.0, 1.0, 2.0] {
        for x in [[0.7, 0.4, 0.3], [-0.2, -0.5, 0.9], [0.1, 0.1, -0.1]] {
            let c = field_check(&lp, lambda, x, 1e-3).unwrap();
            assert!(c.curl_residual <= 1e-5, "λ = {lambda}, x = {x:?}: {c:?}");
            assert!(
                c.divergence_residual <= 1e-5,
                "λ = {lambda}, x = {x:?}: {c:?}"
            );
        }
    }
}

#[test]
fn the_field_check_sees_a_wrong_frequency() {
    let lp = unit_loop(64);
    let b = |x: Vec3| bfield_eval(&lp, 2.0, x).unwrap().value;
    let x = [0.3, 0.2, 0.5];
    // The λ = 2 field does not satisfy the λ = 1 equation.
    let h = 1e-3;
    let d = |k: usize, i: usize| {
        let mut p = x;
        let mut m = x;
        p[k] += h;
        m[k] -= h;
        (b(p)[i] - b(m)[i]) / (2.0 * h)
    };
    let curl = [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)];
    let v = b(x);
    assert!(norm(sub(curl, v.map(|c| c * 1.0))) > 1e-2 * norm(curl));
}

#[test]
fn near_points_are_flagged() {
    let lp = unit_loop(64);
    let near = bfield_eval(&lp, 0.0, [1.0 + 1e-3, 0.0, 0.0]).unwrap();
    assert!(near.near_singular);
    assert!(near.converged);
    assert!(near.nodes_used > 64);
    let far = bfield_eval(&lp, 0.0, [0.0, 0.0, 0.5]).unwrap();
    assert!(!far.near_singular);
}

#[test]
fn singularity_exponent_is_minus_one() {
    for delta in [0.05, 0.1, 0.2] {
        let lp = make_loop([0.0; 3], E3, delta, 64, LoopMetric::Euclidean).unwrap();
        let path = ApproachPath {
            target: lp.nodes[0],
            direction: E3,
        };
        for lambda in [0.0, 2.0] {
            let f = asymptotic_fit(&lp, lambda, path).unwrap();
            let tol = if lambda == 0.0 { 0.02 } else { 0.05 };
            assert!(
                (f.fit.slope + 1.0).abs() <= tol,
                "δ = {delta}, λ = {lambda}: {:?}",
                f.fit
            );
            assert!(f.passes);
        }
    }
}

#[test]
fn axis_paths_are_rejected() {
    let lp = unit_loop(64);
    let path = ApproachPath {
        target: [0.0; 3],
        direction: E3,
    };
    assert!(matches!(
        asymptotic_fit(&lp, 0.0, path),
        Err(NumericsError::NotApproaching { .. })
    ));
}

fn probe_settings() -> ProbeSettings {
    ProbeSettings {
        delta: 0.1,
        lambda: 1.0,
        nodes: 64,
        step: 1e-4,
    }
}

fn patch() -> Vec<Vec3> {
    (0..20)
        .map(|k| {
            let t = k as f64 * 0.9;
            [1.0 + 0.2 * t.cos(), 0.2 * t.sin(), 0.3 + 0.02 * k as f64]
        })
        .collect()
}

#[test]
fn reversed_orientation_negates_the_field() {
    let s = probe_settings();
    let p = BundlePoint {
        center: [0.0; 3],
        theta: 0.7,
        phi: 0.4,
    };
    let q = BundlePoint {
        center: [0.0; 3],
        theta: PI - 0.7,
        phi: 0.4 + PI,
    };
    let a = field_samples(&p, &patch(), &s).unwrap();
    let b = field_samples(&q, &patch(), &s).unwrap();
    let n: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(a.iter().zip(&b).all(|(x, y)| (x + y).abs() <= 1e-12 * n));
    assert!((distance(&a, &b) - 2.0 * n).abs() <= 1e-12 * n);
}

#[test]
fn shifted_loops_give_distinct_samples() {
    let s = probe_settings();
    let p = BundlePoint {
        center: [0.0; 3],
        theta: 0.7,
        phi: 0.4,
    };
    let q = BundlePoint {
        center: [0.1, 0.0, 0.0],
        ..p
    };
    let d = distance(
        &field_samples(&p, &patch(), &s).unwrap(),
        &field_samples(&q, &patch(), &s).unwrap(),
    );
    assert!(d > 0.0);
}

#[test]
fn samples_depend_continuously_on_the_loop() {
    let s = probe_settings();
    let p = BundlePoint {
        center: [0.0; 3],
        theta: 0.7,
        phi: 0.4,
    };
    let base = field_samples(&p, &patch(), &s).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let q = BundlePoint {
            center: [eps, 0.0, 0.0],
            theta: 0.7 + eps,
            phi: 0.4 - eps,
        };
        let d = distance(&base, &field_samples(&q, &patch(), &s).unwrap());
        assert!(d < last);
        last = d;
    }
    let wider = ProbeSettings {
        delta: 0.1 + 1e-4,
        ..s
    };
    assert!(distance(&base, &field_samples(&p, &patch(), &wider).unwrap()) < 1e-2);
}

#[test]
fn jacobian_has_full_rank() {
    let s = probe_settings();
    let p = BundlePoint {
        center: [0.05, 0.0, 0.0],
        theta: 1.1,
        phi: 0.3,
    };
    let sv = jacobian_singular_values(&p, &patch(), &s).unwrap();
    assert_eq!(sv.len(), 5);
    let top = sv.iter().cloned().fold(0.0, f64::max);
    assert!(sv.iter().all(|v| *v > 1e-6 * top), "{sv:?}");
}

#[test]
fn patches_through_a_loop_are_rejected() {
    let s = probe_settings();
    let p = BundlePoint {
        center: [0.0; 3],
        theta: 0.0,
        phi: 0.0,
    };
    let bad = vec![[0.1, 0.0, 0.0]];
    assert!(matches!(
        field_samples(&p, &bad, &s),
        Err(NumericsError::PatchIntersectsLoop { .. })
    ));
}
