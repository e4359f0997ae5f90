use loopgeom::acs::AcsOperator;
use loopgeom::curve::{self, DiscreteLoop};
use loopgeom::manifold::Manifold;
use loopgeom::suite::{Criterion, ReportRecord};
use loopgeom::{contact, forms, io, transport};
use nalgebra::{dvector, DVector};
use proptest::prelude::*;
use std::f64::consts::PI;

const N: usize = 128;

/// Ellipse plus one harmonic, speed bounded below by construction.
fn plane_loop(r1: f64, r2: f64, eps: f64, k: usize) -> DiscreteLoop {
    DiscreteLoop::closed_from_fn(N, dvector![0.0, 0.0], |t| {
        let w = 2.0 * PI * t;
        let kw = k as f64 * w;
        dvector![r1 * w.cos() + eps * kw.cos() / k as f64, r2 * w.sin() + eps * kw.sin() / k as f64]
    })
    .unwrap()
}

fn sphere_loop(th0: f64, amp: f64) -> DiscreteLoop {
    DiscreteLoop::closed_from_fn(N, dvector![0.0, 2.0 * PI], |t| {
        dvector![th0 + amp * (2.0 * PI * t).sin(), 2.0 * PI * t]
    })
    .unwrap()
}

fn ellipse() -> impl Strategy<Value = DiscreteLoop> {
    (0.6f64..1.4, 0.6f64..1.4, 0.0f64..0.2, 2usize..5).prop_map(|(a, b, e, k)| plane_loop(a, b, e, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn omega_antisymmetric(g in ellipse(), s1 in 0u64..1000, s2 in 0u64..1000) {
        let m = Manifold::euclidean(2);
        let u = curve::random_tangent_field(&g, s1, 6, false).unwrap();
        let v = curve::random_tangent_field(&g, s2 + 1000, 6, false).unwrap();
        let uv = forms::omega_loop(&m, &g, &u, &v).unwrap().value;
        let vu = forms::omega_loop(&m, &g, &v, &u).unwrap().value;
        prop_assert!((uv + vu).abs() < 1e-9);
    }

    #[test]
    fn holonomy_is_orthogonal(th0 in 0.7f64..2.4, amp in 0.0f64..0.3) {
        let m = Manifold::sphere(1.0);
        let rec = transport::parallel_transport_with(&m, &sphere_loop(th0, amp), None, 4).unwrap();
        prop_assert!(rec.orthogonality_defect() < 1e-10);
    }

    #[test]
    fn j_squares_to_minus_one(th0 in 0.7f64..2.4, amp in 0.0f64..0.3, seed in 0u64..1000) {
        let m = Manifold::sphere(1.0);
        let g = sphere_loop(th0, amp).with_basepoint_fixed(true);
        let op = AcsOperator::developpement(&m, &g).unwrap();
        let u = curve::random_tangent_field(&g, seed, 6, true).unwrap();
        let jj = op.apply_j(&op.apply_j(&u).unwrap()).unwrap();
        prop_assert!(jj.plus(&u).max_norm() < 1e-8 * u.max_norm());
        prop_assert!(op.apply_j(&u).unwrap().vectors()[0].norm() < 1e-10);
    }

    #[test]
    fn compat_metric_is_an_inner_product(g in ellipse(), s1 in 0u64..1000, s2 in 0u64..1000) {
        let m = Manifold::euclidean(2);
        let g = g.with_basepoint_fixed(true);
        let op = AcsOperator::developpement(&m, &g).unwrap();
        let u = curve::random_tangent_field(&g, s1, 6, true).unwrap();
        let v = curve::random_tangent_field(&g, s2 + 1000, 6, true).unwrap();
        let uu = op.compat_metric(&u, &u).unwrap();
        let vv = op.compat_metric(&v, &v).unwrap();
        let uv = op.compat_metric(&u, &v).unwrap();
        prop_assert!(uu > 0.0 && vv > 0.0);
        prop_assert!((uv - op.compat_metric(&v, &u).unwrap()).abs() < 1e-10 * (uu * vv).sqrt());
        prop_assert!(uv * uv <= uu * vv * (1.0 + 1e-9));
    }

    #[test]
    fn alpha_equals_mu(g in ellipse(), seed in 0u64..1000) {
        let m = Manifold::euclidean(2);
        let y = curve::random_tangent_field(&g, seed, 6, false).unwrap();
        prop_assert!(contact::alpha(&m, &g, &y).unwrap().residual < 1e-6);
    }

    #[test]
    fn reeb_flow_is_additive(g in ellipse(), a in -0.5f64..0.5, b in -0.5f64..0.5) {
        let m = Manifold::euclidean(2);
        let g = curve::scale_to_unit_length(&m, &g).unwrap();
        let ab = contact::reeb_flow(&m, &contact::reeb_flow(&m, &g, a).unwrap(), b).unwrap();
        prop_assert!(ab.sup_distance(&contact::reeb_flow(&m, &g, a + b).unwrap()) < 1e-6);
    }

    #[test]
    fn reeb_period_on_sphere_times_line(th0 in 0.8f64..2.3, amp in 0.0f64..0.2) {
        let m: Manifold = "stab:sphere:1".parse().unwrap();
        let base = sphere_loop(th0, amp);
        let samples = base.samples().iter().map(|p| dvector![p[0], p[1], 0.3]).collect();
        let g = DiscreteLoop::closed(samples, dvector![0.0, 2.0 * PI, 0.0]).unwrap();
        let g = curve::scale_to_unit_length(&m, &g).unwrap();
        let back = contact::reeb_flow(&m, &g, 0.5).unwrap();
        prop_assert!(back.sup_distance_on(&m, &g) < 1e-6);
    }

    #[test]
    fn csv_round_trip(g in ellipse()) {
        let m = Manifold::euclidean(2);
        let mut buf = Vec::new();
        io::write_loop(&g, &mut buf).unwrap();
        let back = io::read_loop(&m, buf.as_slice()).unwrap();
        prop_assert_eq!(back.samples(), g.samples());
    }

    #[test]
    fn torus_kernel_is_full(w0 in -2i32..3, w1 in -2i32..3, eps in 0.0f64..0.05) {
        prop_assume!(w0 != 0 || w1 != 0);
        let m = Manifold::flat_torus(2);
        let g = DiscreteLoop::closed_from_fn(N, dvector![w0 as f64, w1 as f64], |t| {
            dvector![w0 as f64 * t + eps * (2.0 * PI * t).sin(), w1 as f64 * t + eps * (4.0 * PI * t).cos()]
        })
        .unwrap();
        prop_assert_eq!(transport::kernel_dimension(&m, &g, 1e-6).unwrap(), 2);
        prop_assert_eq!(forms::omega_rank_profile(&m, &g, 6).unwrap().kernel_dim, 2);
    }

    #[test]
    fn report_json_round_trip(value in prop_oneof![Just(f64::NAN), -1e10f64..1e10], passed: bool) {
        let rec = ReportRecord {
            suite: "forms".into(),
            check_id: "forms.stokes".into(),
            paper_anchor: "ω".into(),
            value,
            tolerance: 1e-8,
            passed,
            runtime_ms: 1.5,
        };
        let mut buf = Vec::new();
        io::write_report(std::slice::from_ref(&rec), io::ReportFormat::Json, &mut buf).unwrap();
        let back = io::read_report_json(buf.as_slice()).unwrap();
        prop_assert!(back[0].same_outcome(&rec));
    }

    #[test]
    fn between_criterion(lo in 0.0f64..10.0, width in 0.1f64..10.0, x in -5.0f64..25.0) {
        let c = Criterion::Between(lo, lo + width);
        prop_assert_eq!(c.passes(x), x >= lo && x <= lo + width);
    }
}

#[test]
fn time_shift_changes_stabilized_length_by_exponential() {
    let m: Manifold = "stab:euclidean:1".parse().unwrap();
    let g = DiscreteLoop::closed_from_fn(N, DVector::zeros(2), |t| {
        dvector![(2.0 * PI * t).cos(), 0.5 * (2.0 * PI * t).sin()]
    })
    .unwrap();
    let l0 = curve::length(&m, &g).unwrap();
    let l1 = curve::length(&m, &contact::flow_loop(&m, &g, 0.3).unwrap()).unwrap();
    assert!((l1 / l0 - (0.15f64).exp()).abs() < 1e-10);
}
