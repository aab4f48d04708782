use std::f64::consts::{PI, TAU};

use approx::assert_abs_diff_eq;
use einkit_core::cover::{
    alpha, diag_basis, from_spiral, lift_near, lift_path, patch_index, principal_lift, project, project_vector,
    spiral_coords, CoverPoint, LiftedPhoton, PatchRegion,
};
use einkit_core::quadric::FormContext;
use nalgebra::DVector;
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = CoverPoint> {
    (prop::collection::vec(-1.0f64..1.0, n), -10.0f64..10.0).prop_filter_map("nonzero", |(x, t)| {
        let v = DVector::from_vec(x);
        (v.norm() > 1e-3).then(|| CoverPoint::new(v.normalize(), t).unwrap())
    })
}

#[test]
fn diagonal_basis_values() {
    let ctx = FormContext::new(4).unwrap();
    let b = diag_basis(&ctx);
    let (t1, s1) = (b.timelike(1), b.spacelike(1));
    assert_abs_diff_eq!(ctx.form(&t1, &t1), -1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(ctx.form(&s1, &s1), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(ctx.form(&t1, &s1), 0.0, epsilon = 1e-15);
}

#[test]
fn alpha_powers() {
    let p = CoverPoint::from_slice(&[0.6, 0.8, 0.0], 0.3).unwrap();
    let p2 = alpha(&p, 2);
    assert_eq!(p2.x(), p.x());
    assert_abs_diff_eq!(p2.theta(), 0.3 + TAU, epsilon = 1e-15);
    assert!(alpha(&alpha(&p, 1), -1).approx_eq(&p, 1e-15));
}

#[test]
fn spiral_examples() {
    let p = CoverPoint::from_slice(&[0.0, 1.0, 0.0], 0.0).unwrap();
    assert_eq!(spiral_coords(&p), p.x().clone());
    let q = CoverPoint::from_slice(&[0.6, 0.0, 0.8], 0.7).unwrap();
    let z = spiral_coords(&alpha(&q, 1));
    assert!((z + spiral_coords(&q) * PI.exp()).amax() < 1e-12);
    assert_abs_diff_eq!(spiral_coords(&q).norm(), 0.7f64.exp(), epsilon = 1e-12);
}

#[test]
fn lift_near_examples() {
    let r = CoverPoint::from_slice(&[0.0, 0.6, 0.8], 1.1).unwrap();
    assert!(lift_near(&project(&r), &r, 1e-12).unwrap().approx_eq(&r, 1e-12));
    // a short path from r to alpha(r)
    let path: Vec<_> = (0..=64)
        .map(|k| {
            let s = k as f64 / 64.0;
            let x = r.x() * (PI * s).cos() + DVector::from_column_slice(&[1.0, 0.0, 0.0]) * (PI * s).sin();
            project(&CoverPoint::new(x, r.theta() + PI * s).unwrap())
        })
        .collect();
    let lifted = lift_path(&path, &r, 1e-12).unwrap();
    assert!(lifted.last().unwrap().approx_eq(&alpha(&r, 1), 1e-12));
}

#[test]
fn lifting_a_loop_around_the_circle_factor() {
    // theta -> (x, theta) for theta in [0, 2 pi] closes up in Ein and lifts to alpha^2
    let r = CoverPoint::from_slice(&[1.0, 0.0, 0.0], 0.0).unwrap();
    let path: Vec<_> =
        (0..=200).map(|k| project(&CoverPoint::new(r.x().clone(), TAU * k as f64 / 200.0).unwrap())).collect();
    assert!(path[0].approx_eq(&path[200], 1e-12));
    let lifted = lift_path(&path, &r, 1e-12).unwrap();
    assert!(lifted[200].approx_eq(&alpha(&r, 2), 1e-9));
}

#[test]
fn patch_index_examples() {
    let base = CoverPoint::from_slice(&[1.0, 0.0, 0.0], 0.0).unwrap();
    let at = patch_index(&base, &base, 1e-9);
    assert!(matches!(at.region, PatchRegion::LightconeShell { .. }));
    let later = CoverPoint::from_slice(&[1.0, 0.0, 0.0], PI).unwrap();
    let idx = patch_index(&later, &base, 1e-9);
    assert_eq!(idx.region, PatchRegion::MinPlusEven);
    assert_eq!(idx.min_plus(), Some(0));
}

#[test]
fn standard_lifted_photon() {
    let ctx = FormContext::new(3).unwrap();
    let delta = LiftedPhoton::standard(&ctx);
    assert!(delta.contains(delta.anchor(), 1e-12));
    assert!(delta.contains(&delta.vertex(3), 1e-12));
    for k in 0..20 {
        let p = delta.at_time(0.37 * k as f64);
        assert!(delta.base().distance(&project(&p)) < 1e-12);
    }
}

proptest! {
    #[test]
    fn projection_is_null_and_alpha_invariant(p in point(4), k in -4i64..4) {
        let ctx = FormContext::new(4).unwrap();
        let v = project_vector(&p);
        prop_assert!(ctx.form(&v, &v).abs() <= 1e-12);
        prop_assert!(project(&alpha(&p, k)).approx_eq(&project(&p), 1e-12));
    }

    #[test]
    fn principal_lift_is_a_preimage(p in point(5)) {
        let q = principal_lift(&project_vector(&p)).unwrap();
        let k = ((p.theta() - q.theta()) / PI).round() as i64;
        prop_assert!(alpha(&q, k).approx_eq(&p, 1e-9));
    }

    #[test]
    fn alpha_composes(p in point(3), j in -5i64..5, k in -5i64..5) {
        prop_assert!(alpha(&alpha(&p, j), k).approx_eq(&alpha(&p, j + k), 1e-12));
    }

    #[test]
    fn lift_near_recovers_nearby_points(p in point(4), dt in -0.5f64..0.5, k in -3i64..3) {
        let q = CoverPoint::new(p.x().clone(), p.theta() + dt).unwrap();
        let target = alpha(&q, k);
        let lifted = lift_near(&project(&target), &alpha(&p, k), 1e-12).unwrap();
        prop_assert!(lifted.approx_eq(&target, 1e-9));
    }

    #[test]
    fn spiral_round_trip(p in point(3)) {
        prop_assert!(from_spiral(&spiral_coords(&p)).unwrap().approx_eq(&p, 1e-9));
    }

    #[test]
    fn patch_index_partitions(p in point(3), base in point(3)) {
        let idx = patch_index(&p, &base, 1e-9);
        let j = idx.alpha_index();
        // alpha shifts the index by one
        let shifted = patch_index(&alpha(&p, 1), &base, 1e-9);
        prop_assert_eq!(shifted.alpha_index(), j + 1);
        prop_assert_eq!(shifted.min_plus().is_some(), idx.min_plus().is_some());
    }
}
