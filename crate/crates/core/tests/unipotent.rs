use std::f64::consts::PI;

use einkit_core::cover::{alpha, project, CoverPoint, LiftedPhoton};
use einkit_core::quadric::{FormContext, MinkowskiVector};
use einkit_core::unipotent::{
    act, canonical_lift_act, commutator, commutator_translation, heisenberg_group, heisenberg_lattice,
    nilpotent_exp, orbit, tau, tau_limit, tau_point, theta_endomorphism, HeisenbergSpec, LiftedElement,
    UnipotentElement,
};
use einkit_core::GeomError;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn vec_of(n: usize, scale: f64) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-scale..scale, n).prop_map(DVector::from_vec)
}

fn element(n: usize) -> impl Strategy<Value = (DVector<f64>, DVector<f64>)> {
    (vec_of(n - 2, 2.0), vec_of(n, 2.0))
}

fn e(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn rotation() -> HeisenbergSpec {
    HeisenbergSpec::new(1, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap()
}

#[test]
fn affine_examples() {
    let n = 4;
    let ctx = FormContext::new(n).unwrap();
    let u = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.25]);
    let t = UnipotentElement::from_affine(&ctx, &DVector::zeros(n - 2), &u).unwrap();
    assert_eq!(t.linear(), &DMatrix::identity(n, n));
    let x = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
    assert!((t.apply_chart(&x) - (&x + &u)).amax() < 1e-14);

    let w = DVector::from_vec(vec![0.3, -0.7]);
    let g = UnipotentElement::from_affine(&ctx, &w, &DVector::zeros(n)).unwrap();
    assert!((g.apply_chart(&e(n, 0)) - e(n, 0)).amax() < 1e-14);
    // e_n -> e_n - w - |w|^2/2 e_1
    let mut expected = e(n, n - 1);
    expected[1] -= w[0];
    expected[2] -= w[1];
    expected[0] -= w.norm_squared() / 2.0;
    assert!((g.apply_chart(&e(n, n - 1)) - expected).amax() < 1e-14);
}

#[test]
fn composition_examples() {
    let n = 3;
    let ctx = FormContext::new(n).unwrap();
    let a = UnipotentElement::translation(&ctx, &DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
    let b = UnipotentElement::translation(&ctx, &DVector::from_vec(vec![-1.0, 0.5, 1.0])).unwrap();
    let ab = a.compose(&ctx, &b);
    assert!((ab.translation_part() - DVector::from_vec(vec![0.0, 2.5, 4.0])).amax() < 1e-14);
    let id = a.compose(&ctx, &a.inverse(&ctx));
    assert!((id.matrix() - UnipotentElement::identity(&ctx).matrix()).amax() < 1e-14);
    assert!(commutator_translation(&a, &b).amax() < 1e-14);
}

#[test]
fn commutator_of_linear_part_and_translation() {
    let n = 4;
    let ctx = FormContext::new(n).unwrap();
    let w = DVector::from_vec(vec![0.4, -1.1]);
    let v = DVector::from_vec(vec![0.3, 0.9, -0.2, 1.7]);
    let g = UnipotentElement::from_affine(&ctx, &w, &DVector::zeros(n)).unwrap();
    let h = UnipotentElement::translation(&ctx, &v).unwrap();
    let vn = v[n - 1];
    let vw = v[1] * w[0] + v[2] * w[1];
    let mut expected = DVector::zeros(n);
    expected[1] = -vn * w[0];
    expected[2] = -vn * w[1];
    expected[0] = vw - vn * w.norm_squared() / 2.0;
    assert!((commutator_translation(&g, &h) - &expected).amax() < 1e-13);
    assert!((commutator(&ctx, &g, &h).translation_part() - &expected).amax() < 1e-12);
}

#[test]
fn rejects_matrices_outside_the_group() {
    let ctx = FormContext::new(3).unwrap();
    let mut m = DMatrix::identity(5, 5);
    m[(1, 0)] = 1.0;
    assert!(matches!(UnipotentElement::from_matrix(&ctx, m), Err(GeomError::NotUnipotent(_))));
}

#[test]
fn flow_fixes_the_photon() {
    let n = 3;
    let ctx = FormContext::new(n).unwrap();
    for s in [-3.0, 0.5, 100.0] {
        for i in [0, 1] {
            let p = ctx.basis_point(i).unwrap();
            assert!(tau_point(&ctx, s, &p).approx_eq(&p, 1e-15));
        }
        let origin = ctx.basis_point(n + 1).unwrap();
        let shifted = ctx.minkowski_chart(&MinkowskiVector::new(e(n, 0) * -s).unwrap()).unwrap();
        assert!(tau_point(&ctx, s, &origin).approx_eq(&shifted, 1e-14));
    }
}

#[test]
fn lifted_action_examples() {
    let ctx = FormContext::new(3).unwrap();
    let p = CoverPoint::from_slice(&[0.0, 0.6, 0.8], 0.3).unwrap();
    let id = UnipotentElement::identity(&ctx);
    assert!(canonical_lift_act(&ctx, &id, &p).unwrap().approx_eq(&p, 1e-15));
    assert!(act(&ctx, &LiftedElement::new(1, id), &p).unwrap().approx_eq(&alpha(&p, 1), 1e-15));
}

fn origin_minus() -> CoverPoint {
    CoverPoint::from_slice(&[-1.0, 0.0, 0.0], 0.0).unwrap()
}

#[test]
fn short_flows_stay_in_the_patch() {
    let ctx = FormContext::new(3).unwrap();
    let p0 = CoverPoint::from_slice(&[1.0, 0.0, 0.0], 0.0).unwrap();
    let q = act(
        &ctx,
        &LiftedElement::new(0, UnipotentElement::translation(&ctx, &DVector::from_vec(vec![0.3, -0.2, 0.5])).unwrap()),
        &origin_minus(),
    )
    .unwrap();
    for s in [0.01, 0.1, 1.0] {
        let moved = canonical_lift_act(&ctx, &tau(&ctx, s), &q).unwrap();
        assert!(einkit_core::causal::in_min(&moved, &p0, einkit_core::causal::MinSide::Minus, 1e-9));
    }
}

#[test]
fn flow_limits() {
    let ctx = FormContext::new(3).unwrap();
    let delta = LiftedPhoton::standard(&ctx);
    // the origin of Min^-(p_0) flows to the middle of Delta(p_0, alpha p_0)
    let limit = tau_limit(&ctx, &origin_minus(), &delta).unwrap();
    assert!(limit.theta() > 0.0 && limit.theta() < PI);
    assert!(delta.contains(&limit, 1e-12));
    assert!(matches!(tau_limit(&ctx, &delta.at_time(0.4), &delta), Err(GeomError::OnPhoton)));
    // a point of the shell L(p_0, alpha p_0) off Delta goes to alpha p_0
    let shell = CoverPoint::from_slice(&[0.0, 0.0, 1.0], PI / 2.0).unwrap();
    assert!(tau_limit(&ctx, &shell, &delta).unwrap().approx_eq(&delta.vertex(1), 1e-12));
}

#[test]
fn flow_converges_at_rate_one_over_t() {
    // at the chart origin the flow approaches its limit at exactly sqrt(2)/t
    let ctx = FormContext::new(3).unwrap();
    let delta = LiftedPhoton::standard(&ctx);
    let q = origin_minus();
    let limit = tau_limit(&ctx, &q, &delta).unwrap();
    for t in [1e2, 1e3, 1e4] {
        let y = canonical_lift_act(&ctx, &tau(&ctx, t), &q).unwrap();
        let gap = y.distance(&limit) * t;
        assert!((gap - 2f64.sqrt()).abs() < 2e-2, "t = {t}: t * gap = {gap}");
    }
}

#[test]
fn timelike_orbit_approaches_alpha_p0() {
    let n = 3;
    let ctx = FormContext::new(n).unwrap();
    let mut u = DVector::zeros(n);
    u[0] = -1.0;
    u[n - 1] = 1.0;
    let gamma = LiftedElement::new(0, UnipotentElement::translation(&ctx, &u).unwrap());
    let q0 = origin_minus();
    assert!(orbit(&ctx, &gamma, &q0, 0).unwrap().approx_eq(&q0, 1e-15));
    let far = orbit(&ctx, &gamma, &q0, 10_000).unwrap();
    assert!((far.theta() - PI).abs() < 1e-2);
    let split = act(&ctx, &gamma.pow(&ctx, 7), &orbit(&ctx, &gamma, &q0, 5).unwrap()).unwrap();
    assert!(split.approx_eq(&orbit(&ctx, &gamma, &q0, 12).unwrap(), 1e-9));
}

#[test]
fn theta_endomorphism_examples() {
    let ctx = FormContext::new(4).unwrap();
    let spec = rotation();
    let gens = heisenberg_group(&ctx, &spec).unwrap();
    let lin: Vec<_> = gens.iter().filter(|g| g.ell().norm() > 0.0).cloned().collect();
    let theta = theta_endomorphism(&lin).unwrap();
    assert!((theta - spec.theta()).amax() < 1e-10);
    let t = UnipotentElement::translation(&ctx, &DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])).unwrap();
    assert!(matches!(theta_endomorphism(&[t.clone(), t]), Err(GeomError::NotSpanning)));
    let timelike = UnipotentElement::translation(&ctx, &DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0])).unwrap();
    let mut with_d = lin.clone();
    with_d.push(timelike);
    assert!(matches!(theta_endomorphism(&with_d), Err(GeomError::NotInKerD)));
}

#[test]
fn heisenberg_commutators_are_central() {
    let ctx = FormContext::new(4).unwrap();
    let gens = heisenberg_group(&ctx, &rotation()).unwrap();
    let c = commutator_translation(&gens[0], &gens[1]);
    assert!(c.rows(1, 3).amax() < 1e-14);
    // <theta b_2, b_1> - <theta b_1, b_2> = -1 - 1 for the unit vectors
    assert!((c[0] + 2.0).abs() < 1e-14);
}

#[test]
fn lattice_normalization() {
    let ctx = FormContext::new(4).unwrap();
    let lattice = heisenberg_lattice(&ctx, &rotation(), 1.0).unwrap();
    assert_eq!(lattice.period, 1.0);
    assert_eq!(lattice.commutator_gcd, 2.0);
    let half = heisenberg_lattice(&ctx, &rotation(), 0.5f64.sqrt()).unwrap();
    assert!((half.commutator_gcd - 1.0).abs() < 1e-12);
    assert!(matches!(heisenberg_lattice(&ctx, &rotation(), 0.9), Err(GeomError::NonIntegral(_))));
    let lin: Vec<_> = lattice.generators.clone();
    assert!((theta_endomorphism(&lin).unwrap() - rotation().theta()).amax() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_matrices_preserve_the_form((w, u) in element(5)) {
        let ctx = FormContext::new(5).unwrap();
        let g = UnipotentElement::from_affine(&ctx, &w, &u).unwrap();
        let m = g.matrix();
        let q = ctx.gram();
        prop_assert!((m.transpose() * &q * m - &q).amax() <= 1e-10);
        let id = DMatrix::<f64>::identity(7, 7);
        let mut nil = id.clone();
        for _ in 0..7 {
            nil = &nil * (m - &id);
        }
        prop_assert!(nil.amax() <= 1e-10);
    }

    #[test]
    fn composition_is_associative((w1, u1) in element(4), (w2, u2) in element(4), (w3, u3) in element(4)) {
        let ctx = FormContext::new(4).unwrap();
        let a = UnipotentElement::from_affine(&ctx, &w1, &u1).unwrap();
        let b = UnipotentElement::from_affine(&ctx, &w2, &u2).unwrap();
        let c = UnipotentElement::from_affine(&ctx, &w3, &u3).unwrap();
        let left = a.compose(&ctx, &b).compose(&ctx, &c);
        let right = a.compose(&ctx, &b.compose(&ctx, &c));
        prop_assert!((left.matrix() - right.matrix()).amax() <= 1e-9);
    }

    #[test]
    fn log_and_exp_invert((w, u) in element(4), t in -2.0f64..2.0) {
        let ctx = FormContext::new(4).unwrap();
        let g = UnipotentElement::from_affine(&ctx, &w, &u).unwrap();
        prop_assert!((nilpotent_exp(&g.log()) - g.matrix()).amax() <= 1e-9);
        let gt = g.power(&ctx, t);
        prop_assert!((gt.ell() - g.ell() * t).amax() <= 1e-9);
        prop_assert!((g.pow(&ctx, 3).matrix() - g.compose(&ctx, &g).compose(&ctx, &g).matrix()).amax() <= 1e-8);
    }

    #[test]
    fn dee_is_additive((w1, u1) in element(4), (w2, u2) in element(4)) {
        let ctx = FormContext::new(4).unwrap();
        let a = UnipotentElement::from_affine(&ctx, &w1, &u1).unwrap();
        let b = UnipotentElement::from_affine(&ctx, &w2, &u2).unwrap();
        prop_assert!((a.compose(&ctx, &b).dee() - a.dee() - b.dee()).abs() <= 1e-10);
    }

    #[test]
    fn lifted_action_is_a_homomorphism(
        (w1, u1) in element(3),
        (w2, u2) in element(3),
        x in vec_of(3, 1.0),
        theta in -6.0f64..6.0,
        j in -2i64..2,
        k in -2i64..2,
    ) {
        prop_assume!(x.norm() > 1e-2);
        let ctx = FormContext::new(3).unwrap();
        let p = CoverPoint::new(x.normalize(), theta).unwrap();
        let a = LiftedElement::new(j, UnipotentElement::from_affine(&ctx, &w1, &u1).unwrap());
        let b = LiftedElement::new(k, UnipotentElement::from_affine(&ctx, &w2, &u2).unwrap());
        let ab = act(&ctx, &a.compose(&ctx, &b), &p).unwrap();
        let stepwise = act(&ctx, &a, &act(&ctx, &b, &p).unwrap()).unwrap();
        prop_assert!(ab.approx_eq(&stepwise, 1e-8));
        let back = act(&ctx, &a.inverse(&ctx), &act(&ctx, &a, &p).unwrap()).unwrap();
        prop_assert!(back.approx_eq(&p, 1e-8));
        prop_assert!(project(&act(&ctx, &a, &p).unwrap()).approx_eq(&a.body.act_ein(&project(&p)), 1e-9));
    }
}
