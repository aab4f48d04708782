//! Algebraic identities of the unipotent group and of its lift to the cover.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{cover_point, element, gaussian, stream, timed, CheckReport, SampleConfig};
use crate::cover::project;
use crate::quadric::MinkowskiVector;
use crate::unipotent::{act, canonical_lift_act, commutator, commutator_translation, LiftedElement, UnipotentElement};
use crate::Result;

const ALGEBRA_TOL: f64 = 1e-10;

/// `x - x_n w + (<x, w> - x_n |w|^2 / 2) e_1 + u`, written out coordinatewise.
fn affine_oracle(w: &DVector<f64>, u: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let xn = x[n - 1];
    let xw: f64 = (0..n - 2).map(|j| x[j + 1] * w[j]).sum();
    let mut y = x.clone();
    for j in 0..n - 2 {
        y[j + 1] -= xn * w[j];
    }
    y[0] += xw - xn * w.norm_squared() / 2.0;
    y + u
}

fn max_entry(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// Chart conjugation, the linear-action formula, the commutator formula, the
/// `D` homomorphism, and the defining matrix identities.
pub fn check_algebra(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "algebra",
            "g acts on Min by L_g + u_g; L_g v - v + <v, e_1> ell_g lies in R e_1; [g, h] translates by (L_g - Id) u_h - (L_h - Id) u_g; D is a homomorphism",
            cfg,
        );
        let mut rng = stream(cfg, "algebra");
        let q = ctx.gram();
        let d = ctx.ambient_dim();
        let id = DMatrix::<f64>::identity(d, d);
        let mut worst = [0.0f64; 6];
        for _ in 0..cfg.samples.min(1000) {
            let w = gaussian(&mut rng, n - 2);
            let u = gaussian(&mut rng, n);
            let g = UnipotentElement::from_affine(&ctx, &w, &u)?;
            let h = element(&mut rng, &ctx, 1.0);
            let x = gaussian(&mut rng, n);

            // chart conjugation
            let image = g.act_ein(&ctx.minkowski_chart(&MinkowskiVector::new(x.clone())?)?);
            let back = ctx.chart_inverse(&image)?.into_inner();
            let r0 = (back - affine_oracle(&w, &u, &x)).amax();

            // linear action: off-e_1 part of L v - v + v_n ell
            let v = gaussian(&mut rng, n);
            let mut lv = g.linear() * &v - &v;
            for j in 0..n - 2 {
                lv[j + 1] += v[n - 1] * w[j];
            }
            let r1 = lv.rows(1, n - 1).amax();

            // commutator formula against the matrix commutator
            let c = commutator(&ctx, &g, &h);
            let formula = commutator_translation(&g, &h);
            let r2 = (c.translation_part() - &formula)
                .amax()
                .max((c.linear() - DMatrix::identity(n, n)).amax());

            // D is additive, ell is additive, and the composite caches agree
            let gh = g.compose(&ctx, &h);
            let r3 = (gh.dee() - g.dee() - h.dee()).abs();
            let direct_u = g.linear() * h.translation_part() + g.translation_part();
            let r4 = (gh.translation_part() - direct_u)
                .amax()
                .max((gh.ell() - g.ell() - h.ell()).amax());

            // M^T Q M = Q and (M - I)^{n+2} = 0
            let m = gh.matrix();
            let mut nil = id.clone();
            for _ in 0..d {
                nil = &nil * (m - &id);
            }
            let r5 = max_entry(&(m.transpose() * &q * m - &q)).max(max_entry(&nil));

            let rs = [r0, r1, r2, r3, r4, r5];
            let mut ok = true;
            for (slot, r) in worst.iter_mut().zip(rs) {
                *slot = slot.max(r);
                ok &= report.residual(r, ALGEBRA_TOL);
            }
            report.record(ok);
        }
        for (key, v) in ["chart_conjugation", "linear_action", "commutator", "d_homomorphism", "composition_cache", "orthogonality_nilpotency"]
            .iter()
            .zip(worst)
        {
            report.metric(key, v);
        }
        Ok(report)
    })
}

const LIFT_TOL: f64 = 1e-8;

/// Homomorphism, round trip, centrality of `alpha`, and equivariance of the
/// canonical lift; the fast in-patch action against path continuation.
pub fn check_lift_homomorphism(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "lift_homomorphism",
            "the canonical lift of U to the cover is a homomorphism commuting with the central deck generator alpha",
            cfg,
        );
        let mut rng = stream(cfg, "lift_homomorphism");
        let mut worst = [0.0f64; 5];
        for _ in 0..cfg.samples.min(100) {
            let g = element(&mut rng, &ctx, 1.0);
            let h = element(&mut rng, &ctx, 1.0);
            let p = cover_point(&mut rng, n);
            let gh = canonical_lift_act(&ctx, &g.compose(&ctx, &h), &p)?;
            let stepwise = canonical_lift_act(&ctx, &g, &canonical_lift_act(&ctx, &h, &p)?)?;
            let r0 = gh.distance(&stepwise);

            let back = canonical_lift_act(&ctx, &g.inverse(&ctx), &canonical_lift_act(&ctx, &g, &p)?)?;
            let r1 = back.distance(&p);

            let k = rng.gen_range(-3..=3);
            let e = LiftedElement::new(k, g.clone());
            let ap = crate::cover::alpha(&p, 1);
            let r2 = act(&ctx, &e, &ap)?.distance(&crate::cover::alpha(&act(&ctx, &e, &p)?, 1));

            let moved = act(&ctx, &e, &p)?;
            let r3 = project(&moved).distance(&g.act_ein(&project(&p)));

            let fast = act(&ctx, &LiftedElement::new(0, g.clone()), &p)?;
            let r4 = fast.distance(&canonical_lift_act(&ctx, &g, &p)?);

            let mut ok = true;
            for (slot, r) in worst.iter_mut().zip([r0, r1, r2, r3, r4]) {
                *slot = slot.max(r);
                ok &= report.residual(r, LIFT_TOL);
            }
            report.record(ok);
        }
        for (key, v) in ["homomorphism", "round_trip", "alpha_centrality", "equivariance", "fast_path"]
            .iter()
            .zip(worst)
        {
            report.metric(key, v);
        }
        Ok(report)
    })
}
