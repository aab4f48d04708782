//! The central flow `tau^s`: its matrix, its pairing with the time
//! orientation, its limits on the cover, and the essentiality indicator.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::case2::origin_minus;
use super::{base_point, cover_point, gaussian, sphere, stream, timed, CheckReport, SampleConfig};
use crate::causal::time_orientation_pairing;
use crate::cover::{project, sphere_distance, CoverPoint, LiftedPhoton};
use crate::quadric::{AmbientVector, FormContext};
use crate::unipotent::{
    act, canonical_lift_act, heisenberg_lattice, LiftedElement, UnipotentElement, nilpotent_exp, tau, tau_generator, tau_limit, tau_point, y_tau,
};
use crate::Result;

/// Residual between the two sides of `[x_0 + s x_n : x_1 - s x_{n+1} : ..] = exp(s N) x`.
pub fn check_tau_matrix(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "tau_matrix",
            "tau^s [x] = [x_0 + s x_n : x_1 - s x_{n+1} : x_2 : .. : x_{n+1}] = exp(s (x_n d_0 - x_{n+1} d_1))",
            cfg,
        );
        let mut rng = stream(cfg, "tau_matrix");
        let gen = tau_generator(&ctx);
        let d = ctx.ambient_dim();
        for _ in 0..cfg.samples.min(1000) {
            let p = project(&cover_point(&mut rng, n));
            let s = rng.gen_range(-10.0..10.0);
            let t = rng.gen_range(-10.0..10.0);
            let flowed = tau_point(&ctx, s, &p);
            // N^2 = 0, so the exponential is I + sN
            let mut linear = DMatrix::<f64>::identity(d, d);
            linear[(0, n)] = s;
            linear[(1, n + 1)] = -s;
            let by_series = ctx.point(&AmbientVector::new(nilpotent_exp(&(&gen * s)) * p.rep())?)?;
            let by_linear = ctx.point(&AmbientVector::new(linear * p.rep())?)?;
            let by_element = tau(&ctx, s).act_ein(&p);
            let composed = tau_point(&ctx, t, &flowed);
            let direct = tau_point(&ctx, s + t, &p);
            let r = flowed
                .distance(&by_series)
                .max(flowed.distance(&by_linear))
                .max(flowed.distance(&by_element))
                .max(composed.distance(&direct));
            let ok = report.residual(r, 1e-10);
            report.record(ok);
        }
        // the photon P(span{e_0, e_1}) is fixed pointwise
        let photon = ctx.standard_photon();
        for k in 0..16 {
            let p = photon.point_at(k as f64 * PI / 16.0);
            let r = tau_point(&ctx, 7.0, &p).distance(&p);
            let ok = report.residual(r, 1e-10);
            report.record(ok);
        }
        Ok(report)
    })
}

/// `<Y_tau, d/dtheta> <= 0`, vanishing only on the photon `P(span{e_0, e_1})`.
///
/// Oracle: the squared distance of the unit representative to the plane
/// `span{e_0, e_1}` is `x_n^2 + x_{n+1}^2 + |x_mid|^2`, which must be at most
/// twice `|<Y_tau, d/dtheta>|`.
pub fn check_tau_pairing(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "tau_pairing",
            "Y_tau is nonpositive against d/dtheta, with equality exactly on the photon fixed by tau",
            cfg,
        );
        let band = 1e-9;
        let mut rng = stream(cfg, "tau_pairing");
        let photon = ctx.standard_photon();
        let delta = LiftedPhoton::standard(&ctx);
        let mut zeros = 0usize;
        for i in 0..cfg.samples.min(1000) {
            let p = match i % 10 {
                // on the photon
                0 => photon.point_at(rng.gen_range(0.0..PI)),
                // a small perturbation of a point of the lifted photon
                1 => {
                    let phi = rng.gen_range(0.0..PI);
                    let eps = 10f64.powi(-rng.gen_range(1..6));
                    let on = delta.at_time(phi);
                    let x = on.x() + gaussian(&mut rng, n) * eps;
                    project(&CoverPoint::new(x, phi + eps * rng.gen_range(-1.0..1.0))?)
                }
                _ => project(&cover_point(&mut rng, n)),
            };
            let val = time_orientation_pairing(&ctx, &p, &AmbientVector::new(y_tau(&ctx, &p))?)?;
            let x = p.rep();
            let dist2 = x[n] * x[n] + x[n + 1] * x[n + 1] + x.rows(2, n - 2).norm_squared();
            let sign_ok = val <= band;
            let oracle_ok = dist2 <= 2.0 * val.abs() + 1e-15;
            if val.abs() <= band {
                zeros += 1;
            }
            report.residual(val.max(0.0), band);
            report.record(sign_ok && oracle_ok);
        }
        report.metric("vanishing_samples", zeros as f64);
        Ok(report)
    })
}

/// The point of `Delta` closest to `q` in the product metric, with `phi` in `[lo, hi]`.
fn distance_to_delta(delta: &LiftedPhoton, q: &CoverPoint, lo: f64, hi: f64) -> f64 {
    let f = |phi: f64| delta.at_time(phi).distance(q);
    let steps = 400;
    let h = (hi - lo) / steps as f64;
    let (mut best, mut arg) = (f64::INFINITY, lo);
    for k in 0..=steps {
        let phi = lo + k as f64 * h;
        let v = f(phi);
        if v < best {
            best = v;
            arg = phi;
        }
    }
    // golden-section refinement on the bracketing cell
    let (mut a, mut b) = ((arg - h).max(lo), (arg + h).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.min(f(0.5 * (a + b)))
}

/// A point of `Min^-(p_0)` (`|theta| < d`) or `Min^+(p_0)` (`d < theta < 2 pi - d`).
fn sample_min(rng: &mut impl Rng, n: usize, plus: bool) -> CoverPoint {
    let p0 = base_point(n);
    loop {
        let x = sphere(rng, n);
        let d = sphere_distance(&x, p0.x());
        let (lo, hi) = if plus { (d, TAU - d) } else { (-d, d) };
        if hi - lo < 1e-6 {
            continue;
        }
        let theta = rng.gen_range(lo..hi);
        return CoverPoint::new(x, theta).expect("unit vector");
    }
}

/// `iota(x)` for Gaussian chart coordinates `x`, lifted into `Min^-(p_0)`,
/// or its image under `alpha` in `Min^+(p_0) = Min^-(alpha p_0)`.
fn sample_min_chart(rng: &mut impl Rng, ctx: &FormContext, plus: bool) -> Result<CoverPoint> {
    let n = ctx.n();
    let shift = UnipotentElement::translation(ctx, &gaussian(rng, n))?;
    let p = act(ctx, &LiftedElement::new(i64::from(plus), shift), &origin_minus(n))?;
    Ok(p)
}

const FLOW_TIME: f64 = 1000.0;
const LIMIT_TOL: f64 = 1e-2;

/// Backward and forward `tau`-limits of the two patches adjacent to `p_0`.
pub fn check_tau_limits(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "tau_limits",
            "for x in Min^±(p), lim_{t -> ∓inf} tau^t x lies in Delta(p, alpha p), and lim_{t -> +inf} tau^t x in alpha Delta(p, alpha p) for x in Min^+(p)",
            cfg,
        );
        let mut rng = stream(cfg, "tau_limits");
        let delta = LiftedPhoton::standard(&ctx);
        let forward = tau(&ctx, FLOW_TIME);
        let backward = tau(&ctx, -FLOW_TIME);
        let per_side = cfg.samples.min(1000);
        let mut worst = [0.0f64; 4];
        let residuals = |x: &CoverPoint, plus: bool| -> Result<[f64; 3]> {
            // the limit reached from this side lies on Delta(p_0, alpha p_0)
            let flow = if plus { &backward } else { &forward };
            let y = canonical_lift_act(&ctx, flow, x)?;
            let r0 = distance_to_delta(&delta, &y, 0.0, PI);
            // forward limits agree with the piecewise formula
            let z = if plus { canonical_lift_act(&ctx, &forward, x)? } else { y };
            let r1 = z.distance(&tau_limit(&ctx, x, &delta)?);
            let r2 = if plus { distance_to_delta(&delta, &z, PI, TAU) } else { 0.0 };
            Ok([r0, r1, r2])
        };
        for plus in [false, true] {
            for _ in 0..per_side {
                let x = sample_min_chart(&mut rng, &ctx, plus)?;
                if delta.contains(&x, cfg.band()) {
                    report.skip();
                    continue;
                }
                let r = residuals(&x, plus)?;
                worst[usize::from(plus)] = worst[usize::from(plus)].max(r[0]);
                worst[2] = worst[2].max(r[1]);
                worst[3] = worst[3].max(r[2]);
                let mut ok = true;
                for v in r {
                    ok &= report.residual(v, LIMIT_TOL);
                }
                report.record(ok);
            }
        }
        // Uniform samples of the cover reach the boundary of the patches, where
        // convergence at a fixed time is not uniform; reported, not scored.
        let mut slow = 0usize;
        for i in 0..per_side {
            let plus = i % 2 == 1;
            let x = sample_min(&mut rng, n, plus);
            if delta.contains(&x, cfg.band()) {
                continue;
            }
            if residuals(&x, plus)?.iter().any(|r| *r > LIMIT_TOL) {
                slow += 1;
            }
        }
        report.metric("uniform_cover_slow_fraction", slow as f64 / per_side as f64);
        // points of the lightcone shell L(p_0, alpha p_0) off Delta go to alpha p_0
        let p1 = delta.vertex(1);
        for _ in 0..per_side.min(100) {
            let x = sphere(&mut rng, n);
            let d = sphere_distance(&x, delta.anchor().x());
            let q = CoverPoint::new(x, d)?;
            if delta.contains(&q, cfg.band()) || d < 1e-3 || PI - d < 1e-3 {
                report.skip();
                continue;
            }
            let ok = tau_limit(&ctx, &q, &delta)?.approx_eq(&p1, 1e-12);
            report.record(ok);
        }
        report.metric("max_limit_distance_min_minus", worst[0]);
        report.metric("max_limit_distance_min_plus", worst[1]);
        report.metric("max_formula_vs_flow", worst[2]);
        report.metric("max_forward_distance_shifted", worst[3]);
        Ok(report)
    })
}

/// Largest distance from a sample to `Delta`, i.e. the thickness of the
/// sample transverse to the photon.
fn transverse_extent(delta: &LiftedPhoton, pts: &[CoverPoint]) -> f64 {
    pts.iter()
        .map(|q| distance_to_delta(delta, q, q.theta() - PI, q.theta() + PI))
        .fold(0.0, f64::max)
}

fn diameter(pts: &[DVector<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// Qualitative essentiality indicator for the flow `tau`.
///
/// Cases 1 and 2: a compact cluster collapses onto `Delta` under `tau^t`;
/// its transverse thickness (distance to `Delta`) must shrink below `1e-2`
/// of the initial value, a proxy for volume collapse. Case 4: `tau` is a
/// translation of the Minkowski chart, so chart diameters are preserved.
/// Case 3: the flow factors through the circle `R / c Z`, `c` the central
/// period of the lattice, which is reported.
pub fn check_essential_indicator(cfg: &SampleConfig, case: u8) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "essential_indicator",
            "the conformal flow tau is essential: it preserves no volume in the conformal class",
            cfg,
        );
        report.metric("case", case as f64);
        let mut rng = stream(cfg, "essential_indicator");
        let delta = LiftedPhoton::standard(&ctx);
        match case {
            1 | 2 => {
                report.note("shrink indicator: a proxy for volume collapse, not a proof");
                let forward = tau(&ctx, FLOW_TIME);
                for _ in 0..10 {
                    let center = sample_min_chart(&mut rng, &ctx, case == 1)?;
                    let cluster: Vec<CoverPoint> = (0..24)
                        .map(|_| {
                            let x = center.x() + gaussian(&mut rng, n) * 0.02;
                            let t = center.theta() + rng.gen_range(-0.02..0.02);
                            CoverPoint::new(x, t).expect("nonzero")
                        })
                        .collect();
                    let before = transverse_extent(&delta, &cluster);
                    let after_pts = cluster
                        .iter()
                        .map(|p| canonical_lift_act(&ctx, &forward, p))
                        .collect::<Result<Vec<_>>>()?;
                    let after = transverse_extent(&delta, &after_pts);
                    let ratio = after / before;
                    let ok = report.residual(ratio, 1e-2);
                    report.record(ok);
                }
            }
            4 => {
                let forward = tau(&ctx, FLOW_TIME);
                for _ in 0..10 {
                    let center = gaussian(&mut rng, n);
                    let pts: Vec<DVector<f64>> =
                        (0..24).map(|_| &center + gaussian(&mut rng, n) * 0.5).collect();
                    let moved: Vec<DVector<f64>> = pts
                        .iter()
                        .map(|x| {
                            let v = forward.matrix() * ctx.chart_vector(x);
                            v.rows(1, n) / v[n + 1]
                        })
                        .collect();
                    let (d0, d1) = (diameter(&pts), diameter(&moved));
                    let ok = report.residual((d1 - d0).abs() / d0, 1e-9);
                    report.record(ok);
                }
            }
            3 => {
                if n % 2 != 0 {
                    report.note(format!("n = {n} is odd; case 3 needs n = 2k + 2"));
                    report.record(false);
                } else {
                    let spec = super::rotation_spec((n - 2) / 2)?;
                    let lattice = heisenberg_lattice(&ctx, &spec, 1.0)?;
                    report.metric("central_period", lattice.period);
                    report.metric("commutator_gcd", lattice.commutator_gcd);
                    report.note(format!(
                        "tau factors through R / {}Z acting on the quotient",
                        lattice.period
                    ));
                    // tau^c is the central lattice element
                    let central = tau(&ctx, -lattice.period);
                    let r = (central.matrix() - lattice.central.matrix()).amax();
                    let ok = report.residual(r, 1e-12);
                    report.record(ok && lattice.period > 0.0);
                }
            }
            other => {
                report.note(format!("unknown case {other}"));
                report.record(false);
            }
        }
        Ok(report)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_distance_of_points_on_delta_is_zero() {
        let ctx = crate::quadric::FormContext::new(3).unwrap();
        let delta = LiftedPhoton::standard(&ctx);
        for k in 0..10 {
            let q = delta.at_time(0.3 * k as f64);
            assert!(distance_to_delta(&delta, &q, -1.0, 4.0) < 1e-12);
        }
    }

    #[test]
    fn samples_lie_in_patches() {
        let mut rng = rand::SeedableRng::seed_from_u64(3);
        let p0 = base_point(4);
        for plus in [false, true] {
            for _ in 0..100 {
                let x: CoverPoint = sample_min(&mut rng as &mut rand_chacha::ChaCha8Rng, 4, plus);
                let side = if plus { crate::causal::MinSide::Plus } else { crate::causal::MinSide::Minus };
                assert!(crate::causal::in_min(&x, &p0, side, 0.0));
            }
        }
    }
}
