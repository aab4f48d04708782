//! Case 2: a cyclic group acting on `Omega = Min^-(p_0) ∪ L(p_0, alpha p_0) ∪ Min^+(p_0)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{base_point, gaussian, sphere, stream, timed, CheckReport, SampleConfig};
use crate::causal::{in_future, in_past};
use crate::cover::{alpha, sphere_distance, CoverPoint};
use crate::quadric::FormContext;
use crate::unipotent::{
    act, case_check, domain_membership, normalize_case2, DomainMembership, HolonomyCaseSpec, LiftedElement,
    UnipotentElement,
};
use crate::{GeomError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case2Example {
    /// Translation by the timelike vector `e_n - e_1`.
    TimelikeTranslation,
    /// `L_w + v` with `w ≠ 0` and `v_n = 1`.
    Generic,
    /// Translation by the null vector `e_1`; violates the holonomy conditions.
    NullTranslation,
}

pub fn case2_example(ctx: &FormContext, kind: Case2Example) -> Result<HolonomyCaseSpec> {
    let n = ctx.n();
    let mut w = DVector::zeros(n - 2);
    let mut u = DVector::zeros(n);
    match kind {
        Case2Example::TimelikeTranslation => {
            u[0] = -1.0;
            u[n - 1] = 1.0;
        }
        Case2Example::Generic => {
            for j in 0..n - 2 {
                w[j] = 0.6 - 0.35 * j as f64;
            }
            u[0] = 0.3;
            for j in 1..n - 1 {
                u[j] = 0.2 * j as f64;
            }
            u[n - 1] = 1.0;
        }
        Case2Example::NullTranslation => u[0] = 1.0,
    }
    let body = UnipotentElement::from_affine(ctx, &w, &u)?;
    Ok(HolonomyCaseSpec { case: 2, generators: vec![LiftedElement::new(0, body)], case3: None })
}

/// `q_0`, the origin of `Min^-(p_0)`: the lift of `iota(0) = [e_{n+1}]` at `theta = 0`.
pub fn origin_minus(n: usize) -> CoverPoint {
    let mut x = DVector::zeros(n);
    x[0] = -1.0;
    CoverPoint::new(x, 0.0).expect("unit vector")
}

/// Uniform on the sphere times uniform `theta` in `(-d, 2 pi - d)`, `d` the
/// distance to `x_0`: a sample of `Omega`.
fn sample_omega(rng: &mut impl Rng, n: usize) -> CoverPoint {
    let p0 = base_point(n);
    let x = sphere(rng, n);
    let d = sphere_distance(&x, p0.x());
    let theta = rng.gen_range(-d..TAU - d);
    CoverPoint::new(x, theta).expect("unit vector")
}

// Margin in cosine units for the prefilter; well above the boundary band.
const PREFILTER_MARGIN: f64 = 1e-6;

/// Cheap exact exclusion from `J^+(b) ∩ I^-(t)`: for `0 <= dt <= pi`,
/// `d(x, y) <= dt` iff `cos dt <= <x, y>`.
fn clearly_outside(b: &CoverPoint, t: &CoverPoint, x: &CoverPoint, band: f64) -> bool {
    let up = x.theta() - b.theta();
    let down = t.theta() - x.theta();
    if up < -band || down < -band {
        return true;
    }
    (up <= PI && up.cos() - x.x().dot(b.x()) > PREFILTER_MARGIN)
        || (down <= PI && down.cos() - x.x().dot(t.x()) > PREFILTER_MARGIN)
}

// Minimal coverage of Omega by the scanned translates.
const MIN_COVERAGE: f64 = 0.999;
const MAX_NORMALIZING_POWER: i64 = 64;

/// Tiling of `Omega` by `gamma^i D`, `D = J^+(q_0) ∩ I^-(alpha gamma q_0)`.
///
/// Each sample is tested against every translate with `|i| <= k_range`.
/// Exactly one interior hit is required; samples with no interior hit but a
/// boundary-band hit are skipped; samples outside the union of the scanned
/// translates are counted as beyond the scan and reduce coverage.
pub fn check_tiling(cfg: &SampleConfig, spec: &HolonomyCaseSpec) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "tiling",
            "the translates gamma^i D of D = J^+(q_0) ∩ I^-(alpha gamma q_0) cover Omega and are pairwise disjoint",
            cfg,
        );
        let check = case_check(&ctx, spec);
        if !check.passed() {
            report.note("generator fails the case-2 holonomy conditions");
        }
        let gamma = spec
            .generators
            .first()
            .ok_or_else(|| GeomError::DegenerateGamma("no generator".into()))?;
        let q0 = origin_minus(n);
        let gamma = match normalize_case2(&ctx, gamma, &q0, MAX_NORMALIZING_POWER) {
            Ok((g, k)) => {
                report.metric("normalizing_power", k as f64);
                g
            }
            Err(e) => {
                report.note(format!("no power of gamma moves q_0 to its chronological future: {e}"));
                gamma.clone()
            }
        };
        let k = cfg.k_range;
        let orbit: Vec<CoverPoint> = (-k..=k + 1)
            .map(|i| act(&ctx, &gamma.pow(&ctx, i), &q0))
            .collect::<Result<_>>()?;
        let bottoms = &orbit[..orbit.len() - 1];
        let tops: Vec<CoverPoint> = orbit[1..].iter().map(|p| alpha(p, 1)).collect();
        let (first, last) = (&bottoms[0], &tops[tops.len() - 1]);

        let mut rng = stream(cfg, "tiling");
        let (tol, band) = (cfg.tol, cfg.band());
        let (mut covered, mut multiple, mut uncovered, mut beyond, mut boundary) = (0, 0, 0, 0, 0);
        for _ in 0..cfg.samples {
            let x = sample_omega(&mut rng, n);
            let mut interior = 0usize;
            let mut edge = 0usize;
            for (b, t) in bottoms.iter().zip(&tops) {
                if clearly_outside(b, t, &x, band) {
                    continue;
                }
                match domain_membership(b, t, &x, band) {
                    DomainMembership::Interior => interior += 1,
                    DomainMembership::Boundary => edge += 1,
                    DomainMembership::Outside => {}
                }
            }
            match (interior, edge) {
                (1, _) => {
                    covered += 1;
                    report.record(true);
                }
                (0, e) if e > 0 => {
                    boundary += 1;
                    report.skip();
                }
                (0, _) => {
                    let inside_scan = in_future(first, &x, false, tol) && in_past(last, &x, true, tol);
                    if inside_scan {
                        uncovered += 1;
                        report.record(false);
                    } else {
                        beyond += 1;
                        report.skip();
                    }
                }
                _ => {
                    multiple += 1;
                    report.record(false);
                }
            }
        }
        let coverage = covered as f64 / cfg.samples as f64;
        report.metric("coverage", coverage);
        report.metric("multiplicity_failures", multiple as f64);
        report.metric("coverage_failures", uncovered as f64);
        report.metric("beyond_scan", beyond as f64);
        report.metric("boundary_band", boundary as f64);
        report.metric("scan_bound", k as f64);
        if coverage < MIN_COVERAGE {
            report.failures += 1;
            report.note(format!("coverage {coverage:.5} below {MIN_COVERAGE}"));
        }
        Ok(report)
    })
}

/// `U^j v = v - j v_n w + (j <v, w> - j^2 v_n |w|^2 / 2) e_1`.
fn unipotent_power_on(w: &DVector<f64>, v: &DVector<f64>, j: f64) -> DVector<f64> {
    let n = v.len();
    let vn = v[n - 1];
    let vw: f64 = (0..n - 2).map(|k| v[k + 1] * w[k]).sum();
    let mut out = v.clone();
    for k in 0..n - 2 {
        out[k + 1] -= j * vn * w[k];
    }
    out[0] += j * vw - j * j * vn * w.norm_squared() / 2.0;
    out
}

const FIT_RANGE: (i64, i64) = (100, 1000);

/// Cubic growth of `<gamma^i 0, e_n - e_1>` with leading coefficient `-v_n |w|^2 / 6`.
///
/// With `gamma = None`, twenty random generators with `v_n = 1` are drawn.
pub fn check_asymptotics(cfg: &SampleConfig, gamma: Option<&UnipotentElement>) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "asymptotics",
            "<gamma^i 0, e_n - e_1> = -i(i-1)(2i-1) v_n |w|^2 / 12 + O(i^2)",
            cfg,
        );
        let mut rng = stream(cfg, "asymptotics");
        let gammas: Vec<UnipotentElement> = match gamma {
            Some(g) => vec![g.clone()],
            None => (0..20)
                .map(|_| {
                    let w = gaussian(&mut rng, n - 2);
                    let mut v = gaussian(&mut rng, n);
                    v[n - 1] = 1.0;
                    UnipotentElement::from_affine(&ctx, &w, &v)
                })
                .collect::<Result<_>>()?,
        };
        let mut worst_rel: f64 = 0.0;
        for g in &gammas {
            let w = g.ell().clone();
            let v = g.translation_part().clone();
            let vn = v[n - 1];
            if w.norm() <= 1e-12 || vn.abs() <= 1e-12 {
                return Err(GeomError::DegenerateGamma(format!("|w| = {:e}, v_n = {vn:e}", w.norm())));
            }
            // orbit sum: gamma^i 0 = sum_{j < i} U^j v
            let (lo, hi) = FIT_RANGE;
            let mut acc = DVector::zeros(n);
            let mut rows = Vec::new();
            let mut ys = Vec::new();
            let mut sum_residual: f64 = 0.0;
            for i in 0..=hi {
                if i >= lo {
                    let y = acc[0] - acc[n - 1];
                    let by_matrix = g.pow(&ctx, i).translation_part().clone();
                    let rel = (&by_matrix - &acc).amax() / acc.amax().max(1.0);
                    sum_residual = sum_residual.max(rel);
                    let s = i as f64 / hi as f64;
                    rows.push([s * s * s, s * s, s, 1.0]);
                    ys.push(y);
                }
                acc += unipotent_power_on(&w, &v, i as f64);
            }
            let a = DMatrix::from_fn(rows.len(), 4, |r, c| rows[r][c]);
            let b = DVector::from_vec(ys);
            let coef = a.svd(true, true).solve(&b, 1e-14).map_err(|e| GeomError::Inconsistent(e.len() as f64))?;
            let cubic = coef[0] / (hi as f64).powi(3);
            let expected = -vn * w.norm_squared() / 6.0;
            let rel = (cubic - expected).abs() / cubic.abs();
            worst_rel = worst_rel.max(rel);
            let ok_fit = report.residual(rel, 1e-2);
            let ok_sum = sum_residual <= 1e-9;
            let ok_sign = (cubic < 0.0) == (vn > 0.0);
            report.record(ok_fit && ok_sum && ok_sign);
            if !ok_sum {
                report.note(format!("matrix powers disagree with the orbit sum: {sum_residual:e}"));
            }
        }
        report.metric("max_relative_cubic_error", worst_rel);
        Ok(report)
    })
}
