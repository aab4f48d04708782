//! Leafwise vector fields `Y_i` and the transverse field `Y_n`.
//!
//! Three charts are used. The first Minkowski chart
//! `y -> [-q(y)/2 : y : 1]` of `Min([e_0])`, where `Y_i = ∂y_i`. The second
//! chart `x -> [x_1 : -q(x)/2 : x_2 : .. : x_{n-1} : 1 : x_n]` of
//! `Min([e_1])`, where
//!
//! ```text
//! Y_i = x_n ∂x_i - x_i ∂x_1
//! Y_n = |x_mid|^2/2 ∂x_1 - sum_i x_i x_n ∂x_i - x_n^2 ∂x_n
//! ```
//!
//! and the photons of the lightcone foliation are the lines along `∂x_1`.
//! Finally the affine charts `x_n = 1` and `x_1 = 1` of
//! `P(e_0^⊥ ∩ e_{n+1}^⊥)`, where the lightcone fields are `∂x_i - x_i ∂x_1`
//! and `sum_j x_i x_j ∂x_j + x_n ∂x_i + x_n x_i ∂x_n` respectively.
//!
//! All coordinate vectors are stored 0-based: slot 0 is `x_1`, slots
//! `1..n-2` are `x_mid`, slot `n-1` is `x_n`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{element, gaussian, stream, timed, CheckReport, SampleConfig};
use crate::Result;

fn q(x: &DVector<f64>) -> f64 {
    let n = x.len();
    2.0 * x[0] * x[n - 1] + x.rows(1, n - 2).norm_squared()
}

/// Ambient vector of the second chart.
fn second_chart(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut v = DVector::zeros(n + 2);
    v[0] = x[0];
    v[1] = -q(x) / 2.0;
    v.rows_mut(2, n - 2).copy_from(&x.rows(1, n - 2));
    v[n] = 1.0;
    v[n + 1] = x[n - 1];
    v
}

fn second_chart_inverse(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() - 2;
    let mut x = DVector::zeros(n);
    x[0] = v[0] / v[n];
    x.rows_mut(1, n - 2).copy_from(&(v.rows(2, n - 2) / v[n]));
    x[n - 1] = v[n + 1] / v[n];
    x
}

/// First-chart coordinates to second-chart coordinates.
fn change_of_coordinates(y: &DVector<f64>) -> DVector<f64> {
    let n = y.len();
    let yn = y[n - 1];
    let mut x = DVector::zeros(n);
    x[0] = -q(y) / (2.0 * yn);
    x.rows_mut(1, n - 2).copy_from(&(y.rows(1, n - 2) / yn));
    x[n - 1] = 1.0 / yn;
    x
}

/// `Y_i` in the second chart, `i` a mid slot in `1..=n-2`.
fn y_mid(x: &DVector<f64>, i: usize) -> DVector<f64> {
    let n = x.len();
    let mut out = DVector::zeros(n);
    out[i] = x[n - 1];
    out[0] = -x[i];
    out
}

/// `Y_n` in the second chart.
fn y_transverse(x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let xn = x[n - 1];
    let mut out = DVector::zeros(n);
    out[0] = x.rows(1, n - 2).norm_squared() / 2.0;
    for i in 1..n - 1 {
        out[i] = -x[i] * xn;
    }
    out[n - 1] = -xn * xn;
    out
}

/// Lightcone field `Y_i` in the `x_1 = 1` chart with coordinates
/// `X = (X_2, .., X_{n-1}, X_n)`, `i` in `0..n-2`.
fn y_lightcone_far(x: &DVector<f64>, i: usize) -> DVector<f64> {
    let m = x.len();
    let xn = x[m - 1];
    let mut out = DVector::zeros(m);
    for j in 0..m - 1 {
        out[j] = x[i] * x[j];
    }
    out[i] += xn;
    out[m - 1] = xn * x[i];
    out
}

/// Lightcone field `Y_i` in the `x_n = 1` chart, coordinates `(x_1, x_mid)`.
fn y_lightcone_near(x: &DVector<f64>, i: usize) -> DVector<f64> {
    let mut out = DVector::zeros(x.len());
    out[i] = 1.0;
    out[0] = -x[i];
    out
}

/// The lightcone parametrization `y -> (-|y|^2/2, y)` seen in the `x_1 = 1`
/// chart: `X_j = -2 y_j / |y|^2`, `X_n = -2 / |y|^2`.
fn lightcone_far_coords(y: &DVector<f64>) -> DVector<f64> {
    let m = y.len();
    let s = y.norm_squared();
    let mut out = DVector::zeros(m + 1);
    for j in 0..m {
        out[j] = -2.0 * y[j] / s;
    }
    out[m] = -2.0 / s;
    out
}

/// Fourth-order central difference of `f` at `x` in direction `dir`.
fn directional(f: &dyn Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, dir: &DVector<f64>, h: f64) -> DVector<f64> {
    let at = |t: f64| f(&(x + dir * t));
    (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h)
}

fn jacobian(f: &dyn Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let n = x.len();
    let cols: Vec<DVector<f64>> = (0..n)
        .map(|k| {
            let mut e = DVector::zeros(n);
            e[k] = 1.0;
            // central differences; exact up to rounding for quadratic fields
            (f(&(x + &e * h)) - f(&(x - &e * h))) / (2.0 * h)
        })
        .collect();
    DMatrix::from_columns(&cols)
}

/// `[X, Y] = DY X - DX Y`.
fn bracket(
    fx: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    fy: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    jacobian(fy, x, h) * fx(x) - jacobian(fx, x, h) * fy(x)
}

/// Drops the `∂x_1` (photon) component.
fn mod_photon(v: &DVector<f64>) -> DVector<f64> {
    let mut out = v.clone();
    out[0] = 0.0;
    out
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

const BRACKET_STEP: f64 = 1e-4;
const BRACKET_TOL: f64 = 1e-5;
const INVARIANCE_TOL: f64 = 1e-7;
const PUSHFORWARD_TOL: f64 = 1e-6;

/// (a) extension by zero, (b) commuting brackets modulo photons, (c)
/// `U`-invariance modulo the foliation; plus a finite-difference check that
/// the chart formulas are the pushforwards of the coordinate fields.
pub fn check_vector_fields(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let m = n - 2;
        let mut report = CheckReport::new(
            "vector_fields",
            "Y_i = x_n ∂x_i - x_i ∂x_1 and Y_n extend by zero to the lightcone of p_0, commute, and are U-invariant modulo the photon foliation",
            cfg,
        );
        let mut rng = stream(cfg, "vector_fields");
        let decades: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
        report.metric("decades", decades.len() as f64);
        let mut worst = [0.0f64; 4];
        for _ in 0..cfg.samples.min(100) {
            let mut ok = true;

            // (a) lightcone fields at x -> 0 in the x_1 = 1 chart (x_n < 0 there)
            let mut dir = gaussian(&mut rng, m + 1).normalize();
            dir[m] = -dir[m].abs();
            for i in 0..m {
                let norms: Vec<f64> = decades.iter().map(|s| y_lightcone_far(&(&dir * *s), i).norm()).collect();
                ok &= strictly_decreasing(&norms) && norms[5] <= 1e-5;
            }
            // second chart, approaching x_n = 0: Y_i and Y_n modulo photons
            let base = gaussian(&mut rng, n);
            let series = |f: &dyn Fn(&DVector<f64>) -> DVector<f64>| -> Vec<f64> {
                decades
                    .iter()
                    .map(|s| {
                        let mut x = base.clone();
                        x[n - 1] = *s;
                        mod_photon(&f(&x)).norm()
                    })
                    .collect()
            };
            for i in 1..=m {
                ok &= strictly_decreasing(&series(&|x| y_mid(x, i)));
            }
            ok &= strictly_decreasing(&series(&y_transverse));
            ok &= y_mid(&DVector::zeros(n), 1).norm() == 0.0;

            // (b) brackets modulo photons
            let x = gaussian(&mut rng, n);
            let second: Vec<Box<dyn Fn(&DVector<f64>) -> DVector<f64>>> = (1..=m)
                .map(|i| Box::new(move |x: &DVector<f64>| y_mid(x, i)) as Box<dyn Fn(&DVector<f64>) -> DVector<f64>>)
                .chain(std::iter::once(Box::new(y_transverse) as Box<dyn Fn(&DVector<f64>) -> DVector<f64>>))
                .collect();
            for (a, fa) in second.iter().enumerate() {
                for fb in &second[a..] {
                    let r = mod_photon(&bracket(fa.as_ref(), fb.as_ref(), &x, BRACKET_STEP)).norm();
                    worst[0] = worst[0].max(r);
                    ok &= report.residual(r, BRACKET_TOL);
                }
            }
            let near = gaussian(&mut rng, m + 1);
            let far = {
                let mut v = gaussian(&mut rng, m + 1) * 0.5;
                v[m] = -v[m].abs() - 0.1;
                v
            };
            for i in 0..m {
                for j in i..m {
                    let r = mod_photon(&bracket(
                        &|x| y_lightcone_near(x, i + 1),
                        &|x| y_lightcone_near(x, j + 1),
                        &near,
                        BRACKET_STEP,
                    ))
                    .norm();
                    let r2 = bracket(&|x| y_lightcone_far(x, i), &|x| y_lightcone_far(x, j), &far, BRACKET_STEP).norm();
                    worst[0] = worst[0].max(r).max(r2);
                    ok &= report.residual(r.max(r2), BRACKET_TOL);
                }
            }

            // (c) U-invariance: g_* Y_i - Y_i o g is along ∂x_1; for Y_n, along the leaves of H
            let (g, xs) = loop {
                let g = element(&mut rng, &ctx, 0.3);
                let mut x = gaussian(&mut rng, n) * 0.5;
                if rng.gen_bool(0.2) {
                    // a point of the lightcone of p_0
                    x[n - 1] = 0.0;
                }
                let un = g.translation_part()[n - 1];
                if (1.0 + un * x[n - 1]).abs() > 0.2 {
                    break (g, x);
                }
            };
            let act = |x: &DVector<f64>| second_chart_inverse(&(g.matrix() * second_chart(x)));
            let gx = act(&xs);
            for i in 1..=m {
                let pushed = directional(&act, &xs, &y_mid(&xs, i), 1e-3);
                let r = mod_photon(&(pushed - y_mid(&gx, i))).norm();
                worst[1] = worst[1].max(r);
                ok &= report.residual(r, INVARIANCE_TOL);
            }
            let pushed = directional(&act, &xs, &y_transverse(&xs), 1e-3);
            let r = (pushed[n - 1] - y_transverse(&gx)[n - 1]).abs();
            worst[2] = worst[2].max(r);
            ok &= report.residual(r, INVARIANCE_TOL);

            // the chart formulas are pushforwards of the coordinate fields
            let mut y = gaussian(&mut rng, n);
            y[n - 1] = y[n - 1].signum() * (y[n - 1].abs() + 0.5);
            let xy = change_of_coordinates(&y);
            let mut fields: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
            for i in 1..=m {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                fields.push((e, y_mid(&xy, i)));
            }
            let mut en = DVector::zeros(n);
            en[n - 1] = 1.0;
            fields.push((en, y_transverse(&xy)));
            for (e, formula) in fields {
                let pushed = directional(&change_of_coordinates, &y, &e, 1e-3);
                let r = (pushed - &formula).norm() / formula.norm().max(1.0);
                worst[3] = worst[3].max(r);
                ok &= report.residual(r, PUSHFORWARD_TOL);
            }
            let ly = gaussian(&mut rng, m) + DVector::from_element(m, 0.5);
            let far_pt = lightcone_far_coords(&ly);
            for i in 0..m {
                let mut e = DVector::zeros(m);
                e[i] = 1.0;
                let pushed = directional(&lightcone_far_coords, &ly, &e, 1e-4);
                let formula = y_lightcone_far(&far_pt, i);
                let r = (pushed - &formula).norm() / formula.norm().max(1e-3);
                worst[3] = worst[3].max(r);
                ok &= report.residual(r, PUSHFORWARD_TOL);
            }
            report.record(ok);
        }
        report.metric("max_bracket_mod_photon", worst[0]);
        report.metric("max_invariance_mod_photon", worst[1]);
        report.metric("max_transverse_invariance", worst[2]);
        report.metric("max_pushforward_mismatch", worst[3]);
        Ok(report)
    })
}
