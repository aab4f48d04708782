//! Case 3: Heisenberg groups `H` acting on hyperplanes `H_r = {x_n = r}` and
//! on the lightcone of `p_0`, and properness of their lattices.

use std::collections::{BTreeMap, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{gaussian, stream, timed, CheckReport, SampleConfig};
use crate::quadric::{FormContext, MinkowskiVector};
use crate::unipotent::{
    heisenberg_lattice, Case3Data, HeisenbergSpec, HolonomyCaseSpec, LiftedElement, UnipotentElement,
};
use crate::Result;

/// `theta` block diagonal with blocks `[[0, -j], [j, 0]]`, `j = 1..k`.
pub fn rotation_spec(k: usize) -> Result<HeisenbergSpec> {
    let mut theta = DMatrix::zeros(2 * k, 2 * k);
    for j in 0..k {
        let c = (j + 1) as f64;
        theta[(2 * j, 2 * j + 1)] = -c;
        theta[(2 * j + 1, 2 * j)] = c;
    }
    HeisenbergSpec::new(k, theta)
}

/// The lattice of `hull` at `scale` together with the fiber element `alpha`.
pub fn case3_example(ctx: &FormContext, hull: &HeisenbergSpec, scale: f64) -> Result<HolonomyCaseSpec> {
    let lattice = heisenberg_lattice(ctx, hull, scale)?;
    let mut generators: Vec<LiftedElement> =
        lattice.generators.iter().map(|g| LiftedElement::new(0, g.clone())).collect();
    generators.push(LiftedElement::new(0, lattice.central.clone()));
    let fiber = LiftedElement::new(1, UnipotentElement::identity(ctx));
    Ok(HolonomyCaseSpec { case: 3, generators, case3: Some(Case3Data { hull: hull.clone(), fiber }) })
}

/// `(ell, u = theta ell + s e_1)`.
fn element_of(ctx: &FormContext, theta: &DMatrix<f64>, ell: &DVector<f64>, s: f64) -> Result<UnipotentElement> {
    let n = ctx.n();
    let ue = theta * ell;
    let mut u = DVector::zeros(n);
    u[0] = s;
    u.rows_mut(1, n - 2).copy_from(&ue);
    UnipotentElement::from_affine(ctx, ell, &u)
}

enum Solve {
    Unique(UnipotentElement),
    /// Dimension of the solution set.
    Degenerate(usize),
}

/// On `H_r`, `h(x) = (x_1 + <x_mid, ell> - r |ell|^2 / 2 + s, x_mid + (theta - r) ell, r)`.
fn solve_hyperplane(ctx: &FormContext, theta: &DMatrix<f64>, r: f64, x: &DVector<f64>, y: &DVector<f64>) -> Result<Solve> {
    let n = ctx.n();
    let m = n - 2;
    let a = theta - DMatrix::identity(m, m) * r;
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max().max(1.0);
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-9 * smax).count();
    if rank < m {
        return Ok(Solve::Degenerate(m - rank));
    }
    let rhs = y.rows(1, m) - x.rows(1, m);
    let ell = a.lu().solve(&rhs).expect("full rank");
    let s = y[0] - x[0] - x.rows(1, m).dot(&ell) + r * ell.norm_squared() / 2.0;
    Ok(Solve::Unique(element_of(ctx, theta, &ell, s)?))
}

/// In the lightcone chart `(t, y)`, `(ell, theta ell + s e_1)` acts by
/// `(t, y) -> (t - s - <theta ell, y - ell>, y - ell)`.
fn solve_lightcone(
    ctx: &FormContext,
    theta: &DMatrix<f64>,
    (t, y): (f64, &DVector<f64>),
    (t2, y2): (f64, &DVector<f64>),
) -> Result<UnipotentElement> {
    let ell = y - y2;
    let s = t - t2 - (theta * &ell).dot(y2);
    element_of(ctx, theta, &ell, s)
}

const SOLVE_TOL: f64 = 1e-9;

/// Simple transitivity of `H` on `H_0`, `H_1`, `H_{-1}` and on the lightcone
/// of `p_0`; each real eigenvalue `r` of `theta` adds `H_r`, where uniqueness
/// must fail.
pub fn check_simply_transitive(cfg: &SampleConfig, spec: &HeisenbergSpec) -> Result<CheckReport> {
    timed(|| {
        let cfg = cfg.with_n(spec.n());
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "simply_transitive",
            "H acts simply transitively on the lightcone of p_0 and on each hyperplane H_r = {<x, e_1> = r} when theta has no real eigenvalue",
            &cfg,
        );
        let theta = spec.theta();
        let mut rng = stream(&cfg, "simply_transitive");
        let mut hyperplanes = vec![0.0, 1.0, -1.0];
        let real = spec.real_eigenvalues(1e-9);
        hyperplanes.extend(real.iter().copied());
        let charts = hyperplanes.len() + 1;
        let per_chart = cfg.samples.min(1000).div_ceil(charts);
        let mut degenerate = BTreeMap::new();
        for &r in &hyperplanes {
            for i in 0..per_chart {
                let mut x = gaussian(&mut rng, n);
                x[n - 1] = r;
                let y = if i == 0 {
                    x.clone()
                } else {
                    let mut y = gaussian(&mut rng, n);
                    y[n - 1] = r;
                    y
                };
                match solve_hyperplane(&ctx, theta, r, &x, &y)? {
                    Solve::Unique(g) => {
                        let image = g.act_ein(&ctx.minkowski_chart(&MinkowskiVector::new(x.clone())?)?);
                        let back = ctx.chart_inverse(&image)?.into_inner();
                        let mut res = (back - &y).amax();
                        if i == 0 {
                            // x = y must give the identity
                            res = res.max((g.matrix() - UnipotentElement::identity(&ctx).matrix()).amax());
                        }
                        let ok = report.residual(res, SOLVE_TOL);
                        report.record(ok);
                    }
                    Solve::Degenerate(dim) => {
                        degenerate.insert(format!("{r}"), dim as f64);
                        report.record(false);
                    }
                }
            }
        }
        for i in 0..per_chart {
            let (t, y) = (rng.gen_range(-3.0..3.0), gaussian(&mut rng, n - 2));
            let (t2, y2) = if i == 0 { (t, y.clone()) } else { (rng.gen_range(-3.0..3.0), gaussian(&mut rng, n - 2)) };
            let g = solve_lightcone(&ctx, theta, (t, &y), (t2, &y2))?;
            let image = g.act_ein(&ctx.param_lightcone(t, y.as_slice())?);
            let target = ctx.param_lightcone(t2, y2.as_slice())?;
            let ok = report.residual(image.distance(&target), SOLVE_TOL);
            report.record(ok);
        }
        for (r, dim) in &degenerate {
            report.note(format!("uniqueness fails on H_{r}: {dim}-dimensional solution sets"));
            report.metric(&format!("degenerate_dimension_r={r}"), *dim);
        }
        report.metric("hyperplanes", hyperplanes.len() as f64);
        Ok(report)
    })
}

/// Hashable key of an element, exact up to `1e-6`.
fn key(e: &LiftedElement) -> Vec<i64> {
    let mut k = vec![e.alpha_power];
    k.extend(e.body.ell().iter().chain(e.body.translation_part().iter()).map(|v| (v * 1e6).round() as i64));
    k
}

// Radius of the compact set K in the Minkowski chart.
const BALL_RADIUS: f64 = 1.0;
const BALL_SAMPLES: usize = 200;

/// Counts words of length `<= R` moving the compact ball `K` to meet itself.
///
/// `K` is the Euclidean ball of radius 1 in the Minkowski chart of `Min(p_0)`,
/// centred on `H_r` for `r` the first real eigenvalue of the hull's `theta`
/// (`r = 0` otherwise). Intersection is tested on sampled points of `K`, so
/// counts are lower bounds. Growth between `R = word_ball - 2` and
/// `R = word_ball` is flagged UNBOUNDED-SUSPECT.
pub fn check_properness(cfg: &SampleConfig, spec: &HolonomyCaseSpec) -> Result<CheckReport> {
    timed(|| {
        let ctx = cfg.context()?;
        let n = ctx.n();
        let mut report = CheckReport::new(
            "properness",
            "the holonomy group acts properly: only finitely many elements move a compact set to meet itself",
            cfg,
        );
        let r = spec
            .case3
            .as_ref()
            .and_then(|d| d.hull.real_eigenvalues(1e-9).first().copied())
            .unwrap_or(0.0);
        report.metric("center_hyperplane", r);
        let mut center = DVector::zeros(n);
        center[n - 1] = r;
        let mut rng = stream(cfg, "properness");
        let mut ball = vec![center.clone()];
        while ball.len() < BALL_SAMPLES {
            let dir = gaussian(&mut rng, n);
            let rad = BALL_RADIUS * rng.gen_range(0.0f64..1.0).powf(1.0 / n as f64);
            ball.push(&center + dir.normalize() * rad);
        }
        let meets = |e: &LiftedElement| {
            e.alpha_power == 0
                && ball.iter().any(|x| (e.body.apply_chart(x) - &center).norm() <= BALL_RADIUS)
        };

        let mut steps: Vec<LiftedElement> = Vec::new();
        for g in &spec.generators {
            steps.push(g.clone());
            steps.push(g.inverse(&ctx));
        }
        let id = LiftedElement::identity(&ctx);
        let mut seen: HashSet<Vec<i64>> = HashSet::from([key(&id)]);
        let mut frontier = vec![id.clone()];
        let mut count = usize::from(meets(&id));
        let mut counts = vec![count];
        for _ in 1..=cfg.word_ball {
            let mut next = Vec::new();
            for e in &frontier {
                for s in &steps {
                    let f = e.compose(&ctx, s);
                    if seen.insert(key(&f)) {
                        count += usize::from(meets(&f));
                        next.push(f);
                    }
                }
            }
            frontier = next;
            counts.push(count);
        }
        for (radius, c) in counts.iter().enumerate() {
            report.metric(&format!("count_R{radius:02}"), *c as f64);
        }
        report.metric("elements_scanned", seen.len() as f64);
        let last = counts[cfg.word_ball];
        let earlier = counts[cfg.word_ball.saturating_sub(2)];
        report.record(true);
        if last > earlier {
            report.failures += 1;
            report.note(format!("UNBOUNDED-SUSPECT: count grows from {earlier} to {last} with the word ball"));
        }
        Ok(report)
    })
}
