//! SVG cross-sections of the cover in spiral coordinates `z = e^{k theta} x`,
//! restricted to a 2-plane of `R^n` so that `z` is planar. Any `k > 0`
//! gives a diffeomorphism onto `R^n \ {0}` taking photons to logarithmic
//! spirals; `k = 1/4` keeps three deck translates legible on one page.

use std::f64::consts::PI;
use std::fmt::Write;

use einkit_core::cover::sphere_distance;
use einkit_core::unipotent::{act, LiftedElement};
use einkit_core::verify::{case2_example, origin_minus, Case2Example};
use nalgebra::DVector;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureKind {
    Lightcone,
    Photon,
    Domain,
}

const RADIAL_RATE: f64 = 0.25;
const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;
// Vertices per arc of length pi.
const ARC_STEPS: usize = 180;

type Curve = Vec<(f64, f64)>;

struct Layer {
    curve: Curve,
    closed: bool,
    stroke: &'static str,
    fill: &'static str,
}

fn spiral(theta: f64, psi: f64) -> (f64, f64) {
    let r = (RADIAL_RATE * theta).exp();
    (r * psi.cos(), r * psi.sin())
}

/// Lightcone loop between `alpha^j p_0` and `alpha^{j+1} p_0`, `p_0 = (e_1, 0)`:
/// the two photon arcs `theta = j pi + s`, angle `j pi ± s`.
fn lightcone_loop(j: i64) -> Curve {
    let start = j as f64 * PI;
    let arc = |sign: f64| (0..=ARC_STEPS).map(move |k| {
        let s = PI * k as f64 / ARC_STEPS as f64;
        spiral(start + s, start + sign * s)
    });
    let mut c: Curve = arc(1.0).collect();
    let back: Vec<_> = arc(-1.0).collect();
    c.extend(back.into_iter().rev().skip(1));
    c
}

/// The lifted photon through `p_0`, `theta in [-pi, 2 pi]`.
fn photon() -> Curve {
    (0..=3 * ARC_STEPS)
        .map(|k| {
            let t = -PI + PI * k as f64 / ARC_STEPS as f64;
            spiral(t, t)
        })
        .collect()
}

/// Boundary curves of `J^+(q_0) ∩ I^-(alpha gamma q_0)` in the plane through
/// `x(q_0)` and `x(alpha gamma q_0)`.
fn domain(cfg: Option<&RunConfig>) -> anyhow::Result<Vec<Layer>> {
    let default = RunConfig::default();
    let cfg = cfg.unwrap_or(&default);
    let ctx = cfg.context()?;
    let n = cfg.n;
    let gamma = match cfg.generators.first() {
        Some(_) => cfg.lifted_generators(&ctx)?.remove(0),
        None => case2_example(&ctx, Case2Example::TimelikeTranslation)?.generators.remove(0),
    };
    let q0 = origin_minus(n);
    let top = act(&ctx, &LiftedElement::new(gamma.alpha_power + 1, gamma.body.clone()), &q0)?;
    let e = q0.x().clone();
    let mut v = top.x() - &e * top.x().dot(&e);
    if v.norm() < 1e-9 {
        v = DVector::zeros(n);
        v[1] = 1.0;
    }
    let v = v.normalize();
    let steps = 2 * ARC_STEPS;
    let mut lower = Curve::new();
    let mut upper = Curve::new();
    let mut region = Curve::new();
    let mut region_top = Curve::new();
    for k in 0..=steps {
        let psi = -PI + 2.0 * PI * k as f64 / steps as f64;
        let x = &e * psi.cos() + &v * psi.sin();
        let lo = q0.theta() + sphere_distance(&x, q0.x());
        let hi = top.theta() - sphere_distance(&x, top.x());
        // angle in the figure is measured from x(q_0), drawn pointing left
        let angle = PI + psi;
        lower.push(spiral(lo, angle));
        upper.push(spiral(hi, angle));
        region.push(spiral(lo, angle));
        region_top.push(spiral(hi.max(lo), angle));
    }
    region.extend(region_top.into_iter().rev());
    Ok(vec![
        Layer { curve: region, closed: true, stroke: "none", fill: "#dbe8f5" },
        Layer { curve: lower, closed: false, stroke: "#1f4e79", fill: "none" },
        Layer { curve: upper, closed: false, stroke: "#a0361c", fill: "none" },
    ])
}

pub fn render(kind: FigureKind, cfg: Option<&RunConfig>) -> anyhow::Result<String> {
    let layers = match kind {
        FigureKind::Photon => vec![Layer { curve: photon(), closed: false, stroke: "#e07b00", fill: "none" }],
        FigureKind::Lightcone => {
            let mut l: Vec<Layer> = (-1..=1)
                .map(|j| Layer { curve: lightcone_loop(j), closed: true, stroke: "#000000", fill: "none" })
                .collect();
            l.push(Layer { curve: photon(), closed: false, stroke: "#e07b00", fill: "none" });
            l
        }
        FigureKind::Domain => domain(cfg)?,
    };
    Ok(to_svg(&layers))
}

fn to_svg(layers: &[Layer]) -> String {
    let pts = layers.iter().flat_map(|l| l.curve.iter());
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let scale = (SIZE - 2.0 * MARGIN) / (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
    let map = |(x, y): (f64, f64)| (MARGIN + (x - lo_x) * scale, SIZE - MARGIN - (y - lo_y) * scale);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let (ox, oy) = map((0.0, 0.0));
    let _ = writeln!(s, r##"<circle cx="{ox:.3}" cy="{oy:.3}" r="2" fill="#888888"/>"##);
    for layer in layers {
        let coords: Vec<String> = layer
            .curve
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let tag = if layer.closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            s,
            r#"<{tag} points="{}" fill="{}" stroke="{}" stroke-width="1.5"/>"#,
            coords.join(" "),
            layer.fill,
            layer.stroke
        );
    }
    s.push_str("</svg>\n");
    s
}
