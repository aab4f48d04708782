//! Causal-order identities on the cover, and a brute-force reachability oracle.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use rand::Rng;

use super::{cover_point, sphere, stream, timed, CheckReport, SampleConfig};
use crate::causal::{in_future, in_min, in_past, on_segment, relate, separation, MinSide, Segment};
use crate::cover::{alpha, patch_index, sphere_distance, CoverPoint, PatchRegion};
use crate::Result;

/// Within `band` of the boundary of `J^±(v)`.
fn near_cone(v: &CoverPoint, q: &CoverPoint, band: f64) -> bool {
    let (dt, d) = separation(v, q);
    (dt - d).abs() <= band || (dt + d).abs() <= band
}

/// `q` on the lightcone of `v` at offset `dt = sign * d(x, x_v)`.
fn on_cone_of(rng: &mut impl Rng, v: &CoverPoint, sign: f64) -> CoverPoint {
    let x = sphere(rng, v.n());
    let d = sphere_distance(&x, v.x());
    CoverPoint::new(x, v.theta() + sign * d).expect("unit vector")
}

// one constructed boundary sample per this many draws
const ADVERSARIAL_EVERY: usize = 500;

/// `Ein~ \ I^+(p) = J^-(alpha p)` and `Ein~ \ J^+(p) = I^-(alpha p)`.
pub fn check_complement(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        cfg.validate()?;
        let mut report = CheckReport::new(
            "complement",
            "the complement of I^+(p) is J^-(alpha p), and of J^+(p) is I^-(alpha p)",
            cfg,
        );
        let mut rng = stream(cfg, "complement");
        let (tol, band) = (cfg.tol, cfg.band());
        let mut adversarial = 0usize;
        for i in 0..cfg.samples {
            let p = cover_point(&mut rng, cfg.n);
            let ap = alpha(&p, 1);
            let constructed = i % ADVERSARIAL_EVERY == ADVERSARIAL_EVERY - 1;
            let q = if i == 0 {
                ap.clone()
            } else if constructed {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                on_cone_of(&mut rng, &ap, sign)
            } else {
                cover_point(&mut rng, cfg.n)
            };
            let boundary = near_cone(&p, &q, band) || near_cone(&ap, &q, band);
            if i == 0 || constructed {
                adversarial += 1;
                // constructed points must land in the band
                if !boundary {
                    report.record(false);
                    report.note(format!("constructed boundary point {i} not classified as boundary"));
                }
            }
            if boundary {
                report.skip();
                continue;
            }
            let first = !in_future(&p, &q, true, tol) == in_past(&ap, &q, false, tol);
            let second = !in_future(&p, &q, false, tol) == in_past(&ap, &q, true, tol);
            report.record(first && second);
        }
        report.metric("constructed_boundary_samples", adversarial as f64);
        report.metric("skipped_fraction", report.skipped_fraction());
        Ok(report)
    })
}

/// `∂Min^+(b) = L[b, alpha^2 b]`: the lightcone band of `patch_index` against `on_segment`.
pub fn check_min_boundary(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        cfg.validate()?;
        let mut report =
            CheckReport::new("min_boundary", "the boundary of Min^+(p) is L[p, alpha^2 p]", cfg);
        let mut rng = stream(cfg, "min_boundary");
        let (tol, band) = (cfg.tol, cfg.band());
        let mut on_boundary = 0usize;
        for i in 0..cfg.samples {
            let b = cover_point(&mut rng, cfg.n);
            let p = if i % 2 == 0 {
                // a point of the lifted lightcone: theta = theta_b + 2 pi k ± d
                let k = rng.gen_range(-1..=2) as f64;
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let shifted = CoverPoint::new(b.x().clone(), b.theta() + TAU * k).expect("unit");
                on_cone_of(&mut rng, &shifted, sign)
            } else {
                cover_point(&mut rng, cfg.n)
            };
            // the cone pinches at the vertices alpha^j b, where the shell label is ambiguous
            let (dt, d) = separation(&b, &p);
            let nearest_vertex = (dt / PI).round();
            let vertex_gap = (dt - nearest_vertex * PI).abs() + d.min(PI - d);
            if vertex_gap <= band {
                report.skip();
                continue;
            }
            let seg = Segment::lightcone(b.clone(), 0, 2, true)?;
            let on_seg = on_segment(&p, &seg, tol);
            let banded = matches!(
                patch_index(&p, &b, tol).region,
                PatchRegion::LightconeShell { start: 0 | 1 }
            );
            on_boundary += usize::from(banded);
            report.record(on_seg == banded);
        }
        report.metric("boundary_samples", on_boundary as f64);
        Ok(report)
    })
}

/// `Min^+(b) = Min^-(alpha b)`, and every point off the lifted lightcone of
/// `b` lies in exactly one `Min^+(alpha^j b)`, the one `patch_index` names.
pub fn check_min_patches(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        cfg.validate()?;
        let mut report = CheckReport::new(
            "min_patches",
            "Min^+(p) = Min^-(alpha p); the translates Min^+(alpha^j p) and the lightcone of p partition the cover",
            cfg,
        );
        let mut rng = stream(cfg, "min_patches");
        let (tol, band) = (cfg.tol, cfg.band());
        let mut identity_failures = 0usize;
        let mut on_cone = 0usize;
        for _ in 0..cfg.samples {
            let b = cover_point(&mut rng, cfg.n);
            let p = cover_point(&mut rng, cfg.n);
            let plus = in_min(&p, &b, MinSide::Plus, tol);
            let minus = in_min(&p, &alpha(&b, 1), MinSide::Minus, tol);
            if plus != minus {
                identity_failures += 1;
            }
            if let PatchRegion::LightconeShell { .. } = patch_index(&p, &b, band).region {
                // only the identity applies on the lightcone band
                on_cone += 1;
                report.record(plus == minus);
                continue;
            }
            let scan = cfg.k_range.min(16);
            let hits: Vec<i64> = (-scan..=scan)
                .filter(|j| in_min(&p, &alpha(&b, *j), MinSide::Plus, tol))
                .collect();
            let named = patch_index(&p, &b, tol).min_plus();
            report.record(plus == minus && hits.len() == 1 && named == Some(hits[0]));
        }
        report.metric("identity_failures", identity_failures as f64);
        report.metric("lightcone_band_samples", on_cone as f64);
        Ok(report)
    })
}

/// Fibonacci points on `S^2`, closed under the antipodal map.
fn symmetric_grid(half: usize) -> Vec<DVector<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut pts = Vec::with_capacity(2 * half);
    for i in 0..half {
        // upper hemisphere only, then mirror
        let z = 1.0 - (i as f64 + 0.5) / half as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        pts.push(DVector::from_column_slice(&[r * phi.cos(), r * phi.sin(), z]));
    }
    let mirrored: Vec<_> = pts.iter().map(|p| -p).collect();
    pts.extend(mirrored);
    pts
}

// Grid resolution of the oracle.
const ORACLE_HALF_GRID: usize = 2000;
const ORACLE_LAYERS: usize = 8;

/// Grid-BFS reachability on `S^2 x [0, 2 pi]` against `relate` (`n = 3`).
///
/// Time is cut into layers of height `h`; an edge joins two grid points of
/// consecutive layers when their round distance is at most `(1 + eps) h`,
/// i.e. slope at most `1 + eps`. `eps` is set from the measured covering
/// radius so that every truly causal pair is reachable; reachability then
/// overshoots the exact cone by at most `eps` times the elapsed time.
pub fn check_causal_oracle(cfg: &SampleConfig) -> Result<CheckReport> {
    timed(|| {
        let cfg = cfg.with_n(3);
        cfg.validate()?;
        let mut report = CheckReport::new(
            "causal_oracle",
            "q is in J^+(p) iff t_q - t_p >= d(x_p, x_q)",
            &cfg,
        );
        let mut rng = stream(&cfg, "causal_oracle");
        let grid = symmetric_grid(ORACLE_HALF_GRID);
        let h = TAU / ORACLE_LAYERS as f64;

        // covering radius, estimated from random probes
        let mut rho: f64 = 0.0;
        for _ in 0..4000 {
            let x = sphere(&mut rng, 3);
            let nearest = grid.iter().map(|g| sphere_distance(&x, g)).fold(f64::INFINITY, f64::min);
            rho = rho.max(nearest);
        }
        let eps = 2.2 * rho / h;
        let reach = (1.0 + eps) * h;
        let neighbours: Vec<Vec<u32>> = grid
            .iter()
            .map(|a| {
                (0..grid.len() as u32)
                    .filter(|&j| sphere_distance(a, &grid[j as usize]) <= reach)
                    .collect()
            })
            .collect();
        report.metric("layer_height", h);
        report.metric("covering_radius", rho);
        report.metric("slope_slack", eps);

        let sources = 20usize;
        let per_source = cfg.samples.min(1000).div_ceil(sources);
        let mut exact_agree = 0usize;
        for s in 0..sources {
            let src = rng.gen_range(0..grid.len());
            // layered BFS: reachable[l] = grid points reachable after l layers
            let mut reachable = vec![vec![false; grid.len()]];
            reachable[0][src] = true;
            for _ in 0..ORACLE_LAYERS {
                let prev = reachable.last().expect("nonempty");
                let mut next = vec![false; grid.len()];
                for i in (0..grid.len()).filter(|&i| prev[i]) {
                    for &j in &neighbours[i] {
                        next[j as usize] = true;
                    }
                }
                reachable.push(next);
            }
            let p = CoverPoint::new(grid[src].clone(), 0.0)?;
            for t in 0..per_source {
                let (j, layer) = match t {
                    // the source's own axis and its antipode half a turn later
                    0 => (src, rng.gen_range(0..=ORACLE_LAYERS)),
                    1 => ((src + ORACLE_HALF_GRID) % grid.len(), ORACLE_LAYERS / 2),
                    _ => (rng.gen_range(0..grid.len()), rng.gen_range(0..=ORACLE_LAYERS)),
                };
                let dt = layer as f64 * h;
                let q = CoverPoint::new(grid[j].clone(), dt)?;
                let exact = relate(&p, &q).is_causal(crate::causal::TimeDirection::Future);
                let oracle = reachable[layer][j];
                let d = sphere_distance(p.x(), q.x());
                if exact == oracle {
                    exact_agree += 1;
                    report.record(true);
                } else {
                    // disagreement is tolerated within one grid cell of the cone
                    let gap = (dt - d).abs();
                    report.residual(gap, h);
                    report.record(gap <= h);
                }
                if t <= 1 && exact != oracle {
                    report.note(format!("source {s}: special pair disagrees (layer {layer})"));
                }
            }
        }
        report.metric("exact_agreement", exact_agree as f64 / report.samples as f64);
        Ok(report)
    })
}
