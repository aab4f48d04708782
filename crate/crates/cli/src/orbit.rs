use anyhow::{bail, ensure, Context};
use einkit_core::cover::{alpha, CoverPoint};
use einkit_core::unipotent::orbit;
use einkit_core::verify::{case2_example, origin_minus, Case2Example};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRow {
    pub i: i64,
    pub x: Vec<f64>,
    pub theta: f64,
    /// Distance to `alpha p_0`, the forward limit.
    pub dist_plus: f64,
    /// Distance to `alpha^{-1} p_0`, the backward limit.
    pub dist_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitTable {
    pub anchor: &'static str,
    pub rows: Vec<OrbitRow>,
    /// Set when the orbit does not approach `alpha^{±1} p_0` monotonically.
    pub divergent: bool,
    pub detail: String,
}

pub const ORBIT_ANCHOR: &str =
    "gamma^i q_0 tends to alpha p_0 as i -> +inf and to alpha^{-1} p_0 as i -> -inf";

// An O(1/i) approach shrinks the distance by half from |i| = m/2 to |i| = m;
// a bounded-away orbit keeps the ratio near 1.
const TAIL_RATIO: f64 = 0.75;

/// Parses `x_1,...,x_n,theta`; `x` is normalized.
pub fn parse_point(s: &str, n: usize) -> anyhow::Result<CoverPoint> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad coordinate {t:?}")))
        .collect::<anyhow::Result<_>>()?;
    ensure!(vals.len() == n + 1, "q0 needs {} values (x_1..x_{n}, theta), got {}", n + 1, vals.len());
    let x = nalgebra::DVector::from_column_slice(&vals[..n]);
    let r = x.norm();
    ensure!(r > 0.0 && r.is_finite(), "q0 direction must be a nonzero finite vector");
    Ok(CoverPoint::new(x / r, vals[n])?)
}

fn base(n: usize) -> CoverPoint {
    let mut x = nalgebra::DVector::zeros(n);
    x[0] = 1.0;
    CoverPoint::new(x, 0.0).expect("unit vector")
}

/// `gamma^i q_0` for `|i| <= i_max`, `gamma` the single configured
/// generator (the timelike translation when none is given).
pub fn orbit_table(cfg: &RunConfig, i_max: i64, q0: Option<&CoverPoint>) -> anyhow::Result<OrbitTable> {
    ensure!(i_max >= 2, "i-max must be at least 2");
    let ctx = cfg.context()?;
    let n = cfg.n;
    let gamma = match cfg.generators.len() {
        0 => case2_example(&ctx, Case2Example::TimelikeTranslation)?.generators.remove(0),
        1 => cfg.lifted_generators(&ctx)?.remove(0),
        k => bail!("orbit needs exactly one generator, config has {k}"),
    };
    let q0 = match q0 {
        Some(q) => {
            ensure!(q.n() == n, "q0 has dimension {}, config has n = {n}", q.n());
            q.clone()
        }
        None => origin_minus(n),
    };
    let (plus, minus) = (alpha(&base(n), 1), alpha(&base(n), -1));
    let mut rows = Vec::with_capacity(2 * i_max as usize + 1);
    for i in -i_max..=i_max {
        let p = orbit(&ctx, &gamma, &q0, i)?;
        rows.push(OrbitRow {
            i,
            x: p.x().iter().copied().collect(),
            theta: p.theta(),
            dist_plus: p.distance(&plus),
            dist_minus: p.distance(&minus),
        });
    }
    let (divergent, detail) = assess(&rows, i_max);
    Ok(OrbitTable { anchor: ORBIT_ANCHOR, rows, divergent, detail })
}

/// Judges the tail `i_max / 2 <= |i| <= i_max`: early steps of a valid
/// orbit may swing around before the limit takes over.
fn assess(rows: &[OrbitRow], i_max: i64) -> (bool, String) {
    let at = |i: i64| &rows[(i + i_max) as usize];
    let half = (i_max + 1) / 2;
    let mut problems = Vec::new();
    for (sign, label) in [(1i64, "forward"), (-1, "backward")] {
        let dist = |i: i64| {
            let r = at(sign * i);
            if sign > 0 {
                r.dist_plus
            } else {
                r.dist_minus
            }
        };
        if let Some(i) = (half + 1..=i_max).find(|&i| dist(i) >= dist(i - 1)) {
            problems.push(format!("{label} distance stops decreasing at |i| = {i}"));
        }
        let ratio = dist(i_max) / dist(half);
        if ratio.is_nan() || ratio > TAIL_RATIO {
            problems.push(format!("{label} distance only shrinks by {ratio:.3} from |i| = {half} to {i_max}"));
        }
    }
    if problems.is_empty() {
        (false, format!("distances decrease monotonically for {half} <= |i| <= {i_max} in both directions"))
    } else {
        (true, problems.join("; "))
    }
}

pub fn to_csv(table: &OrbitTable) -> anyhow::Result<String> {
    let n = table.rows.first().map_or(0, |r| r.x.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["i".to_string()];
    header.extend((1..=n).map(|j| format!("x{j}")));
    header.extend(["theta", "dist_plus", "dist_minus"].map(String::from));
    w.write_record(&header)?;
    for r in &table.rows {
        let mut rec = vec![r.i.to_string()];
        rec.extend(r.x.iter().map(|v| format!("{v:.12e}")));
        rec.extend([r.theta, r.dist_plus, r.dist_minus].map(|v| format!("{v:.12e}")));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn to_json(table: &OrbitTable) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(table)?;
    s.push('\n');
    Ok(s)
}
