//! The universal cover `S^{n-1} x R` of `Ein^{n-1,1}`.
//!
//! A diagonalizing basis `T_1, T_2, S_1 .. S_n` splits `q_{n,2}` as
//! `-(t_1^2 + t_2^2) + |s|^2`, so the null cone is `|s| = |t|` and a point
//! `(x, theta)` of the cover projects to `[sum x_i S_i + cos(theta) T_1 + sin(theta) T_2]`.
//! The deck group is generated by `alpha(x, theta) = (-x, theta + pi)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::quadric::{EinPoint, FormContext, Photon};
use crate::{GeomError, Result};

/// Change of basis whose columns are `T_1, T_2, S_1, .., S_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagBasis {
    p: DMatrix<f64>,
}

pub fn diag_basis(ctx: &FormContext) -> DiagBasis {
    let n = ctx.n();
    let mut p = DMatrix::zeros(n + 2, n + 2);
    let s = FRAC_1_SQRT_2;
    // T_1, T_2
    p[(0, 0)] = s;
    p[(n + 1, 0)] = -s;
    p[(1, 1)] = s;
    p[(n, 1)] = -s;
    // S_1, S_2
    p[(0, 2)] = s;
    p[(n + 1, 2)] = s;
    p[(1, 3)] = s;
    p[(n, 3)] = s;
    for i in 2..n {
        p[(i, i + 2)] = 1.0;
    }
    DiagBasis { p }
}

impl DiagBasis {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// `T_1` for `i = 1`, `T_2` for `i = 2`.
    pub fn timelike(&self, i: usize) -> DVector<f64> {
        assert!(i == 1 || i == 2, "timelike index is 1 or 2");
        self.p.column(i - 1).into_owned()
    }

    /// `S_i` for `1 <= i <= n`.
    pub fn spacelike(&self, i: usize) -> DVector<f64> {
        assert!(i >= 1 && i + 1 < self.p.ncols(), "spacelike index out of range");
        self.p.column(i + 1).into_owned()
    }
}

/// Spherical distance on `S^{n-1}`; exact near both `0` and `pi`.
pub fn sphere_distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    2.0 * (x - y).norm().atan2((x + y).norm())
}

/// A point of the universal cover.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverPoint {
    x: DVector<f64>,
    theta: f64,
}

impl CoverPoint {
    /// Normalizes `x` onto the unit sphere.
    pub fn new(x: DVector<f64>, theta: f64) -> Result<Self> {
        if !theta.is_finite() || x.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let norm = x.norm();
        if norm == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        Ok(Self { x: x / norm, theta })
    }

    pub fn from_slice(x: &[f64], theta: f64) -> Result<Self> {
        Self::new(DVector::from_column_slice(x), theta)
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Product metric `sqrt(d(x, x')^2 + (theta - theta')^2)`.
    pub fn distance(&self, other: &CoverPoint) -> f64 {
        sphere_distance(&self.x, &other.x).hypot(self.theta - other.theta)
    }

    pub fn approx_eq(&self, other: &CoverPoint, tol: f64) -> bool {
        self.x.len() == other.x.len() && self.distance(other) <= tol
    }
}

/// The null vector `sum x_i S_i + cos(theta) T_1 + sin(theta) T_2`, unnormalized.
pub fn project_vector(p: &CoverPoint) -> DVector<f64> {
    let n = p.x.len();
    let (s, c) = p.theta.sin_cos();
    let x = &p.x;
    let mut v = DVector::zeros(n + 2);
    v[0] = FRAC_1_SQRT_2 * (x[0] + c);
    v[n + 1] = FRAC_1_SQRT_2 * (x[0] - c);
    v[1] = FRAC_1_SQRT_2 * (x[1] + s);
    v[n] = FRAC_1_SQRT_2 * (x[1] - s);
    for i in 2..n {
        v[i] = x[i];
    }
    v
}

pub fn project(p: &CoverPoint) -> EinPoint {
    EinPoint::from_null_vector(project_vector(p)).expect("projected vector has norm sqrt(2)")
}

/// One preimage `(x, theta)` of a null vector; the others are `alpha^k` of it.
pub fn principal_lift(v: &DVector<f64>) -> Result<CoverPoint> {
    let n = v.len() - 2;
    let c = FRAC_1_SQRT_2 * (v[0] - v[n + 1]);
    let s = FRAC_1_SQRT_2 * (v[1] - v[n]);
    let mut x = DVector::zeros(n);
    x[0] = FRAC_1_SQRT_2 * (v[0] + v[n + 1]);
    x[1] = FRAC_1_SQRT_2 * (v[1] + v[n]);
    for i in 2..n {
        x[i] = v[i];
    }
    if c == 0.0 && s == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    CoverPoint::new(x, s.atan2(c))
}

pub fn alpha(p: &CoverPoint, k: i64) -> CoverPoint {
    let x = if k.rem_euclid(2) == 0 { p.x.clone() } else { -&p.x };
    CoverPoint { x, theta: p.theta + k as f64 * PI }
}

/// Lifts `e` to the preimage closest to `reference`.
///
/// The sheet (sign of `x`) is chosen by `d(x, x_ref) <= pi/2 - tol`; when
/// neither sign qualifies, the preimage with the nearest `theta` wins.
pub fn lift_near(e: &EinPoint, reference: &CoverPoint, tol: f64) -> Result<CoverPoint> {
    let base = principal_lift(e.rep())?;
    if base.n() != reference.n() {
        return Err(GeomError::DimensionMismatch { expected: reference.n(), found: base.n() });
    }
    let d = sphere_distance(&base.x, &reference.x);
    let cutoff = PI / 2.0 - tol;
    let (start, spacing) = if d <= cutoff {
        (base, TAU)
    } else if PI - d <= cutoff {
        (alpha(&base, 1), TAU)
    } else {
        (base, PI)
    };
    let steps = ((reference.theta - start.theta) / spacing).round();
    let offset = reference.theta - start.theta - steps * spacing;
    if (offset.abs() - spacing / 2.0).abs() <= tol {
        return Err(GeomError::Ambiguous);
    }
    let k = steps as i64 * (spacing / PI).round() as i64;
    Ok(alpha(&start, k))
}

/// Lifts a sampled path by continuity from `start`, which must lie over `path[0]`.
pub fn lift_path(path: &[EinPoint], start: &CoverPoint, tol: f64) -> Result<Vec<CoverPoint>> {
    let mut out = Vec::with_capacity(path.len());
    let mut current = start.clone();
    for e in path {
        current = lift_near(e, &current, tol)?;
        out.push(current.clone());
    }
    Ok(out)
}

/// `e^theta x`, identifying the cover with `R^n \ {0}`.
pub fn spiral_coords(p: &CoverPoint) -> DVector<f64> {
    &p.x * p.theta.exp()
}

pub fn from_spiral(z: &DVector<f64>) -> Result<CoverPoint> {
    let r = z.norm();
    if r == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    CoverPoint::new(z / r, r.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchRegion {
    /// `Min^+(alpha^{2k} base)`
    MinPlusEven,
    /// `Min^+(alpha^{2k-1} base)`
    MinPlusOdd,
    /// On the lifted lightcone of `base`, inside `L[alpha^start base, alpha^{start+1} base]`.
    LightconeShell { start: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchIndex {
    pub k: i64,
    pub region: PatchRegion,
}

impl PatchIndex {
    /// `j` with `p` in `Min^+(alpha^j base)`, or the shell's start index.
    pub fn alpha_index(&self) -> i64 {
        match self.region {
            PatchRegion::MinPlusEven => 2 * self.k,
            PatchRegion::MinPlusOdd => 2 * self.k - 1,
            PatchRegion::LightconeShell { start } => start,
        }
    }

    /// The `j` for which `p` is in the open patch `Min^+(alpha^j base)`.
    pub fn min_plus(&self) -> Option<i64> {
        match self.region {
            PatchRegion::LightconeShell { .. } => None,
            _ => Some(self.alpha_index()),
        }
    }
}

/// Locates `p` among the patches `Min^+(alpha^j base)` and the lightcone of `base`.
pub fn patch_index(p: &CoverPoint, base: &CoverPoint, tol: f64) -> PatchIndex {
    let d = sphere_distance(&p.x, &base.x);
    let dt = p.theta - base.theta;
    let k = (dt / TAU).round();
    let r = dt - k * TAU;
    let k = k as i64;
    if (r - d).abs() <= tol || (r + d).abs() <= tol {
        let start = if r >= 0.0 { 2 * k } else { 2 * k - 1 };
        PatchIndex { k, region: PatchRegion::LightconeShell { start } }
    } else if r > d {
        PatchIndex { k, region: PatchRegion::MinPlusEven }
    } else if r > -d {
        PatchIndex { k, region: PatchRegion::MinPlusOdd }
    } else {
        PatchIndex { k: k - 1, region: PatchRegion::MinPlusEven }
    }
}

/// The lift `Delta` of a photon: a null line `theta -> (A (cos theta, sin theta), theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedPhoton {
    base: Photon,
    anchor: CoverPoint,
    // isometry from the timelike plane coordinates to the spacelike ones
    a: DMatrix<f64>,
}

impl LiftedPhoton {
    pub fn new(ctx: &FormContext, base: Photon, anchor: CoverPoint) -> Result<Self> {
        let basis = diag_basis(ctx);
        let (t1, t2) = (basis.timelike(1), basis.timelike(2));
        let t_of = |w: &DVector<f64>| Vector2::new(-ctx.form(w, &t1), -ctx.form(w, &t2));
        let tm = Matrix2::from_columns(&[t_of(base.u()), t_of(base.v())]);
        let inv = tm.try_inverse().ok_or(GeomError::NotIsotropic)?;
        let n = ctx.n();
        let mut sm = DMatrix::zeros(n, 2);
        for i in 0..n {
            let si = basis.spacelike(i + 1);
            sm[(i, 0)] = ctx.form(base.u(), &si);
            sm[(i, 1)] = ctx.form(base.v(), &si);
        }
        let inv = DMatrix::from_iterator(2, 2, inv.iter().copied());
        let a = sm * inv;
        let lifted = Self { base, anchor, a };
        if !lifted.contains(&lifted.anchor, ctx.tol().max(1e-12) * 10.0) {
            return Err(GeomError::OnPhoton);
        }
        Ok(lifted)
    }

    /// `Delta` over `P(span{e_0, e_1})`, anchored at `p_0 = ((1, 0, ..), 0)`.
    pub fn standard(ctx: &FormContext) -> Self {
        let mut x = DVector::zeros(ctx.n());
        x[0] = 1.0;
        let anchor = CoverPoint { x, theta: 0.0 };
        Self::new(ctx, ctx.standard_photon(), anchor).expect("standard photon is valid")
    }

    pub fn base(&self) -> &Photon {
        &self.base
    }

    pub fn anchor(&self) -> &CoverPoint {
        &self.anchor
    }

    /// The point of `Delta` at time `theta`.
    pub fn at_time(&self, theta: f64) -> CoverPoint {
        let x = &self.a * DVector::from_column_slice(&[theta.cos(), theta.sin()]);
        CoverPoint { x, theta }
    }

    /// `alpha^i` applied to the anchor.
    pub fn vertex(&self, i: i64) -> CoverPoint {
        alpha(&self.anchor, i)
    }

    pub fn contains(&self, p: &CoverPoint, tol: f64) -> bool {
        p.n() == self.anchor.n() && (self.at_time(p.theta).x - &p.x).norm() <= tol
    }
}
