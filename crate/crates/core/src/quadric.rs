//! The null quadric of `q_{n,2}` on `R^{n+2}` and its Minkowski chart.
//!
//! Coordinates are `x_0 .. x_{n+1}` with
//! `q_{n,2}(x) = 2 x_0 x_{n+1} + 2 x_1 x_n + sum_{i=2}^{n-1} x_i^2`.
//! The chart coordinates `x_1 .. x_n` carry `q_{n-1,1}(x) = 2 x_1 x_n + sum x_i^2`.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::{GeomError, Result, DEFAULT_TOL};

// Ties in |coord| closer than this go to the lowest index when fixing the sign.
const SIGN_TIE: f64 = 1e-12;

fn finite(v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite)
    }
}

fn check_len(v: &DVector<f64>, expected: usize) -> Result<()> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(GeomError::DimensionMismatch { expected, found: v.len() })
    }
}

/// A vector of `R^{n,2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientVector(DVector<f64>);

impl AmbientVector {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for AmbientVector {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// A vector of the Minkowski space `R^{n-1,1}`, stored as `(x_1, .., x_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinkowskiVector(DVector<f64>);

impl MinkowskiVector {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for MinkowskiVector {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalType {
    Spacelike,
    /// `degenerate` is set for the zero vector.
    Null { degenerate: bool },
    Timelike,
}

/// A point of `Ein^{n-1,1}`: a null ray with a canonical unit representative.
#[derive(Clone, Debug, PartialEq)]
pub struct EinPoint {
    rep: DVector<f64>,
}

impl EinPoint {
    /// Normalizes without checking nullity. Callers guarantee `v` is null.
    pub(crate) fn from_null_vector(v: DVector<f64>) -> Result<Self> {
        Ok(Self { rep: canonical(v)? })
    }

    pub fn rep(&self) -> &DVector<f64> {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.len()
    }

    /// Euclidean distance between unit representatives, minimized over sign.
    pub fn distance(&self, other: &EinPoint) -> f64 {
        let a = (&self.rep - &other.rep).norm();
        let b = (&self.rep + &other.rep).norm();
        a.min(b)
    }

    pub fn approx_eq(&self, other: &EinPoint, tol: f64) -> bool {
        self.rep.len() == other.rep.len() && self.distance(other) <= tol
    }
}

/// Unit norm, largest-magnitude coordinate positive.
fn canonical(v: DVector<f64>) -> Result<DVector<f64>> {
    finite(&v)?;
    let norm = v.norm();
    if norm == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    let v = v / norm;
    let max = v.amax();
    let lead = v.iter().position(|c| c.abs() >= max - SIGN_TIE).unwrap_or(0);
    Ok(if v[lead] < 0.0 { -v } else { v })
}

/// A photon: the projectivization of a totally isotropic 2-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Photon {
    u: DVector<f64>,
    v: DVector<f64>,
}

impl Photon {
    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    /// Euclidean distance from the unit representative of `p` to the plane.
    pub fn distance(&self, p: &EinPoint) -> f64 {
        let x = p.rep();
        let r = x - &self.u * self.u.dot(x) - &self.v * self.v.dot(x);
        r.norm()
    }

    /// The point `[cos(phi) u + sin(phi) v]`.
    pub fn point_at(&self, phi: f64) -> EinPoint {
        EinPoint::from_null_vector(&self.u * phi.cos() + &self.v * phi.sin())
            .expect("orthonormal basis vectors give a nonzero combination")
    }
}

/// The form `q_{n,2}` for a fixed `n`, with the tolerance used by its predicates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormContext {
    n: usize,
    tol: f64,
}

impl FormContext {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(GeomError::InvalidDimension(n));
        }
        Ok(Self { n, tol: DEFAULT_TOL })
    }

    pub fn with_tol(self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(GeomError::InvalidTolerance(tol));
        }
        Ok(Self { tol, ..self })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 2
    }

    /// Gram matrix `Q` of `q_{n,2}`.
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.n + 2;
        let mut q = DMatrix::zeros(d, d);
        q[(0, d - 1)] = 1.0;
        q[(d - 1, 0)] = 1.0;
        q[(1, self.n)] = 1.0;
        q[(self.n, 1)] = 1.0;
        for i in 2..self.n {
            q[(i, i)] = 1.0;
        }
        q
    }

    /// Polarization `B` of `q_{n,2}` on raw coordinates. Lengths must be `n+2`.
    pub fn form(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let n = self.n;
        debug_assert!(u.len() == n + 2 && v.len() == n + 2);
        let mut s = u[0] * v[n + 1] + u[n + 1] * v[0] + u[1] * v[n] + u[n] * v[1];
        for i in 2..n {
            s += u[i] * v[i];
        }
        s
    }

    pub fn bilinear(&self, u: &AmbientVector, v: &AmbientVector) -> Result<f64> {
        check_len(u, self.n + 2)?;
        check_len(v, self.n + 2)?;
        Ok(self.form(u, v))
    }

    pub fn quad(&self, u: &AmbientVector) -> Result<f64> {
        self.bilinear(u, u)
    }

    /// Polarization of `q_{n-1,1}` on raw chart coordinates `(x_1, .., x_n)`.
    pub fn minkowski_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let n = self.n;
        debug_assert!(x.len() == n && y.len() == n);
        let mut s = x[0] * y[n - 1] + x[n - 1] * y[0];
        for i in 1..n - 1 {
            s += x[i] * y[i];
        }
        s
    }

    pub fn minkowski_bilinear(&self, x: &MinkowskiVector, y: &MinkowskiVector) -> Result<f64> {
        check_len(x, self.n)?;
        check_len(y, self.n)?;
        Ok(self.minkowski_form(x, y))
    }

    pub fn causal_type(&self, v: &MinkowskiVector) -> Result<CausalType> {
        check_len(v, self.n)?;
        let norm2 = v.norm_squared();
        if norm2 == 0.0 {
            return Ok(CausalType::Null { degenerate: true });
        }
        let q = self.minkowski_form(v, v);
        Ok(if q < -self.tol * norm2 {
            CausalType::Timelike
        } else if q.abs() <= self.tol * norm2 {
            CausalType::Null { degenerate: false }
        } else {
            CausalType::Spacelike
        })
    }

    /// Validates nullity `|q(v)| <= tol ||v||^2` and normalizes.
    pub fn point(&self, v: &AmbientVector) -> Result<EinPoint> {
        check_len(v, self.n + 2)?;
        let norm2 = v.norm_squared();
        if norm2 == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        let q = self.form(v, v);
        if q.abs() > self.tol * norm2 {
            return Err(GeomError::NotNull(q / norm2));
        }
        EinPoint::from_null_vector(v.0.clone())
    }

    /// `[e_i]`, null for `i` in `{0, 1, n, n+1}`.
    pub fn basis_point(&self, i: usize) -> Result<EinPoint> {
        let mut v = DVector::zeros(self.n + 2);
        if i >= v.len() {
            return Err(GeomError::DimensionMismatch { expected: self.n + 2, found: i + 1 });
        }
        v[i] = 1.0;
        self.point(&AmbientVector(v))
    }

    /// The chart `x -> [-q(x)/2 : x_1 : .. : x_n : 1]`.
    pub fn minkowski_chart(&self, x: &MinkowskiVector) -> Result<EinPoint> {
        check_len(x, self.n)?;
        EinPoint::from_null_vector(self.chart_vector(x))
    }

    /// Unnormalized chart representative, with last coordinate 1.
    pub fn chart_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut v = DVector::zeros(n + 2);
        v[0] = -0.5 * self.minkowski_form(x, x);
        v.rows_mut(1, n).copy_from(x);
        v[n + 1] = 1.0;
        v
    }

    pub fn chart_inverse(&self, p: &EinPoint) -> Result<MinkowskiVector> {
        check_len(p.rep(), self.n + 2)?;
        let last = p.rep()[self.n + 1];
        if last.abs() <= self.tol {
            return Err(GeomError::NotInPatch);
        }
        MinkowskiVector::new(p.rep().rows(1, self.n) / last)
    }

    pub fn on_lightcone(&self, p: &EinPoint, q: &EinPoint) -> bool {
        self.form(p.rep(), q.rep()).abs() <= self.tol
    }

    /// Builds a photon from two vectors spanning a totally isotropic plane.
    pub fn photon(&self, a: &AmbientVector, b: &AmbientVector) -> Result<Photon> {
        check_len(a, self.n + 2)?;
        check_len(b, self.n + 2)?;
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 || nb == 0.0 {
            return Err(GeomError::ZeroVector);
        }
        let scale = na * nb;
        if self.form(a, a).abs() > self.tol * na * na
            || self.form(b, b).abs() > self.tol * nb * nb
            || self.form(a, b).abs() > self.tol * scale
        {
            return Err(GeomError::NotIsotropic);
        }
        let u = a.0.clone() / na;
        let w = &b.0 / nb;
        let v = &w - &u * u.dot(&w);
        let nv = v.norm();
        if nv <= self.tol {
            return Err(GeomError::NotIsotropic);
        }
        Ok(Photon { u, v: v / nv })
    }

    /// The photon `P(span{e_0, e_1})` through `[e_0]`.
    pub fn standard_photon(&self) -> Photon {
        let mut u = DVector::zeros(self.n + 2);
        let mut v = DVector::zeros(self.n + 2);
        u[0] = 1.0;
        v[1] = 1.0;
        Photon { u, v }
    }

    /// Projection `[x] -> [<x,v> u - <x,u> v]` of the photon complement onto the photon.
    pub fn rho_bar(&self, photon: &Photon, p: &EinPoint) -> Result<EinPoint> {
        check_len(p.rep(), self.n + 2)?;
        let x = p.rep();
        let w = photon.u() * self.form(x, photon.v()) - photon.v() * self.form(x, photon.u());
        if w.norm() <= self.tol {
            return Err(GeomError::OnPhoton);
        }
        EinPoint::from_null_vector(w)
    }

    /// Parametrization `(t, y) -> [t : -|y|^2/2 : y : 1 : 0]` of `L(p_0)` minus the photon.
    pub fn param_lightcone(&self, t: f64, y: &[f64]) -> Result<EinPoint> {
        let n = self.n;
        if y.len() != n - 2 {
            return Err(GeomError::DimensionMismatch { expected: n - 2, found: y.len() });
        }
        let mut v = DVector::zeros(n + 2);
        v[0] = t;
        v[1] = -0.5 * y.iter().map(|c| c * c).sum::<f64>();
        for (i, c) in y.iter().enumerate() {
            v[2 + i] = *c;
        }
        v[n] = 1.0;
        EinPoint::from_null_vector(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(ctx: &FormContext, i: usize) -> AmbientVector {
        let mut v = DVector::zeros(ctx.ambient_dim());
        v[i] = 1.0;
        AmbientVector::new(v).unwrap()
    }

    #[test]
    fn basis_pairings() {
        let ctx = FormContext::new(4).unwrap();
        assert_eq!(ctx.bilinear(&e(&ctx, 0), &e(&ctx, 5)).unwrap(), 1.0);
        assert_eq!(ctx.bilinear(&e(&ctx, 2), &e(&ctx, 2)).unwrap(), 1.0);
        assert_eq!(ctx.bilinear(&e(&ctx, 0), &e(&ctx, 0)).unwrap(), 0.0);
        let short = AmbientVector::from_slice(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            ctx.bilinear(&short, &e(&ctx, 0)),
            Err(GeomError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gram_matches_form() {
        let ctx = FormContext::new(5).unwrap();
        let q = ctx.gram();
        let u = DVector::from_fn(7, |i, _| (i as f64 * 0.7).sin());
        let v = DVector::from_fn(7, |i, _| (i as f64 * 1.3).cos());
        assert!((u.dot(&(&q * &v)) - ctx.form(&u, &v)).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_n_and_bad_tol() {
        assert_eq!(FormContext::new(2), Err(GeomError::InvalidDimension(2)));
        let ctx = FormContext::new(3).unwrap();
        assert!(ctx.with_tol(0.0).is_err());
        assert!(ctx.with_tol(f64::NAN).is_err());
        assert_eq!(ctx.with_tol(1e-6).unwrap().tol(), 1e-6);
    }

    #[test]
    fn causal_types() {
        let ctx = FormContext::new(4).unwrap();
        let v = |c: &[f64]| MinkowskiVector::from_slice(c).unwrap();
        assert_eq!(
            ctx.causal_type(&v(&[1.0, 0.0, 0.0, 0.0])).unwrap(),
            CausalType::Null { degenerate: false }
        );
        assert_eq!(ctx.causal_type(&v(&[0.0, 1.0, 0.0, 0.0])).unwrap(), CausalType::Spacelike);
        let t = v(&[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(ctx.minkowski_bilinear(&t, &t).unwrap(), -2.0);
        assert_eq!(ctx.causal_type(&t).unwrap(), CausalType::Timelike);
        assert_eq!(
            ctx.causal_type(&v(&[0.0; 4])).unwrap(),
            CausalType::Null { degenerate: true }
        );
    }

    #[test]
    fn chart_special_values() {
        let ctx = FormContext::new(4).unwrap();
        let origin = MinkowskiVector::from_slice(&[0.0; 4]).unwrap();
        let p = ctx.minkowski_chart(&origin).unwrap();
        assert!(p.approx_eq(&ctx.basis_point(5).unwrap(), 1e-15));
        assert_eq!(ctx.chart_inverse(&p).unwrap(), origin);

        let e1 = MinkowskiVector::from_slice(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let p = ctx.minkowski_chart(&e1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = DVector::from_column_slice(&[0.0, s, 0.0, 0.0, 0.0, s]);
        assert!((p.rep() - expected).norm() < 1e-15);

        assert_eq!(ctx.chart_inverse(&ctx.basis_point(0).unwrap()), Err(GeomError::NotInPatch));
    }

    #[test]
    fn lightcone_incidence() {
        let ctx = FormContext::new(3).unwrap();
        let p0 = ctx.basis_point(0).unwrap();
        assert!(ctx.on_lightcone(&p0, &ctx.basis_point(1).unwrap()));
        assert!(!ctx.on_lightcone(&p0, &ctx.basis_point(4).unwrap()));
    }

    #[test]
    fn point_rejects_non_null() {
        let ctx = FormContext::new(3).unwrap();
        assert!(matches!(ctx.point(&e(&ctx, 2)), Err(GeomError::NotNull(_))));
        let zero = AmbientVector::new(DVector::zeros(5)).unwrap();
        assert_eq!(ctx.point(&zero), Err(GeomError::ZeroVector));
        assert!(AmbientVector::from_slice(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn canonical_sign() {
        let ctx = FormContext::new(3).unwrap();
        let neg = AmbientVector::from_slice(&[-2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(ctx.point(&neg).unwrap(), ctx.basis_point(0).unwrap());
        // tie between x_0 and x_4: the lower index decides
        let tie = DVector::from_column_slice(&[-1.0, 0.0, 0.0, 0.0, 1.0]);
        let rep = canonical(tie).unwrap();
        assert!(rep[0] > 0.0 && rep[4] < 0.0);
    }

    #[test]
    fn rho_bar_examples() {
        let ctx = FormContext::new(4).unwrap();
        let photon = ctx.standard_photon();
        let img = ctx.rho_bar(&photon, &ctx.basis_point(5).unwrap()).unwrap();
        assert!(img.approx_eq(&ctx.basis_point(1).unwrap(), 1e-15));
        let on = photon.point_at(0.3);
        assert_eq!(ctx.rho_bar(&photon, &on), Err(GeomError::OnPhoton));
    }

    #[test]
    fn photon_construction() {
        let ctx = FormContext::new(4).unwrap();
        assert_eq!(ctx.photon(&e(&ctx, 0), &e(&ctx, 5)), Err(GeomError::NotIsotropic));
        assert_eq!(ctx.photon(&e(&ctx, 0), &e(&ctx, 0)), Err(GeomError::NotIsotropic));
        let p = ctx.photon(&e(&ctx, 0), &e(&ctx, 1)).unwrap();
        assert_eq!(p, ctx.standard_photon());
    }

    #[test]
    fn lightcone_parametrization_origin() {
        let ctx = FormContext::new(5).unwrap();
        let p = ctx.param_lightcone(0.0, &[0.0, 0.0, 0.0]).unwrap();
        assert!(p.approx_eq(&ctx.basis_point(5).unwrap(), 1e-15));
        assert!(ctx.param_lightcone(0.0, &[0.0]).is_err());
    }
}
