//! Causal order on the universal cover.
//!
//! For `p = (x_0, t_0)` and `q = (x, t)`, `q` is in `J^+(p)` iff
//! `t - t_0 >= d(x, x_0)` and in `I^+(p)` iff the inequality is strict, `d`
//! being the round distance on `S^{n-1}`. Every predicate here reduces to
//! that pair of numbers, compared with an absolute band `tol`.

use std::f64::consts::TAU;

use nalgebra::DVector;

use crate::cover::{alpha, sphere_distance, CoverPoint, LiftedPhoton};
use crate::quadric::{AmbientVector, EinPoint, FormContext};
use crate::{GeomError, Result, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TimeDirection {
    Future,
    Past,
}

/// Position of `q` relative to `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CausalRelation {
    Equal,
    Chronological(TimeDirection),
    /// Causally but not chronologically related, `q != p`.
    Null(TimeDirection),
    Incomparable,
}

impl CausalRelation {
    pub fn is_causal(&self, dir: TimeDirection) -> bool {
        match self {
            CausalRelation::Equal => true,
            CausalRelation::Chronological(d) | CausalRelation::Null(d) => *d == dir,
            CausalRelation::Incomparable => false,
        }
    }

    pub fn is_chronological(&self, dir: TimeDirection) -> bool {
        *self == CausalRelation::Chronological(dir)
    }
}

/// `(theta_q - theta_p, d(x_p, x_q))`.
pub fn separation(p: &CoverPoint, q: &CoverPoint) -> (f64, f64) {
    (q.theta() - p.theta(), sphere_distance(p.x(), q.x()))
}

pub fn relate(p: &CoverPoint, q: &CoverPoint) -> CausalRelation {
    relate_tol(p, q, DEFAULT_TOL)
}

pub fn relate_tol(p: &CoverPoint, q: &CoverPoint, tol: f64) -> CausalRelation {
    let (dt, d) = separation(p, q);
    classify(dt, d, tol)
}

fn classify(dt: f64, d: f64, tol: f64) -> CausalRelation {
    use CausalRelation::*;
    use TimeDirection::*;
    if d <= tol && dt.abs() <= tol {
        Equal
    } else if dt > d + tol {
        Chronological(Future)
    } else if -dt > d + tol {
        Chronological(Past)
    } else if (dt - d).abs() <= tol {
        Null(Future)
    } else if (dt + d).abs() <= tol {
        Null(Past)
    } else {
        Incomparable
    }
}

/// `q` in `I^+(p)` (strict) or `J^+(p)`.
pub fn in_future(p: &CoverPoint, q: &CoverPoint, strict: bool, tol: f64) -> bool {
    let rel = relate_tol(p, q, tol);
    if strict {
        rel.is_chronological(TimeDirection::Future)
    } else {
        rel.is_causal(TimeDirection::Future)
    }
}

/// `q` in `I^-(p)` (strict) or `J^-(p)`.
pub fn in_past(p: &CoverPoint, q: &CoverPoint, strict: bool, tol: f64) -> bool {
    let rel = relate_tol(p, q, tol);
    if strict {
        rel.is_chronological(TimeDirection::Past)
    } else {
        rel.is_causal(TimeDirection::Past)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinSide {
    Plus,
    Minus,
}

/// `Min^+(b) = I^+(b) ∩ I^-(alpha^2 b)`, `Min^-(b) = I^+(alpha^-1 b) ∩ I^-(alpha b)`.
pub fn in_min(p: &CoverPoint, base: &CoverPoint, side: MinSide, tol: f64) -> bool {
    let (lo, hi) = match side {
        MinSide::Plus => (base.clone(), alpha(base, 2)),
        MinSide::Minus => (alpha(base, -1), alpha(base, 1)),
    };
    in_future(&lo, p, true, tol) && in_past(&hi, p, true, tol)
}

/// `p` lies on the full preimage of the lightcone of `project(vertex)`:
/// `theta - theta_v = 2k pi ± d` for some integer `k`.
pub fn on_lifted_lightcone(p: &CoverPoint, vertex: &CoverPoint, tol: f64) -> bool {
    let (dt, d) = separation(vertex, p);
    let r = dt - (dt / TAU).round() * TAU;
    // near r = ±pi the nearest k is ambiguous; check both neighbours
    [r, r - TAU, r + TAU]
        .iter()
        .any(|r| (r - d).abs() <= tol || (r + d).abs() <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    /// `L(p, q)`: the lightcone of the anchor between the endpoints.
    Lightcone,
    /// `Delta(p, q)`: a lifted photon between the endpoints.
    Photon,
}

#[derive(Clone, Debug, PartialEq)]
enum Carrier {
    Lightcone(CoverPoint),
    Photon(LiftedPhoton),
}

/// A causal interval between `alpha^start p` and `alpha^end p`, on the
/// lightcone of `p` or on a lifted photon through it.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    carrier: Carrier,
    start: i64,
    end: i64,
    start_closed: bool,
    end_closed: bool,
}

impl Segment {
    fn build(carrier: Carrier, start: i64, end: i64, start_closed: bool, end_closed: bool) -> Result<Self> {
        if start >= end {
            return Err(GeomError::InvalidSegment { start, end });
        }
        Ok(Self { carrier, start, end, start_closed, end_closed })
    }

    /// `L[alpha^start p, alpha^end p]`, or the open version.
    pub fn lightcone(anchor: CoverPoint, start: i64, end: i64, closed: bool) -> Result<Self> {
        Self::build(Carrier::Lightcone(anchor), start, end, closed, closed)
    }

    pub fn lightcone_half_open(
        anchor: CoverPoint,
        start: i64,
        end: i64,
        start_closed: bool,
        end_closed: bool,
    ) -> Result<Self> {
        Self::build(Carrier::Lightcone(anchor), start, end, start_closed, end_closed)
    }

    /// `Delta[alpha^start p, alpha^end p]` along `photon`, `p` its anchor.
    pub fn photon_segment(photon: LiftedPhoton, start: i64, end: i64, closed: bool) -> Result<Self> {
        Self::build(Carrier::Photon(photon), start, end, closed, closed)
    }

    pub fn anchor(&self) -> &CoverPoint {
        match &self.carrier {
            Carrier::Lightcone(p) => p,
            Carrier::Photon(ph) => ph.anchor(),
        }
    }

    pub fn endpoints(&self) -> (CoverPoint, CoverPoint) {
        let p = self.anchor();
        (alpha(p, self.start), alpha(p, self.end))
    }

    pub fn kind(&self) -> SegmentKind {
        match self.carrier {
            Carrier::Lightcone(_) => SegmentKind::Lightcone,
            Carrier::Photon(_) => SegmentKind::Photon,
        }
    }
}

pub fn on_segment(p: &CoverPoint, seg: &Segment, tol: f64) -> bool {
    let (a, b) = seg.endpoints();
    let on_carrier = match &seg.carrier {
        Carrier::Lightcone(v) => on_lifted_lightcone(p, v, tol),
        Carrier::Photon(ph) => ph.contains(p, tol),
    };
    if !on_carrier {
        return false;
    }
    let after = match relate_tol(&a, p, tol) {
        CausalRelation::Equal => seg.start_closed,
        rel => rel.is_causal(TimeDirection::Future),
    };
    let before = match relate_tol(&b, p, tol) {
        CausalRelation::Equal => seg.end_closed,
        rel => rel.is_causal(TimeDirection::Past),
    };
    after && before
}

/// The time-orientation field `(x_0 - x_{n+1})(e_1 - e_n) + (x_n - x_1)(e_0 - e_{n+1})`
/// at the unit representative of `p`.
pub fn time_orientation_field(ctx: &FormContext, p: &EinPoint) -> DVector<f64> {
    let n = ctx.n();
    let x = p.rep();
    let a = x[0] - x[n + 1];
    let b = x[n] - x[1];
    let mut v = DVector::zeros(n + 2);
    v[1] = a;
    v[n] = -a;
    v[0] = b;
    v[n + 1] = -b;
    v
}

/// `B(tangent, d/dtheta)`; negative means future-pointing.
pub fn time_orientation_pairing(ctx: &FormContext, p: &EinPoint, tangent: &AmbientVector) -> Result<f64> {
    ctx.bilinear(tangent, tangent)?;
    if p.dim() != ctx.ambient_dim() {
        return Err(GeomError::DimensionMismatch { expected: ctx.ambient_dim(), found: p.dim() });
    }
    let scale = tangent.norm().max(1.0);
    if ctx.form(tangent, p.rep()).abs() > ctx.tol() * scale {
        return Err(GeomError::NotTangent);
    }
    Ok(ctx.form(tangent, &time_orientation_field(ctx, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(x: &[f64], t: f64) -> CoverPoint {
        CoverPoint::from_slice(x, t).unwrap()
    }

    #[test]
    fn relation_examples() {
        let p = pt(&[0.3, 0.4, 0.5, 0.1], 0.2);
        assert_eq!(relate(&p, &alpha(&p, 1)), CausalRelation::Null(TimeDirection::Future));
        let later = CoverPoint::new(p.x().clone(), p.theta() + 1.0).unwrap();
        assert_eq!(relate(&p, &later), CausalRelation::Chronological(TimeDirection::Future));
        let earlier = CoverPoint::new(p.x().clone(), p.theta() - 1.0).unwrap();
        assert_eq!(relate(&p, &earlier), CausalRelation::Chronological(TimeDirection::Past));
        assert_eq!(relate(&p, &p), CausalRelation::Equal);
        let side = pt(&[-0.4, 0.3, 0.0, 0.0], 0.2);
        assert_eq!(relate(&p, &side), CausalRelation::Incomparable);
    }

    #[test]
    fn future_sets() {
        let p = pt(&[1.0, 0.0, 0.0], 0.0);
        let ap = alpha(&p, 1);
        assert!(in_future(&p, &ap, false, 1e-9));
        assert!(!in_future(&p, &ap, true, 1e-9));
        assert!(in_future(&p, &p, false, 1e-9));
        assert!(!in_future(&p, &p, true, 1e-9));
        assert!(in_past(&ap, &p, false, 1e-9));
    }

    #[test]
    fn min_patch_examples() {
        let base = pt(&[0.0, 1.0, 0.0], -0.5);
        let q = CoverPoint::new(base.x().clone(), base.theta() + PI).unwrap();
        assert!(in_min(&q, &base, MinSide::Plus, 1e-9));
        assert!(in_min(&q, &alpha(&base, 1), MinSide::Minus, 1e-9));
        assert!(!in_min(&base, &base, MinSide::Plus, 1e-9));
        assert!(!in_min(&base, &base, MinSide::Minus, 1e-9));
    }

    #[test]
    fn segment_endpoints_and_interior() {
        let ctx = FormContext::new(3).unwrap();
        let delta = LiftedPhoton::standard(&ctx);
        let closed = Segment::photon_segment(delta.clone(), 0, 1, true).unwrap();
        let open = Segment::photon_segment(delta.clone(), 0, 1, false).unwrap();
        let p0 = delta.vertex(0);
        assert!(on_segment(&p0, &closed, 1e-9));
        assert!(!on_segment(&p0, &open, 1e-9));
        let mid = delta.at_time(PI / 2.0);
        assert!(on_segment(&mid, &open, 1e-9));
        let lc = Segment::lightcone(p0.clone(), 0, 1, false).unwrap();
        assert!(on_segment(&mid, &lc, 1e-9));
        let inside = pt(&[1.0, 0.0, 0.0], PI);
        assert!(!on_segment(&inside, &lc, 1e-9));
        assert!(Segment::lightcone(p0, 1, 1, true).is_err());
    }

    #[test]
    fn pairing_rejects_non_tangent() {
        let ctx = FormContext::new(3).unwrap();
        let p = ctx.basis_point(4).unwrap();
        let v = AmbientVector::from_slice(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(time_orientation_pairing(&ctx, &p, &v), Err(GeomError::NotTangent));
    }
}
