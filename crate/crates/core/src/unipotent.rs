//! The maximal unipotent subgroup `U` of `O(n,2)` fixing the flag
//! `[e_0] ⊂ P(span{e_0, e_1}) ⊂ L([e_0])`, and its lift to the universal cover.
//!
//! In the Minkowski chart every element is affine, `x -> L x + u`, with
//! linear part
//!
//! ```text
//! L_w x = x - x_n w + (<x, w> - x_n |w|^2 / 2) e_1,     w ∈ span{e_2, .., e_{n-1}}
//! ```
//!
//! and matrix `[[1, -u^T J L, -q(u)/2], [0, L, u], [0, 0, 1]]` (`J` the Gram
//! matrix of `q_{n-1,1}`). `ell(g) = w` and `D(g) = <e_1, u> = u_n` are
//! homomorphisms. The center is the null translation flow `tau^s`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::cover::{
    alpha, lift_near, patch_index, principal_lift, project_vector, CoverPoint, LiftedPhoton,
    PatchRegion,
};
use crate::quadric::{EinPoint, FormContext};
use crate::{GeomError, Result};

mod holonomy;
pub use holonomy::*;

// Structural residual allowed when reading an element back from a matrix.
const STRUCTURE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct UnipotentElement {
    mat: DMatrix<f64>,
    lin: DMatrix<f64>,
    u: DVector<f64>,
    ell: DVector<f64>,
    dee: f64,
}

fn linear_part(ctx: &FormContext, w: &DVector<f64>) -> DMatrix<f64> {
    let n = ctx.n();
    let w2 = w.norm_squared();
    // columns are L e_j in chart indices 0..n (x_1 .. x_n)
    let mut l = DMatrix::identity(n, n);
    for (j, wj) in w.iter().enumerate() {
        l[(0, j + 1)] = *wj;
    }
    for (j, wj) in w.iter().enumerate() {
        l[(j + 1, n - 1)] = -wj;
    }
    l[(0, n - 1)] = -w2 / 2.0;
    l
}

impl UnipotentElement {
    /// The element acting on the chart by `x -> L_w x + u`.
    pub fn from_affine(ctx: &FormContext, w: &DVector<f64>, u: &DVector<f64>) -> Result<Self> {
        let n = ctx.n();
        if w.len() != n - 2 {
            return Err(GeomError::DimensionMismatch { expected: n - 2, found: w.len() });
        }
        if u.len() != n {
            return Err(GeomError::DimensionMismatch { expected: n, found: u.len() });
        }
        if w.iter().chain(u.iter()).any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let lin = linear_part(ctx, w);
        let mut mat = DMatrix::identity(n + 2, n + 2);
        mat.view_mut((1, 1), (n, n)).copy_from(&lin);
        mat.view_mut((1, n + 1), (n, 1)).copy_from(u);
        for j in 0..n {
            // -<u, L e_j>
            mat[(0, j + 1)] = -ctx.minkowski_form(u, &lin.column(j).into_owned());
        }
        mat[(0, n + 1)] = -0.5 * ctx.minkowski_form(u, u);
        Ok(Self { mat, lin, u: u.clone(), ell: w.clone(), dee: u[n - 1] })
    }

    pub fn identity(ctx: &FormContext) -> Self {
        let n = ctx.n();
        Self::from_affine(ctx, &DVector::zeros(n - 2), &DVector::zeros(n)).expect("identity")
    }

    pub fn translation(ctx: &FormContext, u: &DVector<f64>) -> Result<Self> {
        Self::from_affine(ctx, &DVector::zeros(ctx.n() - 2), u)
    }

    /// Reads the affine data back from a matrix, rejecting anything outside `U`.
    pub fn from_matrix(ctx: &FormContext, mat: DMatrix<f64>) -> Result<Self> {
        let d = ctx.ambient_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(GeomError::DimensionMismatch { expected: d, found: mat.nrows() });
        }
        if mat.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let scale = mat.norm().max(1.0);
        let q = ctx.gram();
        let iso = (mat.transpose() * &q * &mat - &q).norm();
        if iso > STRUCTURE_TOL * scale * scale {
            return Err(GeomError::NotUnipotent(format!("does not preserve the form ({iso:e})")));
        }
        let g = Self::from_matrix_unchecked(ctx, mat);
        let expected = Self::from_affine(ctx, &g.ell, &g.u)?;
        let off = (&expected.mat - &g.mat).norm();
        if off > STRUCTURE_TOL * scale {
            return Err(GeomError::NotUnipotent(format!("not in the flag group ({off:e})")));
        }
        Ok(expected)
    }

    fn from_matrix_unchecked(ctx: &FormContext, mat: DMatrix<f64>) -> Self {
        let n = ctx.n();
        let lin = mat.view((1, 1), (n, n)).into_owned();
        let u = mat.view((1, n + 1), (n, 1)).column(0).into_owned();
        let ell = DVector::from_fn(n - 2, |j, _| -lin[(j + 1, n - 1)]);
        let dee = u[n - 1];
        Self { mat, lin, u, ell, dee }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.lin
    }

    pub fn translation_part(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn ell(&self) -> &DVector<f64> {
        &self.ell
    }

    pub fn dee(&self) -> f64 {
        self.dee
    }

    /// `u` restricted to `V = e_1^⊥ / R e_1`, i.e. coordinates `2 .. n-1`.
    pub fn u_bar(&self) -> DVector<f64> {
        let n = self.u.len();
        self.u.rows(1, n - 2).into_owned()
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn compose(&self, ctx: &FormContext, other: &Self) -> Self {
        Self::from_matrix_unchecked(ctx, &self.mat * &other.mat)
    }

    /// `M^{-1} = Q M^T Q`, exact for elements of `O(n,2)`.
    pub fn inverse(&self, ctx: &FormContext) -> Self {
        let q = ctx.gram();
        Self::from_matrix_unchecked(ctx, &q * self.mat.transpose() * &q)
    }

    /// Nilpotent logarithm; the series terminates after `n+1` terms.
    pub fn log(&self) -> DMatrix<f64> {
        let d = self.mat.nrows();
        let nil = &self.mat - DMatrix::<f64>::identity(d, d);
        let mut term = nil.clone();
        let mut out = DMatrix::zeros(d, d);
        for k in 1..d {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            out += &term * (sign / k as f64);
            term = &term * &nil;
        }
        out
    }

    /// `exp(t log g)`, defined for real `t`.
    pub fn power(&self, ctx: &FormContext, t: f64) -> Self {
        Self::from_matrix_unchecked(ctx, nilpotent_exp(&(self.log() * t)))
    }

    pub fn pow(&self, ctx: &FormContext, i: i64) -> Self {
        self.power(ctx, i as f64)
    }

    /// Chart action `x -> L x + u`.
    pub fn apply_chart(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.lin * x + &self.u
    }

    pub fn act_ein(&self, p: &EinPoint) -> EinPoint {
        EinPoint::from_null_vector(&self.mat * p.rep()).expect("invertible matrix")
    }
}

pub fn nilpotent_exp(x: &DMatrix<f64>) -> DMatrix<f64> {
    let d = x.nrows();
    let mut out = DMatrix::identity(d, d);
    let mut term = DMatrix::identity(d, d);
    for k in 1..d {
        term = &term * x / k as f64;
        out += &term;
    }
    out
}

/// Translation part of `g h g^-1 h^-1`: `(L_g - I) u_h - (L_h - I) u_g`.
pub fn commutator_translation(g: &UnipotentElement, h: &UnipotentElement) -> DVector<f64> {
    let n = g.n();
    let id = DMatrix::<f64>::identity(n, n);
    (&g.lin - &id) * &h.u - (&h.lin - &id) * &g.u
}

pub fn commutator(ctx: &FormContext, g: &UnipotentElement, h: &UnipotentElement) -> UnipotentElement {
    g.compose(ctx, h).compose(ctx, &g.inverse(ctx)).compose(ctx, &h.inverse(ctx))
}

/// The central flow `tau^s`, acting on the chart as translation by `-s e_1`.
pub fn tau(ctx: &FormContext, s: f64) -> UnipotentElement {
    let mut u = DVector::zeros(ctx.n());
    u[0] = -s;
    UnipotentElement::translation(ctx, &u).expect("finite translation")
}

/// Generator `N` of the center: `N e_n = e_0`, `N e_{n+1} = -e_1`.
pub fn tau_generator(ctx: &FormContext) -> DMatrix<f64> {
    let n = ctx.n();
    let mut m = DMatrix::zeros(n + 2, n + 2);
    m[(0, n)] = 1.0;
    m[(1, n + 1)] = -1.0;
    m
}

/// `[x_0 + s x_n : x_1 - s x_{n+1} : x_2 : .. : x_{n+1}]`.
pub fn tau_point(ctx: &FormContext, s: f64, p: &EinPoint) -> EinPoint {
    let n = ctx.n();
    let mut v = p.rep().clone();
    v[0] += s * v[n];
    v[1] -= s * v[n + 1];
    EinPoint::from_null_vector(v).expect("invertible flow")
}

/// The vector field `Y_tau = x_n ∂_0 - x_{n+1} ∂_1` at the unit representative.
pub fn y_tau(ctx: &FormContext, p: &EinPoint) -> DVector<f64> {
    tau_generator(ctx) * p.rep()
}

/// An element of the full lift: `alpha^alpha_power` composed with the
/// canonical lift of `body` (the lift connected to the identity).
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedElement {
    pub alpha_power: i64,
    pub body: UnipotentElement,
}

impl LiftedElement {
    pub fn new(alpha_power: i64, body: UnipotentElement) -> Self {
        Self { alpha_power, body }
    }

    pub fn identity(ctx: &FormContext) -> Self {
        Self::new(0, UnipotentElement::identity(ctx))
    }

    /// `alpha` is central, so powers and products split.
    pub fn compose(&self, ctx: &FormContext, other: &Self) -> Self {
        Self::new(self.alpha_power + other.alpha_power, self.body.compose(ctx, &other.body))
    }

    pub fn inverse(&self, ctx: &FormContext) -> Self {
        Self::new(-self.alpha_power, self.body.inverse(ctx))
    }

    pub fn pow(&self, ctx: &FormContext, i: i64) -> Self {
        Self::new(self.alpha_power * i, self.body.pow(ctx, i))
    }
}

// Path continuation steps must move the lift by less than this.
const MAX_STEP_MOTION: f64 = PI / 4.0;
const MIN_STEP: f64 = 1e-12;
// Bound on the chordal motion of the normalized representative per half step.
const MAX_PROJECTIVE_STEP: f64 = 0.2;

/// Lifts `exp(t log g)` for `t ∈ [0, 1]` by continuity from `p`.
pub fn canonical_lift_act(ctx: &FormContext, g: &UnipotentElement, p: &CoverPoint) -> Result<CoverPoint> {
    if p.n() != ctx.n() {
        return Err(GeomError::DimensionMismatch { expected: ctx.n(), found: p.n() });
    }
    let x = g.log();
    // exp(tX) v = sum_k t^k/k! X^k v
    let d = ctx.ambient_dim();
    let mut powers = Vec::with_capacity(d);
    let mut v = project_vector(p);
    for _ in 0..d {
        let next = &x * &v;
        powers.push(v);
        v = next;
    }
    let raw = |t: f64| -> DVector<f64> {
        let mut out = DVector::zeros(d);
        let mut c = 1.0;
        for (k, pk) in powers.iter().enumerate() {
            if k > 0 {
                c *= t / k as f64;
            }
            out.axpy(c, pk, 1.0);
        }
        out
    };
    // chord between unit vectors, without identifying v and -v
    let chord = |a: &DVector<f64>, b: &DVector<f64>| (a.normalize() - b.normalize()).norm();
    let tol = ctx.tol();
    let mut current = p.clone();
    let mut t = 0.0;
    let mut h: f64 = 0.25;
    while t < 1.0 {
        let t1 = (t + h).min(1.0);
        let step = (|| -> Result<CoverPoint> {
            let (v0, vm, v1) = (raw(t), raw(0.5 * (t + t1)), raw(t1));
            // projectively a step can sweep almost a full photon and look
            // short; the representative path exp(tX) v never does
            if chord(&v0, &vm) > MAX_PROJECTIVE_STEP || chord(&vm, &v1) > MAX_PROJECTIVE_STEP {
                return Err(GeomError::StepFailure(t));
            }
            let (em, e1) = (EinPoint::from_null_vector(vm)?, EinPoint::from_null_vector(v1)?);
            let direct = lift_near(&e1, &current, tol)?;
            let mid = lift_near(&em, &current, tol)?;
            let via_mid = lift_near(&e1, &mid, tol)?;
            let motion = current.distance(&direct);
            if motion < MAX_STEP_MOTION && direct.approx_eq(&via_mid, 1e-9) {
                Ok(direct)
            } else {
                Err(GeomError::StepFailure(t))
            }
        })();
        match step {
            Ok(next) => {
                current = next;
                t = t1;
                h *= 2.0;
            }
            Err(_) => {
                h *= 0.5;
                if h < MIN_STEP {
                    return Err(GeomError::StepFailure(t));
                }
            }
        }
    }
    Ok(current)
}

/// Margin below which the patch shortcut defers to path continuation.
const PATCH_MARGIN: f64 = 1e-7;

/// The canonical lift fixes every `alpha^i p_0` and so preserves each patch
/// `Min^+(alpha^j p_0)`; inside a patch the action is the chart's affine map.
/// Returns `None` when `p` or its image is too close to the lightcone of `p_0`.
fn act_in_patch(g: &UnipotentElement, p: &CoverPoint, p0: &CoverPoint) -> Option<CoverPoint> {
    let j = patch_index(p, p0, PATCH_MARGIN).min_plus()?;
    let image = &g.mat * project_vector(p);
    let c0 = principal_lift(&image).ok()?;
    let j0 = patch_index(&c0, p0, PATCH_MARGIN).min_plus()?;
    Some(alpha(&c0, j - j0))
}

fn base_point(ctx: &FormContext) -> CoverPoint {
    let mut x = DVector::zeros(ctx.n());
    x[0] = 1.0;
    CoverPoint::new(x, 0.0).expect("unit vector")
}

/// Action of `alpha^i g` on the cover.
pub fn act(ctx: &FormContext, e: &LiftedElement, p: &CoverPoint) -> Result<CoverPoint> {
    let p0 = base_point(ctx);
    let moved = match act_in_patch(&e.body, p, &p0) {
        Some(q) => q,
        None => canonical_lift_act(ctx, &e.body, p)?,
    };
    Ok(alpha(&moved, e.alpha_power))
}

/// `gamma^i q_0`.
pub fn orbit(ctx: &FormContext, gamma: &LiftedElement, q0: &CoverPoint, i: i64) -> Result<CoverPoint> {
    act(ctx, &gamma.pow(ctx, i), q0)
}

/// `lim_{t -> +inf} tau^t p`, by the piecewise formula: a vertex `alpha^i p_0`
/// on the lightcone of `p_0`, otherwise the point of `Delta` over `rho_bar(p)`.
pub fn tau_limit(ctx: &FormContext, p: &CoverPoint, delta: &LiftedPhoton) -> Result<CoverPoint> {
    let standard = ctx.standard_photon();
    if standard.distance(&delta.base().point_at(0.0)) > ctx.tol()
        || standard.distance(&delta.base().point_at(PI / 2.0)) > ctx.tol()
    {
        return Err(GeomError::NonStandardPhoton);
    }
    let tol = ctx.tol();
    if delta.contains(p, tol) {
        return Err(GeomError::OnPhoton);
    }
    let anchor = delta.anchor();
    let idx = patch_index(p, anchor, tol);
    let i = idx.alpha_index() + 1;
    if let PatchRegion::LightconeShell { .. } = idx.region {
        return Ok(delta.vertex(i));
    }
    // p is in Min^-(alpha^i p_0); its limit lies on Delta(alpha^i p_0, alpha^{i+1} p_0)
    let e = crate::cover::project(p);
    let target = ctx.rho_bar(&standard, &e)?;
    let c0 = principal_lift(target.rep())?;
    let lo = anchor.theta() + i as f64 * PI;
    let k = ((lo - c0.theta()) / PI).ceil() as i64;
    let mut q = alpha(&c0, k);
    if q.theta() - lo <= tol {
        q = alpha(&q, 1);
    }
    Ok(q)
}

/// Solves `theta ell_h = u_bar_h` over elements of `ker D` whose `ell` span `V`.
pub fn theta_endomorphism(elements: &[UnipotentElement]) -> Result<DMatrix<f64>> {
    let first = elements.first().ok_or(GeomError::NotSpanning)?;
    let m = first.ell.len();
    let scale = elements
        .iter()
        .map(|g| g.u.amax().max(g.ell.amax()))
        .fold(1.0, f64::max);
    if elements.iter().any(|g| g.dee.abs() > 1e-9 * scale) {
        return Err(GeomError::NotInKerD);
    }
    let a = DMatrix::from_columns(&elements.iter().map(|g| g.ell.clone()).collect::<Vec<_>>());
    let b = DMatrix::from_columns(&elements.iter().map(|g| g.u_bar()).collect::<Vec<_>>());
    if a.clone().svd(false, false).rank(1e-10 * scale) < m {
        return Err(GeomError::NotSpanning);
    }
    // theta A = B  <=>  A^T theta^T = B^T
    let theta = svd_solve_rows(&a, &b)?;
    let residual = (&theta * &a - &b).norm();
    if residual > 1e-9 * scale {
        return Err(GeomError::Inconsistent(residual));
    }
    Ok(theta)
}

fn svd_solve_rows(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let at = a.transpose();
    let bt = b.transpose();
    let svd = at.svd(true, true);
    let sol = svd
        .solve(&bt, 1e-12)
        .map_err(|_| GeomError::NotSpanning)?;
    Ok(sol.transpose())
}

/// A Heisenberg hull: `n = 2k + 2` and an endomorphism `theta` of `V = R^{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergSpec {
    k: usize,
    theta: DMatrix<f64>,
}

impl HeisenbergSpec {
    pub fn new(k: usize, theta: DMatrix<f64>) -> Result<Self> {
        if k == 0 {
            return Err(GeomError::InvalidDimension(2));
        }
        if theta.nrows() != 2 * k || theta.ncols() != 2 * k {
            return Err(GeomError::DimensionMismatch { expected: 2 * k, found: theta.nrows() });
        }
        if theta.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        if theta.clone().svd(false, false).rank(1e-12 * theta.norm().max(1.0)) < 2 * k {
            return Err(GeomError::NotSpanning);
        }
        Ok(Self { k, theta })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn n(&self) -> usize {
        2 * self.k + 2
    }

    /// Real eigenvalues of `theta`; properness of `H` requires none.
    pub fn real_eigenvalues(&self, tol: f64) -> Vec<f64> {
        real_eigenvalues(&self.theta, tol)
    }
}

pub fn real_eigenvalues(m: &DMatrix<f64>, tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= tol * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn check_heisenberg_dim(ctx: &FormContext, spec: &HeisenbergSpec) -> Result<()> {
    if ctx.n() != spec.n() {
        return Err(GeomError::DimensionMismatch { expected: spec.n(), found: ctx.n() });
    }
    Ok(())
}

/// `(ell, u) = (w, theta w)` embedded with vanishing `e_1` and `e_n` components.
pub fn heisenberg_element(ctx: &FormContext, spec: &HeisenbergSpec, w: &DVector<f64>) -> Result<UnipotentElement> {
    check_heisenberg_dim(ctx, spec)?;
    let n = ctx.n();
    let tw = &spec.theta * w;
    let mut u = DVector::zeros(n);
    u.rows_mut(1, n - 2).copy_from(&tw);
    UnipotentElement::from_affine(ctx, w, &u)
}

/// Generators `g_j = (b_j, theta b_j)` of `H` followed by the central `tau^1`.
pub fn heisenberg_group(ctx: &FormContext, spec: &HeisenbergSpec) -> Result<Vec<UnipotentElement>> {
    check_heisenberg_dim(ctx, spec)?;
    let m = 2 * spec.k;
    let mut gens = Vec::with_capacity(m + 1);
    for j in 0..m {
        let mut b = DVector::zeros(m);
        b[j] = 1.0;
        gens.push(heisenberg_element(ctx, spec, &b)?);
    }
    gens.push(tau(ctx, 1.0));
    Ok(gens)
}

/// A lattice in `H`: generators `(scale b_j, scale theta b_j)` and the central
/// translation by `period e_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergLattice {
    pub generators: Vec<UnipotentElement>,
    pub central: UnipotentElement,
    pub scale: f64,
    /// Central period; commutators of generators are integer multiples of it.
    pub period: f64,
    /// `e_1`-coefficients of `[g_i, g_j]`.
    pub commutators: DMatrix<f64>,
    /// Positive generator of the group of commutator values (zero if all vanish).
    pub commutator_gcd: f64,
}

// Relative tolerance for "is an integer" on commutator values.
const INTEGRALITY_TOL: f64 = 1e-9;
const MAX_DENOMINATOR: i64 = 10_000;

/// The lattice generated by the scaled generators and the unit central
/// translation. Commutator values must be integers.
pub fn heisenberg_lattice(ctx: &FormContext, spec: &HeisenbergSpec, scale: f64) -> Result<HeisenbergLattice> {
    check_heisenberg_dim(ctx, spec)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(GeomError::NonIntegral(format!("scale must be positive, got {scale}")));
    }
    let m = 2 * spec.k;
    let generators = (0..m)
        .map(|j| {
            let mut b = DVector::zeros(m);
            b[j] = scale;
            heisenberg_element(ctx, spec, &b)
        })
        .collect::<Result<Vec<_>>>()?;
    let commutators = commutator_values(&generators)?;
    let period = 1.0;
    for c in commutators.iter() {
        if (c - c.round()).abs() > INTEGRALITY_TOL * c.abs().max(1.0) {
            return Err(GeomError::NonIntegral(format!("commutator value {c} is not an integer")));
        }
    }
    let commutator_gcd = rational_gcd(commutators.iter().copied())
        .ok_or_else(|| GeomError::NonIntegral("commutator values are incommensurable".into()))?;
    let mut u = DVector::zeros(ctx.n());
    u[0] = period;
    let central = UnipotentElement::translation(ctx, &u)?;
    Ok(HeisenbergLattice { generators, central, scale, period, commutators, commutator_gcd })
}

/// `e_1`-coefficients of pairwise commutators, which must be central.
pub fn commutator_values(gens: &[UnipotentElement]) -> Result<DMatrix<f64>> {
    let m = gens.len();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let t = commutator_translation(&gens[i], &gens[j]);
            let off = t.rows(1, t.len() - 1).amax();
            if off > 1e-9 * t.amax().max(1.0) {
                return Err(GeomError::Inconsistent(off));
            }
            out[(i, j)] = t[0];
        }
    }
    Ok(out)
}

/// Largest `c > 0` with every value in `c Z`, for values commensurable with
/// small denominators; `Some(0)` if all values vanish.
pub fn rational_gcd(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let vals: Vec<f64> = values.into_iter().map(f64::abs).filter(|v| *v > 0.0).collect();
    let Some(base) = vals.iter().copied().reduce(f64::min) else {
        return Some(0.0);
    };
    // write each v = base * p/q and take base / lcm(q) * gcd(p)
    let mut fracs = Vec::with_capacity(vals.len());
    for v in &vals {
        fracs.push(best_rational(v / base)?);
    }
    let l = fracs.iter().fold(1i64, |acc, (_, q)| lcm(acc, *q));
    let g = fracs.iter().fold(0i64, |acc, (p, q)| gcd(acc, p * (l / q)));
    let c = base * g as f64 / l as f64;
    vals.iter()
        .all(|v| {
            let r = v / c;
            (r - r.round()).abs() <= INTEGRALITY_TOL * r.max(1.0)
        })
        .then_some(c)
}

fn best_rational(x: f64) -> Option<(i64, i64)> {
    (1..=MAX_DENOMINATOR).find_map(|q| {
        let p = (x * q as f64).round();
        ((x * q as f64 - p).abs() <= INTEGRALITY_TOL * x.max(1.0) * q as f64).then_some((p as i64, q))
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}
