//! Holonomy data for the four cases of the classification, and the case-2
//! fundamental domain `D = J^+(q_0) ∩ I^-(alpha gamma q_0)`.

use nalgebra::{DMatrix, DVector};

use super::{
    act, commutator_values, rational_gcd, real_eigenvalues, theta_endomorphism, HeisenbergSpec,
    LiftedElement, UnipotentElement,
};
use crate::causal::{relate_tol, CausalRelation, TimeDirection};
use crate::cover::CoverPoint;
use crate::quadric::{FormContext, MinkowskiVector};
use crate::{quadric::CausalType, GeomError, Result};

/// Case-3 data beyond the lattice generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Case3Data {
    /// The Heisenberg hull of the lattice.
    pub hull: HeisenbergSpec,
    /// The fiber element `alpha^i g_D`.
    pub fiber: LiftedElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyCaseSpec {
    pub case: u8,
    pub generators: Vec<LiftedElement>,
    pub case3: Option<Case3Data>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Condition {
    pub name: String,
    /// The statement being tested.
    pub anchor: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CaseReport {
    pub case: u8,
    pub conditions: Vec<Condition>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        !self.conditions.is_empty() && self.conditions.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, anchor: &str, passed: bool, detail: impl Into<String>) {
        self.conditions.push(Condition {
            name: name.into(),
            anchor: anchor.into(),
            passed,
            detail: detail.into(),
        });
    }
}

// Relative size below which D(g) and ell(g) count as zero.
const ZERO_TOL: f64 = 1e-9;

fn scale_of(g: &UnipotentElement) -> f64 {
    g.translation_part().amax().max(g.ell().amax()).max(1.0)
}

fn in_ker_d(g: &UnipotentElement) -> bool {
    g.dee().abs() <= ZERO_TOL * scale_of(g)
}

fn is_central(g: &UnipotentElement) -> bool {
    let s = scale_of(g);
    g.ell().amax() <= ZERO_TOL * s && g.u_bar().amax() <= ZERO_TOL * s && in_ker_d(g)
}

pub fn case_check(ctx: &FormContext, spec: &HolonomyCaseSpec) -> CaseReport {
    let mut report = CaseReport { case: spec.case, conditions: Vec::new() };
    match spec.case {
        1 => check_case1(spec, &mut report),
        2 => check_case2(ctx, spec, &mut report),
        3 => check_case3(ctx, spec, &mut report),
        4 => check_case4(spec, &mut report),
        other => report.push("case", "one of cases 1-4", false, format!("unknown case {other}")),
    }
    report
}

fn check_case1(spec: &HolonomyCaseSpec, report: &mut CaseReport) {
    let count = spec.generators.len();
    report.push("single generator", "Gamma is cyclic", count == 1, format!("{count} generators"));
    if let Some(g) = spec.generators.first() {
        report.push(
            "alpha power nonzero",
            "generator alpha^i g with i != 0",
            g.alpha_power != 0,
            format!("i = {}", g.alpha_power),
        );
    }
}

fn check_case2(ctx: &FormContext, spec: &HolonomyCaseSpec, report: &mut CaseReport) {
    let count = spec.generators.len();
    report.push("single generator", "Gamma is cyclic", count == 1, format!("{count} generators"));
    let Some(g) = spec.generators.first() else { return };
    report.push(
        "in identity component",
        "generator lies in the identity component of the lifted group",
        g.alpha_power == 0,
        format!("i = {}", g.alpha_power),
    );
    let body = &g.body;
    report.push(
        "u nontrivial mod e_1^perp",
        "u_gamma is nontrivial modulo e_1^perp",
        !in_ker_d(body),
        format!("<e_1, u> = {:e}", body.dee()),
    );
    if body.ell().amax() <= ZERO_TOL * scale_of(body) {
        let u = MinkowskiVector::new(body.translation_part().clone()).expect("finite");
        let kind = ctx.causal_type(&u).expect("dimension");
        report.push(
            "timelike translation",
            "if L = Id then u_gamma is timelike",
            kind == CausalType::Timelike,
            format!("{kind:?}, q(u) = {:e}", ctx.minkowski_form(&u, &u)),
        );
    }
}

fn check_case4(spec: &HolonomyCaseSpec, report: &mut CaseReport) {
    report.push(
        "nonempty",
        "at least one generator",
        !spec.generators.is_empty(),
        format!("{} generators", spec.generators.len()),
    );
    let bad: Vec<i64> = spec.generators.iter().map(|g| g.alpha_power).filter(|i| *i != 0).collect();
    report.push(
        "acts through a Minkowski patch",
        "all generators lie in the identity component",
        bad.is_empty(),
        format!("nonzero alpha powers: {bad:?}"),
    );
}

fn check_case3(ctx: &FormContext, spec: &HolonomyCaseSpec, report: &mut CaseReport) {
    let n = ctx.n();
    report.push("n even", "n = 2k + 2", n % 2 == 0, format!("n = {n}"));
    let Some(data) = &spec.case3 else {
        report.push("case-3 data", "Heisenberg hull and fiber element supplied", false, "missing");
        return;
    };
    report.push(
        "hull dimension",
        "n = 2k + 2",
        data.hull.n() == n,
        format!("k = {}, n = {n}", data.hull.k()),
    );
    let bodies: Vec<UnipotentElement> = spec.generators.iter().map(|g| g.body.clone()).collect();
    let in_kernel = spec.generators.iter().all(|g| g.alpha_power == 0 && in_ker_d(&g.body));
    report.push(
        "lattice in ker D",
        "lattice generators lie in ker(D o q) within the identity component",
        in_kernel,
        format!("{} generators", bodies.len()),
    );
    match theta_endomorphism(&bodies) {
        Ok(theta) => {
            let err = (&theta - data.hull.theta()).norm();
            report.push(
                "hull matches",
                "u_h = theta(ell_h) on the lattice",
                err <= 1e-8 * data.hull.theta().norm().max(1.0),
                format!("|theta - theta_hull| = {err:e}"),
            );
        }
        Err(e) => report.push("hull matches", "u_h = theta(ell_h) on the lattice", false, e.to_string()),
    }
    let real = real_eigenvalues(data.hull.theta(), 1e-9);
    report.push(
        "no real eigenvalues",
        "theta has no real eigenvalues",
        real.is_empty(),
        format!("real eigenvalues: {real:?}"),
    );
    report.push(
        "fiber alpha power",
        "fiber generator alpha^i g_D with i != 0",
        data.fiber.alpha_power != 0,
        format!("i = {}", data.fiber.alpha_power),
    );
    report.push(
        "fiber in ker D",
        "g_D in ker(D o q)",
        in_ker_d(&data.fiber.body),
        format!("D = {:e}", data.fiber.body.dee()),
    );
    let normalizes = LatticeModel::new(ctx, &bodies).and_then(|lattice| {
        let f = &data.fiber.body;
        let f_inv = f.inverse(ctx);
        for h in &bodies {
            for conj in [f.compose(ctx, h).compose(ctx, &f_inv), f_inv.compose(ctx, h).compose(ctx, f)] {
                if !lattice.contains(ctx, &conj) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    match normalizes {
        Ok(ok) => report.push(
            "fiber normalizes lattice",
            "conjugation by the fiber element preserves the lattice",
            ok,
            if ok { "all conjugates are lattice elements" } else { "a conjugate left the lattice" },
        ),
        Err(e) => report.push(
            "fiber normalizes lattice",
            "conjugation by the fiber element preserves the lattice",
            false,
            e.to_string(),
        ),
    }
}

/// A lattice of `H` presented by `2k` generators with independent `ell`
/// plus central translations along `e_1`.
#[derive(Clone, Debug)]
pub struct LatticeModel {
    basis: Vec<UnipotentElement>,
    ell_inv: DMatrix<f64>,
    /// Generator of the central subgroup (`0` if trivial).
    pub period: f64,
}

// Integer-coordinate tolerance for lattice membership.
const MEMBERSHIP_TOL: f64 = 1e-7;

impl LatticeModel {
    pub fn new(ctx: &FormContext, gens: &[UnipotentElement]) -> Result<Self> {
        let m = ctx.n() - 2;
        let (central, basis): (Vec<_>, Vec<_>) = gens.iter().cloned().partition(is_central);
        if basis.len() != m {
            return Err(GeomError::NotSpanning);
        }
        let ell = DMatrix::from_columns(&basis.iter().map(|g| g.ell().clone()).collect::<Vec<_>>());
        let ell_inv = ell.try_inverse().ok_or(GeomError::NotSpanning)?;
        let mut values: Vec<f64> = central.iter().map(|g| g.translation_part()[0]).collect();
        values.extend(commutator_values(&basis)?.iter().copied());
        let period = rational_gcd(values)
            .ok_or_else(|| GeomError::NonIntegral("central values are incommensurable".into()))?;
        Ok(Self { basis, ell_inv, period })
    }

    /// Integer coordinates of `ell(g)` in the lattice basis, if integral.
    pub fn coordinates(&self, g: &UnipotentElement) -> Option<Vec<i64>> {
        let a: DVector<f64> = &self.ell_inv * g.ell();
        a.iter()
            .map(|c| ((c - c.round()).abs() <= MEMBERSHIP_TOL).then_some(c.round() as i64))
            .collect()
    }

    pub fn contains(&self, ctx: &FormContext, g: &UnipotentElement) -> bool {
        let Some(coords) = self.coordinates(g) else { return false };
        let mut word = UnipotentElement::identity(ctx);
        for (b, c) in self.basis.iter().zip(&coords) {
            word = word.compose(ctx, &b.pow(ctx, *c));
        }
        let rest = word.inverse(ctx).compose(ctx, g);
        if !is_central(&rest) {
            return false;
        }
        let s = rest.translation_part()[0];
        if self.period == 0.0 {
            return s.abs() <= MEMBERSHIP_TOL;
        }
        let r = s / self.period;
        (r - r.round()).abs() <= MEMBERSHIP_TOL * r.abs().max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum DomainMembership {
    Interior,
    Boundary,
    Outside,
}

/// Membership in `D = J^+(q_0) ∩ I^-(alpha gamma q_0)`; points within `tol`
/// of either boundary hypersurface are reported as boundary.
pub fn fundamental_domain_contains(
    ctx: &FormContext,
    q0: &CoverPoint,
    gamma: &LiftedElement,
    x: &CoverPoint,
    tol: f64,
) -> Result<DomainMembership> {
    let top = act(ctx, &LiftedElement::new(gamma.alpha_power + 1, gamma.body.clone()), q0)?;
    Ok(domain_membership(q0, &top, x, tol))
}

/// Membership in `J^+(bottom) ∩ I^-(top)` with a boundary band.
pub fn domain_membership(bottom: &CoverPoint, top: &CoverPoint, x: &CoverPoint, tol: f64) -> DomainMembership {
    use CausalRelation::*;
    use TimeDirection::*;
    let below = relate_tol(bottom, x, tol);
    let above = relate_tol(x, top, tol);
    let lower = match below {
        Chronological(Future) => Some(true),
        Null(Future) | Equal => Some(false),
        _ => None,
    };
    let upper = match above {
        Chronological(Future) => Some(true),
        Null(Future) | Equal => Some(false),
        _ => None,
    };
    match (lower, upper) {
        (Some(true), Some(true)) => DomainMembership::Interior,
        (Some(_), Some(_)) => DomainMembership::Boundary,
        _ => DomainMembership::Outside,
    }
}

/// Replaces `gamma` by the shortest power `gamma^{±k}` with `q_0 << gamma^{±k} q_0`.
pub fn normalize_case2(
    ctx: &FormContext,
    gamma: &LiftedElement,
    q0: &CoverPoint,
    max_power: i64,
) -> Result<(LiftedElement, i64)> {
    for k in 1..=max_power {
        for sign in [1, -1] {
            let g = gamma.pow(ctx, sign * k);
            let image = act(ctx, &g, q0)?;
            if relate_tol(q0, &image, ctx.tol()) == CausalRelation::Chronological(TimeDirection::Future) {
                return Ok((g, sign * k));
            }
        }
    }
    Err(GeomError::DegenerateGamma(format!("no power up to {max_power} moves q_0 to its future")))
}
