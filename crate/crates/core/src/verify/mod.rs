//! Seeded numerical certification of the model's identities.
//!
//! Each check draws from its own ChaCha stream keyed by `(seed, name)`, so
//! checks can run in any order or concurrently without changing results.
//! Oracles here are written against the formulas directly and do not reuse
//! the code paths they check, except where a check is explicitly a
//! consistency test between two implementations.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cover::CoverPoint;
use crate::quadric::FormContext;
use crate::unipotent::UnipotentElement;
use crate::{GeomError, Result};

mod algebra;
mod case2;
mod case3;
mod fields;
mod flow;
mod order;

pub use algebra::{check_algebra, check_lift_homomorphism};
pub use case2::{case2_example, check_asymptotics, check_tiling, origin_minus, Case2Example};
pub use case3::{case3_example, check_properness, check_simply_transitive, rotation_spec};
pub use fields::check_vector_fields;
pub use flow::{check_essential_indicator, check_tau_limits, check_tau_matrix, check_tau_pairing};
pub use order::{check_causal_oracle, check_complement, check_min_boundary, check_min_patches};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Bound on `|j|` when scanning `alpha^j` translates or orbit indices.
    pub k_range: i64,
    /// Maximal word length in properness scans.
    pub word_ball: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { n: 3, samples: 10_000, seed: 0, tol: 1e-9, k_range: 2000, word_ball: 8 }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(GeomError::InvalidDimension(self.n));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(GeomError::InvalidTolerance(self.tol));
        }
        if self.samples == 0 {
            return Err(GeomError::InvalidDimension(0));
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn with_samples(&self, samples: usize) -> Self {
        Self { samples, ..self.clone() }
    }

    pub fn context(&self) -> Result<FormContext> {
        self.validate()?;
        FormContext::new(self.n)?.with_tol(self.tol)
    }

    /// Boundary band used for skipping near-degenerate samples.
    pub fn band(&self) -> f64 {
        10.0 * self.tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    /// The statement being certified.
    pub paper_anchor: String,
    pub n: usize,
    pub samples: usize,
    pub failures: usize,
    pub skipped: usize,
    pub max_residual: f64,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    // wall-clock time would make reports differ run to run
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn new(name: &str, anchor: &str, cfg: &SampleConfig) -> Self {
        Self {
            name: name.into(),
            paper_anchor: anchor.into(),
            n: cfg.n,
            samples: 0,
            failures: 0,
            skipped: 0,
            max_residual: 0.0,
            seed: cfg.seed,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.max_residual.is_finite()
    }

    pub fn skipped_fraction(&self) -> f64 {
        let total = self.samples + self.skipped;
        if total == 0 {
            0.0
        } else {
            self.skipped as f64 / total as f64
        }
    }

    /// Counts one evaluated sample.
    pub fn record(&mut self, ok: bool) {
        self.samples += 1;
        if !ok {
            self.failures += 1;
        }
    }

    /// Tracks `r` in `max_residual` and returns whether it is within `limit`.
    pub fn residual(&mut self, r: f64, limit: f64) -> bool {
        if r.is_nan() {
            self.max_residual = f64::NAN;
            return false;
        }
        if r > self.max_residual {
            self.max_residual = r;
        }
        r <= limit
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    /// Folds a sub-check into this report.
    pub fn absorb(&mut self, other: CheckReport) {
        self.samples += other.samples;
        self.failures += other.failures;
        self.skipped += other.skipped;
        if other.max_residual.is_nan() || other.max_residual > self.max_residual {
            self.max_residual = other.max_residual;
        }
        for (k, v) in other.metrics {
            self.metrics.insert(format!("{}.{k}", other.name), v);
        }
        self.notes.extend(other.notes.into_iter().map(|s| format!("{}: {s}", other.name)));
    }
}

pub(crate) fn timed(f: impl FnOnce() -> Result<CheckReport>) -> Result<CheckReport> {
    let start = Instant::now();
    let mut report = f()?;
    report.elapsed = start.elapsed();
    Ok(report)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// The RNG stream of the check `name`.
pub fn stream(cfg: &SampleConfig, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ fnv1a(name))
}

pub(crate) fn gaussian(rng: &mut impl Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

pub(crate) fn sphere(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = gaussian(rng, n);
        let r = v.norm();
        if r > 1e-6 {
            return v / r;
        }
    }
}

/// Uniform on `S^{n-1}` times uniform `theta` in `[-3 pi, 3 pi]`.
pub(crate) fn cover_point(rng: &mut impl Rng, n: usize) -> CoverPoint {
    let theta = rng.gen_range(-3.0 * PI..3.0 * PI);
    CoverPoint::new(sphere(rng, n), theta).expect("unit vector")
}

pub(crate) fn element(rng: &mut impl Rng, ctx: &FormContext, scale: f64) -> UnipotentElement {
    let n = ctx.n();
    let w = gaussian(rng, n - 2) * scale;
    let u = gaussian(rng, n) * scale;
    UnipotentElement::from_affine(ctx, &w, &u).expect("dimensions match")
}

pub(crate) fn base_point(n: usize) -> CoverPoint {
    let mut x = DVector::zeros(n);
    x[0] = 1.0;
    CoverPoint::new(x, 0.0).expect("unit vector")
}
