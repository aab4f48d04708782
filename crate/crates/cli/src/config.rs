use std::path::Path;

use anyhow::{bail, ensure, Context};
use einkit_core::quadric::FormContext;
use einkit_core::unipotent::{heisenberg_lattice, HeisenbergSpec, LiftedElement, UnipotentElement};
use einkit_core::unipotent::{Case3Data, HolonomyCaseSpec};
use einkit_core::verify::SampleConfig;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const SEED_VAR: &str = "EINKIT_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default)]
    pub alpha_power: i64,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeisenbergConfig {
    pub k: usize,
    /// Row-major `2k x 2k`.
    pub theta: Vec<Vec<f64>>,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    #[serde(default)]
    pub case: Option<u8>,
    #[serde(default)]
    pub generators: Vec<GeneratorConfig>,
    #[serde(default)]
    pub heisenberg: Option<HeisenbergConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_samples() -> usize {
    10_000
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            case: None,
            generators: Vec::new(),
            heisenberg: None,
            seed: 0,
            samples: default_samples(),
            tol: default_tol(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates `path`, then applies `EINKIT_SEED` if set.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text)?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> anyhow::Result<()> {
        if let Ok(s) = std::env::var(SEED_VAR) {
            self.seed = s.trim().parse().with_context(|| format!("{SEED_VAR}={s:?} is not an unsigned integer"))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let n = self.n;
        ensure!(n >= 3, "n must be at least 3, got {n}");
        ensure!(self.samples > 0, "samples must be positive");
        ensure!(self.tol.is_finite() && self.tol > 0.0, "tol must be positive and finite, got {}", self.tol);
        if let Some(c) = self.case {
            ensure!((1..=4).contains(&c), "case must be 1-4, got {c}");
        }
        for (i, g) in self.generators.iter().enumerate() {
            ensure!(g.w.len() == n - 2, "generator {i}: w has length {}, expected {}", g.w.len(), n - 2);
            ensure!(g.u.len() == n, "generator {i}: u has length {}, expected {n}", g.u.len());
            ensure!(g.w.iter().chain(&g.u).all(|v| v.is_finite()), "generator {i}: non-finite entry");
        }
        if let Some(h) = &self.heisenberg {
            let m = 2 * h.k;
            ensure!(h.k >= 1, "heisenberg.k must be at least 1");
            ensure!(
                h.theta.len() == m && h.theta.iter().all(|row| row.len() == m),
                "heisenberg.theta must be {m}x{m}"
            );
            ensure!(h.theta.iter().flatten().all(|v| v.is_finite()), "heisenberg.theta has a non-finite entry");
            ensure!(h.scale.is_finite() && h.scale > 0.0, "heisenberg.scale must be positive");
        }
        Ok(())
    }

    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig { n: self.n, samples: self.samples, seed: self.seed, tol: self.tol, ..SampleConfig::default() }
    }

    pub fn context(&self) -> anyhow::Result<FormContext> {
        Ok(FormContext::new(self.n)?.with_tol(self.tol)?)
    }

    pub fn lifted_generators(&self, ctx: &FormContext) -> anyhow::Result<Vec<LiftedElement>> {
        self.generators
            .iter()
            .map(|g| {
                let body = UnipotentElement::from_affine(
                    ctx,
                    &DVector::from_column_slice(&g.w),
                    &DVector::from_column_slice(&g.u),
                )?;
                Ok(LiftedElement::new(g.alpha_power, body))
            })
            .collect()
    }

    pub fn hull(&self) -> anyhow::Result<Option<HeisenbergSpec>> {
        let Some(h) = &self.heisenberg else { return Ok(None) };
        let m = 2 * h.k;
        let theta = DMatrix::from_fn(m, m, |i, j| h.theta[i][j]);
        Ok(Some(HeisenbergSpec::new(h.k, theta)?))
    }

    /// The holonomy data declared by the config.
    ///
    /// For case 3, generators with `alpha_power = 0` are the lattice and the
    /// first one with `alpha_power != 0` is the fiber element (default
    /// `alpha`). An empty lattice is filled from `heisenberg` when its
    /// dimension matches `n`.
    pub fn case_spec(&self, ctx: &FormContext) -> anyhow::Result<HolonomyCaseSpec> {
        let Some(case) = self.case else { bail!("config does not declare a case") };
        let generators = self.lifted_generators(ctx)?;
        if case != 3 {
            return Ok(HolonomyCaseSpec { case, generators, case3: None });
        }
        let (mut lattice, fibers): (Vec<_>, Vec<_>) = generators.into_iter().partition(|g| g.alpha_power == 0);
        let fiber = fibers.into_iter().next().unwrap_or_else(|| LiftedElement::new(1, UnipotentElement::identity(ctx)));
        let case3 = match self.hull()? {
            Some(hull) => {
                if lattice.is_empty() && hull.n() == ctx.n() {
                    let scale = self.heisenberg.as_ref().map_or(1.0, |h| h.scale);
                    let l = heisenberg_lattice(ctx, &hull, scale)?;
                    lattice = l.generators.into_iter().chain([l.central]).map(|g| LiftedElement::new(0, g)).collect();
                }
                Some(Case3Data { hull, fiber })
            }
            None => None,
        };
        Ok(HolonomyCaseSpec { case, generators: lattice, case3 })
    }
}
