use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backgrounds::Potential;
use crate::canonical::{ClosedForm, Variant};
use crate::geometry::Backend;
use crate::quadrature::BallGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    RicciSolitonResidual,
    McfSolitonResidual,
    ChristoffelCrosscheck,
    HarnackLimits,
    LottMatch,
    Functionals,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::RicciSolitonResidual,
        Suite::McfSolitonResidual,
        Suite::ChristoffelCrosscheck,
        Suite::HarnackLimits,
        Suite::LottMatch,
        Suite::Functionals,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::RicciSolitonResidual => "ricci_soliton_residual",
            Suite::McfSolitonResidual => "mcf_soliton_residual",
            Suite::ChristoffelCrosscheck => "christoffel_crosscheck",
            Suite::HarnackLimits => "harnack_limits",
            Suite::LottMatch => "lott_match",
            Suite::Functionals => "functionals",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::RicciSolitonResidual => "N·|E_N| of the canonical metric across the N list",
            Suite::McfSolitonResidual => "N·|Ě_N| of the space-time track across the N list",
            Suite::ChristoffelCrosscheck => "engine Christoffels (and track h^Σ) against closed forms",
            Suite::HarnackLimits => "lifted Ricci and track h^Σ against their N → ∞ limits",
            Suite::LottMatch => "limit second fundamental form against Lott's boundary integrand",
            Suite::Functionals => "I_∞ and I_GHY on a coordinate ball under grid refinement",
        }
    }
}

/// A named model with free-form parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleSpec {
    /// Uniform in the model's sample box and in the time range.
    Random {
        count: usize,
        seed: u64,
        #[serde(default)]
        t_range: Option<[f64; 2]>,
    },
    /// Cell midpoints of a product grid; `dims` has one entry per chart
    /// coordinate and `t_count` time levels span the range.
    Grid {
        dims: Vec<usize>,
        t_count: usize,
        #[serde(default)]
        t_range: Option<[f64; 2]>,
    },
    /// Points `[t, coords...]`.
    Explicit { points: Vec<Vec<f64>> },
}

impl SampleSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            SampleSpec::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    fn t_range(&self) -> Option<[f64; 2]> {
        match self {
            SampleSpec::Random { t_range, .. } | SampleSpec::Grid { t_range, .. } => *t_range,
            SampleSpec::Explicit { .. } => None,
        }
    }

    /// Sample points `(t, coords)` in `box_`. Times default to
    /// `[0.1 · window, window]`; an explicit range must lie in `(0, limit]`.
    /// An empty sample is allowed and yields a report with no data.
    pub fn points(&self, box_: &[(f64, f64)], window: f64, limit: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        let [lo, hi] = match self.t_range() {
            Some(r) => r,
            None => [0.1 * window, window],
        };
        if !(lo > 0.0 && lo <= hi && hi <= limit) {
            return Err(Error::Config(format!(
                "time range [{lo}, {hi}] must lie in (0, {limit}]"
            )));
        }
        match self {
            SampleSpec::Random { count, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..*count)
                    .map(|_| {
                        let t = if lo == hi { lo } else { rng.random_range(lo..hi) };
                        let y = box_.iter().map(|&(a, b)| rng.random_range(a..b)).collect();
                        (t, y)
                    })
                    .collect())
            }
            SampleSpec::Grid { dims, t_count, .. } => {
                if dims.len() != box_.len() {
                    return Err(Error::Config(format!(
                        "grid has {} dims, chart has {}",
                        dims.len(),
                        box_.len()
                    )));
                }
                let times: Vec<f64> = (0..*t_count)
                    .map(|k| {
                        if *t_count == 1 {
                            hi
                        } else {
                            lo + (hi - lo) * k as f64 / (*t_count - 1) as f64
                        }
                    })
                    .collect();
                let mut cells: Vec<Vec<f64>> = vec![Vec::new()];
                for (&n, &(a, b)) in dims.iter().zip(box_) {
                    let h = (b - a) / n as f64;
                    cells = cells
                        .into_iter()
                        .flat_map(|c| {
                            (0..n).map(move |k| {
                                let mut c = c.clone();
                                c.push(a + (k as f64 + 0.5) * h);
                                c
                            })
                        })
                        .collect();
                }
                Ok(times
                    .iter()
                    .flat_map(|&t| cells.iter().map(move |c| (t, c.clone())))
                    .collect())
            }
            SampleSpec::Explicit { points } => {
                points
                    .iter()
                    .map(|p| {
                        if p.len() != box_.len() + 1 {
                            return Err(Error::Config(format!(
                                "explicit point {p:?} needs t plus {} coordinates",
                                box_.len()
                            )));
                        }
                        Ok((p[0], p[1..].to_vec()))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_format() -> Format {
    Format::Json
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on max/min of the N-scaled sup norms.
    pub ratio: f64,
    /// Accepted range of the error ratio when N doubles.
    pub halving: [f64; 2],
    /// Relative cross-check tolerance; defaults by backend.
    pub crosscheck: Option<f64>,
    /// Absolute tolerance of identity matches.
    pub matching: f64,
    /// Relative change allowed under grid refinement.
    pub refinement: f64,
    /// Values below this count as exact zeros.
    pub zero: f64,
    /// Points allowed to fail evaluation.
    pub max_point_errors: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ratio: 1.5,
            halving: [0.3, 0.7],
            crosscheck: None,
            matching: 1e-6,
            refinement: 1e-3,
            zero: 1e-12,
            max_point_errors: 0,
        }
    }
}

impl Tolerances {
    pub fn crosscheck_for(&self, backend: Backend) -> f64 {
        self.crosscheck.unwrap_or(match backend {
            Backend::Analytic => 1e-9,
            Backend::Fd => 1e-5,
        })
    }
}

/// Ball, potential and grid for the functionals suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionalSpec {
    pub radius: f64,
    pub center: Option<Vec<f64>>,
    pub potential: Potential,
    /// Background time of the snapshot (also the potential's time).
    pub t: f64,
    pub grid: BallGrid,
    /// Reference value for the refined `I_∞`.
    pub expected: Option<f64>,
}

impl Default for FunctionalSpec {
    fn default() -> Self {
        FunctionalSpec {
            radius: 1.0,
            center: None,
            potential: Potential::Zero,
            t: 1.0,
            grid: BallGrid::new(32, 32),
            expected: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub suite: Suite,
    #[serde(default)]
    pub variant: Option<Variant>,
    pub background: ModelSpec,
    #[serde(default)]
    pub mcf: Option<ModelSpec>,
    #[serde(default = "default_n_list", alias = "N_list")]
    pub n_list: Vec<f64>,
    #[serde(default = "default_sample")]
    pub sample: SampleSpec,
    #[serde(default)]
    pub backend: Backend,
    /// Closed form for the cross-check suite.
    #[serde(default = "default_form")]
    pub form: ClosedForm,
    /// Degree of the random potentials in the Lott suite.
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default)]
    pub functional: FunctionalSpec,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_n_list() -> Vec<f64> {
    vec![1e2, 1e3, 1e4]
}

fn default_sample() -> SampleSpec {
    SampleSpec::Random {
        count: 20,
        seed: 0,
        t_range: None,
    }
}

fn default_form() -> ClosedForm {
    ClosedForm::Printed
}

fn default_degree() -> u32 {
    3
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Config("N list is empty".into()));
        }
        if self.n_list.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
            return Err(Error::Config("N values must be positive".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("N list must be strictly ascending".into()));
        }
        let t = &self.tolerances;
        if !(t.halving[0] < t.halving[1]) {
            return Err(Error::Config("halving range is empty".into()));
        }
        Ok(())
    }

    pub(crate) fn require_variant(&self) -> Result<Variant> {
        self.variant
            .ok_or_else(|| Error::Config(format!("suite {} needs a variant", self.suite.as_str())))
    }

    pub(crate) fn require_mcf(&self) -> Result<&ModelSpec> {
        self.mcf
            .as_ref()
            .ok_or_else(|| Error::Config(format!("suite {} needs an mcf", self.suite.as_str())))
    }
}
