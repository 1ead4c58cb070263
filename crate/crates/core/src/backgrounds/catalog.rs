use std::f64::consts::PI;

use num_dual::DualNum;
use serde::Deserialize;

use super::{FlowDirection, GradientSolitonData, Potential, RicciFlowBackground, SolitonClass};
use crate::{Error, Result};

/// Width of the excluded band around coordinate singularities of polar
/// charts.
pub const POLE_MARGIN: f64 = 1e-2;

/// Closed-form backgrounds addressable by name.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogBackground {
    /// `g = δ` for all times.
    EuclideanStatic {
        dim: usize,
        direction: FlowDirection,
        horizon: f64,
    },
    /// `g = φ(t) g_{S^d}` in hyperspherical coordinates, with
    /// `φ = r0² − 2(d−1)t` forward and `φ = r0² + 2(d−1)τ` backward.
    RoundSphere {
        dim: usize,
        r0: f64,
        direction: FlowDirection,
        horizon: f64,
    },
    /// Euclidean space as a shrinking soliton with `f = |y|²/(4τ)`.
    GaussianShrinkerFlat { dim: usize, horizon: f64 },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BackgroundParams {
    #[serde(alias = "d")]
    dim: Option<usize>,
    r0: Option<f64>,
    direction: Option<FlowDirection>,
    #[serde(alias = "T")]
    horizon: Option<f64>,
}

pub const BACKGROUND_NAMES: [&str; 3] = ["euclidean_static", "round_sphere", "gaussian_shrinker_flat"];

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
    }
}

/// Builds a catalog background. `params` is a JSON object (or null) with the
/// optional keys `dim`, `r0`, `direction` and `horizon`.
pub fn model_background(name: &str, params: &serde_json::Value) -> Result<CatalogBackground> {
    let p: BackgroundParams = if params.is_null() {
        BackgroundParams::default()
    } else {
        serde_json::from_value(params.clone()).map_err(|e| Error::InvalidParams(e.to_string()))?
    };
    let dim = p.dim.unwrap_or(3);
    if dim == 0 {
        return Err(Error::InvalidParams("dim must be at least 1".into()));
    }
    match name {
        "euclidean_static" => {
            if p.r0.is_some() {
                return Err(Error::InvalidParams("euclidean_static takes no r0".into()));
            }
            Ok(CatalogBackground::EuclideanStatic {
                dim,
                direction: p.direction.unwrap_or(FlowDirection::Forward),
                horizon: positive("horizon", p.horizon.unwrap_or(1.0))?,
            })
        }
        "round_sphere" => {
            if dim < 2 {
                return Err(Error::InvalidParams("round_sphere needs dim ≥ 2".into()));
            }
            let r0 = positive("r0", p.r0.unwrap_or(1.0))?;
            let direction = p.direction.unwrap_or(FlowDirection::Forward);
            let horizon = match direction {
                FlowDirection::Forward => {
                    let singular = r0 * r0 / (2.0 * (dim as f64 - 1.0));
                    let h = positive("horizon", p.horizon.unwrap_or(0.8 * singular))?;
                    if h >= singular {
                        return Err(Error::InvalidParams(format!(
                            "horizon {h} reaches the extinction time {singular}"
                        )));
                    }
                    h
                }
                FlowDirection::Backward => positive("horizon", p.horizon.unwrap_or(1.0))?,
            };
            Ok(CatalogBackground::RoundSphere {
                dim,
                r0,
                direction,
                horizon,
            })
        }
        "gaussian_shrinker_flat" => {
            if p.r0.is_some() || p.direction == Some(FlowDirection::Forward) {
                return Err(Error::InvalidParams(
                    "gaussian_shrinker_flat is a backward flow without r0".into(),
                ));
            }
            Ok(CatalogBackground::GaussianShrinkerFlat {
                dim,
                horizon: positive("horizon", p.horizon.unwrap_or(1.0))?,
            })
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

impl CatalogBackground {
    /// Conformal factor `φ(t)` of the round sphere.
    pub fn sphere_factor<D: DualNum<Primitive = f64>>(&self, t: D) -> Option<D> {
        match *self {
            CatalogBackground::RoundSphere {
                dim, r0, direction, ..
            } => {
                let rate = 2.0 * (dim as f64 - 1.0);
                Some(match direction {
                    FlowDirection::Forward => -t * rate + r0 * r0,
                    FlowDirection::Backward => t * rate + r0 * r0,
                })
            }
            _ => None,
        }
    }

    /// Gradient soliton structure, when the background carries one.
    pub fn soliton_data(&self) -> Option<GradientSolitonData> {
        match self {
            CatalogBackground::GaussianShrinkerFlat { .. } => Some(GradientSolitonData {
                potential: Potential::GaussianShrinker,
                class: SolitonClass::Shrinking,
            }),
            _ => None,
        }
    }
}

impl RicciFlowBackground for CatalogBackground {
    fn name(&self) -> &str {
        match self {
            CatalogBackground::EuclideanStatic { .. } => "euclidean_static",
            CatalogBackground::RoundSphere { .. } => "round_sphere",
            CatalogBackground::GaussianShrinkerFlat { .. } => "gaussian_shrinker_flat",
        }
    }

    fn dim(&self) -> usize {
        match *self {
            CatalogBackground::EuclideanStatic { dim, .. }
            | CatalogBackground::RoundSphere { dim, .. }
            | CatalogBackground::GaussianShrinkerFlat { dim, .. } => dim,
        }
    }

    fn direction(&self) -> FlowDirection {
        match *self {
            CatalogBackground::EuclideanStatic { direction, .. }
            | CatalogBackground::RoundSphere { direction, .. } => direction,
            CatalogBackground::GaussianShrinkerFlat { .. } => FlowDirection::Backward,
        }
    }

    fn horizon(&self) -> f64 {
        match *self {
            CatalogBackground::EuclideanStatic { horizon, .. }
            | CatalogBackground::RoundSphere { horizon, .. }
            | CatalogBackground::GaussianShrinkerFlat { horizon, .. } => horizon,
        }
    }

    fn is_flat(&self) -> bool {
        !matches!(self, CatalogBackground::RoundSphere { .. })
    }

    fn check_point(&self, t: f64, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: y.len(),
            });
        }
        if !(t > 0.0) {
            return Err(Error::domain(y, format!("time {t} is not positive")));
        }
        if let Some(phi) = self.sphere_factor(t) {
            if phi <= 0.0 {
                return Err(Error::domain(y, format!("sphere has collapsed at t = {t}")));
            }
            let polar = &y[..y.len() - 1];
            if polar.iter().any(|&a| a <= 0.0 || a >= PI) {
                return Err(Error::domain(y, "polar angle outside (0, π)"));
            }
        }
        Ok(())
    }

    fn metric<D: DualNum<Primitive = f64>>(&self, t: D, y: &[D]) -> Vec<D> {
        let d = y.len();
        let mut out = vec![D::from(0.0); d * d];
        match self.sphere_factor(t) {
            Some(phi) => {
                let mut w = phi;
                for k in 0..d {
                    out[k * d + k] = w.clone();
                    let s = y[k].clone().sin();
                    w = w * s.clone() * s;
                }
            }
            None => {
                for k in 0..d {
                    out[k * d + k] = D::from(1.0);
                }
            }
        }
        out
    }

    fn scalar_curvature<D: DualNum<Primitive = f64>>(&self, t: D, _y: &[D]) -> D {
        match self.sphere_factor(t) {
            Some(phi) => {
                let d = self.dim() as f64;
                phi.recip() * (d * (d - 1.0))
            }
            None => D::from(0.0),
        }
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        let d = self.dim();
        match self {
            CatalogBackground::RoundSphere { .. } => {
                let mut b = vec![(POLE_MARGIN, PI - POLE_MARGIN); d - 1];
                b.push((0.0, 2.0 * PI));
                b
            }
            _ => vec![(-1.0, 1.0); d],
        }
    }
}
