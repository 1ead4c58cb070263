//! Closed-form Ricci-flow backgrounds, mean curvature flows in them, and the
//! flow and soliton residuals.
//!
//! Backward backgrounds store the reverse time `τ` as their time variable.

mod catalog;
mod mcf;
mod potential;

use nalgebra::{DMatrix, DVector};
use num_dual::{first_derivative, gradient, Dual64, DualDVec64, DualNum};
use serde::{Deserialize, Serialize};

use crate::geometry::{
    curvature, hessian, ChartPoint, ClosedFormMetric, ConnectionCoeffs, SymTensor2,
};
use crate::{Error, Result};

pub use catalog::{model_background, CatalogBackground, BACKGROUND_NAMES, POLE_MARGIN};
pub use mcf::{
    flow_point_data, hyperspherical, mcf_soliton_residual, model_mcf, velocity, CatalogMcf, FlowPointData,
    McfSlice, McfSolution, SphereSurface, MCF_NAMES,
};
pub use potential::{GradientSolitonData, Monomial, Potential, PotentialAt, SolitonClass};

/// Forward flows evolve by `∂g/∂t = −2Ric`, backward ones by `∂g/∂τ = 2Ric`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowDirection {
    Forward,
    Backward,
}

impl FlowDirection {
    /// `s` in `∂g/∂t = s · Ric`.
    pub fn ricci_factor(self) -> f64 {
        match self {
            FlowDirection::Forward => -2.0,
            FlowDirection::Backward => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FlowDirection::Forward => "forward",
            FlowDirection::Backward => "backward",
        }
    }
}

/// A time family of metrics on a chart of `O`, with closed-form components
/// and scalar curvature.
pub trait RicciFlowBackground: Sync {
    fn name(&self) -> &str;

    /// Dimension of `O`.
    fn dim(&self) -> usize;

    fn direction(&self) -> FlowDirection;

    /// Horizon `T` of the time interval `(0, T]`.
    fn horizon(&self) -> f64;

    fn is_flat(&self) -> bool {
        false
    }

    fn check_point(&self, t: f64, y: &[f64]) -> Result<()>;

    /// Row-major components of `g(t)` at `y`.
    fn metric<D: DualNum<Primitive = f64>>(&self, t: D, y: &[D]) -> Vec<D>;

    fn scalar_curvature<D: DualNum<Primitive = f64>>(&self, t: D, y: &[D]) -> D;

    /// Coordinate box used for sampling, one interval per coordinate.
    fn sample_box(&self) -> Vec<(f64, f64)>;
}

/// `g(t)` at a fixed time as a closed-form metric on `O`.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a, B: ?Sized> {
    bg: &'a B,
    t: f64,
}

impl<'a, B: RicciFlowBackground + ?Sized> Snapshot<'a, B> {
    pub fn new(bg: &'a B, t: f64) -> Self {
        Snapshot { bg, t }
    }

    pub fn time(&self) -> f64 {
        self.t
    }
}

impl<B: RicciFlowBackground> ClosedFormMetric for Snapshot<'_, B> {
    fn dim(&self) -> usize {
        self.bg.dim()
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        self.bg.check_point(self.t, p)
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> Vec<D> {
        self.bg.metric(D::from(self.t), p)
    }
}

/// Exact `∂g/∂t` at `(y, t)`.
pub fn dt_metric<B: RicciFlowBackground>(bg: &B, y: &ChartPoint, t: f64) -> Result<DMatrix<f64>> {
    y.expect_dim(bg.dim())?;
    bg.check_point(t, y.coords())?;
    let d = bg.dim();
    let yd: Vec<Dual64> = y.coords().iter().map(|&c| Dual64::from(c)).collect();
    let parts: Vec<(f64, f64)> = first_derivative(|s: Dual64| bg.metric(s, &yd), t);
    Ok(DMatrix::from_row_iterator(d, d, parts.into_iter().map(|(_, e)| e)))
}

/// `∂g/∂t − S` with `S = ∓2Ric`; zero for an exact solution.
pub fn ricci_flow_residual<B: RicciFlowBackground>(
    bg: &B,
    y: &ChartPoint,
    t: f64,
) -> Result<SymTensor2> {
    let dg = dt_metric(bg, y, t)?;
    let ric = curvature(&Snapshot::new(bg, t), y)?.ricci;
    Ok(SymTensor2::covariant(
        dg - ric.entries() * bg.direction().ricci_factor(),
    ))
}

/// `Ric + Hess f + (c/2t) g`, with `t` read as `τ` on backward backgrounds.
pub fn gradient_soliton_residual<B: RicciFlowBackground>(
    bg: &B,
    sol: &GradientSolitonData,
    y: &ChartPoint,
    t: f64,
) -> Result<SymTensor2> {
    if t <= 0.0 {
        return Err(Error::domain(y.coords(), "soliton residual needs t > 0"));
    }
    sol.potential.validate(bg.dim())?;
    let snap = Snapshot::new(bg, t);
    let c = curvature(&snap, y)?;
    let hess = hessian(&snap, &sol.potential.at(bg.dim(), t), y)?;
    Ok(SymTensor2::covariant(
        c.ricci.entries() + hess.entries() + &c.metric * (sol.class.constant() / (2.0 * t)),
    ))
}

/// Background quantities at one space-time point.
#[derive(Debug, Clone)]
pub struct BackgroundPoint {
    pub t: f64,
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub connection: ConnectionCoeffs,
    pub ricci: DMatrix<f64>,
    /// Closed-form scalar curvature.
    pub scalar: f64,
    pub dr_dy: DVector<f64>,
    pub dr_dt: f64,
}

impl BackgroundPoint {
    /// `Ric(u, v)`.
    pub fn ric(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.ricci * v))
    }

    /// `u(R)`.
    pub fn dr(&self, u: &DVector<f64>) -> f64 {
        u.dot(&self.dr_dy)
    }

    /// `Ric^a_b = g^{ac} Ric_cb`.
    pub fn ricci_mixed(&self) -> DMatrix<f64> {
        &self.inverse * &self.ricci
    }
}

pub fn background_point<B: RicciFlowBackground>(
    bg: &B,
    y: &ChartPoint,
    t: f64,
) -> Result<BackgroundPoint> {
    y.expect_dim(bg.dim())?;
    let c = curvature(&Snapshot::new(bg, t), y)?;
    let (scalar, dr) = scalar_curvature_gradient(bg, y.coords(), t);
    Ok(BackgroundPoint {
        t,
        metric: c.metric,
        inverse: c.inverse,
        connection: c.connection,
        ricci: c.ricci.entries().clone(),
        scalar,
        dr_dy: dr.rows(1, bg.dim()).into_owned(),
        dr_dt: dr[0],
    })
}

/// `R` and its gradient in `(t, y)`, time first.
pub(crate) fn scalar_curvature_gradient<B: RicciFlowBackground>(
    bg: &B,
    y: &[f64],
    t: f64,
) -> (f64, DVector<f64>) {
    let mut z = Vec::with_capacity(y.len() + 1);
    z.push(t);
    z.extend_from_slice(y);
    gradient(
        |z: DVector<DualDVec64>| bg.scalar_curvature(z[0].clone(), &z.as_slice()[1..]),
        &DVector::from_vec(z),
    )
}

#[cfg(test)]
mod tests;
