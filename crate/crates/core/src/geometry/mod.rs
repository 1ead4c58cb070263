//! Chart-based Riemannian geometry in arbitrary dimension.
//!
//! A [`MetricField`] evaluates metric components on a coordinate chart. Its
//! first and second partials come either from an exact backend (closed-form
//! metrics evaluated on second-order dual numbers, see [`ClosedFormMetric`])
//! or from central finite differences. Everything downstream (connection,
//! curvature, Hessians, norms) is computed from those partials.
//!
//! Index 0 is the time coordinate on space-time charts.

mod curvature;
mod jet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use curvature::{
    christoffel, christoffel_from_jet, curvature, curvature_from_jet, curvature_with,
    directional_derivative, gradient, hessian, hessian_from_parts, norm_with_inverse, ricci,
    riemann, scalar_curvature, tensor_norm, Curvature,
};
pub use jet::{
    closed_form_metric_jet, closed_form_scalar_jet, fd_metric_jet, fd_scalar_jet, metric_jet,
    metric_jet_with, scalar_jet, scalar_jet_with, Backend, ClosedFormMetric, ClosedFormScalar,
    FiniteDifference,
};

/// Condition number (after Jacobi scaling) above which a metric is treated
/// as degenerate.
pub const DEGENERATE_CONDITION: f64 = 1e12;

/// Coordinates of a point on a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { coords })
    }

    /// Space-time point `(t, y)` with the time coordinate in slot 0.
    pub fn spacetime(t: f64, y: &[f64]) -> Result<Self> {
        let mut coords = Vec::with_capacity(y.len() + 1);
        coords.push(t);
        coords.extend_from_slice(y);
        Self::new(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub(crate) fn expect_dim(&self, dim: usize) -> Result<()> {
        if self.coords.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: self.coords.len(),
            });
        }
        Ok(())
    }
}

impl From<ChartPoint> for Vec<f64> {
    fn from(p: ChartPoint) -> Self {
        p.coords
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// Symmetric rank-2 tensor in chart components.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    entries: DMatrix<f64>,
    variance: Variance,
}

impl SymTensor2 {
    /// Symmetrises the input, so asymmetric round-off never leaks through.
    pub fn new(entries: DMatrix<f64>, variance: Variance) -> Self {
        assert!(entries.is_square(), "rank-2 tensor must be square");
        let entries = (&entries + entries.transpose()) * 0.5;
        Self { entries, variance }
    }

    pub fn covariant(entries: DMatrix<f64>) -> Self {
        Self::new(entries, Variance::Covariant)
    }

    pub fn contravariant(entries: DMatrix<f64>) -> Self {
        Self::new(entries, Variance::Contravariant)
    }

    pub fn zeros(dim: usize, variance: Variance) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
            variance,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[(a, b)]
    }

    /// `T(u, v)` for a covariant tensor.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.entries * v))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Levi-Civita connection coefficients `Γ^a_{bc}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs {
    dim: usize,
    gamma: Vec<f64>,
}

impl ConnectionCoeffs {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            gamma: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dim + b) * self.dim + c
    }

    /// `Γ^a_{bc}`.
    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma[self.idx(a, b, c)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let i = self.idx(a, b, c);
        self.gamma[i] = v;
    }

    /// Sets `Γ^a_{bc}` and `Γ^a_{cb}`.
    pub fn set_sym(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.set(a, b, c, v);
        self.set(a, c, b, v);
    }

    /// Contraction `Γ^a_{bc} u^b v^c`.
    pub fn apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |a, _| {
            let mut s = 0.0;
            for b in 0..d {
                for c in 0..d {
                    s += self.get(a, b, c) * u[b] * v[c];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_lower_asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut m: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    m = m.max((self.get(a, b, c) - self.get(a, c, b)).abs());
                }
            }
        }
        m
    }
}

/// Riemann tensor components `ℛ^a_{bcd}` with `ℛ(∂_c, ∂_d)∂_b = ℛ^a_{bcd} ∂_a`
/// in the convention `ℛ(X,Y) = ∇_Y∇_X − ∇_X∇_Y + ∇_[X,Y]`. The Ricci tensor
/// is the trace `Ric_{bd} = ℛ^a_{bda}`, positive on round spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTensor {
    dim: usize,
    data: Vec<f64>,
}

impl RiemannTensor {
    pub(crate) fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    pub(crate) fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    /// Fully covariant components `ℛ_{abcd} = g_{ae} ℛ^e_{bcd}`.
    pub fn lowered(&self, g: &DMatrix<f64>) -> RiemannTensor {
        let n = self.dim;
        let mut out = RiemannTensor::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s: f64 = (0..n).map(|e| g[(a, e)] * self.get(e, b, c, d)).sum();
                        out.set(a, b, c, d, s);
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Value and all first and second partials of the metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    pub value: DMatrix<f64>,
    /// `d1[a] = ∂_a g`.
    pub d1: Vec<DMatrix<f64>>,
    /// `d2[a][b] = ∂_a ∂_b g`.
    pub d2: Vec<Vec<DMatrix<f64>>>,
}

/// Value, gradient and coordinate Hessian of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

/// Finite-difference step policy. Steps scale as `h · max(1, |coord|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub first_step: f64,
    pub second_step: f64,
    /// One level of Richardson extrapolation (steps `h` and `h/2`).
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            first_step: 1e-5,
            second_step: 1e-4,
            richardson: false,
        }
    }
}

impl FdConfig {
    pub fn first(&self, coord: f64) -> f64 {
        self.first_step * coord.abs().max(1.0)
    }

    pub fn second(&self, coord: f64) -> f64 {
        self.second_step * coord.abs().max(1.0)
    }
}

/// A smooth symmetric metric on a coordinate chart.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;

    /// Metric components at `p`; fails outside the chart domain.
    fn components(&self, p: &ChartPoint) -> Result<DMatrix<f64>>;

    /// Exact first and second partials, when the metric can supply them.
    fn analytic_jet(&self, _p: &ChartPoint) -> Option<Result<MetricJet>> {
        None
    }

    fn fd_config(&self) -> FdConfig {
        FdConfig::default()
    }
}

/// A smooth scalar field on a chart.
pub trait ScalarField: Sync {
    fn dim(&self) -> usize;

    fn value(&self, p: &ChartPoint) -> Result<f64>;

    fn analytic_jet(&self, _p: &ChartPoint) -> Option<Result<ScalarJet>> {
        None
    }

    fn fd_config(&self) -> FdConfig {
        FdConfig::default()
    }
}

/// Inverse of a metric matrix.
///
/// The degeneracy test uses the condition number of `D^{-1/2} g D^{-1/2}`
/// with `D = diag(g)`, so coordinate scale disparities alone are not
/// reported as degeneracy.
pub fn invert_metric(g: &DMatrix<f64>, p: &[f64]) -> Result<DMatrix<f64>> {
    let degenerate = |condition: f64| Error::DegenerateMetric {
        point: p.to_vec(),
        condition,
    };
    let n = g.nrows();
    if g.iter().any(|x| !x.is_finite()) {
        return Err(degenerate(f64::INFINITY));
    }
    let mut scale = DVector::zeros(n);
    for i in 0..n {
        let d = g[(i, i)].abs();
        if d == 0.0 {
            return Err(degenerate(f64::INFINITY));
        }
        scale[i] = 1.0 / d.sqrt();
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * scale[i] * scale[j]);
    let eig = scaled.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), l| (lo.min(l.abs()), hi.max(l.abs())));
    let condition = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    if !(condition <= DEGENERATE_CONDITION) {
        return Err(degenerate(condition));
    }
    let inv_scaled = scaled.try_inverse().ok_or_else(|| degenerate(condition))?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        inv_scaled[(i, j)] * scale[i] * scale[j]
    }))
}

/// `g(u, v)` for a metric matrix.
pub fn inner(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u.dot(&(g * v))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    g.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x))
}
