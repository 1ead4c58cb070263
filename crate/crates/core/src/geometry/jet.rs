//! Derivative backends: exact (dual numbers) and central finite differences.

use nalgebra::{DMatrix, DVector, Dyn};
use num_dual::{hessian, Dual2Vec, DualNum};

use super::{ChartPoint, FdConfig, MetricField, MetricJet, ScalarField, ScalarJet};
use crate::Result;
use serde::{Deserialize, Serialize};

type Jet2 = Dual2Vec<f64, Dyn>;

/// Metric given by a closed-form expression, generic over the scalar type so
/// that exact partials are obtained by evaluating on dual numbers.
pub trait ClosedFormMetric: Sync {
    fn dim(&self) -> usize;

    /// Domain check on plain coordinates.
    fn check_point(&self, _p: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Row-major `dim × dim` components.
    fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> Vec<D>;
}

/// Scalar field given by a closed-form expression.
pub trait ClosedFormScalar: Sync {
    fn dim(&self) -> usize;

    fn check_point(&self, _p: &[f64]) -> Result<()> {
        Ok(())
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> D;
}

impl<T: ClosedFormMetric> MetricField for T {
    fn dim(&self) -> usize {
        ClosedFormMetric::dim(self)
    }

    fn components(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let d = ClosedFormMetric::dim(self);
        p.expect_dim(d)?;
        self.check_point(p.coords())?;
        Ok(DMatrix::from_row_slice(d, d, &self.eval(p.coords())))
    }

    fn analytic_jet(&self, p: &ChartPoint) -> Option<Result<MetricJet>> {
        Some(closed_form_metric_jet(self, p))
    }
}

impl<T: ClosedFormScalar> ScalarField for T {
    fn dim(&self) -> usize {
        ClosedFormScalar::dim(self)
    }

    fn value(&self, p: &ChartPoint) -> Result<f64> {
        p.expect_dim(ClosedFormScalar::dim(self))?;
        self.check_point(p.coords())?;
        Ok(self.eval(p.coords()))
    }

    fn analytic_jet(&self, p: &ChartPoint) -> Option<Result<ScalarJet>> {
        Some(closed_form_scalar_jet(self, p))
    }
}

/// Exact metric jet by second-order forward-mode differentiation.
pub fn closed_form_metric_jet<T: ClosedFormMetric + ?Sized>(
    metric: &T,
    p: &ChartPoint,
) -> Result<MetricJet> {
    let d = metric.dim();
    p.expect_dim(d)?;
    metric.check_point(p.coords())?;
    let x = DVector::from_column_slice(p.coords());
    let parts: Vec<(f64, DVector<f64>, DMatrix<f64>)> =
        hessian(|z: DVector<Jet2>| metric.eval(z.as_slice()), &x);

    let mut value = DMatrix::zeros(d, d);
    let mut d1 = vec![DMatrix::zeros(d, d); d];
    let mut d2 = vec![vec![DMatrix::zeros(d, d); d]; d];
    for (k, (v, g, h)) in parts.iter().enumerate() {
        let (i, j) = (k / d, k % d);
        value[(i, j)] = *v;
        for a in 0..d {
            d1[a][(i, j)] = g[a];
            for b in 0..d {
                d2[a][b][(i, j)] = h[(a, b)];
            }
        }
    }
    Ok(MetricJet { value, d1, d2 })
}

pub fn closed_form_scalar_jet<T: ClosedFormScalar + ?Sized>(
    field: &T,
    p: &ChartPoint,
) -> Result<ScalarJet> {
    p.expect_dim(field.dim())?;
    field.check_point(p.coords())?;
    let x = DVector::from_column_slice(p.coords());
    let (value, grad, hess) = hessian(|z: DVector<Jet2>| field.eval(z.as_slice()), &x);
    Ok(ScalarJet { value, grad, hess })
}

/// Hides the exact backend of a field so that every derivative is taken by
/// finite differences.
pub struct FiniteDifference<'a, T: ?Sized>(pub &'a T);

impl<T: MetricField + ?Sized> MetricField for FiniteDifference<'_, T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn components(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        self.0.components(p)
    }

    fn fd_config(&self) -> FdConfig {
        self.0.fd_config()
    }
}

impl<T: ScalarField + ?Sized> ScalarField for FiniteDifference<'_, T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, p: &ChartPoint) -> Result<f64> {
        self.0.value(p)
    }

    fn fd_config(&self) -> FdConfig {
        self.0.fd_config()
    }
}

/// Analytic jet when available, finite differences otherwise.
pub fn metric_jet<M: MetricField + ?Sized>(metric: &M, p: &ChartPoint) -> Result<MetricJet> {
    match metric.analytic_jet(p) {
        Some(jet) => jet,
        None => fd_metric_jet(metric, p, &metric.fd_config()),
    }
}

pub fn scalar_jet<F: ScalarField + ?Sized>(field: &F, p: &ChartPoint) -> Result<ScalarJet> {
    match field.analytic_jet(p) {
        Some(jet) => jet,
        None => fd_scalar_jet(field, p, &field.fd_config()),
    }
}

/// Derivative backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Analytic,
    Fd,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Analytic => "analytic",
            Backend::Fd => "fd",
        }
    }
}

pub fn metric_jet_with<M: MetricField + ?Sized>(
    metric: &M,
    p: &ChartPoint,
    backend: Backend,
) -> Result<MetricJet> {
    match backend {
        Backend::Analytic => metric_jet(metric, p),
        Backend::Fd => fd_metric_jet(metric, p, &metric.fd_config()),
    }
}

pub fn scalar_jet_with<F: ScalarField + ?Sized>(
    field: &F,
    p: &ChartPoint,
    backend: Backend,
) -> Result<ScalarJet> {
    match backend {
        Backend::Analytic => scalar_jet(field, p),
        Backend::Fd => fd_scalar_jet(field, p, &field.fd_config()),
    }
}

fn shifted(p: &ChartPoint, moves: &[(usize, f64)]) -> Result<ChartPoint> {
    let mut c = p.coords().to_vec();
    for &(a, h) in moves {
        c[a] += h;
    }
    ChartPoint::new(c)
}

/// Central-difference partials of any function `ChartPoint -> DMatrix`.
fn fd_partials<E>(
    eval: &E,
    p: &ChartPoint,
    cfg: &FdConfig,
    scale: f64,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>)>
where
    E: Fn(&ChartPoint) -> Result<DMatrix<f64>>,
{
    let d = p.dim();
    let value = eval(p)?;
    let at = |moves: &[(usize, f64)]| eval(&shifted(p, moves)?);

    let mut d1 = Vec::with_capacity(d);
    for a in 0..d {
        let h = cfg.first(p.coords()[a]) * scale;
        d1.push((at(&[(a, h)])? - at(&[(a, -h)])?) / (2.0 * h));
    }

    let mut d2 = vec![vec![DMatrix::zeros(value.nrows(), value.ncols()); d]; d];
    for a in 0..d {
        let ha = cfg.second(p.coords()[a]) * scale;
        d2[a][a] = (at(&[(a, ha)])? - &value * 2.0 + at(&[(a, -ha)])?) / (ha * ha);
        for b in (a + 1)..d {
            let hb = cfg.second(p.coords()[b]) * scale;
            let m = (at(&[(a, ha), (b, hb)])? - at(&[(a, ha), (b, -hb)])?
                - at(&[(a, -ha), (b, hb)])?
                + at(&[(a, -ha), (b, -hb)])?)
                / (4.0 * ha * hb);
            d2[a][b] = m.clone();
            d2[b][a] = m;
        }
    }
    Ok((value, d1, d2))
}

fn fd_jet_matrix<E>(eval: E, p: &ChartPoint, cfg: &FdConfig) -> Result<MetricJet>
where
    E: Fn(&ChartPoint) -> Result<DMatrix<f64>>,
{
    let (value, mut d1, mut d2) = fd_partials(&eval, p, cfg, 1.0)?;
    if cfg.richardson {
        let (_, f1, f2) = fd_partials(&eval, p, cfg, 0.5)?;
        for (coarse, fine) in d1.iter_mut().zip(f1) {
            *coarse = (fine * 4.0 - &*coarse) / 3.0;
        }
        for (row, frow) in d2.iter_mut().zip(f2) {
            for (coarse, fine) in row.iter_mut().zip(frow) {
                *coarse = (fine * 4.0 - &*coarse) / 3.0;
            }
        }
    }
    Ok(MetricJet { value, d1, d2 })
}

/// Finite-difference metric jet with the given step policy.
pub fn fd_metric_jet<M: MetricField + ?Sized>(
    metric: &M,
    p: &ChartPoint,
    cfg: &FdConfig,
) -> Result<MetricJet> {
    p.expect_dim(metric.dim())?;
    fd_jet_matrix(|q| metric.components(q), p, cfg)
}

pub fn fd_scalar_jet<F: ScalarField + ?Sized>(
    field: &F,
    p: &ChartPoint,
    cfg: &FdConfig,
) -> Result<ScalarJet> {
    p.expect_dim(field.dim())?;
    let jet = fd_jet_matrix(|q| Ok(DMatrix::from_element(1, 1, field.value(q)?)), p, cfg)?;
    let d = p.dim();
    Ok(ScalarJet {
        value: jet.value[(0, 0)],
        grad: DVector::from_fn(d, |a, _| jet.d1[a][(0, 0)]),
        hess: DMatrix::from_fn(d, d, |a, b| jet.d2[a][b][(0, 0)]),
    })
}
