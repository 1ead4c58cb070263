//! Extrinsic geometry of an immersed hypersurface.
//!
//! Conventions: the unit normal is built from the cofactor covector of the
//! tangent frame and oriented by a hint vector, `h(X, Y) = −g(∇_X Y, ν)` and
//! `H = tr_g h`. With the outward normal a round sphere of radius `r` in
//! Euclidean space has `h = g/r` and `H = n/r`.

use nalgebra::{DMatrix, DVector};
use num_dual::{hessian, Dual2DVec64, DualNum};

use crate::geometry::{
    christoffel_from_jet, invert_metric, metric_jet, ChartPoint, ConnectionCoeffs, MetricField,
};
use crate::{Error, Result};

/// A map from a `dim`-dimensional chart into a `dim + 1`-dimensional one,
/// generic over the scalar type for exact derivatives.
pub trait ClosedFormImmersion: Sync {
    fn dim(&self) -> usize;

    fn check_point(&self, _x: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Ambient coordinates of the image point.
    fn eval<D: DualNum<Primitive = f64>>(&self, x: &[D]) -> Vec<D>;

    /// Any ambient vector with positive pairing against the wanted normal.
    fn normal_hint(&self, x: &[f64]) -> DVector<f64>;
}

/// Value, Jacobian (ambient × chart) and per-component Hessians of a map.
#[derive(Debug, Clone)]
pub struct ImmersionJet {
    pub value: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    pub second: Vec<DMatrix<f64>>,
}

pub fn immersion_jet<I: ClosedFormImmersion + ?Sized>(imm: &I, x: &ChartPoint) -> Result<ImmersionJet> {
    let k = imm.dim();
    x.expect_dim(k)?;
    imm.check_point(x.coords())?;
    let parts: Vec<(f64, DVector<f64>, DMatrix<f64>)> = hessian(
        |z: DVector<Dual2DVec64>| imm.eval(z.as_slice()),
        &DVector::from_column_slice(x.coords()),
    );
    let m = parts.len();
    if m != k + 1 {
        return Err(Error::Dimension {
            expected: k + 1,
            got: m,
        });
    }
    let mut value = DVector::zeros(m);
    let mut jacobian = DMatrix::zeros(m, k);
    let mut second = Vec::with_capacity(m);
    for (a, (v, g, h)) in parts.into_iter().enumerate() {
        value[a] = v;
        jacobian.set_row(a, &g.transpose());
        second.push(h);
    }
    Ok(ImmersionJet {
        value,
        jacobian,
        second,
    })
}

/// Unit normal of the span of `tangents` (columns), given the inverse
/// ambient metric.
pub fn unit_normal(
    ginv: &DMatrix<f64>,
    tangents: &DMatrix<f64>,
    hint: &DVector<f64>,
    at: &[f64],
) -> Result<DVector<f64>> {
    let m = tangents.nrows();
    if tangents.ncols() + 1 != m || hint.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: tangents.ncols() + 1,
        });
    }
    // cofactor covector: annihilates every tangent
    let mut co = DVector::zeros(m);
    for a in 0..m {
        let minor = tangents.clone().remove_row(a);
        let det = if minor.nrows() == 0 { 1.0 } else { minor.determinant() };
        co[a] = if a % 2 == 0 { det } else { -det };
    }
    let raised = ginv * &co;
    let norm2 = co.dot(&raised);
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::domain(at, "tangent frame is degenerate"));
    }
    let nu = raised / norm2.sqrt();
    Ok(if co.dot(hint) < 0.0 { -nu } else { nu })
}

/// Extrinsic data of a hypersurface at one chart point.
#[derive(Debug, Clone)]
pub struct HypersurfaceData {
    /// Ambient coordinates of the point.
    pub point: DVector<f64>,
    /// Coordinate tangent vectors as columns.
    pub tangents: DMatrix<f64>,
    pub ambient_metric: DMatrix<f64>,
    pub ambient_inverse: DMatrix<f64>,
    pub ambient_connection: ConnectionCoeffs,
    pub induced: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub normal: DVector<f64>,
    pub second_ff: DMatrix<f64>,
    pub mean_curvature: f64,
}

impl HypersurfaceData {
    /// `∇_{∂_i F} ∂_j F` in ambient components.
    pub fn covariant_second(&self, jet: &ImmersionJet, i: usize, j: usize) -> DVector<f64> {
        let m = self.point.len();
        let ti = self.tangents.column(i).into_owned();
        let tj = self.tangents.column(j).into_owned();
        let mut v = self.ambient_connection.apply(&ti, &tj);
        for a in 0..m {
            v[a] += jet.second[a][(i, j)];
        }
        v
    }
}

/// Induced metric, normal, second fundamental form and mean curvature.
pub fn hypersurface_data<M, I>(ambient: &M, imm: &I, x: &ChartPoint) -> Result<HypersurfaceData>
where
    M: MetricField + ?Sized,
    I: ClosedFormImmersion + ?Sized,
{
    let jet = immersion_jet(imm, x)?;
    hypersurface_from_jet(ambient, &jet, &imm.normal_hint(x.coords()))
}

pub(crate) fn hypersurface_from_jet<M: MetricField + ?Sized>(
    ambient: &M,
    jet: &ImmersionJet,
    hint: &DVector<f64>,
) -> Result<HypersurfaceData> {
    let k = jet.jacobian.ncols();
    let p = ChartPoint::new(jet.value.iter().copied().collect())?;
    p.expect_dim(ambient.dim())?;
    let mjet = metric_jet(ambient, &p)?;
    let ginv = invert_metric(&mjet.value, p.coords())?;
    let gamma = christoffel_from_jet(&mjet, &ginv);
    let g = mjet.value;
    let t = &jet.jacobian;
    let induced = t.transpose() * &g * t;
    let induced = (&induced + induced.transpose()) * 0.5;
    let inverse = invert_metric(&induced, p.coords())?;
    let normal = unit_normal(&ginv, t, hint, p.coords())?;
    let gnu = &g * &normal;
    let mut data = HypersurfaceData {
        point: jet.value.clone(),
        tangents: t.clone(),
        ambient_metric: g,
        ambient_inverse: ginv,
        ambient_connection: gamma,
        induced,
        inverse,
        normal,
        second_ff: DMatrix::zeros(k, k),
        mean_curvature: 0.0,
    };
    for i in 0..k {
        for j in i..k {
            let h = -data.covariant_second(jet, i, j).dot(&gnu);
            data.second_ff[(i, j)] = h;
            data.second_ff[(j, i)] = h;
        }
    }
    data.mean_curvature = data.inverse.component_mul(&data.second_ff).sum();
    Ok(data)
}
