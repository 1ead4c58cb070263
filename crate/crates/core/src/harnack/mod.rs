//! Harnack quantities, the `N → ∞` limit of the track's second fundamental
//! form, and Lott's weighted curvatures and boundary functional.

use nalgebra::DVector;
use num_dual::DualNum;
use rayon::prelude::*;
use serde::Serialize;

use crate::backgrounds::{
    flow_point_data, hyperspherical, FlowDirection, FlowPointData, McfSolution, RicciFlowBackground,
};
use crate::canonical::limit_ricci;
use crate::geometry::{curvature, hessian_from_parts, scalar_jet, ChartPoint, MetricField, ScalarField};
use crate::hypersurface::{hypersurface_data, ClosedFormImmersion};
use crate::quadrature::{ordered_sum, BallGrid};
use crate::{Error, Result};

/// `Z(X, X) = Ric(X, X) + X(R) + ½(∂_t R + R/t)`, the same expression as
/// [`limit_ricci`].
pub fn rf_harnack_z<B: RicciFlowBackground>(bg: &B, x: &DVector<f64>, y: &ChartPoint, t: f64) -> Result<f64> {
    limit_ricci(bg, x, y, t)
}

fn check_tangent(fp: &FlowPointData, v: &DVector<f64>) -> Result<()> {
    let k = fp.surface.tangents.ncols();
    if v.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: v.len(),
        });
    }
    Ok(())
}

/// `∂_t H + h(V, V) + 2 V(H) + H/2t`, the MCF Harnack quantity. `V` is given
/// in the chart of `M`.
pub fn ztilde_at(fp: &FlowPointData, v: &DVector<f64>) -> Result<f64> {
    check_tangent(fp, v)?;
    let h = fp.mean_curvature;
    Ok(fp.dh_dt + v.dot(&(&fp.surface.second_ff * v)) + 2.0 * v.dot(&fp.dh_dx) + h / (2.0 * fp.t))
}

pub fn mcf_harnack_ztilde<B, M>(bg: &B, mcf: &M, v: &DVector<f64>, x: &ChartPoint, t: f64) -> Result<f64>
where
    B: RicciFlowBackground,
    M: McfSolution,
{
    if !bg.is_flat() {
        return Err(Error::Incompatible(format!(
            "the MCF Harnack quantity is defined in a flat background, not {}",
            bg.name()
        )));
    }
    positive_time(t, x)?;
    ztilde_at(&flow_point_data(bg, mcf, x, t)?, v)
}

fn positive_time(t: f64, x: &ChartPoint) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(x.coords(), format!("time {t} is not positive")));
    }
    Ok(())
}

/// `Z̃(V) + 2Ric(V, ν) − H Ric(ν, ν) + ½ ν(R)`.
pub fn limit_second_ff_at(fp: &FlowPointData, v: &DVector<f64>) -> Result<f64> {
    let z = ztilde_at(fp, v)?;
    let bp = &fp.background;
    let nu = &fp.surface.normal;
    let va = &fp.surface.tangents * v;
    Ok(z + 2.0 * bp.ric(&va, nu) - fp.mean_curvature * bp.ric(nu, nu) + 0.5 * bp.dr(nu))
}

/// Limit of `t σ_N h^Σ(V̄, V̄)` with `V̄ = E_0 + V`, from background and slice
/// data only.
pub fn limit_second_ff<B, M>(bg: &B, mcf: &M, v: &DVector<f64>, x: &ChartPoint, t: f64) -> Result<f64>
where
    B: RicciFlowBackground,
    M: McfSolution,
{
    if bg.direction() != FlowDirection::Forward {
        return Err(Error::DirectionMismatch {
            variant: "limit second fundamental form",
            required: "forward",
        });
    }
    positive_time(t, x)?;
    limit_second_ff_at(&flow_point_data(bg, mcf, x, t)?, v)
}

/// Chart components on `M` of the tangential gradient of a function with
/// ambient differential `df`.
pub fn tangential_gradient(fp: &FlowPointData, df: &DVector<f64>) -> DVector<f64> {
    &fp.surface.inverse * (fp.surface.tangents.transpose() * df)
}

/// `∂_t H − 2⟨∇f, ∇H⟩ + h(∇f, ∇f) − 2Ric(ν, ∇f) + ½ν(R) − H Ric(ν, ν)` with
/// `∇f` the tangential gradient.
pub fn lott_integrand_at(fp: &FlowPointData, df: &DVector<f64>) -> f64 {
    let w = tangential_gradient(fp, df);
    let bp = &fp.background;
    let nu = &fp.surface.normal;
    let wa = &fp.surface.tangents * &w;
    fp.dh_dt - 2.0 * w.dot(&fp.dh_dx) + w.dot(&(&fp.surface.second_ff * &w)) - 2.0 * bp.ric(nu, &wa)
        + 0.5 * bp.dr(nu)
        - fp.mean_curvature * bp.ric(nu, nu)
}

fn ambient_differential<F: ScalarField + ?Sized>(fp: &FlowPointData, f: &F) -> Result<DVector<f64>> {
    let y = ChartPoint::new(fp.surface.point.iter().copied().collect())?;
    Ok(scalar_jet(f, &y)?.grad)
}

/// Lott's boundary integrand for a boundary moving by mean curvature; `f` is
/// the potential on the background chart at time `t`.
pub fn lott_boundary_integrand<B, M, F>(bg: &B, mcf: &M, f: &F, x: &ChartPoint, t: f64) -> Result<f64>
where
    B: RicciFlowBackground,
    M: McfSolution,
    F: ScalarField + ?Sized,
{
    positive_time(t, x)?;
    let fp = flow_point_data(bg, mcf, x, t)?;
    Ok(lott_integrand_at(&fp, &ambient_differential(&fp, f)?))
}

/// The two sides of the comparison between the limit second fundamental form
/// at `V = −∇f` and Lott's boundary integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LottMatch {
    pub limit: f64,
    pub integrand: f64,
    pub h_over_2t: f64,
    /// `limit − integrand − H/2t`.
    pub defect: f64,
}

pub fn lott_match<B, M, F>(bg: &B, mcf: &M, f: &F, x: &ChartPoint, t: f64) -> Result<LottMatch>
where
    B: RicciFlowBackground,
    M: McfSolution,
    F: ScalarField + ?Sized,
{
    positive_time(t, x)?;
    let fp = flow_point_data(bg, mcf, x, t)?;
    let df = ambient_differential(&fp, f)?;
    let limit = limit_second_ff_at(&fp, &-tangential_gradient(&fp, &df))?;
    let integrand = lott_integrand_at(&fp, &df);
    let h_over_2t = fp.mean_curvature / (2.0 * t);
    Ok(LottMatch {
        limit,
        integrand,
        h_over_2t,
        defect: limit - integrand - h_over_2t,
    })
}

/// A coordinate ball `|y − c| ≤ r` in a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateBall {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl CoordinateBall {
    pub fn new(center: DVector<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParams(format!("ball radius must be positive, got {radius}")));
        }
        if center.len() < 2 {
            return Err(Error::InvalidParams("ball needs dimension ≥ 2".into()));
        }
        Ok(CoordinateBall { center, radius })
    }

    /// Unit ball about the origin.
    pub fn unit(dim: usize) -> Result<Self> {
        CoordinateBall::new(DVector::zeros(dim), 1.0)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `c + ρ ω(angles)`.
    pub fn point(&self, rho: f64, angles: &[f64]) -> DVector<f64> {
        &self.center + DVector::from_vec(hyperspherical(angles)) * rho
    }

    fn boundary(&self) -> BoundarySphere<'_> {
        BoundarySphere { ball: self }
    }
}

/// The boundary sphere with its outward normal.
struct BoundarySphere<'a> {
    ball: &'a CoordinateBall,
}

impl ClosedFormImmersion for BoundarySphere<'_> {
    fn dim(&self) -> usize {
        self.ball.dim() - 1
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, x: &[D]) -> Vec<D> {
        hyperspherical(x)
            .into_iter()
            .zip(self.ball.center.iter())
            .map(|(w, &c)| w * self.ball.radius + c)
            .collect()
    }

    fn normal_hint(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(hyperspherical(x))
    }
}

/// Metric, potential and compact domain of a smooth metric measure space.
pub struct WeightedManifold<'a, M: ?Sized, F: ?Sized> {
    pub metric: &'a M,
    pub potential: &'a F,
    pub ball: CoordinateBall,
}

/// Integrand data at an interior point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorValues {
    pub scalar: f64,
    /// `R + 2Δf − |∇f|²`.
    pub r_infinity: f64,
    pub f: f64,
    /// `√det g`.
    pub density: f64,
}

/// Integrand data at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryValues {
    pub mean_curvature: f64,
    /// `H − ν f`.
    pub h_infinity: f64,
    pub f: f64,
    /// Area density of the boundary in the angle chart.
    pub density: f64,
}

impl<M: MetricField + ?Sized, F: ScalarField + ?Sized> WeightedManifold<'_, M, F> {
    pub fn interior(&self, y: &ChartPoint) -> Result<InteriorValues> {
        y.expect_dim(self.ball.dim())?;
        let r = (DVector::from_column_slice(y.coords()) - &self.ball.center).norm();
        if r > self.ball.radius * (1.0 + 1e-12) {
            return Err(Error::domain(y.coords(), "point lies outside the domain"));
        }
        let c = curvature(self.metric, y)?;
        let fj = scalar_jet(self.potential, y)?;
        let hess = hessian_from_parts(&c.connection, &fj);
        let lap = c.inverse.component_mul(hess.entries()).sum();
        let grad2 = fj.grad.dot(&(&c.inverse * &fj.grad));
        Ok(InteriorValues {
            scalar: c.scalar,
            r_infinity: c.scalar + 2.0 * lap - grad2,
            f: fj.value,
            density: c.metric.determinant().sqrt(),
        })
    }

    /// Boundary data at hyperspherical angles of the boundary sphere.
    pub fn boundary(&self, angles: &[f64]) -> Result<BoundaryValues> {
        let x = ChartPoint::new(angles.to_vec())?;
        x.expect_dim(self.ball.dim() - 1)?;
        let data = hypersurface_data(self.metric, &self.ball.boundary(), &x)?;
        let y = ChartPoint::new(data.point.iter().copied().collect())?;
        let fj = scalar_jet(self.potential, &y)?;
        let nu_f = data.normal.dot(&fj.grad);
        Ok(BoundaryValues {
            mean_curvature: data.mean_curvature,
            h_infinity: data.mean_curvature - nu_f,
            f: fj.value,
            density: data.induced.determinant().sqrt(),
        })
    }
}

/// `(R^∞(p), H^∞(p))`; the second entry is present when `p` lies on the
/// boundary sphere.
pub fn lott_weighted_curvatures<M, F>(wm: &WeightedManifold<'_, M, F>, p: &ChartPoint) -> Result<(f64, Option<f64>)>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    let interior = wm.interior(p)?;
    let u = DVector::from_column_slice(p.coords()) - &wm.ball.center;
    let r = u.norm();
    let on_boundary = ((r - wm.ball.radius) / wm.ball.radius).abs() < 1e-12;
    let h = if on_boundary {
        Some(wm.boundary(&angles_of(&(u / r)))?.h_infinity)
    } else {
        None
    };
    Ok((interior.r_infinity, h))
}

/// Hyperspherical angles of a unit vector.
pub fn angles_of(u: &DVector<f64>) -> Vec<f64> {
    let d = u.len();
    let mut out = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        if k + 2 == d {
            let a = u[d - 1].atan2(u[d - 2]);
            out.push(if a < 0.0 { a + 2.0 * std::f64::consts::PI } else { a });
        } else {
            let rest = u.rows(k + 1, d - k - 1).norm();
            out.push(rest.atan2(u[k]));
        }
    }
    out
}

/// Volume and boundary parts of both functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    /// `∫ R^∞ e^{−f} dV`.
    pub weighted_volume: f64,
    /// `∫ H^∞ e^{−f} dA`.
    pub weighted_boundary: f64,
    /// `∫ R e^{−f} dV`.
    pub ghy_volume: f64,
    /// `∫ H dA`.
    pub ghy_boundary: f64,
    pub i_infty: f64,
    pub i_ghy: f64,
}

/// Both functionals by the product trapezoid rule. Shells are evaluated in
/// parallel and summed in a fixed order.
pub fn functionals<M, F>(wm: &WeightedManifold<'_, M, F>, grid: BallGrid) -> Result<Functionals>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    let d = wm.ball.dim();
    let radii = grid.radial_nodes(d, wm.ball.radius)?;
    let sphere = grid.sphere_nodes(d, true)?;
    let bare = grid.sphere_nodes(d, false)?;
    if radii.is_empty() || sphere.is_empty() {
        return Err(Error::InvalidParams("quadrature grid has no interior nodes".into()));
    }
    let shells: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&(rho, wr)| -> Result<(f64, f64)> {
            let mut inf = Vec::with_capacity(sphere.len());
            let mut ghy = Vec::with_capacity(sphere.len());
            for (angles, ws) in &sphere {
                let y = ChartPoint::new(wm.ball.point(rho, angles).iter().copied().collect())?;
                let v = wm.interior(&y)?;
                let w = wr * ws * v.density * (-v.f).exp();
                inf.push(v.r_infinity * w);
                ghy.push(v.scalar * w);
            }
            Ok((ordered_sum(&inf), ordered_sum(&ghy)))
        })
        .collect::<Result<_>>()?;
    let bdry: Vec<(f64, f64)> = bare
        .par_iter()
        .map(|(angles, w)| -> Result<(f64, f64)> {
            let b = wm.boundary(angles)?;
            let da = w * b.density;
            Ok((b.h_infinity * (-b.f).exp() * da, b.mean_curvature * da))
        })
        .collect::<Result<_>>()?;
    let weighted_volume = ordered_sum(&shells.iter().map(|s| s.0).collect::<Vec<_>>());
    let ghy_volume = ordered_sum(&shells.iter().map(|s| s.1).collect::<Vec<_>>());
    let weighted_boundary = ordered_sum(&bdry.iter().map(|s| s.0).collect::<Vec<_>>());
    let ghy_boundary = ordered_sum(&bdry.iter().map(|s| s.1).collect::<Vec<_>>());
    Ok(Functionals {
        weighted_volume,
        weighted_boundary,
        ghy_volume,
        ghy_boundary,
        i_infty: weighted_volume + 2.0 * weighted_boundary,
        i_ghy: ghy_volume + 2.0 * ghy_boundary,
    })
}

/// `I_∞ = ∫ R^∞ e^{−f} dV + 2∫ H^∞ e^{−f} dA`.
pub fn i_infty<M, F>(wm: &WeightedManifold<'_, M, F>, grid: BallGrid) -> Result<f64>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    Ok(functionals(wm, grid)?.i_infty)
}

/// `I_GHY = ∫ R e^{−f} dV + 2∫ H dA`.
pub fn i_ghy<M, F>(wm: &WeightedManifold<'_, M, F>, grid: BallGrid) -> Result<f64>
where
    M: MetricField + ?Sized,
    F: ScalarField + ?Sized,
{
    Ok(functionals(wm, grid)?.i_ghy)
}
