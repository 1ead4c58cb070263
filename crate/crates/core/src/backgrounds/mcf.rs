use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_dual::{first_derivative, gradient, Dual64, DualDVec64, DualNum};
use serde::Deserialize;

use super::{
    background_point, BackgroundPoint, CatalogBackground, RicciFlowBackground, Snapshot,
    POLE_MARGIN,
};
use crate::geometry::{scalar_jet, ChartPoint, MetricField, ScalarField};
use crate::hypersurface::{hypersurface_data, ClosedFormImmersion, HypersurfaceData};
use crate::{Error, Result};

/// A time family of immersions `F_t : M^n → O^{n+1}` with its closed-form
/// mean curvature. Backward flows are parametrised by `τ`.
pub trait McfSolution: Sync {
    fn name(&self) -> &str;

    /// Dimension `n` of `M`.
    fn dim(&self) -> usize;

    /// The flow exists for times in `(0, horizon)`.
    fn horizon(&self) -> f64 {
        f64::INFINITY
    }

    fn check_point(&self, t: f64, x: &[f64]) -> Result<()>;

    fn immersion<D: DualNum<Primitive = f64>>(&self, t: D, x: &[D]) -> Vec<D>;

    /// Mean curvature with respect to the normal selected by
    /// [`normal_hint`](Self::normal_hint).
    fn mean_curvature<D: DualNum<Primitive = f64>>(&self, t: D, x: &[D]) -> D;

    fn normal_hint(&self, t: f64, x: &[f64]) -> DVector<f64>;

    fn sample_box(&self) -> Vec<(f64, f64)>;
}

/// `F_t` at a fixed time.
#[derive(Debug, Clone, Copy)]
pub struct McfSlice<'a, M: ?Sized> {
    mcf: &'a M,
    t: f64,
}

impl<'a, M: McfSolution + ?Sized> McfSlice<'a, M> {
    pub fn new(mcf: &'a M, t: f64) -> Self {
        McfSlice { mcf, t }
    }
}

impl<M: McfSolution> ClosedFormImmersion for McfSlice<'_, M> {
    fn dim(&self) -> usize {
        self.mcf.dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        self.mcf.check_point(self.t, x)
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, x: &[D]) -> Vec<D> {
        self.mcf.immersion(D::from(self.t), x)
    }

    fn normal_hint(&self, x: &[f64]) -> DVector<f64> {
        self.mcf.normal_hint(self.t, x)
    }
}

/// Unit vector of `ℝ^{n+1}` in hyperspherical angles.
pub fn hyperspherical<D: DualNum<Primitive = f64>>(x: &[D]) -> Vec<D> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 1);
    let mut w = D::from(1.0);
    for a in x {
        out.push(w.clone() * a.clone().cos());
        w *= a.clone().sin();
    }
    out.push(w);
    out
}

fn check_angles(x: &[f64]) -> Result<()> {
    let polar = &x[..x.len().saturating_sub(1)];
    if polar.iter().any(|&a| a <= 0.0 || a >= PI) {
        return Err(Error::domain(x, "polar angle outside (0, π)"));
    }
    Ok(())
}

fn angle_box(n: usize) -> Vec<(f64, f64)> {
    let mut b = vec![(POLE_MARGIN, PI - POLE_MARGIN); n.saturating_sub(1)];
    b.push((0.0, 2.0 * PI));
    b
}

/// Closed-form flows addressable by name.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogMcf {
    /// `F_t = r(t) ω` in Euclidean space with `r = √(r0² − 2nt)`.
    ShrinkingSphere { n: usize, r0: f64 },
    /// The totally geodesic `{y¹ = π/2}` in a round sphere.
    Equator { n: usize },
    /// `{y^{n+1} = 0}` in Euclidean space.
    StaticPlane { n: usize },
}

pub const MCF_NAMES: [&str; 3] = ["shrinking_sphere_flat", "equator_in_sphere", "static_plane_flat"];

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct McfParams {
    n: Option<usize>,
    r0: Option<f64>,
}

/// Builds a catalog flow compatible with `bg`. `params` may carry `n` (must
/// equal `dim O − 1`) and, for the sphere, `r0`.
pub fn model_mcf(name: &str, params: &serde_json::Value, bg: &CatalogBackground) -> Result<CatalogMcf> {
    let p: McfParams = if params.is_null() {
        McfParams::default()
    } else {
        serde_json::from_value(params.clone()).map_err(|e| Error::InvalidParams(e.to_string()))?
    };
    let n = bg.dim() - 1;
    if n == 0 {
        return Err(Error::Incompatible("hypersurfaces need dim O ≥ 2".into()));
    }
    if let Some(m) = p.n {
        if m != n {
            return Err(Error::Incompatible(format!(
                "{name} with n = {m} does not fit a {}-dimensional background",
                bg.dim()
            )));
        }
    }
    let flat_only = |model: CatalogMcf| {
        if bg.is_flat() {
            Ok(model)
        } else {
            Err(Error::Incompatible(format!("{name} needs a flat background, got {}", bg.name())))
        }
    };
    match name {
        "shrinking_sphere_flat" => {
            let r0 = p.r0.unwrap_or(1.0);
            if !(r0 > 0.0 && r0.is_finite()) {
                return Err(Error::InvalidParams(format!("r0 must be positive, got {r0}")));
            }
            flat_only(CatalogMcf::ShrinkingSphere { n, r0 })
        }
        "static_plane_flat" | "equator_in_sphere" if p.r0.is_some() => {
            Err(Error::InvalidParams(format!("{name} takes no r0")))
        }
        "static_plane_flat" => flat_only(CatalogMcf::StaticPlane { n }),
        "equator_in_sphere" => match bg {
            CatalogBackground::RoundSphere { .. } => Ok(CatalogMcf::Equator { n }),
            _ => Err(Error::Incompatible(format!(
                "equator_in_sphere needs round_sphere, got {}",
                bg.name()
            ))),
        },
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

impl CatalogMcf {
    pub fn radius<D: DualNum<Primitive = f64>>(&self, t: D) -> Option<D> {
        match *self {
            CatalogMcf::ShrinkingSphere { n, r0 } => Some((-t * (2.0 * n as f64) + r0 * r0).sqrt()),
            _ => None,
        }
    }
}

impl McfSolution for CatalogMcf {
    fn name(&self) -> &str {
        match self {
            CatalogMcf::ShrinkingSphere { .. } => "shrinking_sphere_flat",
            CatalogMcf::Equator { .. } => "equator_in_sphere",
            CatalogMcf::StaticPlane { .. } => "static_plane_flat",
        }
    }

    fn dim(&self) -> usize {
        match *self {
            CatalogMcf::ShrinkingSphere { n, .. }
            | CatalogMcf::Equator { n }
            | CatalogMcf::StaticPlane { n } => n,
        }
    }

    fn horizon(&self) -> f64 {
        match *self {
            CatalogMcf::ShrinkingSphere { n, r0 } => r0 * r0 / (2.0 * n as f64),
            _ => f64::INFINITY,
        }
    }

    fn check_point(&self, t: f64, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !(t > 0.0 && t < self.horizon()) {
            return Err(Error::domain(x, format!("time {t} outside the flow interval")));
        }
        match self {
            CatalogMcf::StaticPlane { .. } => Ok(()),
            _ => check_angles(x),
        }
    }

    fn immersion<D: DualNum<Primitive = f64>>(&self, t: D, x: &[D]) -> Vec<D> {
        match self {
            CatalogMcf::ShrinkingSphere { .. } => {
                let r = self.radius(t).expect("sphere radius");
                hyperspherical(x).into_iter().map(|w| w * r.clone()).collect()
            }
            CatalogMcf::Equator { .. } => {
                let mut y = Vec::with_capacity(x.len() + 1);
                y.push(D::from(FRAC_PI_2));
                y.extend(x.iter().cloned());
                y
            }
            CatalogMcf::StaticPlane { .. } => {
                let mut y = x.to_vec();
                y.push(D::from(0.0));
                y
            }
        }
    }

    fn mean_curvature<D: DualNum<Primitive = f64>>(&self, t: D, _x: &[D]) -> D {
        match *self {
            CatalogMcf::ShrinkingSphere { n, .. } => {
                self.radius(t).expect("sphere radius").recip() * n as f64
            }
            _ => D::from(0.0),
        }
    }

    fn normal_hint(&self, _t: f64, x: &[f64]) -> DVector<f64> {
        let n = self.dim();
        match self {
            CatalogMcf::ShrinkingSphere { .. } => DVector::from_vec(hyperspherical(x)),
            CatalogMcf::Equator { .. } => DVector::from_fn(n + 1, |a, _| if a == 0 { 1.0 } else { 0.0 }),
            CatalogMcf::StaticPlane { .. } => {
                DVector::from_fn(n + 1, |a, _| if a == n { 1.0 } else { 0.0 })
            }
        }
    }

    fn sample_box(&self) -> Vec<(f64, f64)> {
        match *self {
            CatalogMcf::StaticPlane { n } => vec![(-1.0, 1.0); n],
            CatalogMcf::ShrinkingSphere { n, .. } | CatalogMcf::Equator { n } => angle_box(n),
        }
    }
}

/// Round sphere of fixed radius about the origin of `ℝ^{n+1}`, outward
/// normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSurface {
    pub n: usize,
    pub radius: f64,
}

impl SphereSurface {
    /// The sphere of radius `√(2nτ)`, which moves self-similarly in the
    /// Gaussian shrinker.
    pub fn self_similar(n: usize, tau: f64) -> Self {
        SphereSurface {
            n,
            radius: (2.0 * n as f64 * tau).sqrt(),
        }
    }
}

impl ClosedFormImmersion for SphereSurface {
    fn dim(&self) -> usize {
        self.n
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_angles(x)
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, x: &[D]) -> Vec<D> {
        hyperspherical(x).into_iter().map(|w| w * self.radius).collect()
    }

    fn normal_hint(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(hyperspherical(x))
    }
}

/// Exact `∂F/∂t`.
pub fn velocity<M: McfSolution>(mcf: &M, x: &ChartPoint, t: f64) -> Result<DVector<f64>> {
    x.expect_dim(mcf.dim())?;
    mcf.check_point(t, x.coords())?;
    let xd: Vec<Dual64> = x.coords().iter().map(|&c| Dual64::from(c)).collect();
    let parts: Vec<(f64, f64)> = first_derivative(|s: Dual64| mcf.immersion(s, &xd), t);
    Ok(DVector::from_iterator(parts.len(), parts.into_iter().map(|(_, e)| e)))
}

/// Everything known about a flow at one `(x, t)`.
#[derive(Debug, Clone)]
pub struct FlowPointData {
    pub t: f64,
    /// Engine evaluation in `g(t)`.
    pub surface: HypersurfaceData,
    pub velocity: DVector<f64>,
    /// Closed-form mean curvature and its derivatives.
    pub mean_curvature: f64,
    pub dh_dt: f64,
    pub dh_dx: DVector<f64>,
    pub background: BackgroundPoint,
}

pub fn flow_point_data<B, M>(bg: &B, mcf: &M, x: &ChartPoint, t: f64) -> Result<FlowPointData>
where
    B: RicciFlowBackground,
    M: McfSolution,
{
    if mcf.dim() + 1 != bg.dim() {
        return Err(Error::Dimension {
            expected: bg.dim() - 1,
            got: mcf.dim(),
        });
    }
    let surface = hypersurface_data(&Snapshot::new(bg, t), &McfSlice::new(mcf, t), x)?;
    let vel = velocity(mcf, x, t)?;
    let mut z = Vec::with_capacity(x.dim() + 1);
    z.push(t);
    z.extend_from_slice(x.coords());
    let (h, dh) = gradient(
        |z: DVector<DualDVec64>| mcf.mean_curvature(z[0].clone(), &z.as_slice()[1..]),
        &DVector::from_vec(z),
    );
    let y = ChartPoint::new(surface.point.iter().copied().collect())?;
    let background = background_point(bg, &y, t)?;
    Ok(FlowPointData {
        t,
        surface,
        velocity: vel,
        mean_curvature: h,
        dh_dt: dh[0],
        dh_dx: dh.rows(1, x.dim()).into_owned(),
        background,
    })
}

/// `H + sign · ν(f)` on a hypersurface of the ambient space.
pub fn mcf_soliton_residual<M, I, F>(ambient: &M, surface: &I, f: &F, sign: f64, x: &ChartPoint) -> Result<f64>
where
    M: MetricField + ?Sized,
    I: ClosedFormImmersion + ?Sized,
    F: ScalarField + ?Sized,
{
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParams(format!("sign must be ±1, got {sign}")));
    }
    let data = hypersurface_data(ambient, surface, x)?;
    let y = ChartPoint::new(data.point.iter().copied().collect())?;
    let df = scalar_jet(f, &y)?.grad;
    Ok(data.mean_curvature + sign * data.normal.dot(&df))
}
