//! The space-time track `Σ = {(t, F_t(x))}` of a mean curvature flow inside a
//! canonical soliton metric.
//!
//! The chart on `Σ` is `z = (t, x)`, time first, so index 0 of every tensor
//! on `Σ` is the time slot. For flows with purely normal velocity the
//! coordinate vector `∂_t` of this chart is `∂_t − Hν` in space-time.
//!
//! `h^Σ` uses the same sign as the hypersurface module,
//! `h^Σ(U, V) = −ǧ(∇̌_U V, ν^Σ)`, with `ν^Σ` the unit normal having positive
//! pairing with the lifted slice normal `ν`. With this choice the spatial
//! block tends to `h_ij / (t σ_N)` with the sign of `h`.

use nalgebra::{DMatrix, DVector};
use num_dual::{first_derivative, Dual64, DualNum};
use serde::{Deserialize, Serialize};

use crate::backgrounds::{flow_point_data, FlowPointData, McfSolution, RicciFlowBackground};
use crate::canonical::{CanonicalMetric, ResidualReport, Variant};
use crate::geometry::{inner, Backend, ChartPoint, FiniteDifference};
use crate::hypersurface::{hypersurface_from_jet, immersion_jet, ClosedFormImmersion, HypersurfaceData};
use crate::{Error, Result};

/// A flow together with the canonical metric it is tracked in.
#[derive(Debug, Clone)]
pub struct SpaceTimeTrack<B, M> {
    cm: CanonicalMetric<B>,
    mcf: M,
    t_min: f64,
}

impl<B: RicciFlowBackground, M: McfSolution> SpaceTimeTrack<B, M> {
    pub fn new(cm: CanonicalMetric<B>, mcf: M) -> Result<Self> {
        let m = cm.background().dim();
        if mcf.dim() + 1 != m {
            return Err(Error::Dimension {
                expected: m - 1,
                got: mcf.dim(),
            });
        }
        Ok(SpaceTimeTrack { cm, mcf, t_min: 0.0 })
    }

    /// Rejects evaluation below `t_min`.
    pub fn with_t_min(mut self, t_min: f64) -> Self {
        self.t_min = t_min;
        self
    }

    pub fn canonical(&self) -> &CanonicalMetric<B> {
        &self.cm
    }

    pub fn mcf(&self) -> &M {
        &self.mcf
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn variant(&self) -> Variant {
        self.cm.variant()
    }

    fn check_time(&self, t: f64, x: &ChartPoint) -> Result<()> {
        if !(t > 0.0) || t < self.t_min {
            return Err(Error::domain(
                x.coords(),
                format!("time {t} below t_min = {}", self.t_min),
            ));
        }
        Ok(())
    }
}

/// `(t, x) ↦ (t, F_t(x))`.
struct TrackMap<'a, M> {
    mcf: &'a M,
}

impl<M: McfSolution> ClosedFormImmersion for TrackMap<'_, M> {
    fn dim(&self) -> usize {
        self.mcf.dim() + 1
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        self.mcf.check_point(z[0], &z[1..])
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, z: &[D]) -> Vec<D> {
        let mut out = Vec::with_capacity(z.len() + 1);
        out.push(z[0].clone());
        out.extend(self.mcf.immersion(z[0].clone(), &z[1..]));
        out
    }

    fn normal_hint(&self, z: &[f64]) -> DVector<f64> {
        lift(&self.mcf.normal_hint(z[0], &z[1..]))
    }
}

/// Space-time vector `(0, v)`.
fn lift(v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len() + 1);
    out.rows_mut(1, v.len()).copy_from(v);
    out
}

/// Scale `t`, `τ` or `1` multiplying the spatial inverse metric and dividing
/// the second fundamental form.
fn time_scale(variant: Variant, t: f64) -> f64 {
    match variant {
        Variant::Expanding | Variant::Shrinking => t,
        Variant::Steady => 1.0,
    }
}

/// Everything about `Σ` at one point.
#[derive(Debug, Clone)]
pub struct TrackPointData {
    pub t: f64,
    pub x: ChartPoint,
    pub n: f64,
    /// Time-time component `a` of the canonical metric at `F_t(x)`.
    pub time_time: f64,
    /// Engine data of `Σ` in the canonical metric.
    pub track: HypersurfaceData,
    /// Closed-form `σ_N`.
    pub sigma: f64,
    /// Closed-form `ν^Σ`.
    pub normal_closed: DVector<f64>,
    /// `ν^Σ f` from the engine normal.
    pub normal_potential: f64,
    /// Data of the slice `M_t` in `g(t)`.
    pub slice: FlowPointData,
}

impl TrackPointData {
    pub fn induced_metric(&self) -> &DMatrix<f64> {
        &self.track.induced
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.track.inverse
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.track.normal
    }

    pub fn second_ff(&self) -> &DMatrix<f64> {
        &self.track.second_ff
    }

    pub fn mean_curvature(&self) -> f64 {
        self.track.mean_curvature
    }

    /// Slice mean curvature (closed form).
    pub fn slice_mean_curvature(&self) -> f64 {
        self.slice.mean_curvature
    }

    /// Largest `|ǧ(ν^Σ, ν^Σ) − 1|` and `|ǧ(ν^Σ, E_a)|` over the chart basis.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = &self.track.ambient_metric;
        let nu = &self.track.normal;
        let mut d = (inner(g, nu, nu) - 1.0).abs();
        for c in self.track.tangents.column_iter() {
            d = d.max(inner(g, nu, &c.into_owned()).abs());
        }
        d
    }
}

pub fn track_point_data<B, M>(
    track: &SpaceTimeTrack<B, M>,
    x: &ChartPoint,
    t: f64,
    backend: Backend,
) -> Result<TrackPointData>
where
    B: RicciFlowBackground,
    M: McfSolution,
{
    track.check_time(t, x)?;
    let cm = &track.cm;
    let slice = flow_point_data(cm.background(), &track.mcf, x, t)?;
    let mut z = Vec::with_capacity(x.dim() + 1);
    z.push(t);
    z.extend_from_slice(x.coords());
    let map = TrackMap { mcf: &track.mcf };
    let hint = map.normal_hint(&z);
    let jet = immersion_jet(&map, &ChartPoint::new(z)?)?;
    let data = match backend {
        Backend::Analytic => hypersurface_from_jet(cm, &jet, &hint)?,
        Backend::Fd => hypersurface_from_jet(&FiniteDifference(cm), &jet, &hint)?,
    };

    let y = slice.surface.point.as_slice();
    let a: f64 = cm.time_time(t, y);
    let h = slice.mean_curvature;
    let s = time_scale(cm.variant(), t);
    let sigma = match cm.variant() {
        Variant::Steady => (1.0 + h * h / a).sqrt(),
        _ => (1.0 / s + h * h / (s * s * a)).sqrt(),
    };
    let mut normal_closed = lift(&slice.surface.normal);
    normal_closed[0] = h / (s * a);
    normal_closed /= sigma;

    let df_dt = first_derivative(|s: Dual64| cm.variant().potential(cm.n(), s), t).1;
    let normal_potential = data.normal[0] * df_dt;
    Ok(TrackPointData {
        t,
        x: x.clone(),
        n: cm.n(),
        time_time: a,
        track: data,
        sigma,
        normal_closed,
        normal_potential,
        slice,
    })
}

/// Closed-form `ν^Σ f` from slice data.
pub fn closed_form_normal_potential(variant: Variant, p: &TrackPointData) -> f64 {
    let (h, n, a, s, t) = (p.slice.mean_curvature, p.n, p.time_time, p.sigma, p.t);
    match variant {
        Variant::Expanding => h * n / (2.0 * t.powi(3) * a * s),
        Variant::Shrinking => -h * n / (2.0 * t.powi(3) * a * s),
        Variant::Steady => -h * n / (a * s),
    }
}

/// Closed-form induced metric of `Σ`: `g/t` spatially (`g/τ`, `g`), time-time
/// `H²/t + a` (`H²/τ + a`, `H² + a`), mixed entries zero.
pub fn closed_form_induced_metric(variant: Variant, p: &TrackPointData) -> DMatrix<f64> {
    let k = p.x.dim();
    let s = time_scale(variant, p.t);
    let h = p.slice.mean_curvature;
    let mut g = DMatrix::zeros(k + 1, k + 1);
    g[(0, 0)] = h * h / s + p.time_time;
    g.view_mut((1, 1), (k, k)).copy_from(&(&p.slice.surface.induced / s));
    g
}

/// Closed-form inverse of the induced metric.
pub fn closed_form_inverse_metric(variant: Variant, p: &TrackPointData) -> DMatrix<f64> {
    let k = p.x.dim();
    let s = time_scale(variant, p.t);
    let h = p.slice.mean_curvature;
    let mut g = DMatrix::zeros(k + 1, k + 1);
    g[(0, 0)] = s / (h * h + s * p.time_time);
    g.view_mut((1, 1), (k, k)).copy_from(&(&p.slice.surface.inverse * s));
    g
}

/// Degenerate `N → ∞` limit of the inverse induced metric: `t g^{ij}`
/// (`τ g^{ij}`, `g^{ij}`) with zero time row and column.
pub fn limit_inverse_metric(variant: Variant, p: &TrackPointData) -> DMatrix<f64> {
    let mut g = closed_form_inverse_metric(variant, p);
    g[(0, 0)] = 0.0;
    g
}

/// `N`-independent bound on the time-time entry of the inverse induced metric,
/// valid once `N ≥ minimal admissible N`: `2t³/N`, `2τ³/N` or `1/N`.
pub fn inverse_time_time_bound(variant: Variant, t: f64, n: f64) -> f64 {
    match variant {
        Variant::Expanding | Variant::Shrinking => 2.0 * t.powi(3) / n,
        Variant::Steady => 1.0 / n,
    }
}

/// Which closed form of `h^Σ` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondFfForm {
    /// Full expression as printed.
    Printed,
    /// Leading-order expression as printed, without the `O(1/N)` terms.
    PrintedLeading,
    /// Full expression re-derived from the metric.
    Derived,
}

impl SecondFfForm {
    pub const ALL: [SecondFfForm; 3] = [SecondFfForm::Printed, SecondFfForm::PrintedLeading, SecondFfForm::Derived];

    pub fn as_str(self) -> &'static str {
        match self {
            SecondFfForm::Printed => "printed",
            SecondFfForm::PrintedLeading => "printed_leading",
            SecondFfForm::Derived => "derived",
        }
    }
}

/// Background and slice scalars entering the closed forms.
struct Ingredients {
    m: f64,
    n: f64,
    t: f64,
    s: f64,
    a: f64,
    sigma: f64,
    h: f64,
    dt_h: f64,
    dh: DVector<f64>,
    hij: DMatrix<f64>,
    gij: DMatrix<f64>,
    ric: DMatrix<f64>,
    ric_inu: DVector<f64>,
    ric_nunu: f64,
    nu_r: f64,
    fi_r: DVector<f64>,
    dt_r: f64,
    r: f64,
}

fn ingredients(variant: Variant, p: &TrackPointData) -> Ingredients {
    let sl = &p.slice;
    let bp = &sl.background;
    let tan = &sl.surface.tangents;
    let nu = &sl.surface.normal;
    let rn = &bp.ricci * nu;
    Ingredients {
        m: bp.metric.nrows() as f64,
        n: p.x.dim() as f64,
        t: p.t,
        s: time_scale(variant, p.t),
        a: p.time_time,
        sigma: p.sigma,
        h: sl.mean_curvature,
        dt_h: sl.dh_dt,
        dh: sl.dh_dx.clone(),
        hij: sl.surface.second_ff.clone(),
        gij: sl.surface.induced.clone(),
        ric: tan.transpose() * &bp.ricci * tan,
        ric_inu: tan.transpose() * &rn,
        ric_nunu: nu.dot(&rn),
        nu_r: bp.dr(nu),
        fi_r: tan.transpose() * &bp.dr_dy,
        dt_r: bp.dr_dt,
        r: bp.scalar,
    }
}

/// Closed-form `h^Σ` in the chart `(t, x)`.
pub fn closed_form_second_ff(variant: Variant, form: SecondFfForm, p: &TrackPointData) -> DMatrix<f64> {
    let q = ingredients(variant, p);
    let k = q.hij.nrows();
    let (ij, i0, tt, pref) = match variant {
        Variant::Expanding => expanding(&q, form),
        Variant::Shrinking => shrinking(&q, form),
        Variant::Steady => steady(&q, form),
    };
    let mut out = DMatrix::zeros(k + 1, k + 1);
    out[(0, 0)] = tt;
    for i in 0..k {
        out[(0, i + 1)] = i0[i];
        out[(i + 1, 0)] = i0[i];
    }
    out.view_mut((1, 1), (k, k)).copy_from(&ij);
    out * pref
}

type Blocks = (DMatrix<f64>, DVector<f64>, f64, f64);

fn expanding(q: &Ingredients, form: SecondFfForm) -> Blocks {
    let (t, h) = (q.s, q.h);
    let k = h / (t * q.a);
    let lead_i0 = &q.dh + &q.ric_inu;
    let lead_tt = q.dt_h + h / (2.0 * t) - h * q.ric_nunu + 0.5 * q.nu_r;
    let pref = 1.0 / (t * q.sigma);
    match form {
        SecondFfForm::PrintedLeading => (q.hij.clone(), lead_i0, lead_tt, pref),
        SecondFfForm::Printed => (
            &q.hij + (&q.ric + &q.gij / (2.0 * t)) * k,
            &lead_i0 - &q.fi_r * (0.5 * k),
            lead_tt
                + k * (h * h / (2.0 * t) + h * h * q.ric_nunu - h * h * q.nu_r - q.r / t - 0.5 * q.dt_r
                    + q.n / (4.0 * t * t)),
            pref,
        ),
        SecondFfForm::Derived => (
            &q.hij - (&q.ric + &q.gij / (2.0 * t)) * k,
            &lead_i0 + &q.ric_inu * (h * k) - &q.fi_r * (0.5 * k),
            lead_tt
                - k * (h * h * q.ric_nunu + h * h / (2.0 * t) - h * q.nu_r + q.r / t + 0.5 * q.dt_r
                    + q.m / (4.0 * t * t)),
            pref,
        ),
    }
}

fn shrinking(q: &Ingredients, form: SecondFfForm) -> Blocks {
    let (tau, h) = (q.s, q.h);
    let k = h / (tau * q.a);
    let lead_i0 = &q.dh - &q.ric_inu;
    let lead_tt = q.dt_h + h / (2.0 * tau) + h * q.ric_nunu + 0.5 * q.nu_r;
    let pref = 1.0 / (tau * q.sigma);
    match form {
        SecondFfForm::PrintedLeading => (q.hij.clone(), lead_i0, lead_tt, pref),
        SecondFfForm::Printed => (
            &q.hij + (&q.gij / (2.0 * tau) - &q.ric) * k,
            &lead_i0 - &q.fi_r * (0.5 * k),
            lead_tt
                + k * (-h * h / (2.0 * tau) + h * h * q.ric_nunu - h * h * q.nu_r - q.r / tau - 0.5 * q.dt_r
                    + q.n / (4.0 * tau * tau)),
            pref,
        ),
        SecondFfForm::Derived => (
            &q.hij + (&q.ric - &q.gij / (2.0 * tau)) * k,
            &lead_i0 - &q.ric_inu * (h * k) - &q.fi_r * (0.5 * k),
            lead_tt
                + k * (-h * h / (2.0 * tau) + h * h * q.ric_nunu + h * q.nu_r - q.r / tau - 0.5 * q.dt_r
                    + q.m / (4.0 * tau * tau)),
            pref,
        ),
    }
}

fn steady(q: &Ingredients, form: SecondFfForm) -> Blocks {
    let (tau, h, a) = (q.t, q.h, q.a);
    let lead_i0 = &q.dh - &q.ric_inu;
    let lead_tt = q.dt_h + h * q.ric_nunu + 0.5 * q.nu_r;
    match form {
        // printed with a stray 1/τ
        SecondFfForm::PrintedLeading => (q.hij.clone(), lead_i0, lead_tt, 1.0 / (tau * q.sigma)),
        SecondFfForm::Printed => (
            &q.hij + &q.ric * (h / a),
            &lead_i0 + &q.fi_r * (h / (2.0 * a)) + &q.ric_inu * (h * h / a),
            lead_tt + h * h * q.nu_r / (2.0 * a) - h * q.dt_r / (2.0 * a) - h.powi(3) * q.ric_nunu / a,
            1.0 / q.sigma,
        ),
        SecondFfForm::Derived => (
            &q.hij + &q.ric * (h / a),
            &lead_i0 - &q.ric_inu * (h * h / a) - &q.fi_r * (h / (2.0 * a)),
            lead_tt + h.powi(3) * q.ric_nunu / a + h * h * q.nu_r / a - h * q.dt_r / (2.0 * a),
            1.0 / q.sigma,
        ),
    }
}

/// `Ě_N = H^Σ − ν^Σ f` (expanding) or `H^Σ + ν^Σ f` (shrinking, steady) from
/// engine values.
pub fn mcf_canonical_residual(variant: Variant, p: &TrackPointData) -> ResidualReport<f64> {
    let sign = match variant {
        Variant::Expanding => -1.0,
        Variant::Shrinking | Variant::Steady => 1.0,
    };
    let residual = p.mean_curvature() + sign * p.normal_potential;
    ResidualReport {
        residual,
        norm: residual.abs(),
        scaled: p.n * residual.abs(),
    }
}

/// `h^Σ(V̄, V̄)` with `V̄ = E_0 + V^i E_i`, multiplied by `t σ_N` (`τ σ_N`,
/// `σ_N`) so that it has a finite limit as `N → ∞`.
pub fn stripped_second_ff(variant: Variant, p: &TrackPointData, v: &DVector<f64>) -> Result<f64> {
    let k = p.x.dim();
    if v.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: v.len(),
        });
    }
    let mut bar = DVector::zeros(k + 1);
    bar[0] = 1.0;
    bar.rows_mut(1, k).copy_from(v);
    let h = bar.dot(&(p.second_ff() * &bar));
    Ok(h * time_scale(variant, p.t) * p.sigma)
}
