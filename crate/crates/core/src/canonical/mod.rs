//! Canonical expanding, shrinking and steady soliton metrics on space-time.
//!
//! For a background `g(t)` on `O^m` the space-time metric lives on
//! `O × (0, T]` with coordinates `z = (t, y)`, time first. Writing `a` for the
//! time-time component:
//!
//! | variant   | spatial block | `a`                              | potential  | constant |
//! |-----------|---------------|----------------------------------|------------|----------|
//! | expanding | `g/t`         | `N/(2t³) + R/t + m/(2t²)`        | `−N/(2t)`  | `+½`     |
//! | shrinking | `g/τ`         | `N/(2τ³) + R/τ − m/(2τ²)`        | `N/(2τ)`   | `−½`     |
//! | steady    | `g`           | `N + R`                          | `−Nτ`      | `0`      |

use nalgebra::{DMatrix, DVector};
use num_dual::DualNum;
use serde::{Deserialize, Serialize};

use crate::backgrounds::{background_point, BackgroundPoint, FlowDirection, RicciFlowBackground};
use crate::geometry::{
    curvature_with, hessian_from_parts, norm_with_inverse, scalar_jet_with, Backend, ChartPoint,
    ClosedFormMetric, ClosedFormScalar, ConnectionCoeffs, SymTensor2,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Expanding,
    Shrinking,
    Steady,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Expanding, Variant::Shrinking, Variant::Steady];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Expanding => "expanding",
            Variant::Shrinking => "shrinking",
            Variant::Steady => "steady",
        }
    }

    pub fn required_direction(self) -> FlowDirection {
        match self {
            Variant::Expanding => FlowDirection::Forward,
            Variant::Shrinking | Variant::Steady => FlowDirection::Backward,
        }
    }

    /// `c` in `E_N = Ric + Hess f + c · g`.
    pub fn soliton_constant(self) -> f64 {
        match self {
            Variant::Expanding => 0.5,
            Variant::Shrinking => -0.5,
            Variant::Steady => 0.0,
        }
    }

    /// The factor `1/t`, `1/τ` or `1` on the spatial block.
    pub fn spatial_scale<D: DualNum<Primitive = f64>>(self, t: D) -> D {
        match self {
            Variant::Expanding | Variant::Shrinking => t.recip(),
            Variant::Steady => D::from(1.0),
        }
    }

    /// `a = k(t) N + c(t, R)`; returns `(k, c)`.
    fn time_time_parts<D: DualNum<Primitive = f64>>(self, t: D, r: D, m: usize) -> (D, D) {
        let m = m as f64;
        match self {
            Variant::Expanding => (
                t.powi(3).recip() * 0.5,
                r / t.clone() + t.powi(2).recip() * (0.5 * m),
            ),
            Variant::Shrinking => (
                t.powi(3).recip() * 0.5,
                r / t.clone() - t.powi(2).recip() * (0.5 * m),
            ),
            Variant::Steady => (D::from(1.0), r),
        }
    }

    pub fn potential<D: DualNum<Primitive = f64>>(self, n: f64, t: D) -> D {
        match self {
            Variant::Expanding => t.recip() * (-0.5 * n),
            Variant::Shrinking => t.recip() * (0.5 * n),
            Variant::Steady => t * -n,
        }
    }
}

/// A canonical soliton metric built from a background.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMetric<B> {
    bg: B,
    variant: Variant,
    n: f64,
}

impl<B: RicciFlowBackground> CanonicalMetric<B> {
    /// Checks the flow direction and `N > 0`; positivity on a sample set is
    /// checked by [`build_canonical_metric`].
    pub fn new(bg: B, variant: Variant, n: f64) -> Result<Self> {
        if bg.direction() != variant.required_direction() {
            return Err(Error::DirectionMismatch {
                variant: variant.as_str(),
                required: variant.required_direction().as_str(),
            });
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParams(format!("N must be positive, got {n}")));
        }
        Ok(CanonicalMetric { bg, variant, n })
    }

    pub fn background(&self) -> &B {
        &self.bg
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Same background and variant with another `N`.
    pub fn with_n(&self, n: f64) -> Result<Self>
    where
        B: Clone,
    {
        CanonicalMetric::new(self.bg.clone(), self.variant, n)
    }

    /// Time-time component `a(t, y)`.
    pub fn time_time<D: DualNum<Primitive = f64>>(&self, t: D, y: &[D]) -> D {
        let r = self.bg.scalar_curvature(t.clone(), y);
        let (k, c) = self.variant.time_time_parts(t, r, self.bg.dim());
        k * self.n + c
    }

    pub fn potential(&self) -> CanonicalPotential {
        CanonicalPotential {
            variant: self.variant,
            n: self.n,
            dim: self.bg.dim() + 1,
        }
    }

    pub fn soliton_constant(&self) -> f64 {
        self.variant.soliton_constant()
    }
}

impl<B: RicciFlowBackground> ClosedFormMetric for CanonicalMetric<B> {
    fn dim(&self) -> usize {
        self.bg.dim() + 1
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        self.bg.check_point(p[0], &p[1..])
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> Vec<D> {
        let m = self.bg.dim();
        let d = m + 1;
        let (t, y) = (p[0].clone(), &p[1..]);
        let g = self.bg.metric(t.clone(), y);
        let s = self.variant.spatial_scale(t.clone());
        let mut out = vec![D::from(0.0); d * d];
        out[0] = self.time_time(t, y);
        for i in 0..m {
            for j in 0..m {
                out[(i + 1) * d + j + 1] = g[i * m + j].clone() * s.clone();
            }
        }
        out
    }
}

/// The canonical potential `f(t)` as a scalar field on space-time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalPotential {
    variant: Variant,
    n: f64,
    dim: usize,
}

impl ClosedFormScalar for CanonicalPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> D {
        self.variant.potential(self.n, p[0].clone())
    }
}

/// Smallest `N` making `a ≥ 1` at every sample `(t, y)`, clipped at zero.
pub fn minimal_admissible_n<B: RicciFlowBackground>(
    bg: &B,
    variant: Variant,
    samples: &[(f64, ChartPoint)],
) -> f64 {
    samples
        .iter()
        .map(|(t, y)| {
            let r: f64 = bg.scalar_curvature(*t, y.coords());
            let (k, c) = variant.time_time_parts(*t, r, bg.dim());
            (1.0 - c) / k
        })
        .fold(0.0, f64::max)
}

/// Builds the canonical metric and rejects `N` below the admissible
/// threshold on the sample set.
pub fn build_canonical_metric<B: RicciFlowBackground>(
    bg: B,
    variant: Variant,
    n: f64,
    samples: &[(f64, ChartPoint)],
) -> Result<CanonicalMetric<B>> {
    let minimal = minimal_admissible_n(&bg, variant, samples);
    let cm = CanonicalMetric::new(bg, variant, n)?;
    if n < minimal {
        return Err(Error::BelowAdmissibleN { n, minimal });
    }
    Ok(cm)
}

/// A residual with its norm and its `N`-scaled norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<T> {
    pub residual: T,
    pub norm: f64,
    pub scaled: f64,
}

/// `E_N = Ric + Hess f + c·g` of the canonical metric, computed by the
/// geometry engine, with `|E_N|` in the canonical metric.
pub fn ricci_soliton_residual<B: RicciFlowBackground>(
    cm: &CanonicalMetric<B>,
    p: &ChartPoint,
    backend: Backend,
) -> Result<ResidualReport<SymTensor2>> {
    let c = curvature_with(cm, p, backend)?;
    let f = scalar_jet_with(&cm.potential(), p, backend)?;
    let hess = hessian_from_parts(&c.connection, &f);
    let e = SymTensor2::covariant(
        c.ricci.entries() + hess.entries() + &c.metric * cm.soliton_constant(),
    );
    let norm = norm_with_inverse(&c.inverse, &e);
    Ok(ResidualReport {
        residual: e,
        norm,
        scaled: cm.n() * norm,
    })
}

/// `Ric(X, X) + X(R) + ½(∂_t R + R/t)` from background data.
pub fn limit_ricci<B: RicciFlowBackground>(
    bg: &B,
    x: &DVector<f64>,
    y: &ChartPoint,
    t: f64,
) -> Result<f64> {
    if bg.direction() != FlowDirection::Forward {
        return Err(Error::DirectionMismatch {
            variant: "limit Ricci",
            required: "forward",
        });
    }
    if !(t > 0.0) {
        return Err(Error::domain(y.coords(), "limit Ricci needs t > 0"));
    }
    let bp = background_point(bg, y, t)?;
    Ok(bp.ric(x, x) + bp.dr(x) + 0.5 * (bp.dr_dt + bp.scalar / t))
}

/// `Ric_g(X̄, X̄)` of the canonical metric with `X̄ = X + ∂_t`.
pub fn lifted_ricci<B: RicciFlowBackground>(
    cm: &CanonicalMetric<B>,
    x: &DVector<f64>,
    p: &ChartPoint,
    backend: Backend,
) -> Result<f64> {
    let ric = curvature_with(cm, p, backend)?.ricci;
    let mut v = DVector::zeros(x.len() + 1);
    v[0] = 1.0;
    v.rows_mut(1, x.len()).copy_from(x);
    Ok(ric.contract(&v, &v))
}

/// Which closed form of the Christoffel symbols to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedForm {
    /// The expressions exactly as printed in the literature.
    Printed,
    /// Expressions re-derived from the metric.
    Derived,
}

/// Families of Christoffel symbols by index type (`α, β, γ` spatial).
pub const CHRISTOFFEL_FAMILIES: [&str; 6] =
    ["Γ^α_βγ", "Γ^α_β0", "Γ^α_00", "Γ^0_βγ", "Γ^0_β0", "Γ^0_00"];

/// Family index of `Γ^a_{bc}`.
pub fn christoffel_family(a: usize, b: usize, c: usize) -> usize {
    match (a == 0, (b == 0) as u8 + (c == 0) as u8) {
        (false, 0) => 0,
        (false, 1) => 1,
        (false, _) => 2,
        (true, 0) => 3,
        (true, 1) => 4,
        (true, _) => 5,
    }
}

/// Christoffel symbols of the canonical metric from background data.
pub fn canonical_christoffel_closed_form<B: RicciFlowBackground>(
    cm: &CanonicalMetric<B>,
    p: &ChartPoint,
    form: ClosedForm,
) -> Result<ConnectionCoeffs> {
    p.expect_dim(cm.bg.dim() + 1)?;
    let t = p.coords()[0];
    let y = ChartPoint::new(p.coords()[1..].to_vec())?;
    let bp = background_point(&cm.bg, &y, t)?;
    Ok(christoffel_from_background(cm, &bp, form))
}

fn christoffel_from_background<B: RicciFlowBackground>(
    cm: &CanonicalMetric<B>,
    bp: &BackgroundPoint,
    form: ClosedForm,
) -> ConnectionCoeffs {
    let m = cm.bg.dim();
    let t = bp.t;
    let mf = m as f64;
    let r = bp.scalar;
    let a = {
        let (k, c) = cm.variant.time_time_parts(t, r, m);
        k * cm.n + c
    };
    let ric_mixed = bp.ricci_mixed();
    let printed = form == ClosedForm::Printed;
    let mut gamma = ConnectionCoeffs::zeros(m + 1);

    // Γ^α_{βγ} = Γ^O in every variant
    for al in 0..m {
        for be in 0..m {
            for ga in 0..m {
                gamma.set(al + 1, be + 1, ga + 1, bp.connection.get(al, be, ga));
            }
        }
    }
    // Γ^α_00 = −½ g^{αβ} ∂_β R; printed with the lowered metric
    let raise = if printed { &bp.metric } else { &bp.inverse };
    let grad_r: DVector<f64> = raise * &bp.dr_dy;
    for al in 0..m {
        gamma.set(al + 1, 0, 0, -0.5 * grad_r[al]);
    }

    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let (mixed, time_spatial, time_mixed, time_time): (
        DMatrix<f64>,
        DMatrix<f64>,
        DVector<f64>,
        f64,
    ) = match cm.variant {
        Variant::Expanding => {
            let mixed = DMatrix::from_fn(m, m, |i, j| -(ric_mixed[(i, j)] + delta(i, j) / (2.0 * t)));
            let ts = (&bp.ricci / t + &bp.metric / (2.0 * t * t)) / a;
            let tm = &bp.dr_dy / (2.0 * t * a);
            let r_coef = if printed { r / t } else { 2.0 * r / t };
            let tt = -1.5 / t + (r_coef + bp.dr_dt + mf / (2.0 * t * t)) / (2.0 * t * a);
            (mixed, ts, tm, tt)
        }
        Variant::Shrinking => {
            let mixed = DMatrix::from_fn(m, m, |i, j| ric_mixed[(i, j)] - delta(i, j) / (2.0 * t));
            let ts = if printed {
                (-(&bp.metric / (2.0 * t * t) - &bp.ricci) / t) / a
            } else {
                (&bp.metric / (2.0 * t * t) - &bp.ricci / t) / a
            };
            let tm = &bp.dr_dy / (2.0 * t * a);
            let tt = if printed {
                -1.5 / t + (r / t + bp.dr_dt + mf / (2.0 * t * t)) / (2.0 * t * a)
            } else {
                -1.5 / t + (2.0 * r / t + bp.dr_dt - mf / (2.0 * t * t)) / (2.0 * t * a)
            };
            (mixed, ts, tm, tt)
        }
        Variant::Steady => {
            let mixed = ric_mixed.clone();
            let ts = -&bp.ricci / (cm.n + r);
            let (tm, tt) = if printed {
                (&bp.dr_dy * 0.5, 0.5 * bp.dr_dt)
            } else {
                (&bp.dr_dy / (2.0 * a), bp.dr_dt / (2.0 * a))
            };
            (mixed, ts, tm, tt)
        }
    };
    for al in 0..m {
        for be in 0..m {
            gamma.set_sym(al + 1, be + 1, 0, mixed[(al, be)]);
            gamma.set(0, al + 1, be + 1, time_spatial[(al, be)]);
        }
        gamma.set_sym(0, al + 1, 0, time_mixed[al]);
    }
    gamma.set(0, 0, 0, time_time);
    gamma
}
