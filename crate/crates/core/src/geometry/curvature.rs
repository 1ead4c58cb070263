use nalgebra::{DMatrix, DVector};

use super::{
    invert_metric, metric_jet, metric_jet_with, scalar_jet, Backend, ChartPoint, ConnectionCoeffs, MetricField, MetricJet,
    RiemannTensor, ScalarField, ScalarJet, SymTensor2, Variance,
};
use crate::{Error, Result};

/// `Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{bd} − ∂_d g_{bc})`.
pub fn christoffel_from_jet(jet: &MetricJet, ginv: &DMatrix<f64>) -> ConnectionCoeffs {
    let n = jet.value.nrows();
    let mut gamma = ConnectionCoeffs::zeros(n);
    for b in 0..n {
        for c in b..n {
            // lowered symbols Γ_{dbc}
            let lowered: Vec<f64> = (0..n)
                .map(|d| 0.5 * (jet.d1[b][(d, c)] + jet.d1[c][(b, d)] - jet.d1[d][(b, c)]))
                .collect();
            for a in 0..n {
                let s: f64 = (0..n).map(|d| ginv[(a, d)] * lowered[d]).sum();
                gamma.set_sym(a, b, c, s);
            }
        }
    }
    gamma
}

pub fn christoffel<M: MetricField + ?Sized>(metric: &M, p: &ChartPoint) -> Result<ConnectionCoeffs> {
    p.expect_dim(metric.dim())?;
    let jet = metric_jet(metric, p)?;
    let ginv = invert_metric(&jet.value, p.coords())?;
    Ok(christoffel_from_jet(&jet, &ginv))
}

/// Everything the kernel derives from a metric jet at one point.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub connection: ConnectionCoeffs,
    pub riemann: RiemannTensor,
    pub ricci: SymTensor2,
    pub scalar: f64,
}

/// Derivatives `∂_e Γ^a_{bc}` stored as `[e][a][b][c]`.
fn connection_derivative(
    jet: &MetricJet,
    ginv: &DMatrix<f64>,
    gamma: &ConnectionCoeffs,
) -> Vec<ConnectionCoeffs> {
    let n = jet.value.nrows();
    (0..n)
        .map(|e| {
            let mut out = ConnectionCoeffs::zeros(n);
            for b in 0..n {
                for c in b..n {
                    // ½ ∂_e A_{dbc} − ∂_e g_{dp} Γ^p_{bc}
                    let inner: Vec<f64> = (0..n)
                        .map(|d| {
                            let da = 0.5
                                * (jet.d2[e][b][(d, c)] + jet.d2[e][c][(b, d)]
                                    - jet.d2[e][d][(b, c)]);
                            let corr: f64 =
                                (0..n).map(|q| jet.d1[e][(d, q)] * gamma.get(q, b, c)).sum();
                            da - corr
                        })
                        .collect();
                    for a in 0..n {
                        let s: f64 = (0..n).map(|d| ginv[(a, d)] * inner[d]).sum();
                        out.set_sym(a, b, c, s);
                    }
                }
            }
            out
        })
        .collect()
}

pub fn curvature_from_jet(jet: &MetricJet, p: &ChartPoint) -> Result<Curvature> {
    let n = jet.value.nrows();
    let ginv = invert_metric(&jet.value, p.coords())?;
    let gamma = christoffel_from_jet(jet, &ginv);
    let dgamma = connection_derivative(jet, &ginv, &gamma);

    // Textbook R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb};
    // the stored tensor is its negative.
    let mut riemann = RiemannTensor::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = dgamma[c].get(a, d, b) - dgamma[d].get(a, c, b);
                    for e in 0..n {
                        r += gamma.get(a, c, e) * gamma.get(e, d, b)
                            - gamma.get(a, d, e) * gamma.get(e, c, b);
                    }
                    riemann.set(a, b, c, d, -r);
                }
            }
        }
    }
    let ric = DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| riemann.get(a, b, d, a)).sum());
    let ricci = SymTensor2::covariant(ric);
    let scalar = ginv.component_mul(ricci.entries()).sum();
    Ok(Curvature {
        metric: jet.value.clone(),
        inverse: ginv,
        connection: gamma,
        riemann,
        ricci,
        scalar,
    })
}

pub fn curvature<M: MetricField + ?Sized>(metric: &M, p: &ChartPoint) -> Result<Curvature> {
    p.expect_dim(metric.dim())?;
    let jet = metric_jet(metric, p)?;
    curvature_from_jet(&jet, p)
}

pub fn curvature_with<M: MetricField + ?Sized>(
    metric: &M,
    p: &ChartPoint,
    backend: Backend,
) -> Result<Curvature> {
    p.expect_dim(metric.dim())?;
    let jet = metric_jet_with(metric, p, backend)?;
    curvature_from_jet(&jet, p)
}

pub fn riemann<M: MetricField + ?Sized>(metric: &M, p: &ChartPoint) -> Result<RiemannTensor> {
    Ok(curvature(metric, p)?.riemann)
}

pub fn ricci<M: MetricField + ?Sized>(metric: &M, p: &ChartPoint) -> Result<SymTensor2> {
    Ok(curvature(metric, p)?.ricci)
}

pub fn scalar_curvature<M: MetricField + ?Sized>(metric: &M, p: &ChartPoint) -> Result<f64> {
    Ok(curvature(metric, p)?.scalar)
}

/// `Hess(f)_{ab} = ∂_a∂_b f − Γ^c_{ab} ∂_c f`.
pub fn hessian_from_parts(gamma: &ConnectionCoeffs, f: &ScalarJet) -> SymTensor2 {
    let n = gamma.dim();
    SymTensor2::covariant(DMatrix::from_fn(n, n, |a, b| {
        f.hess[(a, b)] - (0..n).map(|c| gamma.get(c, a, b) * f.grad[c]).sum::<f64>()
    }))
}

fn check_field_dims<M: MetricField + ?Sized, F: ScalarField + ?Sized>(
    metric: &M,
    f: &F,
) -> Result<()> {
    if metric.dim() != f.dim() {
        return Err(Error::Dimension {
            expected: metric.dim(),
            got: f.dim(),
        });
    }
    Ok(())
}

pub fn hessian<M: MetricField + ?Sized, F: ScalarField + ?Sized>(
    metric: &M,
    f: &F,
    p: &ChartPoint,
) -> Result<SymTensor2> {
    check_field_dims(metric, f)?;
    let gamma = christoffel(metric, p)?;
    let fj = scalar_jet(f, p)?;
    Ok(hessian_from_parts(&gamma, &fj))
}

/// Contravariant gradient `g^{ab} ∂_b f`.
pub fn gradient<M: MetricField + ?Sized, F: ScalarField + ?Sized>(
    metric: &M,
    f: &F,
    p: &ChartPoint,
) -> Result<DVector<f64>> {
    check_field_dims(metric, f)?;
    let g = metric.components(p)?;
    let ginv = invert_metric(&g, p.coords())?;
    Ok(ginv * scalar_jet(f, p)?.grad)
}

/// `v^a ∂_a f`.
pub fn directional_derivative<M: MetricField + ?Sized, F: ScalarField + ?Sized>(
    metric: &M,
    f: &F,
    v: &DVector<f64>,
    p: &ChartPoint,
) -> Result<f64> {
    check_field_dims(metric, f)?;
    if v.len() != metric.dim() {
        return Err(Error::Dimension {
            expected: metric.dim(),
            got: v.len(),
        });
    }
    Ok(v.dot(&scalar_jet(f, p)?.grad))
}

/// `|T| = sqrt(g^{ac} g^{bd} T_ab T_cd)` given the inverse metric.
pub fn norm_with_inverse(ginv: &DMatrix<f64>, t: &SymTensor2) -> f64 {
    let raised = ginv * t.entries() * ginv;
    raised.component_mul(t.entries()).sum().max(0.0).sqrt()
}

pub fn tensor_norm<M: MetricField + ?Sized>(
    metric: &M,
    t: &SymTensor2,
    p: &ChartPoint,
) -> Result<f64> {
    if t.dim() != metric.dim() {
        return Err(Error::Dimension {
            expected: metric.dim(),
            got: t.dim(),
        });
    }
    debug_assert_eq!(t.variance(), Variance::Covariant);
    let g = metric.components(p)?;
    let ginv = invert_metric(&g, p.coords())?;
    Ok(norm_with_inverse(&ginv, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ClosedFormMetric, ClosedFormScalar, FiniteDifference};
    use num_dual::DualNum;
    use std::f64::consts::FRAC_PI_2;

    struct Flat(usize, f64);

    impl ClosedFormMetric for Flat {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval<D: DualNum<Primitive = f64>>(&self, _p: &[D]) -> Vec<D> {
            let n = self.0;
            (0..n * n)
                .map(|k| D::from(if k / n == k % n { self.1 } else { 0.0 }))
                .collect()
        }
    }

    /// Round 2-sphere of radius r in polar coordinates (θ, φ).
    struct Sphere2(f64);

    impl ClosedFormMetric for Sphere2 {
        fn dim(&self) -> usize {
            2
        }
        fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> Vec<D> {
            let r2 = self.0 * self.0;
            let s = p[0].clone().sin();
            vec![D::from(r2), D::from(0.0), D::from(0.0), s.clone() * s * r2]
        }
    }

    struct Poly(Vec<Vec<f64>>);

    impl ClosedFormScalar for Poly {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> D {
            let mut s = D::from(0.0);
            for (i, row) in self.0.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    s += p[i].clone() * p[j].clone() * *c;
                }
            }
            s
        }
    }

    struct Coord(usize, usize);

    impl ClosedFormScalar for Coord {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> D {
            p[self.1].clone()
        }
    }

    fn pt(c: &[f64]) -> ChartPoint {
        ChartPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn flat_metrics_have_zero_connection() {
        for c in [1.0, 3.7] {
            let g = christoffel(&Flat(3, c), &pt(&[0.2, -1.0, 4.0])).unwrap();
            assert_eq!(g.max_lower_asymmetry(), 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    for d in 0..3 {
                        assert_eq!(g.get(a, b, d), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_equator_christoffels_vanish() {
        let g = christoffel(&Sphere2(1.0), &pt(&[FRAC_PI_2, 0.0])).unwrap();
        assert!(g.get(0, 1, 1).abs() < 1e-15);
        assert!(g.get(1, 0, 1).abs() < 1e-15);
        let g = christoffel(&Sphere2(1.0), &pt(&[0.7, 0.0])).unwrap();
        assert!((g.get(0, 1, 1) + 0.7f64.sin() * 0.7f64.cos()).abs() < 1e-14);
        assert!((g.get(1, 0, 1) - 1.0 / 0.7f64.tan()).abs() < 1e-14);
    }

    #[test]
    fn sphere2_curvature() {
        let r = 1.7;
        let c = curvature(&Sphere2(r), &pt(&[1.1, 0.3])).unwrap();
        assert!((c.scalar - 2.0 / (r * r)).abs() < 1e-12);
        let expected = c.metric.clone() / (r * r);
        assert!((c.ricci.entries() - expected).amax() < 1e-12);
    }

    #[test]
    fn flat_ricci_vanishes() {
        let c = curvature(&Flat(4, 2.0), &pt(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(c.ricci.max_abs(), 0.0);
        assert_eq!(c.scalar, 0.0);
    }

    #[test]
    fn quadratic_hessian_is_half_metric_over_tau() {
        let tau = 0.8;
        let q = 1.0 / (4.0 * tau);
        let f = Poly(vec![vec![q, 0.0, 0.0], vec![0.0, q, 0.0], vec![0.0, 0.0, q]]);
        let h = hessian(&Flat(3, 1.0), &f, &pt(&[0.3, 0.1, -2.0])).unwrap();
        let expected = DMatrix::identity(3, 3) / (2.0 * tau);
        assert!((h.entries() - expected).amax() < 1e-14);
    }

    #[test]
    fn bilinear_hessian_and_constant_field() {
        // f = y1 y2 in zero-based slots 0,1
        let f = Poly(vec![
            vec![0.0, 0.5, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let h = hessian(&Flat(3, 1.0), &f, &pt(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(h.get(0, 1), 1.0);
        assert_eq!(h.get(0, 0), 0.0);
        assert_eq!(h.get(2, 2), 0.0);
        let zero = Poly(vec![vec![0.0; 2]; 2]);
        let h = hessian(&Sphere2(2.0), &zero, &pt(&[1.0, 0.5])).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn gradient_and_directional_derivative() {
        let r = 3.0;
        let grad = gradient(&Sphere2(r), &Coord(2, 0), &pt(&[FRAC_PI_2, 0.0])).unwrap();
        assert!((grad[0] - 1.0 / (r * r)).abs() < 1e-15);
        assert_eq!(grad[1], 0.0);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let dd = directional_derivative(&Flat(3, 1.0), &Coord(3, 0), &e1, &pt(&[5.0, 1.0, 1.0]))
            .unwrap();
        assert_eq!(dd, 1.0);
        let zero = Poly(vec![vec![0.0; 3]; 3]);
        let grad = gradient(&Flat(3, 1.0), &zero, &pt(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(grad.amax(), 0.0);
    }

    #[test]
    fn tensor_norm_examples() {
        let p = pt(&[0.4, 0.9]);
        let m = Sphere2(1.3);
        let g = SymTensor2::covariant(m.components(&p).unwrap());
        assert!((tensor_norm(&m, &g, &p).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let z = SymTensor2::zeros(2, Variance::Covariant);
        assert_eq!(tensor_norm(&m, &z, &p).unwrap(), 0.0);
        let t = SymTensor2::covariant(DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 4.0])));
        assert_eq!(tensor_norm(&Flat(2, 1.0), &t, &p).unwrap(), 5.0);
    }

    #[test]
    fn fd_backend_sphere_curvature() {
        let m = Sphere2(1.0);
        let p = pt(&[1.0, 0.2]);
        let c = curvature(&FiniteDifference(&m), &p).unwrap();
        assert!((c.scalar - 2.0).abs() < 1e-5);
    }
}
