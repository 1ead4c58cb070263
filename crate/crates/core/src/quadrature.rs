//! Product trapezoid rules in hyperspherical coordinates.
//!
//! Nodes where the polar Jacobian vanishes (the centre and the poles) carry
//! zero weight and are dropped, so integrands never see the coordinate
//! singularities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Trapezoid nodes and weights on `[a, b]` with `intervals` panels.
pub fn trapezoid(a: f64, b: f64, intervals: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / intervals as f64;
    (0..=intervals)
        .map(|k| {
            let w = if k == 0 || k == intervals { 0.5 * h } else { h };
            (a + k as f64 * h, w)
        })
        .collect()
}

/// Equal-weight nodes on the circle `[0, 2π)`.
pub fn periodic(nodes: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / nodes as f64;
    (0..nodes).map(|k| (k as f64 * h, h)).collect()
}

/// Resolution of a ball grid: panels in the radius and in each polar angle;
/// the azimuth gets twice the polar count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallGrid {
    pub radial: usize,
    pub polar: usize,
}

impl BallGrid {
    pub fn new(radial: usize, polar: usize) -> Self {
        BallGrid { radial, polar }
    }

    /// Both resolutions doubled.
    pub fn refined(self) -> Self {
        BallGrid::new(2 * self.radial, 2 * self.polar)
    }

    fn check(&self) -> Result<()> {
        if self.radial == 0 || self.polar == 0 {
            return Err(Error::InvalidParams("quadrature grid is empty".into()));
        }
        Ok(())
    }

    /// Angles and weights on the unit sphere `S^{d−1}`, including the polar
    /// Jacobian `Π sin^{d−1−k} θ_k` when `with_jacobian` is set.
    pub fn sphere_nodes(&self, d: usize, with_jacobian: bool) -> Result<Vec<(Vec<f64>, f64)>> {
        self.check()?;
        if d < 2 {
            return Err(Error::InvalidParams("ball quadrature needs dimension ≥ 2".into()));
        }
        let polar: Vec<(f64, f64)> = trapezoid(0.0, PI, self.polar)
            .into_iter()
            .filter(|&(x, _)| x > 0.0 && x < PI)
            .collect();
        let azimuth = periodic(2 * self.polar);
        let mut nodes = vec![(Vec::with_capacity(d - 1), 1.0)];
        for k in 0..d - 1 {
            let axis = if k + 1 == d - 1 { &azimuth } else { &polar };
            let power = (d - 2 - k) as i32;
            nodes = nodes
                .into_iter()
                .flat_map(|(x, w): (Vec<f64>, f64)| {
                    axis.iter().map(move |&(a, wa)| {
                        let mut x = x.clone();
                        x.push(a);
                        let jac = if with_jacobian { a.sin().powi(power) } else { 1.0 };
                        (x, w * wa * jac)
                    })
                })
                .collect();
        }
        Ok(nodes)
    }

    /// Radii (centre dropped) with weights including `ρ^{d−1}`.
    pub fn radial_nodes(&self, d: usize, radius: f64) -> Result<Vec<(f64, f64)>> {
        self.check()?;
        Ok(trapezoid(0.0, radius, self.radial)
            .into_iter()
            .filter(|&(r, _)| r > 0.0)
            .map(|(r, w)| (r, w * r.powi(d as i32 - 1)))
            .collect())
    }
}

/// Sum in the given order; reductions stay deterministic however the terms
/// were produced.
pub fn ordered_sum(terms: &[f64]) -> f64 {
    terms.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let s: f64 = trapezoid(1.0, 3.0, 7).iter().map(|&(x, w)| w * (2.0 * x + 1.0)).sum();
        assert_relative_eq!(s, 10.0, max_relative = 1e-14);
    }

    #[test]
    fn sphere_area() {
        let g = BallGrid::new(8, 64);
        let a2: f64 = g.sphere_nodes(3, true).unwrap().iter().map(|(_, w)| w).sum();
        assert!((a2 / (4.0 * PI) - 1.0).abs() < 1e-3);
        let a1: f64 = g.sphere_nodes(2, true).unwrap().iter().map(|(_, w)| w).sum();
        assert_relative_eq!(a1, 2.0 * PI, max_relative = 1e-14);
        let a3: f64 = g.sphere_nodes(4, true).unwrap().iter().map(|(_, w)| w).sum();
        assert!((a3 / (2.0 * PI * PI) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ball_volume() {
        let g = BallGrid::new(64, 64);
        let s: f64 = g.sphere_nodes(3, true).unwrap().iter().map(|(_, w)| w).sum();
        let r: f64 = g.radial_nodes(3, 1.0).unwrap().iter().map(|(_, w)| w).sum();
        assert!((s * r / (4.0 * PI / 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(BallGrid::new(0, 4).radial_nodes(3, 1.0).is_err());
        assert!(BallGrid::new(4, 0).sphere_nodes(3, true).is_err());
        assert!(BallGrid::new(4, 4).sphere_nodes(1, true).is_err());
    }

    proptest! {
        #[test]
        fn weights_are_positive(radial in 1usize..12, polar in 1usize..12, d in 2usize..5) {
            let g = BallGrid::new(radial, polar);
            prop_assert!(g.radial_nodes(d, 1.0).unwrap().iter().all(|&(_, w)| w > 0.0));
            prop_assert!(g.sphere_nodes(d, true).unwrap().iter().all(|(_, w)| *w > 0.0));
        }
    }
}
