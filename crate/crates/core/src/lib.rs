//! Canonical soliton metrics on space-time and the space-time track of a
//! mean curvature flow inside them.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] is a chart-based Riemannian geometry kernel (Christoffel
//!   symbols, curvature, Hessians, norms) with an exact dual-number backend
//!   and a finite-difference backend.
//! * [`backgrounds`] holds the closed-form Ricci-flow backgrounds and mean
//!   curvature flows used as fixtures, together with the flow and soliton
//!   residuals.
//! * [`hypersurface`] evaluates induced metric, normal and second fundamental
//!   form of an immersed hypersurface.
//! * [`canonical`] builds the expanding, shrinking and steady canonical
//!   metrics on space-time and their Ricci-soliton residuals.
//! * [`track`] builds the space-time track of a flow inside a canonical metric.
//! * [`harnack`] evaluates the Harnack quantities and the weighted
//!   Gibbons-Hawking-York type functional.
//! * [`suite`] runs the verification sweeps and writes reports.

pub mod backgrounds;
pub mod canonical;
pub mod error;
pub mod geometry;
pub mod harnack;
pub mod hypersurface;
pub mod quadrature;
pub mod suite;
pub mod track;

pub use error::{Error, Result};
