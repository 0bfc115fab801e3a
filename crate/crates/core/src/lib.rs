//! Spectral operator calculus for the two-component Euler–Arnold system on
//! the flat tori T¹ and T².
//!
//! The crate is layered bottom-up:
//!
//! - [`spectral`]: band-limited real fields, exact differentiation,
//!   dealiased products and Parseval quadrature.
//! - [`forms`]: vector fields, 1- and 2-forms, `d`, `δ`, the operator `A`
//!   and its inverse on exact forms, Hodge splitting.
//! - [`algebra`]: the semidirect-product algebra, its degenerate metric and
//!   the divergence-level bilinear operator `B`.
//! - [`curvature`]: three independent evaluations of `⟨⟨R(u,v)v, u⟩⟩`.
//! - [`flow`]: RK4 integration of the geodesic equation in `(div u, ρ)`.
//! - [`fd`]: finite-difference oracle, including a literal 1D solver of the
//!   two-component Hunter–Saxton system.
//! - [`verify`] and [`config`]: identity suites, reports and the JSON run
//!   configuration consumed by the command-line tool.

pub mod algebra;
pub mod config;
pub mod curvature;
pub mod error;
pub mod fd;
pub mod flow;
pub mod forms;
pub mod spectral;
pub mod verify;

pub use error::{GeoError, Result};
pub use spectral::{FourierScalar, GridSpec};
