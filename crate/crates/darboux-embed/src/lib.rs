//! Darboux-integrable 2-metrics and their isometric embeddings.
//!
//! The crate checks the integrability conditions of orthogonal 2-metrics,
//! carries the catalog of normal forms, and builds explicit embeddings of
//! the model metric `u^2 (dv^2 - du^2)` into Minkowski 3-space (closed form
//! from two generator functions, and from Cauchy data along a curve), plus
//! surfaces of revolution and screw motion for the Riemannian normal forms.

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod darboux;
pub mod errata;
pub mod g0;
pub mod mesh;
pub mod metrics;
pub mod numkit;
pub mod par;
pub mod revolve;
pub mod verify;
