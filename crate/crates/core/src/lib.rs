//! Numerical geometry of the right half plane `{(r, t) : r > 0}` under
//! warped-product metrics `ds² = dr² + dt²/h²(r)`.
//!
//! - [`warp`]: warp functions, metric, complex structure, Kähler form,
//!   connection and curvature.
//! - [`riccati`]: the curvature-prescription equation `H' - H² = f`.
//! - [`geodesic`]: geodesic integration, closed-form geodesics, lengths and
//!   escape to the boundary.
//! - [`two_point`]: two-point connections and distances.
//! - [`isometry`]: the affine action and holomorphic-isometry checks.
//! - [`cli`]: the `warpgeo` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geodesic;
pub mod isometry;
pub mod ode;
pub mod riccati;
pub mod two_point;
pub mod warp;

pub use error::{GeoError, Result};
pub use warp::{make_warp, Point, TangentVector, WarpFunction, WarpSpec};
