//! Convex-position geometry on frequency sets: exact planar and spatial
//! hulls, the Minkowski functional, simply-interacting-pair detection, and
//! spherical polygon area with its rotation-loop holonomy.
//!
//! Combinatorial predicates (hull membership, collinearity, SIP) are exact
//! rational arithmetic; only spherical quantities (areas, angles) live in
//! floating point.

mod hull2d;
mod hull3d;
mod sip;
mod sphere;

pub use hull2d::{convex_hull_planar, Planar2, PlanarBasis, PlanarHull};
pub use hull3d::{convex_hull_3d, SpatialHull};
pub use sip::is_sip;
pub use sphere::{rotation_loop, SphericalPolygon};

use crate::rat::Frequency;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("hull does not contain the origin strictly inside")]
    OriginNotInterior,
    #[error("vertices lie on a great circle; orientation is ambiguous")]
    GreatCircle,
    #[error("frequency {0} is not a member of the support")]
    NotInSupport(Frequency),
    #[error("the two frequencies must be distinct")]
    IdenticalPair,
}
