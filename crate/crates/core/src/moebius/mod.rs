//! Möbius transformations of the closed upper half-plane.

mod boundary;
mod classify;
mod family;
mod map;

pub use boundary::{chordal_diameter, chordal_distance, BoundaryPoint, HalfPlanePoint};
#[allow(unused_imports)]
pub(crate) use boundary::{half_angle_diameter, half_angle_distance};
pub use classify::{default_eps_class, MapClass};
pub use family::{fixed_point_interior, rho_inverse, rotation_number, t_map};
pub use map::{compose, MoebiusMap};

#[cfg(test)]
mod properties;
