//! Vectors, ambient norms, Minkowski gauges, hull distances and linear
//! separability: the primitives every other module builds on.

mod body;
mod hull;
mod norm;
mod pointset;
mod separation;
pub(crate) mod vector;

pub use body::{gauge, ConvexBody, PreparedGauge};
pub use hull::{hull_distance, hull_distance_points, HullDistance};
pub use norm::{norm_value, AmbientNorm};
pub use pointset::{diameter, PointSet, WeakTail};
pub use separation::{separability, separability_sets, HalfSpace};
pub use vector::Vector;
