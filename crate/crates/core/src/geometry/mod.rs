//! Contours, partitions, metrics and the forbidden region.

pub mod contour;
pub mod forbidden;
pub mod metric;
pub mod partition;

pub use contour::{initial_contour, ArcEnd, Contour, JoinParams, NodeLayout, RayTag};
pub use forbidden::{in_forbidden_region, ForbiddenRegion};
pub use metric::{
    chordal, chordal_distance, directed_to_polyline, hausdorff_distance, hausdorff_finite,
    point_polyline_distance, SpherePoint,
};
pub use partition::{is_noncrossing, NoncrossingPartition};
