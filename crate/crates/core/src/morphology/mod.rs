//! Binary morphology kernels: thinning, exact Euclidean distance transform
//! and connected-component labeling.

pub mod components;
mod distance;
mod skeleton;

pub use components::{connected_components, ComponentStats, Components};
pub use distance::{
    background_sentinel, distance_transform, distance_transform_pixels, squared_distance_transform,
};
pub use skeleton::{skeletonize, skeletonize_pixels};
