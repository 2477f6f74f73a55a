//! Linear woody feature mapping toolkit.
//!
//! The crate turns heterogeneous raster inputs into a binary woody vegetation
//! mask ([`maskproc`]), separates linear from patchy woody features
//! ([`separator`], [`tiling`]), generates synthetic training scenes
//! ([`synthgen`]) and scores predictions with pixel and skeleton-tolerance
//! metrics ([`skeleval`]). [`pipeline`] wires the stages together.

pub mod error;
pub mod maskproc;
pub mod morphology;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod separator;
pub mod skeleval;
pub mod synthgen;
pub mod tiling;

pub use error::{Error, Result};
pub use raster::{Band, GeoRef, GridCatalog, PixelData, PolygonSet, RasterGrid};
