//! Cooperative feature-map fusion for bird's-eye-view perception.
//!
//! The crate fuses a receiver vehicle's feature map with maps shared by
//! nearby vehicles using an information-weighted maxout followed by uniform
//! feature enhancement, and ships a synthetic LiDAR harness that measures how
//! that compares with plain maxout fusion and single-vehicle perception.
//!
//! | module | purpose |
//! |---|---|
//! | [`grid`] | BEV discretization, poses, feature maps, strong/weak classification |
//! | [`align`] | resampling a sender onto the receiver grid; overlap split |
//! | [`fusion`] | similarity, weight, weighted maxout, enhancement, composed fusion |
//! | [`sim`] | scenes, ray-cast LiDAR, density feature extractor, templates |
//! | [`metrics`] | detection proxy, IoU matching, near/far evaluation, CDFs |
//! | [`codec`] | binary feature-map messages and bandwidth accounting |
//! | [`runner`] | config-driven scenario runner behind the `coff` binary |

pub mod align;
pub mod codec;
pub mod fusion;
pub mod grid;
pub mod metrics;
pub mod runner;
pub mod sim;

pub use align::{align, split_regions, AlignedPair, OverlapRegion, Patch, Regions};
pub use fusion::{
    coff_fuse, coff_fuse_multi, enhance, maxout_baseline, maxout_fuse, similarity, weight, weighted_maxout,
    EnhanceConfig, FusionReport, WeightConfig,
};
pub use grid::{classify_feature, world_to_cell, CellIndex, FeatureClass, FeatureMap, GridSpec, Point, Pose2D};
