//! Whitney cubes, partitions of unity, polynomial projections and the
//! Calderon-Zygmund decomposition.

pub mod cubes;
pub mod cz;
pub mod partition;
pub mod projection;
pub mod split;

pub use cubes::{audit_whitney, whitney_decompose, DyadicCube, WhitneyAudit};
pub use cz::{annulus_bump, bad_part_decay, cz_decompose, cz_decompose_grand, BadPart, CzDecomposition, CzOptions, DecayFit};
pub use partition::{glue, partition_of_unity, PartitionOfUnity, SparseField, GLUE_DILATION};
pub use projection::{local_moments, polynomial_projection, polynomial_projection_with, Projection};
pub use split::{layer_cake, split_at_height, split_height, LayerCake};
