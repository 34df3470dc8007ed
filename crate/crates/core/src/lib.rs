//! Verification engines for products of matching-plus-isolated graphs and the
//! unit-ball geometry they model.
//!
//! The crate has five largely independent layers:
//!
//! - [`ball_graph`]: component graphs, their co-normal and Cartesian products,
//!   vertex classes, and hypercube components of extreme vertices.
//! - [`clique_engine`]: clique predicates, unique clique extension, exact
//!   maximum-clique search, and maximal projection-edgeless partitions.
//! - [`factorizer`]: injective homomorphisms of the co-normal product and
//!   their factorization into a coordinate permutation plus per-component
//!   sphere maps, with exhaustive enumeration for small shapes.
//! - [`banach_geometry`]: finite-dimensional lp components, their max-norm
//!   sums, the ball-to-graph bridge, homogeneous extensions of sphere map
//!   families, tangent-ball intersection estimates, and sampled isometry
//!   certification.
//! - [`constructions`]: exact-rational sequence-space shift constructions and
//!   the depth-limited closure operator with auditable derivations.

pub mod ball_graph;
pub mod banach_geometry;
pub mod bitset;
pub mod clique_engine;
pub mod constructions;
pub mod factorizer;
pub mod sampling;
