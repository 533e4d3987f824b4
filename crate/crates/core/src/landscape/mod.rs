//! Seeds, classification and landscape search.

pub mod classify;
pub mod search;
pub mod seeds;
pub mod skeleton;

pub use classify::{classify_faces, FaceProfile, FaceTag, StateLabel};
pub use search::{
    build_pathway_graph, downward_search, relax_to_minimum, saddle_between, transition_pathway,
    upward_search, upward_search_along, LandscapeEdge, LandscapeGraph, LandscapeNode, Pathway,
};
pub use seeds::{random_seed, uniform_seed, wors_seed};
pub use skeleton::{
    enumerate_topological_seeds, planar_profile_seed, skeleton_to_field, TopologicalSkeleton,
};
