//! Finite-scale computations around super weakly compact sets: slice
//! derivations and dentability indices, James separation certificates,
//! uniform-convexity moduli, metric graph generators, tree embeddings with
//! two-norm distortion, and set-family combinatorics in `c_0`.

pub mod config;
pub mod convexity;
pub mod dentability;
pub mod embed;
pub mod error;
pub mod families;
pub mod fixtures;
pub mod geometry;
pub mod graphs;
pub mod james;
pub mod lp;

pub use config::Tolerances;
pub use convexity::{
    check_derivation_shrink, check_midpoint_inequality, check_sign_sum_bound, modulus,
    DeltaEvaluator, ModulusEstimate, ModulusMethod,
};
pub use dentability::{
    derive_function, derive_once, distance_to_set_function, dz_index, DerivationTrace, DeriveMode,
    DeriveOptions, SliceWitness, TraceOutcome,
};
pub use embed::{
    baudier_embedding, bourgain_embedding, distortion_report, kloeckner_iterate, kloeckner_prune,
    DistortionReport, Embedding, PruneTrace,
};
pub use error::{Error, Result};
pub use families::{
    block_family, bounded_card_family, polynomial_trace_test, schreier, slicing_functional,
    to_points, trace_count, vc_extract, SetFamily,
};
pub use geometry::{
    diameter, gauge, hull_distance, norm_value, separability, AmbientNorm, ConvexBody, HalfSpace,
    HullDistance, PointSet, Vector,
};
pub use graphs::{binary_tree, diamond, laakso, tree_distance, GraphFamily, MetricGraph, TreeNode};
pub use james::{
    find_functionals, restrict_and_separate, separation_value, tree_from_points, verify_cube,
    verify_james_system, CubeCertificate, JamesSystem, SeparationCertificate,
};
