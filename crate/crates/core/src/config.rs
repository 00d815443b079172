use serde::{Deserialize, Serialize};

/// Numeric tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Points closer than this (sup-norm) are considered duplicates.
    pub duplicate: f64,
    /// General comparison tolerance.
    pub numeric: f64,
    /// Certified gap target for iterative hull distances.
    pub hull_gap: f64,
    /// Membership tolerance for `|<y*, x>|` when restricting to a subspace.
    pub subspace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            duplicate: 1e-12,
            numeric: 1e-8,
            hull_gap: 1e-8,
            subspace: 1e-9,
        }
    }
}

/// Default cap on search nodes for exact slice enumeration.
pub const DEFAULT_CLIQUE_CAP: u64 = 1_000_000;
