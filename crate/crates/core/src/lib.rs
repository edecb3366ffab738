//! Haar wavelet synopses under weighted `l_k` and `l_inf` error, V-Opt
//! histograms and extended (multi-dimensional) wavelet allocation, all with
//! dynamic programs that keep only a working set and recover the full
//! solution by recomputation.
//!
//! The solvers are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiation.

pub mod error;
pub mod extended;
pub mod haar;
pub mod metrics;
pub mod oracles;
pub mod restricted;
pub mod scalar;
pub mod unrestricted;
pub mod vopt;

pub use error::{Result, SynopsisError};
pub use extended::{
    build_candidates, coefficients_from_data, compute_benefits, solve_extended, solve_extended_with,
    AllocationEntry, CandidateRule, ExtendedAllocation, ExtendedOptions, ExtendedStats, ItemSizePair,
    MultiCoefficient,
};
pub use haar::{forward, inverse, leaf_path, CoefficientVector, Sign, Signal, TreeNode};
pub use metrics::Metric;
pub use restricted::{
    extract_restricted, restricted_error, ErrorProfile, RestrictedOptions, RestrictedSolver, SplitSearch,
    Stats, SynopsisSolution,
};
pub use scalar::Scalar;
pub use unrestricted::{
    build_grid, unrestricted_synopsis, unrestricted_synopsis_with, GridConfig, UnrestrictedSolver,
    ValueBudgetTable, ValueGrid,
};
pub use vopt::{vopt_full_table, vopt_linear_space, vopt_linear_space_with_stats, Histogram, PrefixSums, VoptStats};

pub type Signal64 = Signal<f64>;
pub type CoefficientVector64 = CoefficientVector<f64>;
pub type SynopsisSolution64 = SynopsisSolution<f64>;
pub type ErrorProfile64 = ErrorProfile<f64>;
pub type ValueGrid64 = ValueGrid<f64>;
pub type Histogram64 = Histogram<f64>;
pub type MultiCoefficient64 = MultiCoefficient<f64>;
pub type ExtendedAllocation64 = ExtendedAllocation<f64>;

pub type Signal32 = Signal<f32>;
pub type SynopsisSolution32 = SynopsisSolution<f32>;
pub type Histogram32 = Histogram<f32>;
