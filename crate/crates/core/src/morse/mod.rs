//! Numerical equivariant Morse theory on implicit G-manifolds: critical
//! points and their stability, the stabilizing construction and its
//! localization, gradient flows, Morse complexes with Bredon
//! coefficients, and representation-cell groups.

mod cells;
mod complex;
mod critical;
mod cutoff;
mod flow;
mod manifold;
mod surgery;


pub use cells::{representation_cell, representation_cell_groups, RepFactor, Representation};
pub use complex::{morse_complex, morse_filtration};
pub use critical::{
    classify, classify_all, find_critical_points, newton_critical, CriticalPoint, CriticalSearch, SeedGrid,
};
pub use cutoff::{
    build_cutoffs, build_cutoffs_shrinking, bump, critical_radius, gauss_legendre, radial_curvature, radial_slope,
    CutoffPair, Transition,
};
pub use flow::{
    critical_orbits, flow_trajectory, morse_differentials, CriticalOrbit, Direction, FlowCount, FlowOptions, MorseData,
    Trajectory,
};
pub use manifold::{
    central_difference, float_matrices, metric_average, EqFunction, ImplicitGManifold, Invariance, PolyFunction,
};
pub use surgery::{
    direct_sum, localize_surgery, sphere_samples, stable_perturb, Bubble, Localized, ModelFunction, MorseChart,
    Perturbation, PredictedPoint, SurgeredFunction,
};

/// Gradient norm below which a point counts as critical.
pub const TOL_CRIT: f64 = 1e-9;
/// Smallest admissible Hessian eigenvalue magnitude.
pub const TOL_NONDEG: f64 = 1e-6;
pub const STAB_TOL: f64 = 1e-9;
/// Distance at which a trajectory is captured by a critical point.
pub const CAPTURE_TOL: f64 = 1e-6;
pub const DEDUP_TOL: f64 = 1e-6;
/// Default plateau half-width of the cutoffs.
pub const DEFAULT_DELTA: f64 = 0.05;
