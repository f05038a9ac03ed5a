//! Optimal measurement-uncertainty regions for finite collections of
//! non-degenerate projective observables.
//!
//! Errors between an approximating observable and its reference are measured
//! with finite optimal transport costs. Three error notions are supported:
//! the worst case over all input states ([`ErrorMeasure::Max`]), the worst
//! case over reference eigenstates ([`ErrorMeasure::Calibration`]), and a
//! single expectation on a maximally entangled pair
//! ([`ErrorMeasure::Entangled`]). For a tuple of reference observables the set
//! of error tuples attainable by joint measurements is convex, so it is traced
//! through its supporting hyperplanes `w·ε ≥ b(w)`, each computed by a small
//! semidefinite program.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`numerics`] | complex Hermitian matrices, Jacobi eigensolver, dense factorizations |
//! | [`transport`] | transport costs, pricing schemes, cyclic monotonicity, scheme enumeration |
//! | [`observables`] | POVMs, joint measurements, marginals, builtin observable families |
//! | [`deviation`] | the three error measures, cost caps, the quadratic-moment bound |
//! | [`sdp`] | primal-dual interior-point solver for small dense SDPs |
//! | [`region`] | offset SDPs, boundary points, boundary tracing |

pub mod deviation;
pub mod error;
pub mod numerics;
pub mod observables;
pub mod parallel;
pub mod region;
pub mod sdp;
pub mod transport;

pub use deviation::ErrorMeasure;
pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, HermitianMatrix, C64};
pub use observables::{JointMeasurement, Observable, State};
pub use parallel::Execution;
pub use region::{BoundaryPoint, ProblemInstance, RegionSample, WeightVector};
pub use sdp::{SdpProblem, SdpSolution, SolveOptions, SolveStatus};
pub use transport::{CostFunction, Coupling, Distribution, PricingScheme, SchemeFamily};
