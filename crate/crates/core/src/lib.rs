//! Framed convex polyhedra and polygons as group orbits.
//!
//! A convex polyhedron with `N` faces is encoded by `N` spinors (complex
//! 2-vectors) whose 2x2 density matrix is proportional to the identity; a
//! convex polygon with `N` edges is encoded by `N` complex numbers whose
//! squares sum to zero. Fixing the total boundary area identifies the
//! polyhedron ensemble with the first two columns of a Haar-random unitary
//! matrix, and the polygon ensemble with the first two columns of a
//! Haar-random orthogonal matrix. This crate provides:
//!
//! - the spinor phase space: closure constraints, SL(2,C)/SU(2)/U(N)
//!   actions, the invariant observable matrices `E` and `F`, and the
//!   Plucker reconstruction machinery ([`spinor`], [`ensemble`]);
//! - deterministic Haar samplers for polyhedra, free (unclosed) normal
//!   ensembles, and full unitary matrices ([`sampler`], [`mc`]);
//! - exact ensemble averages of face-area and normal-vector polynomials,
//!   with Monte Carlo estimators to compare against ([`moments`]);
//! - exact Weingarten calculus over the symmetric group, the systematic
//!   polynomial integral over U(N), and its Catalan asymptotics
//!   ([`weingarten`]);
//! - the Itzykson-Zuber determinant integral, its degenerate two-column
//!   limit, and the face-area generating series ([`iz`]);
//! - intertwiner space dimensions, trace moments, characters and coherent
//!   state overlaps for the quantized polyhedron ([`quantum`]);
//! - the 2d analog: polygon configurations, SL(2,R) closing, O(N)
//!   deformations, convex reconstruction and glued-edge networks
//!   ([`polygon`]).
//!
//! Everything is a pure function of its inputs; samplers are pure
//! functions of a `(seed, stream)` pair, so fixed seeds give bit-identical
//! results across runs and thread counts.

pub mod ensemble;
pub mod linalg;
pub mod iz;
pub mod mc;
pub mod moments;
pub mod polygon;
pub mod quantum;
pub mod sampler;
pub mod spinor;
pub mod weingarten;

pub use ensemble::{ObservableMatrices, Sl2c, SpinorEnsemble, Su2, UnitaryFrame};
pub use mc::{BatchEstimate, McConfig};
pub use spinor::{Spinor, Vec3};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate normal: cannot invert a zero vector")]
    DegenerateNormal,
    #[error("non-closable configuration: |C| equals the total area (rank-1 density matrix)")]
    NonClosable,
    #[error("rank-deficient: all F observables vanish")]
    RankDeficient,
    #[error("F matrices disagree beyond tolerance (max residual {0:.3e})")]
    FMismatch(f64),
    #[error("chart singularity: a required first spinor component vanishes")]
    ChartSingularity,
    #[error("matrix is not unitary/orthogonal within tolerance (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("ensemble has zero total area")]
    ZeroArea,
    #[error("need at least {need} items, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("eigenvalues closer than {0:.3e} of scale: use the degenerate evaluator")]
    DegenerateSpectrum(f64),
    #[error("Gram matrix singular regime: requires N >= n (got N={big_n}, n={n})")]
    SingularRegime { n: usize, big_n: usize },
    #[error("degree {got} exceeds the cap of {cap}")]
    DegreeCap { got: usize, cap: usize },
    #[error("{0}")]
    Domain(String),
    #[error("zero-length polygon edge at index {0}")]
    ZeroEdge(usize),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shared numeric tolerances, stated once and used uniformly.
///
/// Closure and orthonormality residuals on unit-scale data are held to
/// `TOL_CLOSURE`; identities that survive one or two 2x2 inversions
/// (matching, recovery) are held to the looser `TOL_RECOVER`.
pub mod tol {
    /// Closure, orthonormality, Plucker residuals on unit-scale data.
    pub const TOL_CLOSURE: f64 = 1e-12;
    /// Invariance of observables through linear actions.
    pub const TOL_INVARIANT: f64 = 1e-10;
    /// Plant-and-recover identities through 2x2 inversions.
    pub const TOL_RECOVER: f64 = 1e-8;
}
