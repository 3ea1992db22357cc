//! Lattice harmonic analysis for the loop-erased random walk edge Green's
//! function on finite simply connected subsets of ℤ².
//!
//! The crate computes the probability P(a,b;A) that a chordal LERW from
//! boundary edge `a` to boundary edge `b` of a domain A traverses the marked
//! edge [0,1], by three independent routes:
//!
//! * a determinant identity built from signed and unsigned lattice Green's
//!   functions, random-walk loop measures, and winding-parity weights
//!   ([`lerw::identity_rhs`]),
//! * exhaustive self-avoiding-walk enumeration weighted by loop factors
//!   ([`lerw::exact_edge_probability`]),
//! * seeded Monte Carlo over conditioned random walks
//!   ([`lerw::mc_edge_probability`]).
//!
//! On top of these it verifies Fomin's determinant identity, an exact
//! decomposition of the spinor observable over a slit square, Fourier-series
//! rectangle kernels, and the scaling exponents 1/4 (odd-winding loop mass),
//! −1/2 (spinor, Beurling escape), −3/4 (edge Green's function), and 2/π
//! (Green's function log law).

pub mod enumerate;
pub mod experiments;
pub mod harmonic;
pub mod lattice;
pub mod lerw;
pub mod linalg;
pub mod spinor;
pub mod verify;

pub use lattice::{
    boundary_edges, build_branch_cut, build_branch_cut_with, loop_sign, parity_between,
    standard_domain, validate_domain, BoundaryEdge, CutDirection, DomainError, DomainSpec,
    EdgeSignTable, LatticeDomain, Point, Saw, Walk,
};

pub use harmonic::{
    boundary_poisson, green, interior_poisson, log_det_i_minus_p, loop_factor, odd_loop_mass,
    qbar, signed_exit, GreenTable, HarmonicError, Mode,
};

pub use lerw::{
    exact_edge_probability, fomin_check, identity_check, identity_rhs, identity_split,
    loop_erase, mc_edge_probability, sample_conditioned_walk, FominReport, IdentityReport,
    LerwError, McEstimate, PrescribedSaw,
};

pub use spinor::{
    conformal_radius_square, lambda_disk, lemma51_check, rectangle_kernel, slit_escape_profile,
    spinor, square_theta, EscapeProfile, KernelMethod, KernelSide, Lemma51Report, SpinorError,
    ThetaMap,
};

pub use experiments::{fit_power_law, run_study, FitError, PowerLawFit, StudyConfig, StudyResult};
