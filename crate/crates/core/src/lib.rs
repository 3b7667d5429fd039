//! Exact arithmetic toolkit for mean dimension lower bounds of the induced
//! action of an amenable group on Borel probability measures.
//!
//! The crate is split by subsystem:
//!
//! * [`group`]: element algebra for ℤ and ℤ², Følner diagnostics and exact tilings.
//! * [`symbolic`]: subshifts, pattern counts, the shift metric and independence sets.
//! * [`transport`]: exact 1-Wasserstein distances, Kantorovich–Rubinstein duality
//!   and the dynamical distance `W_F`.
//! * [`simplex`]: products of simplices, grid covers, separation and the
//!   retraction-free part of the generalized Lebesgue lemma.
//! * [`meandim`]: the embedding of simplex products into measures and the
//!   explicit mean-dimension lower bounds.
//!
//! Every quantity that the checks compare is an exact rational ([`Q`]).

pub mod group;
pub mod lp;
pub mod meandim;
pub mod rational;
pub mod simplex;
pub mod symbolic;
pub mod transport;

pub use rational::Q;
