//! Fluctuation-theory toolkit for integer-lattice random walks.
//!
//! Everything here revolves around one object: a random walk `S_n = Y_1 + ... + Y_n`
//! whose step law is a finitely supported probability measure on the integers with
//! exact rational masses. The crate computes, by exact dynamic programming and by
//! compensated floating-point DP, the joint laws of the walk together with its
//! first passage times above or below a threshold, the associated ladder height
//! laws and renewal potentials, harmonic functions for the killed walk, and the
//! reflected (queue-like) chain. On top of the exact layer sits a small
//! asymptotics layer: Richardson-style extrapolation along geometric horizon
//! grids, used to confront exact finite-horizon sequences with their predicted
//! square-root and three-halves power tail constants, plus a Monte Carlo module
//! acting as an end-to-end referee.

pub mod asymptotics;
pub mod exactdp;
pub mod fluctuation;
pub mod harmonic;
pub mod numeric;
pub mod series;
pub mod walkmodel;

pub use numeric::Rational;
