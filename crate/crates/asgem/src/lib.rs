//! Toolkit for ac Stark gradient echo memory (ASGEM) calculations on alkali
//! vapors.
//!
//! The crate bundles four layers that build on each other:
//!
//! * [`halfint`] / [`wigner`] -- exact half-integer bookkeeping and Wigner
//!   3j/6j symbols evaluated from big-integer Racah sums,
//! * [`atom`] -- reference data for the 87Rb D1 line plus a plain-text
//!   registry format for user-supplied lines,
//! * [`stark`] -- hyperfine ac Stark shifts, photon scattering rates, the
//!   memory bandwidth they imply, and (wavelength x intensity) maps of both,
//! * [`mb`] -- a three-level Maxwell-Bloch solver for the gradient-echo
//!   storage/retrieval protocol and its efficiency landscape.
//!
//! [`sweep`] provides the generic checkpointed 2-D parameter sweep and
//! marching-squares contour extraction used by the map operations.

pub mod atom;
pub mod consts;
pub mod datafile;
pub mod halfint;
pub mod mb;
pub mod stark;
pub mod sweep;
pub mod wigner;

pub use halfint::HalfInt;
