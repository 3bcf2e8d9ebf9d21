//! Entropy invariants and uniqueness criteria for shift-invariant Gibbs
//! structures over free groups and their finite sofic approximations.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. All floating-point transcendental functions go through [`libm`],
//! so results are bit-identical across targets and feature sets. The
//! `parallel` feature fans independent tasks (seeds, grid points) out over
//! rayon; every task draws from its own derived seed, so output does not
//! depend on the number of worker threads.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`group`] | reduced words in the free group, balls, translates, potential boundaries |
//! | [`gibbs`] | finite Gibbs structures, local kernels, pinning, exact Gibbs tables, Glauber steps |
//! | [`shift`] | shift-invariant potentials and their finite window restrictions |
//! | [`sofic`] | random-permutation sofic maps, S-good vertices, induced structures |
//! | [`order`] | site orders, stochastic dominance, attractiveness |
//! | [`dobrushin`] | Dobrushin interdependence coefficients |
//! | [`recursion`] | max/min boundary recursions on the regular tree, uniqueness verdicts |
//! | [`markov`] | tree-indexed Markov measures and their exact window marginals |
//! | [`entropy`] | Shannon entropies, Gibbs entropy estimators, f-invariant, random-past bound |
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dobrushin;
pub mod entropy;
mod error;
mod flow;
pub mod gibbs;
pub mod group;
pub mod markov;
pub mod math;
pub mod order;
mod par;
pub mod recursion;
pub mod seed;
pub mod shift;
pub mod sofic;

pub use crate::error::{Error, Result};
pub use crate::gibbs::{Alphabet, Configuration, EnergyTerm, GibbsStructure, ProbTable};
pub use crate::group::{FiniteWindow, GroupWord, Letter};
pub use crate::markov::MarkovTreeSpec;
pub use crate::order::SiteOrder;
pub use crate::shift::ShiftPotential;
pub use crate::sofic::SoficMap;

/// Default cap on the number of configurations any exact enumeration may visit.
pub const DEFAULT_BUDGET: usize = 1 << 24;
