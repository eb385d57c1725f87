//! Analysis of stochastic reaction networks as continuous-time Markov chains
//! on the non-negative integer lattice.
//!
//! The crate decomposes into:
//!
//! - [`model`] — reaction networks with mass-action kinetics and the induced
//!   jump structure,
//! - [`parser`] — a plain-text DSL for networks,
//! - [`lattice`] — exact integer/rational lattice machinery (vector gcds,
//!   minimal sets, positive linear independence, conservativity),
//! - [`poly`] — univariate polynomials with exact rational coefficients,
//! - [`reach`] — bounded reachability and windowed communicating-class
//!   decomposition (the brute-force oracle),
//! - [`structure`] — structural classification of the ambient space and
//!   (minimal) core networks,
//! - [`onedim`] — threshold parameters and dynamics verdicts for networks
//!   with a one-dimensional stoichiometric subspace,
//! - [`sim`] — an exact stochastic simulator with stationary/QSD estimators
//!   and empirical tail fitting.
//!
//! All structural and threshold computations are exact (arbitrary-precision
//! rationals); floating point appears only inside the simulator.

pub mod lattice;
pub mod model;
pub mod onedim;
pub mod parser;
pub mod poly;
pub mod rational;
pub mod reach;
pub(crate) mod scc;
pub mod sim;
pub mod structure;

/// Answer of a procedure that may be undecided under a bounded search.
///
/// `No` is only ever returned when it is sound (a closed in-window search,
/// or an exact algebraic obstruction); budget exhaustion yields `Unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

impl TriState {
    pub fn is_yes(self) -> bool {
        self == TriState::Yes
    }

    pub fn is_no(self) -> bool {
        self == TriState::No
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            TriState::Yes
        } else {
            TriState::No
        }
    }
}
