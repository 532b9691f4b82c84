//! Box norms, cut norms and pseudorandomness certificates for weighted
//! hypergraphs over finite probability spaces.
//!
//! Everything is computed exactly by enumeration over finite product spaces,
//! with size caps that turn runaway workloads into errors.

pub mod bitmask;
pub mod box_norms;
pub mod certificate;
pub mod counting;
pub mod cut_norms;
pub mod error;
pub mod generators;
pub mod instance;
pub mod pseudo;
pub mod reduce;
pub mod spaces;

pub use certificate::{Certificate, Hypothesis, SearchMode, Verdict};
pub use error::{Error, Result};
pub use instance::Instance;
pub use spaces::{
    expectation, lp_norm, make_prob_space, max_degree, omega_select, EdgeFunction, ExtendedExponent, HypergraphSystem,
    OmegaIndex, ProbSpace,
};
