//! # infometric
//!
//! The information pseudometric `V(X,Y) = H(X,Y) − I(X;Y)` and its relatives
//! on finite discrete laws, exact or estimated from tabular data.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`law`] | joint laws over product alphabets, variable subsets |
//! | [`info`] | entropies, k-mutual information, conditional quantities, `V₂`, `V_k`, Rajski distance |
//! | [`estimation`] | CSV ingestion, quantization, empirical laws |
//! | [`geometry`] | Markov chains, geodesics, Pythagorean triples |
//! | [`oracle`] | brute-force checks over simplex grids and Dirichlet samples |
//! | [`analysis`] | metric matrices, information landscapes, CSV/JSON/DOT export |
//!
//! ```
//! use infometric::{info_metric, Alphabet, JointLaw, LogBase};
//!
//! // two perfectly correlated fair bits sit at distance zero
//! let law = JointLaw::from_dense(Alphabet::new(vec![2, 2]).unwrap(), &[0.5, 0.0, 0.0, 0.5]).unwrap();
//! assert_eq!(info_metric(&law, 0, 1, LogBase::BITS).unwrap().value, 0.0);
//! ```

pub mod analysis;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod info;
pub mod law;
pub mod oracle;

pub use error::{Error, Result};
pub use info::{
    conditional_entropy, conditional_mi, entropy_from_mi, info_metric, info_metric_forms, info_volume,
    joint_entropy, mutual_information_direct, mutual_information_ie, rajski_distance, EntropyLattice, InfoValue,
    LawLattice, LogBase,
};
pub use law::{Alphabet, JointLaw, VariableSet};
