//! Combinatorial dynamics on metric trees.
//!
//! Piecewise-linear Markov self-maps of finite metric trees are determined
//! by where they send a marked invariant point set. From that data this
//! crate derives transition matrices, topological entropy via
//! Perron-Frobenius theory and the rome method, dynamical properties
//! (transitivity, exactness), constant-slope re-metrizations, explicit
//! low-entropy exactly-chaotic constructions on stars and combs, and
//! entropy bounds from cycle-mean defect frequencies and subtree
//! extraction.

pub mod bounds;
pub mod constructions;
pub mod dynamics;
pub mod io;
pub mod markov;
pub mod poly;
pub mod rational;
pub mod sampling;
pub mod spectral;
pub mod tree;

pub use markov::{EntropyMethod, MarkovMap, PsReport, TransitionData};
pub use rational::Rational;
pub use spectral::{MatrixProfile, SquareMatrix};
pub use tree::{MetricTree, TreePoint};
