//! Group-fairness verification of binary classifiers through stochastic
//! Boolean satisfiability (SSAT).
//!
//! A classifier is encoded as CNF over Boolean features, the data
//! distribution supplies the probabilities of randomized quantifiers, and
//! the positive predictive value of each compound protected group is an
//! exactly computed SSAT probability. From the most and least favored
//! groups follow disparate impact, statistical parity and equalized odds.
//!
//! * [`ssat`]: formulas, the exact solver, Tseitin negation, the
//!   universal-random dual and the SDIMACS format.
//! * [`encoders`]: decision trees, linear models and CNF rule sets to CNF.
//! * [`distribution`]: CSV ingestion, Booleanization, probability
//!   estimation, compound groups.
//! * [`verifier`]: enumeration and learning pipelines, metrics, reports.

pub mod distribution;
pub mod encoders;
pub mod error;
pub mod par;
pub mod ssat;
pub mod synthetic;
pub mod verifier;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use error::{Error, Result};
