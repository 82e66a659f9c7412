//! Identification and characterization of an on-line drug community in a
//! crawled social network.
//!
//! The pipeline scores blog entries against a weighted drug lexicon,
//! labels users whose summed weight reaches a threshold, tests which
//! interests separate that community from everyone else, clusters the
//! significant interests into themes, classifies the remaining users as
//! susceptible or immune with a naive Bayes log-likelihood ratio, and fits
//! discrete power laws to the degree distributions of the resulting
//! subnetworks.

pub mod corpus;
pub mod error;
pub mod interest_stats;
pub mod netmetrics;
pub mod pipeline;
pub mod scorer;
pub mod susceptibility;
pub mod synthgen;
pub mod themes;

pub use error::{Error, Result};
