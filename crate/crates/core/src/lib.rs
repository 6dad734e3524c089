//! Machine-assisted review of paragraphs for the deliberative process
//! privilege (FOIA Exemption 5).
//!
//! The crate covers the whole offline pipeline:
//!
//! * [`corpus`] parses annotated documents (`D1//`, `D0//`, `T0//`, `E0//`
//!   markers), loads a collection through a manifest and slices it into
//!   binary datasets.
//! * [`features`] tokenizes, optionally Porter-stems, and vectorizes text.
//! * [`classifiers`] holds logistic regression, the SMO-trained SVM, the
//!   fixed keyword rule and the all-ones baseline.
//! * [`bio`] is the word-level Begin/Inside/Outside tagger built on a
//!   linear-chain CRF.
//! * [`tuning`] runs validation splits and exhaustive grid search.
//! * [`eval`] computes confusion counts, P/R/F1, normal-approximation
//!   confidence intervals, the interval-disjointness significance rule and
//!   Cohen's kappa.
//! * [`experiments`] reproduces the train/test conditions and renders tables.
//! * [`synth`] generates seeded synthetic collections with the same layout.

pub mod bio;
pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod features;
pub mod model;
pub mod optim;
pub mod synth;
pub mod tuning;

pub use error::{Error, Result};
