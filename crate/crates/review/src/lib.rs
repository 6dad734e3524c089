//! Review service: document queue ordered by predicted privilege, paragraph
//! highlighting, an append-only decision journal, retraining on the current
//! decisions and flags for decisions the model disagrees with.
//!
//! [`service::ReviewService`] holds the state and operations; [`api`] exposes
//! them over HTTP.

pub mod api;
pub mod error;
pub mod journal;
pub mod service;

pub use api::{router, serve};
pub use error::{Result, ServiceError};
pub use service::{ReviewService, ServiceConfig};
