//! Diversity (effective number of classes) of digital-library data and metadata.
//!
//! The crate is organised bottom-up:
//!
//! - [`diversity`]: Hill numbers, Shannon entropy and richness over a
//!   [`FrequencyDistribution`].
//! - [`accumulation`]: growth curves of type count and diversity over an
//!   ordered stream of labels.
//! - [`fit`]: the power-law vocabulary model and the saturating models
//!   M1 to M4, with extrapolation of the asymptotic diversity.
//! - [`text`]: tokenization and per-document lexical reports.
//! - [`marc`]: MARCXML parsing and per-year facet series.
//! - [`lod`]: SPARQL harvesting of class, property and `owl:sameAs` usage.
//!
//! Batch work (documents, endpoints, model comparisons) goes through
//! [`par::Execution`], which uses rayon when the `parallel` feature is
//! enabled and falls back to a plain loop otherwise.

pub mod accumulation;
pub mod diversity;
pub mod error;
pub mod fit;
pub mod lod;
pub mod marc;
pub mod par;
pub mod synth;
pub mod text;

pub use accumulation::{AccumulationCurve, CheckpointSchedule, CurvePoint, Statistic};
pub use diversity::{DiversityOrder, FrequencyDistribution};
pub use error::{Error, Result};
pub use fit::{FitResult, ModelKind};
pub use par::Execution;
