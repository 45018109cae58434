//! Crowdturfing gig detection for micro-task marketplace corpora.
//!
//! The pipeline mirrors a two-stage moderation workflow:
//!
//! 1. ingest a JSON Lines corpus of gig listings and sellers ([`corpus`]),
//! 2. turn gigs into tf-idf + metadata vectors ([`features`]),
//! 3. train a linear detector and a 3-way type classifier ([`model`]),
//! 4. evaluate with stratified cross-validation ([`eval`]),
//! 5. run marketplace and case-study analytics ([`analytics`]).
//!
//! [`synthgen`] builds deterministic synthetic corpora with planted signal so
//! everything above is testable at desk scale.

pub mod analytics;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod stopwords;
pub mod synthgen;
pub mod util;

pub use corpus::{Corpus, CrowdturfType, GigLabel, GigListing, Label, SellerProfile};
pub use error::{Error, Result};
pub use features::{FeatureSpec, FeatureVector, Vocabulary};
pub use model::{LinearModel, Model, NaiveBayesModel, OneVsRestModel, TrainConfig};
