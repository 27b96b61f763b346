//! Offline phrase-based translation of restaurant menus.
//!
//! The crate covers the whole offline pipeline: corpus handling, translation
//! standardization and n-gram consolidation, word alignment, phrase-table
//! training with a seekable binary format, a Witten-Bell language model, a
//! k-best beam decoder and the dish/ingredient disambiguation store.
//!
//! Probabilistic types are generic over [`Real`]; the aliases below fix the
//! scalar to `f64`, with `*F32` variants for a smaller footprint.

pub mod alignment;
pub mod binary;
pub mod consolidation;
pub mod corpus;
pub mod decoder;
pub mod error;
pub mod langmodel;
pub mod menudb;
pub mod num;
pub mod phrasetable;
pub mod pipeline;

pub use corpus::{parse_corpus, serialize_corpus, CorpusFormat, ParallelCorpus, PhrasePair, Side, Token};
pub use error::{Error, Result};
pub use num::Real;

pub type AlignmentModel = alignment::AlignmentModel<f64>;
pub type PhraseTable = phrasetable::PhraseTable<f64>;
pub type PhraseTableEntry = phrasetable::PhraseTableEntry<f64>;
pub type LookupSet = phrasetable::LookupSet<f64>;
pub type LanguageModel = langmodel::LanguageModel<f64>;
pub type DecoderWeights = decoder::DecoderWeights<f64>;
pub type DecoderConfig = decoder::DecoderConfig<f64>;
pub type KBestList = decoder::KBestList<f64>;
pub type TranslationHypothesis = decoder::TranslationHypothesis<f64>;

pub type AlignmentModelF32 = alignment::AlignmentModel<f32>;
pub type PhraseTableF32 = phrasetable::PhraseTable<f32>;
pub type LanguageModelF32 = langmodel::LanguageModel<f32>;
pub type KBestListF32 = decoder::KBestList<f32>;
