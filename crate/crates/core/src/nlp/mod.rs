//! Indicator extraction from text.
//!
//! Sentences are reduced to stemmed bag-of-words terms, weighted by TF-IDF and
//! scored by one logistic model per indicator category. Evaluation uses
//! iterative stratification so that every fold sees a proportional share of
//! each (possibly rare) label. Dates, persons and organizations are pulled out
//! with patterns and a gazetteer.

mod corpus;
mod entities;
mod eval;
mod model;
mod preprocess;
mod segment;
mod stratify;

pub use corpus::{append_record, load_corpus, validate_corpus, CorpusError, CorpusRecord, LabeledSnippet, MAX_LABELS};
pub use entities::{extract_entities, DateMatch, EntityMatch, ExtractedEntities, Gazetteer, Span};
pub use eval::{evaluate_cv, EvalError, FoldLabelMetrics, LabelSummary, MetricsReport};
pub use model::{predict, train, Hyperparams, IndicatorModel, TrainError};
pub use preprocess::{preprocess, stem, STOP_WORDS};
pub use segment::{sentence_spans, sentences};
pub use stratify::{stratified_kfold, FoldAssignment, StratifyError};
