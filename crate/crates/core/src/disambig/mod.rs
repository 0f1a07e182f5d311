//! Pairwise same-author prediction: feature extraction for citation pairs and
//! a random forest classifier with Gini feature importance.

mod features;
mod forest;
mod model;
mod tfidf;

pub use features::{
    name_similarity, tokenize, word_jaccard, year_gap, ContentKind, FeatureExtractor,
    FeatureVector, PluginLine, PluginScores, Similarity,
};
pub use forest::{
    feature_importance, predict_proba, train_forest, FeatureImportance, ForestConfig,
    ForestModel, ImportanceReport,
};
pub use model::{PairModel, PairScorer};
pub use tfidf::{content_tfidf_sim, fit_tfidf, TfidfIndex};
