//! Ratings ingestion, pairwise differencing and the held-out pair evaluation.

mod evaluate;
mod pairs;
mod ratings;
mod synth;

pub use evaluate::{
    evaluate_pair_protocol, paired_t_test, score_split, EvaluationOptions, EvaluationReport,
    PairSummary, Pairing, TTest, DEFAULT_MIN_PAIR_COUNT,
};
pub use pairs::{build_pair_comparisons, ordinal_histogram, Histogram, HistogramBin, PairComparisons};
pub use ratings::{load_ratings, parse_ratings, Rating, RatingsFormat, RatingsTable};
pub use synth::{synthesize_ratings, write_movielens_tab, RATING_MAX, RATING_MIN};
