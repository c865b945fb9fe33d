//! Event records, Hofstede tables and corpus statistics.

mod events;
mod hofstede;
mod stats;

pub use events::{
    parse_events, write_events, write_rejects, Category, CountryCode, EventRecord, Location, ParsedEvents, Reject,
};
pub use hofstede::{parse_hofstede_table, write_skipped, HofstedeProfile, HofstedeTable, SkippedRow, DIMENSION_NAMES};
pub use stats::{corpus_stats, CorpusStats};
