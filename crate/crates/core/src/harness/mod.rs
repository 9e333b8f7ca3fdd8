//! Dataset ingestion, scoring, evaluation, synthesis, and tool analytics.

mod config;
mod eval;
mod record;
mod score;
mod stats;
mod synth;

pub use config::{Config, LabelMap, RunSection, ScoringConfig};
pub use eval::{evaluate, evaluate_record, EvalReport, Method, RecordResult};
pub use record::{load_records, parse_records, Record, RecordSchema, SchemaError, Task};
pub use score::{
    aggregate, macro_average, relative_improvement, relative_ratio, round1, score, DatasetMetrics, Metrics, Tally,
};
pub use stats::{overlap, tool_stats, Overlap, ToolCount, ToolStats};
pub use synth::{synthesize, SynthModule, SynthRecord, SynthStats};
