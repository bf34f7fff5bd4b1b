use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A layer graph breaks a structural invariant.
    #[error("invalid graph at layer {layer}: {reason}")]
    Graph { layer: usize, reason: String },

    #[error("unknown baseline model `{0}`")]
    UnknownBaseline(String),

    #[error("width multiplier must be positive, got {0}")]
    InvalidWidthMultiplier(f64),

    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("genome does not match decision spec: {0}")]
    GenomeMismatch(String),

    #[error("space too large: cardinality {cardinality} exceeds limit {limit}")]
    SpaceTooLarge { cardinality: String, limit: u64 },

    /// A layer cannot be mapped onto the latency feature schema.
    #[error("layer {layer} outside feature schema: {reason}")]
    FeatureSchema { layer: usize, reason: String },

    #[error("underdetermined system: {rows} training rows for {features} features")]
    Underdetermined { rows: usize, features: usize },

    #[error("samples mix hardware ids: expected `{expected}`, got `{got}`")]
    MixedHardware { expected: String, got: String },

    #[error("no cost model for hardware `{0}`")]
    MissingCostModel(String),

    #[error("feature schema mismatch: model has {model} weights, schema has {schema}")]
    SchemaMismatch { model: usize, schema: usize },

    #[error("hardware sets do not match: {0}")]
    HardwareMismatch(String),

    #[error("non-positive latency {value} for hardware `{hardware}`")]
    NonPositiveLatency { hardware: String, value: f64 },

    #[error("reward spec mode mismatch: expected {expected}, got {got}")]
    RewardMode {
        expected: &'static str,
        got: String,
    },

    #[error("invalid reward spec: {0}")]
    InvalidReward(String),

    #[error("tabular oracle has no entry for genome `{0}`")]
    OracleMiss(String),

    #[error("empty sample list")]
    EmptySamples,

    #[error("point `{model_id}` is missing metric `{key}`")]
    MissingMetric { model_id: String, key: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
