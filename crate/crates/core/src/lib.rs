pub mod filtration;
pub mod gateway;
pub mod ingest;
pub mod matcher;
pub mod metrics;
pub mod pipeline;
pub mod prompt;
