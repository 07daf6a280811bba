pub mod agenda;
pub mod gateway;
pub mod ingest;
pub mod pipeline;
pub mod plan;
pub mod prompts;
pub mod teach;
