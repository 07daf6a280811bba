//! HTTP service and storage around the `lectern` library.

pub mod config;
pub mod docstore;
pub mod http;
pub mod records;
pub mod schema;
pub mod service;

pub use config::ServerConfig;
pub use service::{LectureService, ServiceError};
