//! Application errors with stable exit codes.
//!
//! Exit code 0 means success; each failure family gets its own code so
//! scripts can branch without parsing messages: 2 config, 3 io, 4 data,
//! 5 memory budget, 6 file format.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {message}")]
    Config { message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("data error: {source}")]
    Data { source: efcnet_core::Error },

    #[error("memory budget too small: need {required} bytes, budget is {budget}")]
    Budget { required: u64, budget: u64 },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config { .. } => 2,
            AppError::Io { .. } => 3,
            AppError::Data { .. } => 4,
            AppError::Budget { .. } => 5,
            AppError::Format { .. } => 6,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AppError {
        let path = path.into();
        move |source| AppError::Io { path, source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> AppError {
        AppError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<efcnet_core::Error> for AppError {
    fn from(e: efcnet_core::Error) -> Self {
        match e {
            efcnet_core::Error::BudgetTooSmall { required, budget } => {
                AppError::Budget { required, budget }
            }
            efcnet_core::Error::InvalidConfig { reason } => AppError::Config {
                message: reason.to_string(),
            },
            other => AppError::Data { source: other },
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
