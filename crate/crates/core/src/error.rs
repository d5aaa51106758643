//! Error type shared across the simulator.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("MCS index {0} out of range 0..=11")]
    McsOutOfRange(u32),
    /// The channel cannot carry traffic at the requested SNR / MCS.
    #[error("channel unusable: {0}")]
    ChannelUnusable(String),
    #[error("degenerate channel: bit error rate is 1")]
    DegenerateChannel,
    #[error("table schema error: {0}")]
    TableSchema(String),
    #[error("table validation error: {0}")]
    TableValidation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The scheduling strategy still had not terminated after the guard
    /// number of DL data cycles within one TXOP.
    #[error("TXOP did not terminate within {0} DL data cycles")]
    NonTerminating(u32),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// Stable machine-readable code, used in CLI error lines, sweep error
    /// markers and the C API status mapping.
    pub fn code(&self) -> &'static str {
        match self {
            SimError::McsOutOfRange(_) => "mcs_out_of_range",
            SimError::ChannelUnusable(_) => "channel_unusable",
            SimError::DegenerateChannel => "degenerate_channel",
            SimError::TableSchema(_) => "table_schema",
            SimError::TableValidation(_) => "table_validation",
            SimError::InvalidConfig(_) => "invalid_config",
            SimError::NonTerminating(_) => "non_terminating",
            SimError::Io(_) => "io",
        }
    }
}
