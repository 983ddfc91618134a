//! Error type shared by every module.
//!
//! Resource caps are deliberately distinct variants from negative verdicts:
//! a truncated search must never be reportable as a topological conclusion.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed address: {0}")]
    MalformedAddress(String),

    #[error("symbol {value} out of range 1..={n}")]
    SymbolOutOfRange { value: u8, n: u8 },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("identification class for {address} exceeded cap of {cap} representatives")]
    ClassCap { address: String, cap: usize },

    #[error("level {level} needs {cells} cylinders, above the cap of {cap} (set NECKLACE_MAX_CELLS to raise)")]
    CellCap { level: usize, cells: u128, cap: u64 },

    #[error("component structure did not stabilize by level {max_level} (window {window})")]
    LevelCap { max_level: usize, window: usize },

    #[error("{0} is not a cut: {1}")]
    NotACut(String, String),

    #[error("rigid-map search still open at depth {depth}; raise --depth")]
    DepthExhausted { depth: usize },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("unresolved geometric contact between copies {0} and {1}: {2}")]
    UnresolvedContact(usize, usize, String),

    #[error("input does not parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by hitting a configured resource limit rather
    /// than by bad input or a negative mathematical verdict.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::ClassCap { .. }
                | Error::CellCap { .. }
                | Error::LevelCap { .. }
                | Error::DepthExhausted { .. }
                | Error::UnresolvedContact(..)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
