use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{loc}: {msg}")]
    Parse { loc: String, msg: String },

    #[error("{loc}: {source}")]
    Invalid {
        loc: String,
        source: simcontract::Error,
    },

    #[error(transparent)]
    Core(#[from] simcontract::Error),
}

impl CliError {
    pub fn parse(loc: impl Into<String>, msg: impl Into<String>) -> Self {
        Self::Parse {
            loc: loc.into(),
            msg: msg.into(),
        }
    }

    pub fn invalid(loc: impl Into<String>, source: simcontract::Error) -> Self {
        Self::Invalid {
            loc: loc.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(
                simcontract::Error::DimensionMismatch { .. }
                | simcontract::Error::AmbientMismatch { .. },
            ) => 3,
            Self::Core(simcontract::Error::NotComposable(_)) => 1,
            _ => 2,
        }
    }
}
