use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),
    #[error("grammar is not in Chomsky normal form")]
    NotCnf,
    #[error("automaton has epsilon transitions")]
    EpsilonTransitions,
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("unsupported filter: {0}")]
    UnsupportedFilter(String),
    #[error("missing substitution for symbol `{0}`")]
    MissingSubstitution(String),
    #[error("{0}")]
    Limit(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
