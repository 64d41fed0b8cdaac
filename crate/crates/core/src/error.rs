use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("range error: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A search or enumeration would exceed its configured work limit.
    #[error("budget exceeded for {what}: requires {required}, limit {limit}{hint}")]
    Budget {
        what: String,
        required: u128,
        limit: u128,
        hint: String,
    },

    #[error("could not factor {n} within the trial-division budget")]
    Factorization { n: u64 },
}

impl LabError {
    pub fn range(msg: impl Into<String>) -> Self {
        LabError::Range(msg.into())
    }

    pub fn argument(msg: impl Into<String>) -> Self {
        LabError::Argument(msg.into())
    }

    pub fn budget(what: impl Into<String>, required: u128, limit: u128) -> Self {
        LabError::Budget {
            what: what.into(),
            required,
            limit,
            hint: String::new(),
        }
    }

    /// Appends a suggestion to a budget error; other variants are unchanged.
    pub fn with_hint(mut self, text: impl Into<String>) -> Self {
        if let LabError::Budget { hint, .. } = &mut self {
            *hint = format!("; {}", text.into());
        }
        self
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, LabError::Budget { .. })
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
