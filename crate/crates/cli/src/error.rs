use serde_json::json;

/// Exit status for usage and validation errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            kind: "validation",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "exit_code": self.code, "message": self.message }).to_string()
    }
}

impl From<flexdur::Error> for CliError {
    fn from(e: flexdur::Error) -> Self {
        use flexdur::Error as E;
        let (code, kind) = match &e {
            E::Numerical { .. } | E::NonFiniteTerm { .. } => (EXIT_NUMERICAL, "numerical"),
            E::Io(_) => (EXIT_USAGE, "io"),
            E::Csv(_) | E::Format { .. } => (EXIT_USAGE, "format"),
            E::InsufficientData(_) | E::Degenerate(_) => (EXIT_USAGE, "data"),
            _ => (EXIT_USAGE, "validation"),
        };
        CliError {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_USAGE,
            kind: "io",
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError {
            code: EXIT_USAGE,
            kind: "format",
            message: e.to_string(),
        }
    }
}
