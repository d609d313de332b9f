use serde::Serialize;
use thiserror::Error;

/// One schema problem, located by a dotted path into the config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config has {} schema violation(s)", .0.len())]
    Schema(Vec<Diagnostic>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O failure on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema(vec![Diagnostic::new(path, message)])
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let diagnostics = match self {
            CliError::Schema(d) => d.clone(),
            _ => Vec::new(),
        };
        let body = serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "diagnostics": diagnostics,
            }
        });
        serde_json::to_string(&body).expect("error JSON serializes")
    }
}

/// Maps a core error raised while running a scenario. Input and domain
/// errors trace back to config values, so they count as schema violations.
pub fn from_core(err: spinphoton_core::Error, path: &str) -> CliError {
    use spinphoton_core::Error as E;
    match err {
        E::InvalidInput(m) | E::Domain(m) => CliError::schema(path, m),
        E::Numerical(m) => CliError::Numerical(m),
        E::Format(m) => CliError::Io { path: path.to_string(), message: m },
    }
}
