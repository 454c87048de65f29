use std::fmt;
use std::path::Path;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_TARGET: i32 = 3;
pub const EXIT_MODEL: i32 = 4;
pub const EXIT_PRECONDITION: i32 = 5;

/// An error carrying the process exit code it maps to. The codes are
/// stable API: 0 ok, 2 input error, 3 target unmet, 4 model error,
/// 5 precondition violation.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn target(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_TARGET,
            message: message.into(),
        }
    }

    pub fn model(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_MODEL,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<gfcn_graph::GraphError> for CliError {
    fn from(e: gfcn_graph::GraphError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<gfcn_flow::FlowError> for CliError {
    fn from(e: gfcn_flow::FlowError) -> Self {
        use gfcn_flow::FlowError::*;
        match e {
            NotATree(_) | BoundaryInsufficient { .. } | NotParallel { .. } => {
                CliError::precondition(e.to_string())
            }
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<gfcn_model::ModelError> for CliError {
    fn from(e: gfcn_model::ModelError) -> Self {
        CliError::model(e.to_string())
    }
}

impl From<gfcn_tensor::TensorError> for CliError {
    fn from(e: gfcn_tensor::TensorError) -> Self {
        CliError::model(e.to_string())
    }
}

impl From<gfcn_equiv::EquivError> for CliError {
    fn from(e: gfcn_equiv::EquivError) -> Self {
        match e {
            gfcn_equiv::EquivError::Precondition(_) => CliError::precondition(e.to_string()),
            gfcn_equiv::EquivError::Graph(g) => g.into(),
            gfcn_equiv::EquivError::Model(m) => m.into(),
        }
    }
}

impl From<gfcn_spread::SpreadError> for CliError {
    fn from(e: gfcn_spread::SpreadError) -> Self {
        match e {
            gfcn_spread::SpreadError::Dataset(_) => CliError::target(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::input(format!("bad JSON: {e}"))
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::input(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}
