//! JSON schemas for instance files and reports, embedded from `docs/schemas`.

use serde_json::Value;

use crate::error::{GkError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaKind {
    Instance,
    ConstantsReport,
    SolveReport,
    RoundReport,
    VerifyReport,
}

impl SchemaKind {
    pub const ALL: [SchemaKind; 5] = [
        SchemaKind::Instance,
        SchemaKind::ConstantsReport,
        SchemaKind::SolveReport,
        SchemaKind::RoundReport,
        SchemaKind::VerifyReport,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            SchemaKind::Instance => "instance.schema.json",
            SchemaKind::ConstantsReport => "constants_report.schema.json",
            SchemaKind::SolveReport => "solve_report.schema.json",
            SchemaKind::RoundReport => "round_report.schema.json",
            SchemaKind::VerifyReport => "verify_report.schema.json",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            SchemaKind::Instance => include_str!("../../../docs/schemas/instance.schema.json"),
            SchemaKind::ConstantsReport => include_str!("../../../docs/schemas/constants_report.schema.json"),
            SchemaKind::SolveReport => include_str!("../../../docs/schemas/solve_report.schema.json"),
            SchemaKind::RoundReport => include_str!("../../../docs/schemas/round_report.schema.json"),
            SchemaKind::VerifyReport => include_str!("../../../docs/schemas/verify_report.schema.json"),
        }
    }

    /// Schema of the JSON report written by a subcommand (`curves` writes CSV).
    pub fn for_command(command: &str) -> Option<SchemaKind> {
        match command {
            "constants" => Some(SchemaKind::ConstantsReport),
            "solve" => Some(SchemaKind::SolveReport),
            "round" => Some(SchemaKind::RoundReport),
            "verify" => Some(SchemaKind::VerifyReport),
            _ => None,
        }
    }
}

/// Validates `value`, joining all violations into one message.
pub fn validate(kind: SchemaKind, value: &Value) -> Result<()> {
    let schema: Value = serde_json::from_str(kind.text())
        .map_err(|e| GkError::Numerical(format!("embedded schema {} is not JSON: {e}", kind.file_name())))?;
    let compiled = jsonschema::JSONSchema::compile(&schema)
        .map_err(|e| GkError::Numerical(format!("embedded schema {} does not compile: {e}", kind.file_name())))?;
    let outcome = compiled.validate(value);
    outcome.map_err(|errors| {
        let msgs: Vec<String> = errors
            .map(|e| {
                let at = e.instance_path.to_string();
                if at.is_empty() {
                    e.to_string()
                } else {
                    format!("{at}: {e}")
                }
            })
            .collect();
        GkError::InvalidArgument(format!("{} violation: {}", kind.file_name(), msgs.join("; ")))
    })
}
