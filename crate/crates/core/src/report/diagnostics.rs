use std::fmt::Write as _;

use super::ReportError;
use crate::lints::{Diagnostic, Severity};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticFormat {
    Text,
    Json,
}

/// Text is one `file:line:col: [pass] message` line per diagnostic; JSON is
/// an array of diagnostic objects. Empty input gives empty text output.
pub fn emit_diagnostics(
    diags: &[Diagnostic],
    format: DiagnosticFormat,
) -> Result<String, ReportError> {
    match format {
        DiagnosticFormat::Text => {
            let mut out = String::new();
            for d in diags {
                let info = if d.severity == Severity::Info {
                    "info: "
                } else {
                    ""
                };
                writeln!(
                    out,
                    "{}:{}:{}: [{}] {info}{}",
                    d.file, d.line, d.column, d.pass, d.message
                )
                .expect("write to string");
            }
            Ok(out)
        }
        DiagnosticFormat::Json => {
            let mut out = serde_json::to_string_pretty(diags)?;
            out.push('\n');
            Ok(out)
        }
    }
}
