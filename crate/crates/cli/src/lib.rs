//! Command-line front end: argument parsing, command dispatch and the
//! CSV/JSON output contract.

pub mod commands;
pub mod output;

use luroth_core::Error;

pub use commands::{execute, Cli, Command, Common, Format};
pub use output::{parse_csv, parse_json, Document, ParsedCsv, Table};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Exit status for a failed run.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Validation(_)) | Some(Error::Domain(_)) | Some(Error::EmptyWord) => EXIT_VALIDATION,
        Some(Error::Resource { .. }) => EXIT_RESOURCE,
        _ => EXIT_INTERNAL,
    }
}

/// Runs a parsed command line and renders the document.
pub fn render(cli: &Cli) -> anyhow::Result<String> {
    let doc = execute(cli)?;
    match cli.common.format {
        Format::Csv => doc.to_csv(),
        Format::Json => doc.to_json(),
    }
}
