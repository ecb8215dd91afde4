//! Net files, Graphviz export and JSON reports.

pub mod dot;
pub mod format;
pub mod report;

pub use dot::{export_dot, Highlight};
pub use format::{parse_document, parse_net, serialize_net, NetDocument, ParseError};
