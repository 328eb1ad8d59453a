//! Template ingestion and path resolution over nested resource documents.

mod path;
mod template;

pub use path::{parse_path, resolve_path, visit_path, PathError, PathExpr, Segment};
pub use template::{parse_template, IacTemplate, ResourceDescriptor, TemplateError};
