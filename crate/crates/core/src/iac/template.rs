use serde_json::Value;
use thiserror::Error;

use crate::document::DocumentValue;

/// Wrapper key used by exported templates (`{"template": {...}}`).
const WRAPPER_KEY: &str = "template";

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("no \"resources\" array found")]
    MissingResources,
    #[error("resource #{index} has no \"name\"")]
    ResourceMissingName { index: usize },
    #[error("resource #{index} ({name}) has no \"type\"")]
    ResourceMissingType { index: usize, name: String },
}

/// One cloud resource taken from a template.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceDescriptor {
    pub name: String,
    pub provider_type: String,
    /// The full resource object, including `properties`.
    pub body: DocumentValue,
    pub source_index: usize,
    pub resource_group: Option<String>,
}

impl ResourceDescriptor {
    /// The provider's full resource id when the body carries one, else the name.
    pub fn full_id(&self) -> &str {
        self.body
            .get("id")
            .and_then(Value::as_str)
            .filter(|id| !id.is_empty())
            .unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IacTemplate {
    pub schema_uri: Option<String>,
    pub resources: Vec<ResourceDescriptor>,
    pub raw: DocumentValue,
}

impl IacTemplate {
    /// Sets the resource group on every resource that does not name its own.
    pub fn with_default_group(mut self, group: &str) -> Self {
        for r in &mut self.resources {
            if r.resource_group.is_none() {
                r.resource_group = Some(group.to_string());
            }
        }
        self
    }
}

pub fn parse_template(bytes: &[u8]) -> Result<IacTemplate, TemplateError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| TemplateError::MalformedDocument(e.to_string()))?;
    let raw: Value =
        serde_json::from_str(text).map_err(|e| TemplateError::MalformedDocument(e.to_string()))?;
    if !raw.is_object() {
        return Err(TemplateError::MalformedDocument(
            "top level is not an object".to_string(),
        ));
    }

    let wrapper = raw.get(WRAPPER_KEY).filter(|w| w.is_object());
    let items = raw
        .get("resources")
        .or_else(|| wrapper.and_then(|w| w.get("resources")))
        .and_then(Value::as_array)
        .ok_or(TemplateError::MissingResources)?;
    let schema_uri = raw
        .get("$schema")
        .or_else(|| wrapper.and_then(|w| w.get("$schema")))
        .and_then(Value::as_str)
        .map(str::to_string);

    let resources = items
        .iter()
        .enumerate()
        .map(|(index, item)| descriptor(index, item))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(IacTemplate {
        schema_uri,
        resources,
        raw,
    })
}

fn descriptor(index: usize, item: &Value) -> Result<ResourceDescriptor, TemplateError> {
    let non_empty = |key: &str| {
        item.get(key)
            .and_then(Value::as_str)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
    };
    let name = non_empty("name").ok_or(TemplateError::ResourceMissingName { index })?;
    let provider_type = non_empty("type").ok_or_else(|| TemplateError::ResourceMissingType {
        index,
        name: name.clone(),
    })?;
    Ok(ResourceDescriptor {
        resource_group: non_empty("resourceGroup"),
        name,
        provider_type,
        body: item.clone(),
        source_index: index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_resources() {
        let t = parse_template(br#"{"resources": []}"#).unwrap();
        assert!(t.resources.is_empty());
        assert_eq!(t.schema_uri, None);
    }

    #[test]
    fn wrapped_template() {
        let doc = json!({"template": {"$schema": "s", "resources": [{"name": "a", "type": "T"}]}});
        let t = parse_template(doc.to_string().as_bytes()).unwrap();
        assert_eq!(t.resources.len(), 1);
        assert_eq!(t.schema_uri.as_deref(), Some("s"));
    }

    #[test]
    fn other_wrappers_are_not_unwrapped() {
        let doc = json!({"deployment": {"resources": [{"name": "a", "type": "T"}]}});
        assert!(matches!(
            parse_template(doc.to_string().as_bytes()),
            Err(TemplateError::MissingResources)
        ));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            parse_template(b"{not json"),
            Err(TemplateError::MalformedDocument(_))
        ));
        assert!(matches!(
            parse_template(&[0xff, 0xfe]),
            Err(TemplateError::MalformedDocument(_))
        ));
        assert!(matches!(
            parse_template(b"[]"),
            Err(TemplateError::MalformedDocument(_))
        ));
        assert!(matches!(
            parse_template(br#"{"resources": {}}"#),
            Err(TemplateError::MissingResources)
        ));
    }

    #[test]
    fn rejects_resources_without_name_or_type() {
        let no_name = json!({"resources": [{"name": "a", "type": "T"}, {"type": "T"}]});
        assert!(matches!(
            parse_template(no_name.to_string().as_bytes()),
            Err(TemplateError::ResourceMissingName { index: 1 })
        ));
        let no_type = json!({"resources": [{"name": "a", "type": ""}]});
        assert!(matches!(
            parse_template(no_type.to_string().as_bytes()),
            Err(TemplateError::ResourceMissingType { index: 0, .. })
        ));
    }

    #[test]
    fn reads_resource_group_and_full_id() {
        let doc = json!({"resources": [
            {"name": "a", "type": "T", "resourceGroup": "rg1", "id": "/subs/x/a"},
            {"name": "b", "type": "T"}
        ]});
        let t = parse_template(doc.to_string().as_bytes())
            .unwrap()
            .with_default_group("fallback");
        assert_eq!(t.resources[0].resource_group.as_deref(), Some("rg1"));
        assert_eq!(t.resources[1].resource_group.as_deref(), Some("fallback"));
        assert_eq!(t.resources[0].full_id(), "/subs/x/a");
        assert_eq!(t.resources[1].full_id(), "b");
        assert_eq!(t.resources[1].source_index, 1);
    }
}
