use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::document::DocumentValue;

const WILDCARD: &str = "[_]";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Key(String),
    /// Existential expansion over every element of an array.
    Wildcard,
}

/// A dotted path into a document, e.g. `properties.endpoints[_].name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathExpr {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("empty path")]
    EmptyPath,
    #[error("empty segment in path {0:?}")]
    EmptySegment(String),
    #[error("malformed wildcard {token:?} in path {path:?}: only [_] is supported")]
    MalformedWildcard { path: String, token: String },
}

impl PathExpr {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn has_wildcard(&self) -> bool {
        self.segments.iter().any(|s| matches!(s, Segment::Wildcard))
    }

    /// Builds a path from key segments only.
    pub fn from_keys<I, S>(keys: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<Segment> = keys.into_iter().map(|k| Segment::Key(k.into())).collect();
        if segments.is_empty() {
            None
        } else {
            Some(Self { segments })
        }
    }
}

pub fn parse_path(text: &str) -> Result<PathExpr, PathError> {
    if text.is_empty() {
        return Err(PathError::EmptyPath);
    }
    let mut segments = Vec::new();
    for token in text.split('.') {
        if token.is_empty() {
            return Err(PathError::EmptySegment(text.to_string()));
        }
        let bracket = token.find('[').unwrap_or(token.len());
        let (key, mut rest) = token.split_at(bracket);
        if key.contains(']') {
            return Err(PathError::MalformedWildcard {
                path: text.to_string(),
                token: token.to_string(),
            });
        }
        if !key.is_empty() {
            segments.push(Segment::Key(key.to_string()));
        }
        while !rest.is_empty() {
            match rest.strip_prefix(WILDCARD) {
                Some(tail) => {
                    segments.push(Segment::Wildcard);
                    rest = tail;
                }
                None => {
                    return Err(PathError::MalformedWildcard {
                        path: text.to_string(),
                        token: token.to_string(),
                    })
                }
            }
        }
    }
    Ok(PathExpr { segments })
}

impl FromStr for PathExpr {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_path(s)
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, segment) in self.segments.iter().enumerate() {
            match segment {
                Segment::Key(key) => {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    f.write_str(key)?;
                }
                Segment::Wildcard => f.write_str(WILDCARD)?,
            }
        }
        Ok(())
    }
}

impl Serialize for PathExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PathExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_path(&text).map_err(serde::de::Error::custom)
    }
}

/// Calls `visit` for every value reachable through `path`, in document order,
/// stopping early when `visit` returns `true`. Returns whether it stopped.
pub fn visit_path<'a, F>(doc: &'a DocumentValue, path: &PathExpr, visit: &mut F) -> bool
where
    F: FnMut(&'a DocumentValue) -> bool,
{
    walk(doc, &path.segments, visit)
}

fn walk<'a, F>(doc: &'a DocumentValue, segments: &[Segment], visit: &mut F) -> bool
where
    F: FnMut(&'a DocumentValue) -> bool,
{
    let Some((head, tail)) = segments.split_first() else {
        return visit(doc);
    };
    match head {
        Segment::Key(key) => match doc.as_object().and_then(|m| m.get(key)) {
            Some(next) => walk(next, tail, visit),
            None => false,
        },
        Segment::Wildcard => match doc.as_array() {
            Some(items) => items.iter().any(|item| walk(item, tail, visit)),
            None => false,
        },
    }
}

/// All values reachable through `path`. Missing keys, non-maps at key steps and
/// non-arrays at wildcard steps prune the branch. Duplicates are kept.
pub fn resolve_path<'a>(doc: &'a DocumentValue, path: &PathExpr) -> Vec<&'a DocumentValue> {
    let mut out = Vec::new();
    visit_path(doc, path, &mut |v| {
        out.push(v);
        false
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn keys(path: &PathExpr) -> Vec<String> {
        path.segments()
            .iter()
            .map(|s| match s {
                Segment::Key(k) => k.clone(),
                Segment::Wildcard => "*".to_string(),
            })
            .collect()
    }

    #[test]
    fn parses_plain_dotted_path() {
        let p = parse_path("properties.supportsHttpsTrafficOnly").unwrap();
        assert_eq!(keys(&p), ["properties", "supportsHttpsTrafficOnly"]);
    }

    #[test]
    fn parses_attached_wildcard() {
        let p = parse_path("properties.routing.endpoints.storageContainers[_].connectionString")
            .unwrap();
        assert_eq!(
            keys(&p),
            [
                "properties",
                "routing",
                "endpoints",
                "storageContainers",
                "*",
                "connectionString"
            ]
        );
    }

    #[test]
    fn parses_single_and_standalone_wildcard() {
        assert_eq!(keys(&parse_path("name").unwrap()), ["name"]);
        assert_eq!(keys(&parse_path("a.[_].b").unwrap()), ["a", "*", "b"]);
        assert_eq!(keys(&parse_path("[_]").unwrap()), ["*"]);
        assert_eq!(keys(&parse_path("a[_][_]").unwrap()), ["a", "*", "*"]);
    }

    #[test]
    fn rejects_bad_paths() {
        assert_eq!(parse_path(""), Err(PathError::EmptyPath));
        assert!(matches!(parse_path("a..b"), Err(PathError::EmptySegment(_))));
        assert!(matches!(parse_path(".a"), Err(PathError::EmptySegment(_))));
        assert!(matches!(
            parse_path("a[0].b"),
            Err(PathError::MalformedWildcard { .. })
        ));
        assert!(matches!(
            parse_path("a[x]"),
            Err(PathError::MalformedWildcard { .. })
        ));
        assert!(matches!(
            parse_path("a]b"),
            Err(PathError::MalformedWildcard { .. })
        ));
        assert!(matches!(
            parse_path("a[_]b"),
            Err(PathError::MalformedWildcard { .. })
        ));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(parse_path("a.[_].b").unwrap().to_string(), "a[_].b");
        assert_eq!(parse_path("[_].x").unwrap().to_string(), "[_].x");
    }

    #[test]
    fn resolves_wildcards_in_document_order() {
        let doc = json!({"a": [{"x": 1}, {"x": 2}, {"y": 3}]});
        let got = resolve_path(&doc, &parse_path("a[_].x").unwrap());
        assert_eq!(got, [&json!(1), &json!(2)]);
    }

    #[test]
    fn missing_or_mistyped_steps_prune() {
        let doc = json!({"a": {"b": 1}, "arr": [1, 2]});
        assert!(resolve_path(&doc, &parse_path("a.c").unwrap()).is_empty());
        assert!(resolve_path(&doc, &parse_path("a.b.c").unwrap()).is_empty());
        assert!(resolve_path(&doc, &parse_path("a[_]").unwrap()).is_empty());
        assert!(resolve_path(&doc, &parse_path("arr.x").unwrap()).is_empty());
        assert_eq!(resolve_path(&doc, &parse_path("arr[_]").unwrap()).len(), 2);
    }

    #[test]
    fn keeps_duplicates() {
        let doc = json!({"a": [{"x": "s"}, {"x": "s"}]});
        assert_eq!(resolve_path(&doc, &parse_path("a[_].x").unwrap()).len(), 2);
    }
}
