//! JSON tree documents and Graphviz output.
//!
//! A document is one node object `{kind, label, children?, payload?}`.

use std::fmt::Write;

use serde_json::{Map, Value as Json};

use super::node::{Behavior, BtNode, NodeKind, TreeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    /// Pretty-printed tree document.
    Json,
    /// Graphviz `digraph`.
    Dot,
}

pub fn render_tree(tree: &BtNode, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => render_json(tree),
        RenderFormat::Dot => render_dot(tree),
    }
}

pub fn render_json(tree: &BtNode) -> String {
    let mut out = serde_json::to_string_pretty(tree).expect("tree serializes");
    out.push('\n');
    out
}

/// `→` marks Sequence nodes and `?` Fallback nodes.
pub fn render_dot(tree: &BtNode) -> String {
    let mut out = String::from("digraph bt {\n  node [fontname=\"Helvetica\"];\n");
    let mut next = 0usize;
    dot_node(tree, &mut out, &mut next);
    out.push_str("}\n");
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_node(node: &BtNode, out: &mut String, next: &mut usize) -> usize {
    let id = *next;
    *next += 1;
    let label = dot_escape(&node.label);
    let (shape, text) = match node.kind {
        NodeKind::Sequence => ("box", format!("→\\n{label}")),
        NodeKind::Fallback => ("box", format!("?\\n{label}")),
        NodeKind::Condition => ("ellipse", label),
        NodeKind::Action => ("box, style=rounded", label),
    };
    let _ = writeln!(out, "  n{id} [shape={shape}, label=\"{text}\"];");
    for child in &node.children {
        let child_id = dot_node(child, out, next);
        let _ = writeln!(out, "  n{id} -> n{child_id};");
    }
    id
}

/// Parses and validates a tree document.
pub fn parse_tree(text: &str) -> Result<BtNode, TreeError> {
    if text.trim().is_empty() {
        return Err(TreeError::Empty);
    }
    let doc: Json = serde_json::from_str(text).map_err(|e| TreeError::Json(e.to_string()))?;
    let tree = node_from_json(&doc, "$")?;
    tree.validate()?;
    Ok(tree)
}

fn node_from_json(value: &Json, path: &str) -> Result<BtNode, TreeError> {
    let obj: &Map<String, Json> = value.as_object().ok_or_else(|| TreeError::Payload {
        path: path.to_string(),
        message: "node must be a JSON object".to_string(),
    })?;
    if let Some(extra) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "kind" | "label" | "children" | "payload"))
    {
        return Err(TreeError::Payload {
            path: path.to_string(),
            message: format!("unexpected field `{extra}`"),
        });
    }
    let kind_str = obj
        .get("kind")
        .and_then(Json::as_str)
        .ok_or_else(|| TreeError::MissingField {
            path: path.to_string(),
            field: "kind",
        })?;
    let kind = NodeKind::parse(kind_str).ok_or_else(|| TreeError::UnknownKind {
        path: path.to_string(),
        kind: kind_str.to_string(),
    })?;
    let label = obj
        .get("label")
        .and_then(Json::as_str)
        .ok_or_else(|| TreeError::MissingField {
            path: path.to_string(),
            field: "label",
        })?
        .to_string();
    let children = match obj.get("children") {
        None => Vec::new(),
        Some(Json::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, c)| node_from_json(c, &format!("{path}.children[{i}]")))
            .collect::<Result<_, _>>()?,
        Some(_) => {
            return Err(TreeError::Payload {
                path: path.to_string(),
                message: "`children` must be an array".to_string(),
            })
        }
    };
    let payload = match obj.get("payload") {
        None | Some(Json::Null) => None,
        Some(p) => Some(
            serde_json::from_value::<Behavior>(p.clone()).map_err(|e| TreeError::Payload {
                path: path.to_string(),
                message: e.to_string(),
            })?,
        ),
    };
    Ok(BtNode {
        kind,
        label,
        children,
        payload,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_an_error() {
        assert_eq!(parse_tree("  \n"), Err(TreeError::Empty));
    }

    #[test]
    fn unknown_kind_reports_location() {
        let doc = r#"{"kind":"sequence","label":"s","children":[{"kind":"parallel","label":"p"}]}"#;
        match parse_tree(doc) {
            Err(TreeError::UnknownKind { path, kind }) => {
                assert_eq!(path, "$.children[0]");
                assert_eq!(kind, "parallel");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arity_violation_is_a_parse_error() {
        let doc = r#"{"kind":"fallback","label":"f","children":[]}"#;
        assert!(matches!(parse_tree(doc), Err(TreeError::Arity { .. })));
    }

    #[test]
    fn single_leaf_renders_one_node() {
        let leaf = BtNode::condition("ready?");
        let dot = render_dot(&leaf);
        assert_eq!(dot.matches("shape=").count(), 1);
        assert!(!dot.contains("->"));
        assert_eq!(parse_tree(&render_json(&leaf)).unwrap(), leaf);
    }

    #[test]
    fn dot_marks_control_nodes() {
        let tree = BtNode::fallback(
            "goal",
            vec![
                BtNode::condition("c \"quoted\""),
                BtNode::sequence("s", vec![BtNode::action("a")]),
            ],
        );
        let dot = render_dot(&tree);
        assert!(dot.contains("label=\"?\\ngoal\""));
        assert!(dot.contains("label=\"→\\ns\""));
        assert!(dot.contains("c \\\"quoted\\\""));
        assert_eq!(dot, render_dot(&tree));
    }
}
