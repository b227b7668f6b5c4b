use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

/// Reserved keys shared by the disambiguation and manipulation subtrees.
pub mod keys {
    /// Ordered, duplicate-free list of categories awaiting clarification.
    pub const DISAMBIGUATION_QUEUE: &str = "disambiguation/queue";
    pub const PERCEPTION_HALTED: &str = "perception/halted";
    pub const HELD_OBJECT: &str = "world/held_object";
    /// Prefix; the full key is `resolved_frames/<category>`.
    pub const RESOLVED_PREFIX: &str = "resolved_frames/";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Str(String),
    Number(f64),
    Flag(bool),
    List(Vec<Value>),
    Pose(Vec3),
}

#[derive(Debug, Error, PartialEq)]
pub enum BlackboardError {
    #[error("blackboard key `{0}` is not namespaced (expected `scope/name`)")]
    BadKey(String),
}

/// Typed key/value store. Keys are `scope/name` strings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Blackboard {
    entries: BTreeMap<String, Value>,
}

fn check_key(key: &str) -> Result<(), BlackboardError> {
    match key.split_once('/') {
        Some((scope, name)) if !scope.is_empty() && !name.is_empty() => Ok(()),
        _ => Err(BlackboardError::BadKey(key.to_string())),
    }
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn set(&mut self, key: impl Into<String>, value: Value) -> Result<(), BlackboardError> {
        let key = key.into();
        check_key(&key)?;
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn remove(&mut self, key: &str) -> Option<Value> {
        self.entries.remove(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn queue(&self) -> Vec<String> {
        match self.entries.get(keys::DISAMBIGUATION_QUEUE) {
            Some(Value::List(items)) => items
                .iter()
                .filter_map(|v| match v {
                    Value::Str(s) => Some(s.clone()),
                    _ => None,
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    fn store_queue(&mut self, queue: Vec<String>) {
        self.entries.insert(
            keys::DISAMBIGUATION_QUEUE.to_string(),
            Value::List(queue.into_iter().map(Value::Str).collect()),
        );
    }

    pub fn queue_head(&self) -> Option<String> {
        self.queue().into_iter().next()
    }

    pub fn queue_contains(&self, category: &str) -> bool {
        self.queue().iter().any(|q| q == category)
    }

    /// Appends `category` unless already queued. Returns whether it was added.
    pub fn enqueue_query(&mut self, category: &str) -> bool {
        let mut queue = self.queue();
        if queue.iter().any(|q| q == category) {
            return false;
        }
        queue.push(category.to_string());
        self.store_queue(queue);
        true
    }

    /// Surfaces one ambiguity at a time: `category` is queued only when the
    /// queue is empty. Ambiguities found while another query is pending are
    /// rediscovered by a later tick once that query is resolved.
    pub fn request_disambiguation(&mut self, category: &str) -> bool {
        if !self.queue().is_empty() {
            return false;
        }
        self.enqueue_query(category)
    }

    /// Removes `category` from the queue. Returns whether it was present.
    pub fn remove_query(&mut self, category: &str) -> bool {
        let mut queue = self.queue();
        let before = queue.len();
        queue.retain(|q| q != category);
        let removed = queue.len() != before;
        self.store_queue(queue);
        removed
    }

    /// Moves `category` to the back of the queue (adding it if absent).
    pub fn requeue(&mut self, category: &str) {
        let mut queue = self.queue();
        queue.retain(|q| q != category);
        queue.push(category.to_string());
        self.store_queue(queue);
    }

    pub fn perception_halted(&self) -> bool {
        matches!(self.entries.get(keys::PERCEPTION_HALTED), Some(Value::Flag(true)))
    }

    pub fn set_perception_halted(&mut self, halted: bool) {
        self.entries
            .insert(keys::PERCEPTION_HALTED.to_string(), Value::Flag(halted));
    }

    pub fn held_object(&self) -> Option<String> {
        match self.entries.get(keys::HELD_OBJECT) {
            Some(Value::Str(id)) => Some(id.clone()),
            _ => None,
        }
    }

    pub fn set_held_object(&mut self, id: Option<&str>) {
        match id {
            Some(id) => {
                self.entries
                    .insert(keys::HELD_OBJECT.to_string(), Value::Str(id.to_string()));
            }
            None => {
                self.entries.remove(keys::HELD_OBJECT);
            }
        }
    }

    pub fn resolved(&self, category: &str) -> Option<String> {
        match self
            .entries
            .get(&format!("{}{category}", keys::RESOLVED_PREFIX))
        {
            Some(Value::Str(id)) => Some(id.clone()),
            _ => None,
        }
    }

    pub fn resolved_frames(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .filter_map(|(k, v)| {
                let category = k.strip_prefix(keys::RESOLVED_PREFIX)?;
                match v {
                    Value::Str(id) => Some((category.to_string(), id.clone())),
                    _ => None,
                }
            })
            .collect()
    }

    /// Replaces all `resolved_frames/*` entries with `resolved`.
    pub fn set_resolved_frames(&mut self, resolved: &BTreeMap<String, String>) {
        self.entries
            .retain(|k, _| !k.starts_with(keys::RESOLVED_PREFIX));
        for (category, id) in resolved {
            self.entries.insert(
                format!("{}{category}", keys::RESOLVED_PREFIX),
                Value::Str(id.clone()),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_must_be_namespaced() {
        let mut bb = Blackboard::new();
        assert!(bb.set("flat", Value::Flag(true)).is_err());
        assert!(bb.set("/x", Value::Flag(true)).is_err());
        assert!(bb.set("task/target", Value::Pose(Vec3::ZERO)).is_ok());
    }

    #[test]
    fn queue_is_fifo_and_duplicate_free() {
        let mut bb = Blackboard::new();
        assert!(bb.enqueue_query("bowl"));
        assert!(bb.enqueue_query("banana"));
        assert!(!bb.enqueue_query("bowl"));
        assert_eq!(bb.queue(), ["bowl", "banana"]);
        assert!(bb.remove_query("bowl"));
        assert_eq!(bb.queue_head().as_deref(), Some("banana"));
    }

    #[test]
    fn requests_surface_one_ambiguity_at_a_time() {
        let mut bb = Blackboard::new();
        assert!(bb.request_disambiguation("bowl"));
        assert!(!bb.request_disambiguation("bowl"));
        assert!(!bb.request_disambiguation("banana"));
        assert_eq!(bb.queue(), ["bowl"]);
        bb.remove_query("bowl");
        assert!(bb.request_disambiguation("banana"));
    }

    #[test]
    fn resolved_frames_round_trip() {
        let mut bb = Blackboard::new();
        let mut map = BTreeMap::new();
        map.insert("bowl".to_string(), "bowl_1".to_string());
        bb.set_resolved_frames(&map);
        assert_eq!(bb.resolved("bowl").as_deref(), Some("bowl_1"));
        bb.set_resolved_frames(&BTreeMap::new());
        assert!(bb.resolved_frames().is_empty());
    }
}
