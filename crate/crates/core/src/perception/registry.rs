use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use super::detect::Detection;
use crate::bt::Blackboard;
use crate::config::PerceptionConfig;
use crate::geometry::Vec3;
use crate::world::{FrameResolver, ResolvedFrame};

/// Name of the robot base frame; always resolvable, at the world origin.
pub const BASE_FRAME: &str = "base";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    /// The bare category name refers to several instances.
    #[error("frame `{0}` is ambiguous")]
    Unresolvable(String),
    #[error("unknown frame `{0}`")]
    Unknown(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("instance `{0}` is not in the registry")]
    UnknownInstance(String),
    #[error("instance `{instance}` is a {actual}, not a {expected}")]
    CategoryMismatch {
        instance: String,
        expected: String,
        actual: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Instance {
    category: String,
    origin: Vec3,
}

/// One named frame, as published in state snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub name: String,
    pub category: String,
    pub instance: String,
    pub position: Vec3,
}

/// Frames attached to perceived object instances.
///
/// Every frame has identity rotation and sits at its instance's grasp point.
/// Duplicates are numbered by distance from the robot when the set of
/// instances changes; moves alone keep the existing numbers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameRegistry {
    instances: BTreeMap<String, Instance>,
    frames: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

/// Outcome of folding one detection round into the registry.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistryUpdate {
    pub registry: FrameRegistry,
    pub warnings: Vec<String>,
}

impl FrameRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry built from a first detection round.
    pub fn from_detections(dets: &[Detection], config: &PerceptionConfig) -> Self {
        Self::new().update(dets, config).registry
    }

    pub fn frame(&self, name: &str) -> Option<FrameEntry> {
        let instance = self.frames.get(name)?;
        let inst = &self.instances[instance];
        Some(FrameEntry {
            name: name.to_string(),
            category: inst.category.clone(),
            instance: instance.clone(),
            position: inst.origin,
        })
    }

    pub fn frames(&self) -> Vec<FrameEntry> {
        self.frames
            .keys()
            .filter_map(|name| self.frame(name))
            .collect()
    }

    pub fn frame_names(&self) -> Vec<String> {
        self.frames.keys().cloned().collect()
    }

    /// Frame name currently attached to `instance`.
    pub fn frame_of(&self, instance: &str) -> Option<&str> {
        self.frames
            .iter()
            .find(|(_, id)| id.as_str() == instance)
            .map(|(name, _)| name.as_str())
    }

    pub fn instance_position(&self, instance: &str) -> Option<Vec3> {
        self.instances.get(instance).map(|i| i.origin)
    }

    pub fn instance_category(&self, instance: &str) -> Option<&str> {
        self.instances.get(instance).map(|i| i.category.as_str())
    }

    pub fn count(&self, category: &str) -> usize {
        self.instances
            .values()
            .filter(|i| i.category == category)
            .count()
    }

    pub fn categories(&self) -> BTreeSet<String> {
        self.instances.values().map(|i| i.category.clone()).collect()
    }

    /// A category is ambiguous when it has several instances and none has
    /// been designated by the operator.
    pub fn is_ambiguous(&self, category: &str) -> bool {
        self.count(category) >= 2 && !self.resolved.contains_key(category)
    }

    /// Instances of `category` ordered by distance from the robot, ties by id.
    pub fn instances_of(&self, category: &str) -> Vec<String> {
        let mut ids: Vec<(&String, f64)> = self
            .instances
            .iter()
            .filter(|(_, i)| i.category == category)
            .map(|(id, i)| (id, i.origin.norm()))
            .collect();
        ids.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        ids.into_iter().map(|(id, _)| id.clone()).collect()
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    /// Gives the bare `category` name to `instance`; the other instances keep
    /// their indexed names.
    pub fn mark_resolved(&mut self, category: &str, instance: &str) -> Result<(), RegistryError> {
        let inst = self
            .instances
            .get(instance)
            .ok_or_else(|| RegistryError::UnknownInstance(instance.to_string()))?;
        if inst.category != category {
            return Err(RegistryError::CategoryMismatch {
                instance: instance.to_string(),
                expected: category.to_string(),
                actual: inst.category.clone(),
            });
        }
        if self.count(category) >= 2 {
            self.resolved
                .insert(category.to_string(), instance.to_string());
        }
        self.rename();
        Ok(())
    }

    /// Folds a detection round into a new registry.
    ///
    /// Per category, detections are matched to previous instances greedily by
    /// smallest displacement; this is sound as long as at most one object
    /// moves between rounds. Unmatched detections become new instances and
    /// unmatched instances are dropped.
    pub fn update(&self, dets: &[Detection], config: &PerceptionConfig) -> RegistryUpdate {
        let mut warnings = Vec::new();
        let mut instances = BTreeMap::new();
        let mut by_category: BTreeMap<&str, Vec<&Detection>> = BTreeMap::new();
        for d in dets {
            by_category.entry(d.category.as_str()).or_default().push(d);
        }
        let mut moved = 0usize;
        let mut unmatched_all: Vec<&Detection> = Vec::new();

        for (category, cat_dets) in &by_category {
            let prev: Vec<(&String, &Instance)> = self
                .instances
                .iter()
                .filter(|(_, i)| i.category == *category)
                .collect();
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for (pi, (_, inst)) in prev.iter().enumerate() {
                for (di, d) in cat_dets.iter().enumerate() {
                    pairs.push((inst.origin.distance(d.position), pi, di));
                }
            }
            let mut prev_used = vec![false; prev.len()];
            let mut det_used = vec![false; cat_dets.len()];
            loop {
                let open: Vec<&(f64, usize, usize)> = pairs
                    .iter()
                    .filter(|(_, p, d)| !prev_used[*p] && !det_used[*d])
                    .collect();
                let Some(best) = open.iter().map(|p| p.0).min_by(f64::total_cmp) else {
                    break;
                };
                let mut window: Vec<&(f64, usize, usize)> = open
                    .into_iter()
                    .filter(|(dist, _, _)| *dist < best + config.association_tie)
                    .collect();
                window.sort_by(|a, b| {
                    prev[a.1]
                        .0
                        .cmp(prev[b.1].0)
                        .then_with(|| cat_dets[a.2].instance.cmp(&cat_dets[b.2].instance))
                });
                let &(dist, pi, di) = window[0];
                let contested = window
                    .iter()
                    .skip(1)
                    .any(|(_, p, d)| *p == pi || *d == di);
                if contested {
                    let msg = format!(
                        "association of `{}` is ambiguous (displacements within {} m); kept lower instance id",
                        prev[pi].0, config.association_tie
                    );
                    warn!("{msg}");
                    warnings.push(msg);
                }
                prev_used[pi] = true;
                det_used[di] = true;
                if dist > config.moved_threshold {
                    moved += 1;
                }
                instances.insert(
                    prev[pi].0.clone(),
                    Instance {
                        category: category.to_string(),
                        origin: cat_dets[di].position,
                    },
                );
            }
            unmatched_all.extend(
                cat_dets
                    .iter()
                    .zip(det_used.iter())
                    .filter(|(_, used)| !**used)
                    .map(|(d, _)| *d),
            );
        }
        for d in unmatched_all {
            let mut id = d.instance.clone();
            let mut k = 2;
            while instances.contains_key(&id) {
                id = format!("{}~{k}", d.instance);
                k += 1;
            }
            instances.insert(
                id,
                Instance {
                    category: d.category.clone(),
                    origin: d.position,
                },
            );
        }
        if moved >= 2 {
            let msg = format!("{moved} instances moved between detection rounds; association assumes one");
            warn!("{msg}");
            warnings.push(msg);
        }

        let mut registry = FrameRegistry {
            instances,
            frames: self.frames.clone(),
            resolved: self.resolved.clone(),
        };
        registry.rename();
        RegistryUpdate { registry, warnings }
    }

    /// Recomputes frame names from instances and resolutions.
    fn rename(&mut self) {
        let instances = &self.instances;
        self.resolved.retain(|category, id| {
            instances.get(id).is_some_and(|i| &i.category == category)
                && instances.values().filter(|i| &i.category == category).count() >= 2
        });
        let previous: BTreeMap<&String, &String> =
            self.frames.iter().map(|(name, id)| (id, name)).collect();
        let mut frames = BTreeMap::new();
        for category in self.categories() {
            let ids = self.instances_of(&category);
            if ids.len() == 1 {
                frames.insert(category.clone(), ids[0].clone());
                continue;
            }
            let chosen = self.resolved.get(&category);
            let others: Vec<&String> = ids.iter().filter(|id| Some(*id) != chosen).collect();
            let kept = kept_indices(&category, &others, &previous, ids.len());
            for (i, id) in ids.iter().enumerate() {
                let name = if Some(id) == chosen {
                    category.clone()
                } else {
                    let k = kept.as_ref().map_or(i + 1, |kept| kept[id]);
                    format!("{category}_{k}")
                };
                frames.insert(name, id.clone());
            }
        }
        self.frames = frames;
    }

    /// Checks the naming rule: an unresolved category has either one bare
    /// frame or only indexed frames; a resolved one has exactly one bare frame
    /// on the chosen instance.
    pub fn check_naming(&self) -> Result<(), String> {
        for category in self.categories() {
            let ids = self.instances_of(&category);
            let bare = self.frames.get(&category);
            let indexed: Vec<_> = self
                .frames
                .iter()
                .filter(|(name, _)| {
                    name.strip_prefix(&format!("{category}_"))
                        .is_some_and(|rest| rest.parse::<usize>().is_ok())
                })
                .collect();
            match (ids.len(), self.resolved.get(&category)) {
                (1, _) => {
                    if bare != Some(&ids[0]) || !indexed.is_empty() {
                        return Err(format!("{category}: single instance must be bare"));
                    }
                }
                (n, None) => {
                    if bare.is_some() || indexed.len() != n {
                        return Err(format!("{category}: {n} instances need indexed names only"));
                    }
                }
                (n, Some(chosen)) => {
                    if bare != Some(chosen) || indexed.len() != n - 1 {
                        return Err(format!("{category}: resolved naming broken"));
                    }
                }
            }
        }
        if self.frames.len() != self.instances.len() {
            return Err("frame/instance count mismatch".to_string());
        }
        Ok(())
    }
}

/// Indices of the previous indexed names of `ids`, if those names are still
/// a valid assignment: distinct and within `1..=n`. With all instances of a
/// category unresolved, they must be exactly `1..=n`.
fn kept_indices<'a>(
    category: &str,
    ids: &[&'a String],
    previous: &BTreeMap<&String, &String>,
    n: usize,
) -> Option<BTreeMap<&'a String, usize>> {
    let prefix = format!("{category}_");
    let mut kept = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for id in ids {
        let k: usize = previous.get(*id)?.strip_prefix(&prefix)?.parse().ok()?;
        if !(1..=n).contains(&k) || !seen.insert(k) {
            return None;
        }
        kept.insert(*id, k);
    }
    if ids.len() == n && seen.iter().copied().ne(1..=n) {
        return None;
    }
    Some(kept)
}

/// Looks up `name`. A bare category name with several unresolved instances
/// fails and requests disambiguation of that category on the blackboard.
pub fn resolve_frame(
    reg: &FrameRegistry,
    name: &str,
    bb: &mut Blackboard,
) -> Result<ResolvedFrame, FrameError> {
    if name == BASE_FRAME {
        return Ok(ResolvedFrame {
            name: BASE_FRAME.to_string(),
            instance: None,
            origin: Vec3::ZERO,
        });
    }
    if let Some(entry) = reg.frame(name) {
        return Ok(ResolvedFrame {
            name: entry.name,
            instance: Some(entry.instance),
            origin: entry.position,
        });
    }
    if reg.is_ambiguous(name) {
        bb.request_disambiguation(name);
        return Err(FrameError::Unresolvable(name.to_string()));
    }
    Err(FrameError::Unknown(name.to_string()))
}

/// [`FrameResolver`] over a registry snapshot and the blackboard.
pub struct RegistryResolver<'a> {
    pub registry: &'a FrameRegistry,
    pub blackboard: &'a mut Blackboard,
}

impl FrameResolver for RegistryResolver<'_> {
    fn resolve(&mut self, name: &str) -> Result<ResolvedFrame, FrameError> {
        resolve_frame(self.registry, name, self.blackboard)
    }
}
