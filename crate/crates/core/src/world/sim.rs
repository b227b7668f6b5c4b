use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scene::{validate_object, validate_scene, SceneError, SceneObject};
use crate::config::WorldConfig;
use crate::geometry::Vec3;
use crate::perception::FrameError;

/// Tolerance mode of a release and of the matching at-pose check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleaseMode {
    /// Precise place: sphere tolerance.
    Place,
    /// Rough place: cylinder tolerance.
    Drop,
}

impl ReleaseMode {
    pub fn verb(self) -> &'static str {
        match self {
            ReleaseMode::Place => "place",
            ReleaseMode::Drop => "drop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Pick,
    Place,
    Drop,
}

impl From<ReleaseMode> for ActionKind {
    fn from(mode: ReleaseMode) -> Self {
        match mode {
            ReleaseMode::Place => ActionKind::Place,
            ReleaseMode::Drop => ActionKind::Drop,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Pick => "pick",
            ActionKind::Place => "place",
            ActionKind::Drop => "drop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gripper {
    Open,
    Closed,
}

/// A manipulation in flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProgress {
    pub id: u64,
    pub kind: ActionKind,
    /// Object picked or released.
    pub object: String,
    pub started_at: f64,
    pub duration: f64,
    pub elapsed: f64,
    /// Target of the end effector in the world frame.
    pub target: Vec3,
    /// Frame the target was expressed in.
    pub frame: String,
}

/// A frame looked up by name.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedFrame {
    pub name: String,
    /// Scene instance the frame is attached to; `None` for the base frame.
    pub instance: Option<String>,
    pub origin: Vec3,
}

/// Name → frame lookup used by actions and conditions.
pub trait FrameResolver {
    fn resolve(&mut self, name: &str) -> Result<ResolvedFrame, FrameError>;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("`{id}` is {distance:.3} m from the robot, outside the workspace")]
    OutOfWorkspace { id: String, distance: f64 },
    #[error("gripper is closed around `{0}`")]
    GripperNotOpen(String),
    #[error("nothing is held")]
    NothingHeld,
    #[error("holding `{held}`, not a {expected}")]
    WrongObjectHeld { expected: String, held: String },
    #[error("another manipulation is in progress")]
    Busy,
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("`{0}` is in the gripper")]
    ObjectHeld(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Something that happened while advancing the clock.
#[derive(Debug, Clone, PartialEq)]
pub enum WorldEvent {
    Completed(ActionProgress),
    Note(String),
}

#[derive(Debug, Clone, PartialEq)]
struct ActiveAction {
    progress: ActionProgress,
    started_us: u64,
    duration_us: u64,
    from: Vec3,
    /// Where the released object's grasp point ends up (target plus noise).
    settle: Vec3,
}

/// Serializable view of the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub clock: f64,
    pub gripper: Gripper,
    pub held: Option<String>,
    pub end_effector: Vec3,
    pub objects: Vec<SceneObject>,
    pub active: Option<ActionProgress>,
}

/// Ground-truth scene state. Virtual time is kept in whole microseconds so
/// that splitting a step never changes the outcome.
#[derive(Debug, Clone)]
pub struct WorldState {
    objects: BTreeMap<String, SceneObject>,
    gripper: Gripper,
    held: Option<String>,
    ee: Vec3,
    clock_us: u64,
    active: Option<ActiveAction>,
    next_action: u64,
    config: WorldConfig,
    rng: ChaCha8Rng,
}

fn secs_to_us(secs: f64) -> u64 {
    (secs * 1e6).round().max(0.0) as u64
}

fn us_to_secs(us: u64) -> f64 {
    us as f64 / 1e6
}

impl WorldState {
    pub fn new(objects: Vec<SceneObject>, config: WorldConfig, seed: u64) -> Result<Self, SimError> {
        validate_scene(&objects)?;
        Ok(Self {
            objects: objects.into_iter().map(|o| (o.id.clone(), o)).collect(),
            gripper: Gripper::Open,
            held: None,
            ee: Vec3::from(config.home),
            clock_us: 0,
            active: None,
            next_action: 1,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn clock(&self) -> f64 {
        us_to_secs(self.clock_us)
    }

    pub fn gripper(&self) -> Gripper {
        self.gripper
    }

    pub fn held(&self) -> Option<&str> {
        self.held.as_deref()
    }

    pub fn held_object(&self) -> Option<&SceneObject> {
        self.held.as_ref().and_then(|id| self.objects.get(id))
    }

    pub fn end_effector(&self) -> Vec3 {
        self.ee
    }

    pub fn object(&self, id: &str) -> Option<&SceneObject> {
        self.objects.get(id)
    }

    /// Objects ordered by id.
    pub fn objects(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.values()
    }

    pub fn active(&self) -> Option<ActionProgress> {
        self.active.as_ref().map(|a| {
            let mut p = a.progress.clone();
            p.elapsed = us_to_secs(self.clock_us - a.started_us);
            p
        })
    }

    pub fn is_busy(&self) -> bool {
        self.active.is_some()
    }

    /// Closes the gripper without holding anything (test and scenario setup).
    pub fn close_gripper(&mut self) {
        self.gripper = Gripper::Closed;
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            clock: self.clock(),
            gripper: self.gripper,
            held: self.held.clone(),
            end_effector: self.ee,
            objects: self.objects.values().cloned().collect(),
            active: self.active(),
        }
    }

    fn start(&mut self, kind: ActionKind, object: &str, target: Vec3, frame: &str, duration: f64, settle: Vec3) -> ActionProgress {
        let progress = ActionProgress {
            id: self.next_action,
            kind,
            object: object.to_string(),
            started_at: self.clock(),
            duration,
            elapsed: 0.0,
            target,
            frame: frame.to_string(),
        };
        self.next_action += 1;
        self.active = Some(ActiveAction {
            progress: progress.clone(),
            started_us: self.clock_us,
            duration_us: secs_to_us(duration),
            from: self.ee,
            settle,
        });
        progress
    }

    /// Starts closing the gripper around the object behind `frame_name`.
    ///
    /// An empty closed gripper is opened first; a gripper that already holds
    /// something fails the open-gripper pre-condition.
    pub fn begin_pick(
        &mut self,
        frames: &mut dyn FrameResolver,
        frame_name: &str,
    ) -> Result<ActionProgress, SimError> {
        if self.active.is_some() {
            return Err(SimError::Busy);
        }
        if let Some(held) = &self.held {
            return Err(SimError::GripperNotOpen(held.clone()));
        }
        let frame = frames.resolve(frame_name)?;
        let id = frame
            .instance
            .clone()
            .ok_or_else(|| SimError::UnknownObject(frame_name.to_string()))?;
        let obj = self
            .objects
            .get(&id)
            .ok_or_else(|| SimError::UnknownObject(id.clone()))?;
        let grasp = obj.grasp_point();
        let reach = grasp.horizontal_norm();
        if reach > self.config.workspace_radius {
            return Err(SimError::OutOfWorkspace { id, distance: reach });
        }
        self.gripper = Gripper::Open;
        let duration = self.config.pick_duration;
        Ok(self.start(ActionKind::Pick, &id, grasp, &frame.name, duration, grasp))
    }

    /// Starts opening the gripper with the held `category` object at
    /// `target_pose` expressed in `frame_name`.
    pub fn begin_release(
        &mut self,
        frames: &mut dyn FrameResolver,
        category: &str,
        target_pose: Vec3,
        frame_name: &str,
        mode: ReleaseMode,
    ) -> Result<ActionProgress, SimError> {
        if self.active.is_some() {
            return Err(SimError::Busy);
        }
        let held = self.held_object().ok_or(SimError::NothingHeld)?;
        if held.category != category {
            return Err(SimError::WrongObjectHeld {
                expected: category.to_string(),
                held: held.id.clone(),
            });
        }
        let held_id = held.id.clone();
        let frame = frames.resolve(frame_name)?;
        let target = frame.origin + target_pose;
        let reach = target.horizontal_norm();
        if reach > self.config.workspace_radius {
            return Err(SimError::OutOfWorkspace {
                id: frame_name.to_string(),
                distance: reach,
            });
        }
        let mut settle = target + self.release_noise(mode);
        settle.z = settle.z.max(0.0);
        let duration = self.config.release_duration;
        Ok(self.start(mode.into(), &held_id, target, &frame.name, duration, settle))
    }

    fn release_noise(&mut self, mode: ReleaseMode) -> Vec3 {
        let (radius, planar) = match mode {
            ReleaseMode::Place => (self.config.place_noise, false),
            ReleaseMode::Drop => (self.config.drop_noise, true),
        };
        if radius <= 0.0 {
            return Vec3::ZERO;
        }
        loop {
            let x = self.rng.gen_range(-1.0..=1.0);
            let y = self.rng.gen_range(-1.0..=1.0);
            let z = if planar { 0.0 } else { self.rng.gen_range(-1.0..=1.0) };
            let v = Vec3::new(x, y, z);
            if v.norm() <= 1.0 {
                return v * radius;
            }
        }
    }

    /// Whether the `category` object is at `target_pose` in `frame_name`
    /// within the tolerance of `mode`.
    ///
    /// The reference frame is resolved before the object, so when both are
    /// ambiguous the reference frame is the one reported.
    pub fn check_at_pose(
        &self,
        frames: &mut dyn FrameResolver,
        category: &str,
        target_pose: Vec3,
        frame_name: &str,
        mode: ReleaseMode,
    ) -> Result<bool, FrameError> {
        let frame = frames.resolve(frame_name);
        let object = frames.resolve(category);
        let frame = frame?;
        let object = object?;
        if object.instance.is_some() && object.instance.as_deref() == self.held.as_deref() {
            return Ok(false);
        }
        Ok(self.within_tolerance(object.origin, frame.origin, target_pose, mode))
    }

    /// Tolerance test of a point against a target expressed in a frame with
    /// origin `frame_origin`.
    pub fn within_tolerance(&self, point: Vec3, frame_origin: Vec3, target_pose: Vec3, mode: ReleaseMode) -> bool {
        let target = frame_origin + target_pose;
        match mode {
            ReleaseMode::Place => point.distance(target) <= self.config.place_tolerance,
            ReleaseMode::Drop => {
                let height = point.z - frame_origin.z;
                point.horizontal_distance(target) <= self.config.drop_radius
                    && (0.0..=self.config.drop_height).contains(&height)
            }
        }
    }

    /// Advances virtual time by `dt` seconds and applies any completion.
    pub fn step(&mut self, dt: f64) -> Vec<WorldEvent> {
        let mut events = Vec::new();
        if dt.is_nan() || dt <= 0.0 {
            return events;
        }
        self.clock_us += secs_to_us(dt);
        let Some(active) = self.active.clone() else {
            return events;
        };
        let elapsed = self.clock_us - active.started_us;
        if elapsed >= active.duration_us {
            self.active = None;
            let mut done = active.progress.clone();
            done.elapsed = us_to_secs(active.duration_us);
            match done.kind {
                ActionKind::Pick => {
                    self.ee = active.settle;
                    if self.objects.contains_key(&done.object) {
                        self.gripper = Gripper::Closed;
                        self.held = Some(done.object.clone());
                    } else {
                        events.push(WorldEvent::Note(format!(
                            "`{}` vanished before the grasp closed",
                            done.object
                        )));
                    }
                }
                ActionKind::Place | ActionKind::Drop => {
                    self.ee = active.settle;
                    self.gripper = Gripper::Open;
                    self.held = None;
                    if let Some(obj) = self.objects.get(&done.object).cloned() {
                        let offset = obj.grasp_offset();
                        let mut pos = active.settle - offset;
                        pos.z = pos.z.max(0.0);
                        if let Some(other) = self.objects.values().find(|o| {
                            o.id != obj.id
                                && o.position.horizontal_distance(pos) < o.footprint_radius
                                && o.position.z.max(pos.z) - o.position.z.min(pos.z) < 0.01
                        }) {
                            events.push(WorldEvent::Note(format!(
                                "`{}` released onto `{}`",
                                obj.id, other.id
                            )));
                        }
                        self.objects.get_mut(&done.object).expect("present").position = pos;
                    }
                }
            }
            events.push(WorldEvent::Completed(done));
        } else {
            let t = elapsed as f64 / active.duration_us as f64;
            self.ee = active.from.lerp(active.progress.target, t);
            self.sync_held();
        }
        events
    }

    fn sync_held(&mut self) {
        let ee = self.ee;
        if let Some(id) = &self.held {
            if let Some(obj) = self.objects.get_mut(id) {
                let offset = obj.grasp_offset();
                let mut pos = ee - offset;
                pos.z = pos.z.max(0.0);
                obj.position = pos;
            }
        }
    }

    pub fn add_object(&mut self, obj: SceneObject) -> Result<(), SimError> {
        validate_object(&obj)?;
        if self.objects.contains_key(&obj.id) {
            return Err(SceneError::DuplicateId(obj.id).into());
        }
        self.objects.insert(obj.id.clone(), obj);
        Ok(())
    }

    pub fn remove_object(&mut self, id: &str) -> Result<SceneObject, SimError> {
        if self.held.as_deref() == Some(id) {
            return Err(SimError::ObjectHeld(id.to_string()));
        }
        self.objects
            .remove(id)
            .ok_or_else(|| SimError::UnknownObject(id.to_string()))
    }

    pub fn move_object(&mut self, id: &str, position: Vec3) -> Result<(), SimError> {
        if self.held.as_deref() == Some(id) {
            return Err(SimError::ObjectHeld(id.to_string()));
        }
        let obj = self
            .objects
            .get_mut(id)
            .ok_or_else(|| SimError::UnknownObject(id.to_string()))?;
        let mut moved = obj.clone();
        moved.position = position;
        validate_object(&moved)?;
        obj.position = position;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    /// Frames at the grasp points of the given objects, keyed by category.
    struct Frames(BTreeMap<String, ResolvedFrame>);

    impl Frames {
        fn of(world: &WorldState) -> Self {
            let mut map = BTreeMap::new();
            for o in world.objects() {
                map.insert(
                    o.category.clone(),
                    ResolvedFrame {
                        name: o.category.clone(),
                        instance: Some(o.id.clone()),
                        origin: o.grasp_point(),
                    },
                );
            }
            Self(map)
        }
    }

    impl FrameResolver for Frames {
        fn resolve(&mut self, name: &str) -> Result<ResolvedFrame, FrameError> {
            self.0
                .get(name)
                .cloned()
                .ok_or_else(|| FrameError::Unknown(name.to_string()))
        }
    }

    fn s1(seed: u64) -> WorldState {
        WorldState::new(
            vec![
                SceneObject::new("b1", "banana", Vec3::new(0.10, 0.40, 0.0), 0.04),
                SceneObject::new("w1", "bowl", Vec3::new(-0.15, 0.35, 0.0), 0.08),
            ],
            WorldConfig::default(),
            seed,
        )
        .unwrap()
    }

    fn completed(events: &[WorldEvent]) -> bool {
        events.iter().any(|e| matches!(e, WorldEvent::Completed(_)))
    }

    fn pick_banana(w: &mut WorldState) {
        let mut frames = Frames::of(w);
        w.begin_pick(&mut frames, "banana").unwrap();
        assert!(!completed(&w.step(2.5)));
        assert!(completed(&w.step(2.5)));
    }

    #[test]
    fn pick_completes_after_two_ticks() {
        let mut w = s1(0);
        let mut frames = Frames::of(&w);
        let p = w.begin_pick(&mut frames, "banana").unwrap();
        assert_eq!(p.duration, 5.0);
        assert!(!completed(&w.step(2.5)));
        assert_eq!(w.active().unwrap().elapsed, 2.5);
        assert!(completed(&w.step(2.5)));
        assert_eq!(w.held(), Some("b1"));
        assert_eq!(w.gripper(), Gripper::Closed);
        assert!(!w.is_busy());
    }

    #[test]
    fn pick_while_holding_fails_precondition() {
        let mut w = s1(0);
        pick_banana(&mut w);
        let mut frames = Frames::of(&w);
        assert_eq!(
            w.begin_pick(&mut frames, "bowl"),
            Err(SimError::GripperNotOpen("b1".into()))
        );
    }

    #[test]
    fn pick_opens_an_empty_closed_gripper() {
        let mut w = s1(0);
        w.close_gripper();
        let mut frames = Frames::of(&w);
        w.begin_pick(&mut frames, "banana").unwrap();
        assert_eq!(w.gripper(), Gripper::Open);
    }

    #[test]
    fn pick_outside_workspace_fails() {
        let mut w = s1(0);
        w.move_object("b1", Vec3::new(0.5, 0.5, 0.0)).unwrap();
        let mut frames = Frames::of(&w);
        assert!(matches!(
            w.begin_pick(&mut frames, "banana"),
            Err(SimError::OutOfWorkspace { .. })
        ));
    }

    #[test]
    fn release_with_empty_gripper_fails() {
        let mut w = s1(0);
        let mut frames = Frames::of(&w);
        let r = w.begin_release(&mut frames, "banana", Vec3::ZERO, "bowl", ReleaseMode::Drop);
        assert_eq!(r, Err(SimError::NothingHeld));
    }

    #[test]
    fn unresolvable_frame_is_reported() {
        let w = s1(0);
        let mut frames = Frames::of(&w);
        let r = w.check_at_pose(&mut frames, "banana", Vec3::ZERO, "plate", ReleaseMode::Drop);
        assert_eq!(r, Err(FrameError::Unknown("plate".into())));
    }

    fn release_error(mode: ReleaseMode, seed: u64) -> (f64, f64, bool) {
        let mut w = s1(seed);
        pick_banana(&mut w);
        let target = Vec3::new(0.0, 0.0, 0.05);
        let mut frames = Frames::of(&w);
        w.begin_release(&mut frames, "banana", target, "bowl", mode).unwrap();
        w.step(2.5);
        assert!(completed(&w.step(2.5)));
        let goal = w.object("w1").unwrap().grasp_point() + target;
        let banana = w.object("b1").unwrap().grasp_point();
        let mut frames = Frames::of(&w);
        let ok = w.check_at_pose(&mut frames, "banana", target, "bowl", mode).unwrap();
        (banana.distance(goal), banana.horizontal_distance(goal), ok)
    }

    #[test]
    fn releases_land_within_tolerance() {
        for seed in 0..1000 {
            let (d, _, ok) = release_error(ReleaseMode::Place, seed);
            assert!(d <= 0.03 && ok, "place seed {seed}: {d}");
            let (_, h, ok) = release_error(ReleaseMode::Drop, seed);
            assert!(h <= 0.10 && ok, "drop seed {seed}: {h}");
        }
    }

    #[test]
    fn at_pose_checks_use_mode_tolerance() {
        let mut w = s1(0);
        let bowl = w.object("w1").unwrap().grasp_point();
        w.move_object("b1", bowl + Vec3::new(0.02, 0.01, 0.04)).unwrap();
        let mut frames = Frames::of(&w);
        let target = Vec3::new(0.0, 0.0, 0.05);
        assert!(w.check_at_pose(&mut frames, "banana", target, "bowl", ReleaseMode::Drop).unwrap());
        assert!(w.check_at_pose(&mut frames, "banana", target, "bowl", ReleaseMode::Place).unwrap());
        let far = Vec3::new(0.06, 0.0, 0.05);
        assert!(!w.check_at_pose(&mut frames, "banana", far, "bowl", ReleaseMode::Place).unwrap());
        assert!(w.check_at_pose(&mut frames, "banana", far, "bowl", ReleaseMode::Drop).unwrap());
    }

    #[test]
    fn drop_cylinder_has_a_height_bound() {
        let w = s1(0);
        let origin = Vec3::new(0.0, 0.3, 0.0);
        assert!(w.within_tolerance(Vec3::new(0.05, 0.3, 0.2), origin, Vec3::ZERO, ReleaseMode::Drop));
        assert!(!w.within_tolerance(Vec3::new(0.05, 0.3, 0.21), origin, Vec3::ZERO, ReleaseMode::Drop));
        assert!(!w.within_tolerance(Vec3::new(0.11, 0.3, 0.0), origin, Vec3::ZERO, ReleaseMode::Drop));
    }

    #[test]
    fn idle_step_only_advances_clock() {
        let mut w = s1(0);
        let before = w.snapshot();
        assert!(w.step(2.5).is_empty());
        let after = w.snapshot();
        assert_eq!(after.clock, 2.5);
        assert_eq!(after.objects, before.objects);
    }

    #[test]
    fn held_object_follows_end_effector() {
        let mut w = s1(0);
        pick_banana(&mut w);
        let mut frames = Frames::of(&w);
        w.begin_release(&mut frames, "banana", Vec3::new(0.0, 0.0, 0.05), "bowl", ReleaseMode::Drop)
            .unwrap();
        w.step(1.0);
        assert_eq!(w.object("b1").unwrap().grasp_point(), w.end_effector());
        assert_eq!(w.object("w1").unwrap().position, Vec3::new(-0.15, 0.35, 0.0));
    }

    #[test]
    fn splitting_steps_does_not_change_the_outcome() {
        let run = |steps: &[f64]| {
            let mut w = s1(9);
            pick_banana(&mut w);
            let mut frames = Frames::of(&w);
            w.begin_release(&mut frames, "banana", Vec3::new(0.0, 0.0, 0.05), "bowl", ReleaseMode::Drop)
                .unwrap();
            let mut done = 0;
            for dt in steps {
                done += w.step(*dt).iter().filter(|e| matches!(e, WorldEvent::Completed(_))).count();
            }
            assert_eq!(done, 1);
            w.snapshot()
        };
        assert_eq!(run(&[10.0]), run(&[1.0; 10]));
        assert_eq!(run(&[10.0]), run(&[0.3, 4.7, 2.5, 2.5]));
    }
}
