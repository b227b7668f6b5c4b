//! Randomized checks shared by the property tests and the acceptance
//! harness. Each check derives everything from a seed and reports a
//! violation as `Err`.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clarify_core::bt::{tick_tree, Behavior, BtNode, Leaves, NodeKind, NodeStatus};
use clarify_core::config::{DialogueConfig, LearningConfig};
use clarify_core::disambiguation::{Answer, DialogueState, Phase, SceneEntity, SpatialRelation};
use clarify_core::executor::{Executor, RunConfig, RunStatus, Scenario};
use clarify_core::lfd::{infer_frame, learn, DemoGenerator, TaskStep};
use clarify_core::world::{ReleaseMode, SceneObject};
use clarify_core::{Config, Vec3};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- trees

/// Leaf statuses by label; conditions only ever get Success or Failure.
pub struct FixedLeaves(pub BTreeMap<String, NodeStatus>);

impl Leaves for FixedLeaves {
    fn condition(&mut self, label: &str, _: Option<&Behavior>) -> bool {
        self.0[label] == NodeStatus::Success
    }

    fn action(&mut self, label: &str, _: Option<&Behavior>) -> NodeStatus {
        self.0[label]
    }
}

/// Random tree with at most `max_depth` levels below the root and at most
/// `max_leaves` leaves, plus a random status per leaf.
pub fn random_tree(seed: u64, max_depth: usize, max_leaves: usize) -> (BtNode, BTreeMap<String, NodeStatus>) {
    fn grow(
        r: &mut ChaCha8Rng,
        depth: usize,
        max_depth: usize,
        budget: &mut usize,
        next: &mut usize,
        statuses: &mut BTreeMap<String, NodeStatus>,
    ) -> BtNode {
        let id = *next;
        *next += 1;
        let leaf = depth == max_depth || *budget <= 1 || r.gen_bool(0.35);
        if leaf {
            *budget -= 1;
            return if r.gen_bool(0.5) {
                let label = format!("c{id}");
                let s = if r.gen_bool(0.5) { NodeStatus::Success } else { NodeStatus::Failure };
                statuses.insert(label.clone(), s);
                BtNode::condition(label)
            } else {
                let label = format!("a{id}");
                let s = *[NodeStatus::Success, NodeStatus::Failure, NodeStatus::Running]
                    .choose(r)
                    .unwrap();
                statuses.insert(label.clone(), s);
                BtNode::action(label)
            };
        }
        // Reserve one leaf per remaining child so the budget is never overrun.
        let n = r.gen_range(1..=4).min(*budget);
        let mut children = Vec::with_capacity(n);
        for i in 0..n {
            let reserve = n - i - 1;
            let mut sub = *budget - reserve;
            let child = grow(r, depth + 1, max_depth, &mut sub, next, statuses);
            let used = (*budget - reserve) - sub;
            *budget -= used;
            children.push(child);
        }
        if r.gen_bool(0.5) {
            BtNode::sequence(format!("s{id}"), children)
        } else {
            BtNode::fallback(format!("f{id}"), children)
        }
    }
    let mut r = rng(seed);
    let mut budget = max_leaves;
    let mut next = 0;
    let mut statuses = BTreeMap::new();
    let tree = grow(&mut r, 0, max_depth, &mut budget, &mut next, &mut statuses);
    (tree, statuses)
}

/// Truth-table evaluation: every child's value is computed eagerly, then the
/// first child that is not the node's neutral value decides. Returns the
/// status and the labels of the nodes a real tick reaches, in return order.
pub fn oracle(node: &BtNode, leaves: &BTreeMap<String, NodeStatus>) -> (NodeStatus, Vec<String>) {
    let neutral = match node.kind {
        NodeKind::Condition | NodeKind::Action => {
            return (leaves[&node.label], vec![node.label.clone()]);
        }
        NodeKind::Sequence => NodeStatus::Success,
        NodeKind::Fallback => NodeStatus::Failure,
    };
    let values: Vec<(NodeStatus, Vec<String>)> = node.children.iter().map(|c| oracle(c, leaves)).collect();
    let decisive = values.iter().position(|(s, _)| *s != neutral);
    let reached = decisive.map_or(values.len(), |i| i + 1);
    let status = decisive.map_or(neutral, |i| values[i].0);
    let mut visits: Vec<String> = values[..reached].iter().flat_map(|(_, v)| v.clone()).collect();
    visits.push(node.label.clone());
    (status, visits)
}

pub fn check_tree(seed: u64) -> Result<(), String> {
    let (tree, statuses) = random_tree(seed, 4, 20);
    let leaves = tree.iter().filter(|n| n.children.is_empty()).count();
    if leaves > 20 {
        return Err(format!("generator produced {leaves} leaves"));
    }
    let (want, want_visits) = oracle(&tree, &statuses);
    let mut l = FixedLeaves(statuses);
    let got = tick_tree(&tree, &mut l).map_err(|e| e.to_string())?;
    if got.status != want {
        return Err(format!("seed {seed}: status {:?}, oracle {:?}", got.status, want));
    }
    let labels: Vec<String> = got.visits.iter().map(|v| v.label.clone()).collect();
    if labels != want_visits {
        return Err(format!("seed {seed}: visit order differs from oracle"));
    }
    let again = tick_tree(&tree, &mut l).map_err(|e| e.to_string())?;
    if again != got {
        return Err(format!("seed {seed}: re-tick differs"));
    }
    Ok(())
}

// ------------------------------------------------------------- dialogue

const AXIS_MARGIN: f64 = 0.03;
const CLOSE_RADIUS: f64 = 0.15;

/// Relation test from the definitions, robot perspective: left is −x,
/// in front is −y.
pub fn relation_holds(relation: SpatialRelation, a: Vec3, b: Vec3) -> bool {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    match relation {
        SpatialRelation::LeftOf => dx <= -AXIS_MARGIN,
        SpatialRelation::RightOf => dx >= AXIS_MARGIN,
        SpatialRelation::InFront => dy <= -AXIS_MARGIN,
        SpatialRelation::Behind => dy >= AXIS_MARGIN,
        SpatialRelation::CloseTo => dx.hypot(dy) <= CLOSE_RADIUS,
    }
}

/// Random tabletop: `cup` candidates plus distractors, pairwise at least
/// 5 cm apart.
pub fn random_dialogue_scene(seed: u64) -> (Vec<String>, Vec<SceneEntity>) {
    let mut r = rng(seed);
    let n_candidates = r.gen_range(2..=5);
    let n_distractors = r.gen_range(0..=4);
    let categories = ["plate", "bowl", "apple", "box"];
    let mut scene: Vec<SceneEntity> = Vec::new();
    for i in 0..n_candidates + n_distractors {
        let p = loop {
            let p = Vec3::new(r.gen_range(-0.4..=0.4), r.gen_range(0.2..=0.7), 0.0);
            if scene.iter().all(|o| o.position.horizontal_distance(p) >= 0.05) {
                break p;
            }
        };
        let (id, cat) = if i < n_candidates {
            (format!("cup_{}", i + 1), "cup".to_string())
        } else {
            let c = categories.choose(&mut r).unwrap();
            (format!("{c}#{i}"), c.to_string())
        };
        scene.push(SceneEntity::new(&id, &cat, p));
    }
    let candidates = (1..=n_candidates).map(|i| format!("cup_{i}")).collect();
    (candidates, scene)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct DialogueStats {
    pub questions: usize,
    pub discriminative: usize,
}

/// For every candidate as target: runs the automaton against an operator
/// who says yes exactly for the target, checking each emitted statement.
pub fn check_dialogue(seed: u64) -> Result<DialogueStats, String> {
    let cfg = DialogueConfig::default();
    let (candidates, scene) = random_dialogue_scene(seed);
    let pos = |id: &str| scene.iter().find(|o| o.id == id).unwrap().position;
    let mut stats = DialogueStats::default();
    for target in &candidates {
        let mut state = DialogueState::new("cup", candidates.clone());
        let mut answer = None;
        loop {
            let (next, question) = state.step(answer, &scene, &cfg).map_err(|e| e.to_string())?;
            state = next;
            let Some(q) = question else { break };
            let s = &q.statement;
            stats.questions += 1;
            if !relation_holds(s.relation, pos(&s.candidate), pos(&s.landmark)) {
                return Err(format!("seed {seed}: invalid statement `{}`", q.text));
            }
            if s.discriminative {
                stats.discriminative += 1;
                let satisfiers = candidates
                    .iter()
                    .filter(|c| **c != s.landmark)
                    .filter(|c| relation_holds(s.relation, pos(c), pos(&s.landmark)))
                    .count();
                if satisfiers != 1 {
                    return Err(format!("seed {seed}: `{}` fits {satisfiers} candidates", q.text));
                }
            }
            answer = Some(if q.candidate == *target { Answer::Yes } else { Answer::No });
        }
        if state.questions_asked > candidates.len() {
            return Err(format!("seed {seed}: {} questions for {} candidates", state.questions_asked, candidates.len()));
        }
        if state.phase != Phase::Resolved(target.clone()) {
            return Err(format!("seed {seed}: target {target} ended in {:?}", state.phase));
        }
    }
    Ok(stats)
}

// --------------------------------------------------------------- frames

fn max_spread(points: &[Vec3]) -> f64 {
    let mut m: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            m = m.max(a.distance(*b));
        }
    }
    m
}

fn gaussian(r: &mut ChaCha8Rng, sigma: f64) -> Vec3 {
    let mut g = || {
        // Box-Muller, independent of the library's sampler.
        let u1: f64 = 1.0 - r.gen::<f64>();
        let u2: f64 = r.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    Vec3::new(g(), g(), g()) * sigma
}

/// One synthetic three-demo set for a release of `banana`: the true frame,
/// and per demo the end-effector target in every frame.
pub struct FrameSet {
    pub truth: String,
    pub samples: Vec<BTreeMap<String, Vec3>>,
}

pub fn random_frame_set(seed: u64, sigma: f64) -> FrameSet {
    let mut r = rng(seed);
    let frames = ["base", "bowl", "cup"];
    let truth = frames.choose(&mut r).unwrap().to_string();
    let offset = Vec3::new(r.gen_range(-0.1..=0.1), r.gen_range(-0.1..=0.1), r.gen_range(0.0..=0.1));
    loop {
        let mut samples = Vec::new();
        for _ in 0..3 {
            let mut origins = BTreeMap::from([("base".to_string(), Vec3::ZERO)]);
            for cat in ["banana", "bowl", "cup"] {
                let p = Vec3::new(r.gen_range(-0.3..=0.3), r.gen_range(0.2..=0.5), 0.0);
                origins.insert(cat.to_string(), p);
            }
            let ee = origins[&truth] + offset + gaussian(&mut r, sigma);
            samples.push(origins.iter().map(|(f, o)| (f.clone(), ee - *o)).collect::<BTreeMap<_, _>>());
        }
        // Every competing frame must spread its targets at least 10 cm.
        let spread_ok = ["base", "bowl", "cup"].iter().filter(|f| **f != truth).all(|f| {
            let pts: Vec<Vec3> = samples.iter().map(|s| s[*f]).collect();
            max_spread(&pts) >= 0.10
        });
        if spread_ok {
            return FrameSet { truth, samples };
        }
    }
}

pub struct FrameOutcome {
    pub correct: bool,
    pub invariant: bool,
}

/// Infers the frame of a random set, then again after translating the data:
/// every world by one common offset, and, for object-frame targets, each
/// world by its own offset.
pub fn check_frame_set(seed: u64) -> Result<FrameOutcome, String> {
    let cfg = LearningConfig::default();
    let set = random_frame_set(seed, 0.01);
    let excluded = BTreeSet::from(["banana".to_string()]);
    let infer = |samples: &[BTreeMap<String, Vec3>]| {
        infer_frame(samples, &excluded, &cfg).map(|f| f.frame).map_err(|e| e.to_string())
    };
    let frame = infer(&set.samples)?;
    let mut r = rng(seed ^ 0xabcd);
    let shift = |s: &BTreeMap<String, Vec3>, t: Vec3| {
        let mut s = s.clone();
        *s.get_mut("base").unwrap() += t;
        s
    };
    let t = Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    let common: Vec<_> = set.samples.iter().map(|s| shift(s, t)).collect();
    let mut invariant = infer(&common)? == frame;
    if set.truth != "base" {
        let each: Vec<_> = set
            .samples
            .iter()
            .map(|s| {
                let t = Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
                shift(s, t)
            })
            .collect();
        invariant &= infer(&each)? == frame;
    }
    Ok(FrameOutcome {
        correct: frame == set.truth,
        invariant,
    })
}

// -------------------------------------------------------------- planner

fn task(kind: usize) -> (TaskStep, ReleaseMode) {
    let (frame, offset, mode) = match kind % 3 {
        0 => ("bowl", Vec3::new(-0.08, 0.0, 0.05), ReleaseMode::Drop),
        1 => ("bowl", Vec3::new(0.0, -0.15, 0.0), ReleaseMode::Place),
        _ => ("base", Vec3::new(0.25, 0.5, 0.0), ReleaseMode::Place),
    };
    let step = TaskStep {
        pick: "banana".into(),
        frame: frame.into(),
        offset,
        mode,
    };
    (step, mode)
}

fn template() -> Vec<SceneObject> {
    vec![
        SceneObject::new("banana", "banana", Vec3::new(0.1, 0.4, 0.0), 0.04),
        SceneObject::new("bowl", "bowl", Vec3::new(-0.15, 0.35, 0.0), 0.08),
        SceneObject::new("cup", "cup", Vec3::new(0.2, 0.3, 0.0), 0.04),
    ]
}

pub struct PlannerOutcome {
    pub mode: ReleaseMode,
    pub ticks: u64,
    /// Distance between the moved object and the learned target: 3D for
    /// Place, horizontal for Drop.
    pub error: f64,
}

/// Learns a one-step task from three noisy demonstrations and executes the
/// tree in a fresh random scene.
pub fn check_planner(seed: u64) -> Result<PlannerOutcome, String> {
    let (step, mode) = task(seed as usize);
    let mut generator = DemoGenerator::new(seed, 0.004);
    let demos = generator.generate(&template(), &[step], 3);
    let learned = learn(&demos, &LearningConfig::default()).map_err(|e| e.to_string())?;
    let tree = learned.tree.ok_or("no tree planned")?;
    let goal = learned.groups[0].goals[0].clone();
    let scene = generator.scatter(&template());

    let run = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let mut ex = Executor::new(
        Scenario {
            tree,
            scene,
            answers: None,
        },
        run,
        Config::default(),
    )
    .map_err(|e| e.to_string())?;
    let status = ex.run_to_end().clone();
    if status != RunStatus::Succeeded {
        return Err(format!("seed {seed}: {status:?} after {} ticks", ex.ticks()));
    }
    let world = ex.world();
    let banana = world.object("banana").unwrap().grasp_point();
    let origin = match goal.frame.as_str() {
        "base" => Vec3::ZERO,
        f => world.objects().find(|o| o.category == f).unwrap().grasp_point(),
    };
    let target = origin + goal.target_pose;
    let error = match mode {
        ReleaseMode::Place => banana.distance(target),
        ReleaseMode::Drop => banana.horizontal_distance(target),
    };
    Ok(PlannerOutcome {
        mode,
        ticks: ex.ticks(),
        error,
    })
}
