#![allow(dead_code)]

pub mod checks;

use clarify_core::bt::{parse_tree, BtNode};
use clarify_core::executor::{
    parse_answers, run, Executor, RunConfig, RunReport, Scenario, SceneEdit, ScriptedAnswer,
};
use clarify_core::world::{load_scene, SceneObject};
use clarify_core::Config;

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn scene(name: &str) -> Vec<SceneObject> {
    load_scene(&fixture(&format!("{name}.json"))).unwrap()
}

pub fn manip_tree() -> BtNode {
    parse_tree(&fixture("tree_manip.json")).unwrap()
}

pub fn full_tree() -> BtNode {
    parse_tree(&fixture("tree_full.json")).unwrap()
}

pub fn answers(name: &str) -> Vec<ScriptedAnswer> {
    parse_answers(&fixture(&format!("{name}.json"))).unwrap()
}

pub fn scenario(tree: BtNode, scene_name: &str, answers_name: Option<&str>) -> Scenario {
    Scenario {
        tree,
        scene: scene(scene_name),
        answers: answers_name.map(answers),
    }
}

pub fn run_cfg(include_disambiguation: bool, seed: u64) -> RunConfig {
    RunConfig {
        include_disambiguation,
        seed,
        ..RunConfig::default()
    }
}

pub fn execute(s: Scenario, include_disambiguation: bool, seed: u64) -> RunReport {
    run(s, &run_cfg(include_disambiguation, seed), &Config::default()).unwrap()
}

/// Two bananas and two bowls; `banana_2` is taken off the table as soon as
/// the bowl question is out.
pub fn reactive_run() -> RunReport {
    let mut ex = Executor::new(
        scenario(full_tree(), "scene_two_each", Some("answers_e")),
        RunConfig::default(),
        Config::default(),
    )
    .unwrap();
    let mut removed = false;
    while !ex.is_finished() {
        ex.step().unwrap();
        let asking_bowl = ex.outstanding_question().is_some_and(|q| q.query == "bowl");
        if asking_bowl && !removed {
            ex.edit_scene(SceneEdit::Remove {
                id: "banana_2".into(),
            })
            .unwrap();
            removed = true;
        }
    }
    ex.into_report()
}
