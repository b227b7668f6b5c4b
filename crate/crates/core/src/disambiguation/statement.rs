use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::relations::{relations, SpatialRelation};
use crate::config::DialogueConfig;
use crate::geometry::Vec3;
use crate::perception::FrameRegistry;

/// An object that can serve as candidate or landmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntity {
    pub id: String,
    pub category: String,
    pub position: Vec3,
}

impl SceneEntity {
    pub fn new(id: &str, category: &str, position: Vec3) -> Self {
        Self {
            id: id.to_string(),
            category: category.to_string(),
            position,
        }
    }
}

/// "`candidate` is `relation` `landmark`", with its informativeness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationStatement {
    /// How the query is phrased, e.g. `banana` or `white plate`.
    pub subject: String,
    pub candidate: String,
    pub relation: SpatialRelation,
    pub landmark: String,
    pub landmark_category: String,
    /// The landmark is another candidate ("the other banana").
    pub landmark_is_candidate: bool,
    /// No other candidate satisfies the same relation to the same landmark.
    pub discriminative: bool,
    /// The landmark phrase names exactly one object.
    pub landmark_unique: bool,
    /// Informativeness surrogate: `2·discriminative + landmark_unique − 0.001·distance`.
    pub score: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DisambiguationError {
    #[error("`{0}` has fewer than two instances")]
    NotAmbiguous(String),
    #[error("no spatial statement describes `{0}`")]
    NoStatement(String),
    #[error("`{0}` is not in the scene")]
    UnknownCandidate(String),
}

/// Instances of `query`, nearest to the robot first.
pub fn candidates(query: &str, reg: &FrameRegistry) -> Result<Vec<String>, DisambiguationError> {
    let ids = reg.instances_of(query);
    if ids.len() < 2 {
        return Err(DisambiguationError::NotAmbiguous(query.to_string()));
    }
    Ok(ids)
}

fn holds(subject: Vec3, relation: SpatialRelation, landmark: Vec3, cfg: &DialogueConfig) -> bool {
    relations(subject, landmark, cfg).contains(&relation)
}

/// Whether the statement's relation holds between its candidate and landmark
/// in `objects`.
pub fn statement_holds(s: &RelationStatement, objects: &[SceneEntity], cfg: &DialogueConfig) -> bool {
    let find = |id: &str| objects.iter().find(|o| o.id == id).map(|o| o.position);
    match (find(&s.candidate), find(&s.landmark)) {
        (Some(c), Some(l)) => holds(c, s.relation, l, cfg),
        _ => false,
    }
}

/// Picks the most informative statement describing `candidate` among
/// `all_candidates`, using the other objects as landmarks. Other candidates
/// become landmarks only if no discriminative statement exists without them.
pub fn select_statement(
    subject: &str,
    candidate: &str,
    all_candidates: &[String],
    objects: &[SceneEntity],
    cfg: &DialogueConfig,
) -> Result<RelationStatement, DisambiguationError> {
    let me = objects
        .iter()
        .find(|o| o.id == candidate)
        .ok_or_else(|| DisambiguationError::UnknownCandidate(candidate.to_string()))?;
    let is_candidate = |id: &str| all_candidates.iter().any(|c| c == id);
    let others: Vec<&SceneEntity> = objects
        .iter()
        .filter(|o| o.id != candidate && is_candidate(&o.id))
        .collect();

    let enumerate = |include_candidates: bool| -> Vec<RelationStatement> {
        let mut out = Vec::new();
        for landmark in objects.iter().filter(|o| o.id != candidate) {
            let landmark_is_candidate = is_candidate(&landmark.id);
            if landmark_is_candidate && !include_candidates {
                continue;
            }
            let landmark_unique = if landmark_is_candidate {
                all_candidates.len() == 2
            } else {
                objects
                    .iter()
                    .filter(|o| o.category == landmark.category)
                    .count()
                    == 1
            };
            for relation in relations(me.position, landmark.position, cfg) {
                let discriminative = others
                    .iter()
                    .filter(|o| o.id != landmark.id)
                    .all(|o| !holds(o.position, relation, landmark.position, cfg));
                let score = 2.0 * f64::from(u8::from(discriminative))
                    + f64::from(u8::from(landmark_unique))
                    - 0.001 * me.position.distance(landmark.position);
                out.push(RelationStatement {
                    subject: subject.to_string(),
                    candidate: candidate.to_string(),
                    relation,
                    landmark: landmark.id.clone(),
                    landmark_category: landmark.category.clone(),
                    landmark_is_candidate,
                    discriminative,
                    landmark_unique,
                    score,
                });
            }
        }
        out
    };

    let mut pool = enumerate(false);
    if !pool.iter().any(|s| s.discriminative) {
        pool = enumerate(true);
    }
    pool.into_iter()
        .min_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.relation.cmp(&b.relation))
                .then_with(|| a.landmark.cmp(&b.landmark))
        })
        .ok_or_else(|| DisambiguationError::NoStatement(candidate.to_string()))
}

/// `Is the {subject} {relation} the {landmark}?`
pub fn form_question(s: &RelationStatement) -> String {
    let landmark = if s.landmark_is_candidate {
        format!("other {}", s.landmark_category)
    } else {
        s.landmark_category.clone()
    };
    format!("Is the {} {} the {}?", s.subject, s.relation.phrase(), landmark)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SpatialRelation::*;

    fn cfg() -> DialogueConfig {
        DialogueConfig::default()
    }

    fn s2() -> Vec<SceneEntity> {
        vec![
            SceneEntity::new("banana_1", "banana", Vec3::new(-0.05, 0.35, 0.0)),
            SceneEntity::new("banana_2", "banana", Vec3::new(0.25, 0.45, 0.0)),
            SceneEntity::new("bowl", "bowl", Vec3::new(-0.15, 0.35, 0.0)),
        ]
    }

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn near_banana_is_close_to_the_bowl() {
        let c = ids(&["banana_1", "banana_2"]);
        let s = select_statement("banana", "banana_1", &c, &s2(), &cfg()).unwrap();
        assert_eq!((s.relation, s.landmark.as_str()), (CloseTo, "bowl"));
        assert!(s.discriminative && s.landmark_unique);
        assert_eq!(form_question(&s), "Is the banana close to the bowl?");
    }

    #[test]
    fn far_banana_is_behind_the_bowl() {
        let c = ids(&["banana_1", "banana_2"]);
        let s = select_statement("banana", "banana_2", &c, &s2(), &cfg()).unwrap();
        assert_eq!(s.relation, Behind);
        assert!(s.discriminative);
        assert_eq!(form_question(&s), "Is the banana behind the bowl?");
    }

    #[test]
    fn lone_candidates_refer_to_each_other() {
        let objects = vec![
            SceneEntity::new("a", "banana", Vec3::new(0.0, 0.4, 0.0)),
            SceneEntity::new("b", "banana", Vec3::new(0.2, 0.4, 0.0)),
        ];
        let c = ids(&["a", "b"]);
        let s = select_statement("banana", "a", &c, &objects, &cfg()).unwrap();
        assert!(s.landmark_is_candidate && s.discriminative);
        assert_eq!(s.relation, LeftOf);
        assert_eq!(form_question(&s), "Is the banana to the left of the other banana?");
    }

    #[test]
    fn equal_scores_fall_back_to_relation_order() {
        // Landmark straight to the right and close: LeftOf and CloseTo are
        // both discriminative against the same landmark at the same distance.
        let objects = vec![
            SceneEntity::new("a", "cup", Vec3::new(0.0, 0.4, 0.0)),
            SceneEntity::new("b", "cup", Vec3::new(0.5, 0.1, 0.0)),
            SceneEntity::new("m", "mug", Vec3::new(0.1, 0.4, 0.0)),
        ];
        let c = ids(&["a", "b"]);
        let s = select_statement("cup", "a", &c, &objects, &cfg()).unwrap();
        assert_eq!(s.relation, LeftOf);
    }

    #[test]
    fn attribute_tokens_pass_through() {
        let s = RelationStatement {
            subject: "white plate".into(),
            candidate: "p1".into(),
            relation: LeftOf,
            landmark: "b".into(),
            landmark_category: "banana".into(),
            landmark_is_candidate: false,
            discriminative: true,
            landmark_unique: true,
            score: 3.0,
        };
        assert_eq!(form_question(&s), "Is the white plate to the left of the banana?");
    }

    #[test]
    fn coincident_candidates_have_no_statement() {
        let objects = vec![
            SceneEntity::new("a", "cup", Vec3::new(0.0, 0.4, 0.0)),
            SceneEntity::new("b", "cup", Vec3::new(0.0, 0.4, 0.0)),
        ];
        assert_eq!(
            select_statement("cup", "a", &ids(&["a", "b"]), &objects, &cfg()),
            Err(DisambiguationError::NoStatement("a".into()))
        );
    }
}
