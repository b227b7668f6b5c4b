use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::config::LearningConfig;
use crate::geometry::Vec3;
use crate::perception::BASE_FRAME;

/// Mean Euclidean distance of the samples to their centroid.
pub fn dispersion(samples: &[Vec3]) -> f64 {
    let Some(c) = Vec3::centroid(samples) else {
        return 0.0;
    };
    samples.iter().map(|p| p.distance(c)).sum::<f64>() / samples.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameInference {
    pub frame: String,
    /// Dispersion of every candidate frame that was considered.
    pub dispersions: BTreeMap<String, f64>,
}

impl FrameInference {
    pub fn dispersion(&self) -> f64 {
        self.dispersions.get(&self.frame).copied().unwrap_or(0.0)
    }
}

/// Picks the reference frame in which the demonstrated targets cluster
/// tightest.
///
/// `samples` holds one map per demonstration from frame label to the
/// end-effector position in that frame. Only frames present in every sample
/// and not in `excluded` compete. Without a cluster below the threshold the
/// base frame wins; near-ties prefer object frames, then the smaller label.
pub fn infer_frame(
    samples: &[BTreeMap<String, Vec3>],
    excluded: &BTreeSet<String>,
    cfg: &LearningConfig,
) -> Result<FrameInference, LearnError> {
    if samples.len() < cfg.min_demos {
        return Err(LearnError::FewerThanThreeDemos {
            subject: "frame inference".into(),
            count: samples.len(),
            required: cfg.min_demos,
        });
    }
    let mut common: BTreeSet<&String> = samples[0].keys().collect();
    for s in &samples[1..] {
        common.retain(|k| s.contains_key(*k));
    }
    common.retain(|k| !excluded.contains(*k));
    if !common.contains(&BASE_FRAME.to_string()) {
        return Err(LearnError::MissingBaseFrame);
    }

    let dispersions: BTreeMap<String, f64> = common
        .iter()
        .map(|frame| {
            let points: Vec<Vec3> = samples.iter().map(|s| s[*frame]).collect();
            ((*frame).clone(), dispersion(&points))
        })
        .collect();
    let best = dispersions.values().copied().fold(f64::INFINITY, f64::min);
    let frame = if best > cfg.frame_threshold {
        BASE_FRAME.to_string()
    } else {
        dispersions
            .iter()
            .filter(|(_, d)| **d <= best + cfg.frame_tie_margin && **d <= cfg.frame_threshold)
            .map(|(f, _)| f)
            .min_by_key(|f| (f.as_str() == BASE_FRAME, f.as_str()))
            .expect("the minimum is always a candidate")
            .clone()
    };
    Ok(FrameInference { frame, dispersions })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(pairs: &[(&str, Vec3)]) -> BTreeMap<String, Vec3> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn oracle_dispersion(points: &[Vec3]) -> f64 {
        let n = points.len() as f64;
        let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
        let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
        let cz = points.iter().map(|p| p.z).sum::<f64>() / n;
        points
            .iter()
            .map(|p| ((p.x - cx).powi(2) + (p.y - cy).powi(2) + (p.z - cz).powi(2)).sqrt())
            .sum::<f64>()
            / n
    }

    #[test]
    fn drop_clusters_in_bowl_frame() {
        let bowl = [
            Vec3::new(0.0, 0.0, 0.05),
            Vec3::new(0.01, -0.01, 0.05),
            Vec3::new(-0.01, 0.0, 0.06),
        ];
        let base = [
            Vec3::new(-0.15, 0.35, 0.05),
            Vec3::new(0.11, 0.29, 0.05),
            Vec3::new(0.0, 0.5, 0.06),
        ];
        let samples: Vec<_> = (0..3)
            .map(|i| sample(&[("base", base[i]), ("bowl", bowl[i])]))
            .collect();
        let got = infer_frame(&samples, &BTreeSet::new(), &LearningConfig::default()).unwrap();
        assert_eq!(got.frame, "bowl");
        assert!((got.dispersions["bowl"] - oracle_dispersion(&bowl)).abs() < 1e-12);
        assert!((oracle_dispersion(&bowl) - 0.009886).abs() < 1e-5);
        assert!((got.dispersions["base"] - oracle_dispersion(&base)).abs() < 1e-12);
    }

    #[test]
    fn spread_everywhere_falls_back_to_base() {
        let samples: Vec<_> = (0..3)
            .map(|i| {
                let f = i as f64 * 0.2;
                sample(&[
                    ("base", Vec3::new(f, 0.0, 0.0)),
                    ("cup", Vec3::new(0.0, f, 0.0)),
                ])
            })
            .collect();
        let got = infer_frame(&samples, &BTreeSet::new(), &LearningConfig::default()).unwrap();
        assert_eq!(got.frame, "base");
    }

    #[test]
    fn excluded_frame_never_wins() {
        let samples: Vec<_> = (0..3)
            .map(|i| {
                let f = i as f64 * 0.01;
                sample(&[
                    ("base", Vec3::new(f * 20.0, 0.3, 0.0)),
                    ("banana", Vec3::ZERO),
                    ("bowl", Vec3::new(f, 0.0, 0.05)),
                ])
            })
            .collect();
        let excluded = BTreeSet::from(["banana".to_string()]);
        let got = infer_frame(&samples, &excluded, &LearningConfig::default()).unwrap();
        assert_eq!(got.frame, "bowl");
        assert!(!got.dispersions.contains_key("banana"));
    }

    #[test]
    fn ties_prefer_object_frames_then_label() {
        let samples: Vec<_> = (0..3)
            .map(|_| {
                sample(&[
                    ("base", Vec3::new(0.1, 0.3, 0.0)),
                    ("cup", Vec3::ZERO),
                    ("apple", Vec3::ZERO),
                ])
            })
            .collect();
        let got = infer_frame(&samples, &BTreeSet::new(), &LearningConfig::default()).unwrap();
        assert_eq!(got.frame, "apple");
    }

    #[test]
    fn two_demos_are_refused() {
        let samples = vec![sample(&[("base", Vec3::ZERO)]); 2];
        assert!(matches!(
            infer_frame(&samples, &BTreeSet::new(), &LearningConfig::default()),
            Err(LearnError::FewerThanThreeDemos { count: 2, .. })
        ));
    }
}
