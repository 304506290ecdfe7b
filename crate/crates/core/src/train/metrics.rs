//! Average frame distance and the two reference predictors.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::motion::clip::InteractionClip;
use crate::motion::pose::{Motion, Pose, NUM_JOINTS, POSE_DIM};

/// `(1/T)·Σ_t ‖x̂_t − x_t‖²` over the flattened pose. With `per_joint`, the
/// per-frame distance is also divided by the 15 joints.
pub fn afd(pred: &[Pose], truth: &[Pose], per_joint: bool) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyBatch("motion"));
    }
    let total: f64 = pred.iter().zip(truth).map(|(a, b)| a.dist_sq(b)).sum();
    let mean = total / pred.len() as f64;
    Ok(if per_joint {
        mean / NUM_JOINTS as f64
    } else {
        mean
    })
}

/// Frame-wise nearest neighbour: each query frame of A is matched to the
/// closest training A frame (Euclidean over 45 values) and that frame's B
/// partner is emitted. Ties go to the lowest (clip, frame).
pub fn nn_baseline(train: &[InteractionClip], query_a: &[Pose]) -> Result<Motion> {
    if train.is_empty() {
        return Err(Error::EmptyBatch("training set"));
    }
    Ok(query_a
        .iter()
        .map(|q| {
            let mut best = (f64::INFINITY, &train[0].motion_b[0]);
            for clip in train {
                for (a, b) in clip.motion_a.iter().zip(&clip.motion_b) {
                    let d = q.dist_sq(a);
                    if d < best.0 {
                        best = (d, b);
                    }
                }
            }
            *best.1
        })
        .collect())
}

/// [`nn_baseline`] for many queries on the rayon pool, results in query order.
pub fn nn_baseline_batch(train: &[InteractionClip], queries: &[&Motion]) -> Result<Vec<Motion>> {
    queries.par_iter().map(|q| nn_baseline(train, q)).collect()
}

/// Predicts, for every frame, the mean B pose of the query's class over all
/// training frames of that class.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanPoseBaseline {
    pub per_class: BTreeMap<usize, Pose>,
}

impl MeanPoseBaseline {
    pub fn fit(train: &[InteractionClip]) -> Result<Self> {
        let mut sums: BTreeMap<usize, ([f64; POSE_DIM], usize)> = BTreeMap::new();
        for clip in train {
            let entry = sums.entry(clip.label).or_insert(([0.0; POSE_DIM], 0));
            for p in &clip.motion_b {
                for (s, v) in entry.0.iter_mut().zip(p.0.iter()) {
                    *s += v;
                }
                entry.1 += 1;
            }
        }
        if sums.is_empty() {
            return Err(Error::EmptyBatch("training set"));
        }
        let per_class = sums
            .into_iter()
            .map(|(label, (sum, n))| (label, Pose(sum.map(|v| v / n as f64))))
            .collect();
        Ok(MeanPoseBaseline { per_class })
    }

    pub fn predict(&self, label: usize, len: usize) -> Result<Motion> {
        let pose = self
            .per_class
            .get(&label)
            .ok_or_else(|| Error::Invalid(format!("class {label} has no training clips")))?;
        Ok(vec![*pose; len])
    }
}

/// Synthesizes B for every clip (parallel over clips, results in clip order).
pub fn synthesize_all(generator: &Generator, clips: &[InteractionClip]) -> Result<Vec<Motion>> {
    clips
        .par_iter()
        .map(|c| generator.synthesize(&c.motion_a).map(|(m, _)| m))
        .collect()
}

/// AFD of each prediction against its clip's B.
pub fn afd_all(preds: &[Motion], clips: &[InteractionClip], per_joint: bool) -> Result<Vec<f64>> {
    if preds.len() != clips.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: clips.len(),
        });
    }
    preds
        .par_iter()
        .zip(clips.par_iter())
        .map(|(p, c)| afd(p, &c.motion_b, per_joint))
        .collect()
}

/// Mean of `values` grouped by the label of the matching clip.
pub fn mean_by_class(values: &[f64], clips: &[InteractionClip]) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (v, c) in values.iter().zip(clips) {
        let e = acc.entry(c.label).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (s, n))| (k, s / n as f64))
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const_motion(v: f64, len: usize) -> Motion {
        vec![Pose([v; POSE_DIM]); len]
    }

    #[test]
    fn afd_values() {
        let a = const_motion(0.0, 3);
        assert_eq!(afd(&a, &a, false).unwrap(), 0.0);
        let mut b = a.clone();
        for p in &mut b {
            p.set_joint(4, [1.0, 0.0, 0.0]);
        }
        assert_eq!(afd(&b, &a, false).unwrap(), 1.0);
        assert_eq!(afd(&b, &a, true).unwrap(), 1.0 / 15.0);
        assert!(afd(&a, &a[..2].to_vec(), false).is_err());
    }

    #[test]
    fn nn_self_retrieval_and_ties() {
        let c1 = InteractionClip::new(const_motion(0.0, 2), const_motion(5.0, 2), 1, (1, 2), "t")
            .unwrap();
        let c2 = InteractionClip::new(const_motion(0.0, 2), const_motion(7.0, 2), 1, (1, 2), "t")
            .unwrap();
        let out = nn_baseline(&[c1.clone(), c2], &c1.motion_a).unwrap();
        assert_eq!(out, c1.motion_b);
        assert!(nn_baseline(&[], &c1.motion_a).is_err());
    }

    #[test]
    fn mean_pose() {
        let c1 = InteractionClip::new(const_motion(0.0, 2), const_motion(1.0, 2), 1, (1, 2), "t")
            .unwrap();
        let c2 = InteractionClip::new(const_motion(0.0, 2), const_motion(3.0, 2), 1, (1, 2), "t")
            .unwrap();
        let m = MeanPoseBaseline::fit(&[c1, c2]).unwrap();
        assert_eq!(m.predict(1, 3).unwrap(), const_motion(2.0, 3));
        assert!(m.predict(2, 3).is_err());
    }
}
