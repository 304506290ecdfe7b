//! Two-class toy interactions with a known generating formula.
//!
//! Both characters start from [`t_pose`]. In class 1 ("push") A's right hand
//! moves forward and B's whole body moves back a few frames later; in class 2
//! ("wave") A raises its right arm and B copies it with a lag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::clip::InteractionClip;
use crate::motion::pose::{t_pose, Joint, Pose, NUM_JOINTS};

pub const SYNTHETIC_CLASSES: [&str; 2] = ["push", "wave"];
/// Frames by which B trails A.
pub const REACTION_LAG: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub clips_per_class: usize,
    pub length: usize,
    /// Standard deviation of the Gaussian noise added to every coordinate.
    pub noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            classes: 2,
            clips_per_class: 16,
            length: 20,
            noise: 0.0,
        }
    }
}

fn phase(t: usize, len: usize, lag: f64) -> f64 {
    (std::f64::consts::PI * (t as f64 - lag) / len as f64)
        .sin()
        .max(0.0)
}

fn shift(pose: &mut Pose, j: usize, axis: usize, by: f64) {
    let mut p = pose.joint(j);
    p[axis] += by;
    pose.set_joint(j, p);
}

/// Noise-free pose of A for `label` (1 or 2) at frame `t` of `len`.
pub fn synthetic_pose_a(label: usize, t: usize, len: usize) -> Pose {
    let mut p = t_pose();
    let s = phase(t, len, 0.0);
    match label {
        1 => shift(&mut p, Joint::RightHand.index(), 2, 0.5 * s),
        _ => {
            shift(&mut p, Joint::RightElbow.index(), 1, 0.5 * s);
            shift(&mut p, Joint::RightHand.index(), 1, 0.5 * s);
        }
    }
    p
}

/// Noise-free pose of B for `label` (1 or 2) at frame `t` of `len`.
pub fn synthetic_pose_b(label: usize, t: usize, len: usize) -> Pose {
    let mut p = t_pose();
    let s = phase(t, len, REACTION_LAG);
    match label {
        1 => {
            for j in 0..NUM_JOINTS {
                shift(&mut p, j, 2, -0.4 * s);
            }
        }
        _ => {
            shift(&mut p, Joint::RightElbow.index(), 1, 0.5 * s);
            shift(&mut p, Joint::RightHand.index(), 1, 0.5 * s);
        }
    }
    p
}

/// Clips are ordered class by class. Clip `i` of a class has subjects
/// `(1 + i % 4, 5 + i % 4)`, so holding out subject 1 takes a quarter of each
/// class.
pub fn make_synthetic_dataset(spec: &SyntheticSpec, seed: u64) -> Result<Vec<InteractionClip>> {
    if !(1..=SYNTHETIC_CLASSES.len()).contains(&spec.classes) {
        return Err(Error::Invalid(format!(
            "synthetic data has 1 or 2 classes, not {}",
            spec.classes
        )));
    }
    if spec.length < 10 {
        return Err(Error::Invalid(format!(
            "synthetic clip length {} is below 10",
            spec.length
        )));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::Invalid(
            "noise must be a finite non-negative number".into(),
        ));
    }
    let normal = Normal::new(0.0, spec.noise).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = |mut p: Pose| {
        if spec.noise > 0.0 {
            for v in p.0.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
        p
    };
    let mut clips = Vec::with_capacity(spec.classes * spec.clips_per_class);
    for label in 1..=spec.classes {
        for i in 0..spec.clips_per_class {
            let mut a = Vec::with_capacity(spec.length);
            let mut b = Vec::with_capacity(spec.length);
            for t in 0..spec.length {
                a.push(noisy(synthetic_pose_a(label, t, spec.length)));
                b.push(noisy(synthetic_pose_b(label, t, spec.length)));
            }
            let subjects = (1 + (i % 4) as u32, 5 + (i % 4) as u32);
            clips.push(
                InteractionClip::new(a, b, label, subjects, "synthetic")?
                    .with_class_name(SYNTHETIC_CLASSES[label - 1]),
            );
        }
    }
    Ok(clips)
}
