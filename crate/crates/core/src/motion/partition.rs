use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::pose::{Joint, Pose, NUM_JOINTS, POSE_DIM};

pub const NUM_PARTS: usize = 5;
pub const PART_NAMES: [&str; NUM_PARTS] =
    ["trunk", "left_arm", "right_arm", "left_leg", "right_leg"];

/// Assignment of joints to the five body parts. `parts[p]` lists the joints
/// of part `p` in ascending index order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    parts: Vec<Vec<usize>>,
}

impl Default for PartitionSpec {
    /// trunk = head, neck, torso; each arm = shoulder, elbow, hand; each leg =
    /// hip, knee, foot.
    fn default() -> Self {
        use Joint::*;
        let p = |js: [Joint; 3]| js.iter().map(|j| j.index()).collect();
        PartitionSpec {
            parts: vec![
                p([Head, Neck, Torso]),
                p([LeftShoulder, LeftElbow, LeftHand]),
                p([RightShoulder, RightElbow, RightHand]),
                p([LeftHip, LeftKnee, LeftFoot]),
                p([RightHip, RightKnee, RightFoot]),
            ],
        }
    }
}

impl PartitionSpec {
    pub fn new(mut parts: Vec<Vec<usize>>) -> Result<Self> {
        if parts.len() != NUM_PARTS {
            return Err(Error::Invalid(format!(
                "expected {NUM_PARTS} parts, got {}",
                parts.len()
            )));
        }
        let mut seen = [false; NUM_JOINTS];
        for part in &mut parts {
            if part.is_empty() {
                return Err(Error::Invalid("empty body part".into()));
            }
            part.sort_unstable();
            for &j in part.iter() {
                if j >= NUM_JOINTS || seen[j] {
                    return Err(Error::Invalid(format!(
                        "joint {j} is out of range or assigned twice"
                    )));
                }
                seen[j] = true;
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::Invalid(format!(
                "joint {j} is not assigned to a part"
            )));
        }
        Ok(PartitionSpec { parts })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    /// Part index (0-based, in part order) of every joint.
    pub fn part_of(&self) -> [usize; NUM_JOINTS] {
        let mut out = [0; NUM_JOINTS];
        for (p, js) in self.parts.iter().enumerate() {
            for &j in js {
                out[j] = p;
            }
        }
        out
    }

    /// Width of part `p`'s vector.
    pub fn part_dim(&self, p: usize) -> usize {
        3 * self.parts[p].len()
    }

    /// Flat pose coordinates making up part `p`, in order.
    pub fn coordinate_indices(&self, p: usize) -> Vec<usize> {
        self.parts[p]
            .iter()
            .flat_map(|&j| [3 * j, 3 * j + 1, 3 * j + 2])
            .collect()
    }

    /// Same spec with parts listed in `order` (a permutation of `0..5`).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..NUM_PARTS).collect::<Vec<_>>() {
            return Err(Error::Invalid(
                "part order must be a permutation of 0..5".into(),
            ));
        }
        Ok(PartitionSpec {
            parts: order.iter().map(|&p| self.parts[p].clone()).collect(),
        })
    }
}

pub fn partition_pose(pose: &Pose, spec: &PartitionSpec) -> Vec<Vec<f64>> {
    (0..NUM_PARTS)
        .map(|p| {
            spec.coordinate_indices(p)
                .iter()
                .map(|&c| pose.0[c])
                .collect()
        })
        .collect()
}

/// Inverse of [`partition_pose`].
pub fn reassemble_pose(parts: &[Vec<f64>], spec: &PartitionSpec) -> Result<Pose> {
    let mut out = [f64::NAN; POSE_DIM];
    for (p, values) in parts.iter().enumerate() {
        let idx = spec.coordinate_indices(p);
        if idx.len() != values.len() {
            return Err(Error::Invalid(format!(
                "part {p} has {} values, expected {}",
                values.len(),
                idx.len()
            )));
        }
        for (&c, &v) in idx.iter().zip(values) {
            out[c] = v;
        }
    }
    Ok(Pose(out))
}
