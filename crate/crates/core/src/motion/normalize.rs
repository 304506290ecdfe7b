//! Facing normalization: one rigid transform, computed from A's first frame,
//! moves A's pelvis to the origin and turns A to face +z. B is expressed in
//! the same frame.

use crate::error::{Error, Result};
use crate::motion::clip::InteractionClip;
use crate::motion::pose::{sub3, Joint, Pose, NUM_JOINTS};

/// `p' = rotation · p + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationTransform {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        NormalizationTransform {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    pub fn apply_point(&self, p: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        let mut out = self.translation;
        for (i, o) in out.iter_mut().enumerate() {
            *o += r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2];
        }
        out
    }

    pub fn apply_pose(&self, pose: &Pose) -> Pose {
        let mut out = *pose;
        for j in 0..NUM_JOINTS {
            out.set_joint(j, self.apply_point(pose.joint(j)));
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.rotation;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Midpoint of the two hips; the skeleton has no pelvis joint of its own.
pub fn pelvis(pose: &Pose) -> [f64; 3] {
    let l = pose.joint(Joint::LeftHip.index());
    let r = pose.joint(Joint::RightHip.index());
    [
        (l[0] + r[0]) / 2.0,
        (l[1] + r[1]) / 2.0,
        (l[2] + r[2]) / 2.0,
    ]
}

/// Ground-plane unit facing vector `up × (right_hip − left_hip)` with up = +y.
pub fn facing(pose: &Pose) -> Result<[f64; 3]> {
    let across = sub3(
        pose.joint(Joint::RightHip.index()),
        pose.joint(Joint::LeftHip.index()),
    );
    // (0,1,0) × (ax, ay, az) = (az, 0, -ax); already in the ground plane.
    let (fx, fz) = (across[2], -across[0]);
    let n = (fx * fx + fz * fz).sqrt();
    if n < 1e-9 {
        return Err(Error::DegenerateFacing);
    }
    Ok([fx / n, 0.0, fz / n])
}

/// Rotation about the vertical axis taking A's facing to +z, plus the
/// translation taking A's pelvis to the origin, both from `reference`.
pub fn facing_transform(reference: &Pose) -> Result<NormalizationTransform> {
    let [fx, _, fz] = facing(reference)?;
    let rotation = [[fz, 0.0, -fx], [0.0, 1.0, 0.0], [fx, 0.0, fz]];
    let mut t = NormalizationTransform {
        rotation,
        translation: [0.0; 3],
    };
    let rp = t.apply_point(pelvis(reference));
    t.translation = [-rp[0], -rp[1], -rp[2]];
    Ok(t)
}

pub fn normalize_interaction(
    clip: &InteractionClip,
) -> Result<(InteractionClip, NormalizationTransform)> {
    clip.validate()?;
    let t = facing_transform(&clip.motion_a[0])?;
    let mut out = clip.clone();
    out.motion_a = clip.motion_a.iter().map(|p| t.apply_pose(p)).collect();
    out.motion_b = clip.motion_b.iter().map(|p| t.apply_pose(p)).collect();
    Ok((out, t))
}
