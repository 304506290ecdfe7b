use std::fmt;

pub const NUM_JOINTS: usize = 15;
pub const POSE_DIM: usize = NUM_JOINTS * 3;

/// The fixed 15-joint order used throughout (the SBU Kinect convention).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(usize)]
pub enum Joint {
    Head = 0,
    Neck,
    Torso,
    LeftShoulder,
    LeftElbow,
    LeftHand,
    RightShoulder,
    RightElbow,
    RightHand,
    LeftHip,
    LeftKnee,
    LeftFoot,
    RightHip,
    RightKnee,
    RightFoot,
}

impl Joint {
    pub const ALL: [Joint; NUM_JOINTS] = [
        Joint::Head,
        Joint::Neck,
        Joint::Torso,
        Joint::LeftShoulder,
        Joint::LeftElbow,
        Joint::LeftHand,
        Joint::RightShoulder,
        Joint::RightElbow,
        Joint::RightHand,
        Joint::LeftHip,
        Joint::LeftKnee,
        Joint::LeftFoot,
        Joint::RightHip,
        Joint::RightKnee,
        Joint::RightFoot,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Joint::Head => "head",
            Joint::Neck => "neck",
            Joint::Torso => "torso",
            Joint::LeftShoulder => "left_shoulder",
            Joint::LeftElbow => "left_elbow",
            Joint::LeftHand => "left_hand",
            Joint::RightShoulder => "right_shoulder",
            Joint::RightElbow => "right_elbow",
            Joint::RightHand => "right_hand",
            Joint::LeftHip => "left_hip",
            Joint::LeftKnee => "left_knee",
            Joint::LeftFoot => "left_foot",
            Joint::RightHip => "right_hip",
            Joint::RightKnee => "right_knee",
            Joint::RightFoot => "right_foot",
        }
    }
}

/// One skeleton frame: 15 joints × (x, y, z), flattened joint-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Pose(pub [f64; POSE_DIM]);

/// A sequence of poses, one per frame.
pub type Motion = Vec<Pose>;

impl fmt::Debug for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose([0.0; POSE_DIM])
    }
}

impl Pose {
    pub fn zeros() -> Self {
        Self::default()
    }

    /// `None` unless `values` has exactly 45 entries.
    pub fn from_slice(values: &[f64]) -> Option<Self> {
        let arr: [f64; POSE_DIM] = values.try_into().ok()?;
        Some(Pose(arr))
    }

    pub fn from_joints(joints: &[[f64; 3]; NUM_JOINTS]) -> Self {
        let mut p = [0.0; POSE_DIM];
        for (j, xyz) in joints.iter().enumerate() {
            p[3 * j..3 * j + 3].copy_from_slice(xyz);
        }
        Pose(p)
    }

    #[inline]
    pub fn joint(&self, j: usize) -> [f64; 3] {
        [self.0[3 * j], self.0[3 * j + 1], self.0[3 * j + 2]]
    }

    #[inline]
    pub fn set_joint(&mut self, j: usize, xyz: [f64; 3]) {
        self.0[3 * j..3 * j + 3].copy_from_slice(&xyz);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Squared Euclidean distance over the flattened 45-vector.
    pub fn dist_sq(&self, other: &Pose) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

pub(crate) fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Canonical standing T-pose in meters: pelvis (hip midpoint) at the origin,
/// y up, facing +z, so the character's left side is +x.
pub fn t_pose() -> Pose {
    Pose::from_joints(&[
        [0.0, 0.75, 0.0],   // head
        [0.0, 0.55, 0.0],   // neck
        [0.0, 0.30, 0.0],   // torso
        [0.20, 0.50, 0.0],  // left shoulder
        [0.45, 0.50, 0.0],  // left elbow
        [0.70, 0.50, 0.0],  // left hand
        [-0.20, 0.50, 0.0], // right shoulder
        [-0.45, 0.50, 0.0], // right elbow
        [-0.70, 0.50, 0.0], // right hand
        [0.10, 0.0, 0.0],   // left hip
        [0.10, -0.45, 0.0], // left knee
        [0.10, -0.90, 0.0], // left foot
        [-0.10, 0.0, 0.0],  // right hip
        [-0.10, -0.45, 0.0],
        [-0.10, -0.90, 0.0],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_order_is_fixed() {
        for (i, j) in Joint::ALL.iter().enumerate() {
            assert_eq!(j.index(), i);
        }
        assert_eq!(Joint::RightFoot.index(), 14);
    }

    #[test]
    fn from_slice_requires_45() {
        assert!(Pose::from_slice(&[0.0; 44]).is_none());
        assert!(Pose::from_slice(&[0.0; 45]).is_some());
    }
}
