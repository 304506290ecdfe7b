use crate::error::{Error, Result};
use crate::motion::pose::{norm3, sub3, t_pose, Joint, Pose, NUM_JOINTS};

pub const NUM_BONES: usize = NUM_JOINTS - 1;

/// Bone tree (parent, child) over the 15 joints, rooted at the neck.
pub const BONES: [(Joint, Joint); NUM_BONES] = [
    (Joint::Neck, Joint::Head),
    (Joint::Neck, Joint::Torso),
    (Joint::Neck, Joint::LeftShoulder),
    (Joint::LeftShoulder, Joint::LeftElbow),
    (Joint::LeftElbow, Joint::LeftHand),
    (Joint::Neck, Joint::RightShoulder),
    (Joint::RightShoulder, Joint::RightElbow),
    (Joint::RightElbow, Joint::RightHand),
    (Joint::Torso, Joint::LeftHip),
    (Joint::LeftHip, Joint::LeftKnee),
    (Joint::LeftKnee, Joint::LeftFoot),
    (Joint::Torso, Joint::RightHip),
    (Joint::RightHip, Joint::RightKnee),
    (Joint::RightKnee, Joint::RightFoot),
];

/// Bones plus a reference length per bone, used by the bone-length loss in
/// place of per-performer lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSkeleton {
    bones: Vec<(usize, usize)>,
    reference: Vec<f64>,
}

impl Default for ReferenceSkeleton {
    /// Standard bones with lengths taken from [`t_pose`].
    fn default() -> Self {
        let bones: Vec<(usize, usize)> =
            BONES.iter().map(|(a, b)| (a.index(), b.index())).collect();
        let reference = bone_lengths_of(&t_pose(), &bones);
        ReferenceSkeleton { bones, reference }
    }
}

fn bone_lengths_of(pose: &Pose, bones: &[(usize, usize)]) -> Vec<f64> {
    bones
        .iter()
        .map(|&(a, b)| norm3(sub3(pose.joint(a), pose.joint(b))))
        .collect()
}

impl ReferenceSkeleton {
    pub fn new(bones: Vec<(usize, usize)>, reference: Vec<f64>) -> Result<Self> {
        if bones.len() != NUM_BONES || reference.len() != NUM_BONES {
            return Err(Error::Invalid(format!(
                "need {NUM_BONES} bones and reference lengths"
            )));
        }
        if reference.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Invalid(
                "reference bone lengths must be positive".into(),
            ));
        }
        // 14 edges over 15 vertices form a tree iff they connect every joint.
        let mut parent: Vec<usize> = (0..NUM_JOINTS).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &bones {
            if a >= NUM_JOINTS || b >= NUM_JOINTS {
                return Err(Error::Invalid(format!(
                    "bone ({a}, {b}) references an unknown joint"
                )));
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Err(Error::Invalid(format!("bone ({a}, {b}) closes a cycle")));
            }
            parent[ra] = rb;
        }
        Ok(ReferenceSkeleton { bones, reference })
    }

    /// Default bones with the given reference lengths.
    pub fn with_reference(reference: Vec<f64>) -> Result<Self> {
        Self::new(Self::default().bones, reference)
    }

    pub fn bones(&self) -> &[(usize, usize)] {
        &self.bones
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }
}

pub fn bone_lengths(pose: &Pose, skeleton: &ReferenceSkeleton) -> Vec<f64> {
    bone_lengths_of(pose, &skeleton.bones)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_a_tree() {
        let s = ReferenceSkeleton::default();
        assert!(ReferenceSkeleton::new(s.bones().to_vec(), s.reference().to_vec()).is_ok());
        assert!(s.reference().iter().all(|&l| l > 0.0));
    }

    #[test]
    fn cycle_rejected() {
        let s = ReferenceSkeleton::default();
        let mut bones = s.bones().to_vec();
        bones[13] = (0, 2);
        assert!(ReferenceSkeleton::new(bones, s.reference().to_vec()).is_err());
    }

    #[test]
    fn head_neck_unit() {
        let mut p = Pose::zeros();
        p.set_joint(Joint::Head.index(), [0.0, 1.0, 0.0]);
        let l = bone_lengths(&p, &ReferenceSkeleton::default());
        assert_eq!(l[0], 1.0);
        // every other bone has coincident endpoints
        assert!(l[1..].iter().all(|&v| v == 0.0));
    }
}
