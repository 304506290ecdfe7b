//! Skeleton data: poses, clips, import, normalization, windowing, body-part
//! partitions, bone lengths, splits and synthetic data.

pub mod clip;
pub mod dataset;
pub mod normalize;
pub mod partition;
pub mod pose;
pub mod sbu;
pub mod skeleton;
pub mod synthetic;

pub use clip::{read_clip, read_dataset, write_clip, write_dataset, ClipDocument, InteractionClip};
pub use dataset::{split_loso, subjects, window_all, window_clip, LosoFold};
pub use normalize::{
    facing, facing_transform, normalize_interaction, pelvis, NormalizationTransform,
};
pub use partition::{partition_pose, reassemble_pose, PartitionSpec, NUM_PARTS};
pub use pose::{t_pose, Joint, Motion, Pose, NUM_JOINTS, POSE_DIM};
pub use sbu::{import_sbu_dir, parse_sbu_clip, to_sbu_text, SbuImportOptions, SBU_CLASSES};
pub use skeleton::{bone_lengths, ReferenceSkeleton, NUM_BONES};
pub use synthetic::{make_synthetic_dataset, SyntheticSpec};
