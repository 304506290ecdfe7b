//! Windowing and leave-one-subject-out splits.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::motion::clip::InteractionClip;

/// Fixed-length windows at offsets `0, stride, 2·stride, …` while a full
/// window fits. Too-short clips give an empty list.
pub fn window_clip(
    clip: &InteractionClip,
    size: usize,
    stride: usize,
) -> Result<Vec<InteractionClip>> {
    if size < 2 || stride < 1 {
        return Err(Error::Invalid(format!(
            "window size {size} / stride {stride} out of range"
        )));
    }
    let n = clip.len();
    if n < size {
        return Ok(Vec::new());
    }
    Ok((0..=n - size)
        .step_by(stride)
        .map(|start| InteractionClip {
            motion_a: clip.motion_a[start..start + size].to_vec(),
            motion_b: clip.motion_b[start..start + size].to_vec(),
            ..clip.clone()
        })
        .collect())
}

pub fn window_all(
    clips: &[InteractionClip],
    size: usize,
    stride: usize,
) -> Result<Vec<InteractionClip>> {
    let mut out = Vec::new();
    for c in clips {
        out.extend(window_clip(c, size, stride)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct LosoFold {
    pub train: Vec<InteractionClip>,
    pub test: Vec<InteractionClip>,
    /// Set when the fold is degenerate (for example an empty training set).
    pub warning: Option<String>,
}

/// Test set: every clip the held-out subject takes part in. Train: the rest.
pub fn split_loso(dataset: &[InteractionClip], held_out: u32) -> Result<LosoFold> {
    let (test, train): (Vec<_>, Vec<_>) =
        dataset.iter().cloned().partition(|c| c.involves(held_out));
    if test.is_empty() {
        return Err(Error::UnknownSubject(held_out));
    }
    let warning = train
        .is_empty()
        .then(|| format!("subject {held_out} takes part in every clip; training set is empty"));
    Ok(LosoFold {
        train,
        test,
        warning,
    })
}

/// All subject identifiers in ascending order.
pub fn subjects(dataset: &[InteractionClip]) -> Vec<u32> {
    dataset
        .iter()
        .flat_map(|c| [c.subjects.0, c.subjects.1])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::pose::Pose;

    fn clip(len: usize, subjects: (u32, u32)) -> InteractionClip {
        let a = (0..len).map(|t| Pose([t as f64; 45])).collect();
        let b = (0..len).map(|t| Pose([-(t as f64); 45])).collect();
        InteractionClip::new(a, b, 1, subjects, "t").unwrap()
    }

    #[test]
    fn window_counts() {
        assert_eq!(window_clip(&clip(100, (1, 2)), 40, 5).unwrap().len(), 13);
        let exact = window_clip(&clip(40, (1, 2)), 40, 5).unwrap();
        assert_eq!(exact.len(), 1);
        assert_eq!(exact[0], clip(40, (1, 2)));
        assert!(window_clip(&clip(39, (1, 2)), 40, 5).unwrap().is_empty());
        assert!(window_clip(&clip(10, (1, 2)), 1, 5).is_err());
        assert!(window_clip(&clip(10, (1, 2)), 4, 0).is_err());
    }

    #[test]
    fn window_offsets() {
        let w = window_clip(&clip(23, (1, 2)), 6, 4).unwrap();
        let starts: Vec<f64> = w.iter().map(|c| c.motion_a[0].0[0]).collect();
        assert_eq!(starts, vec![0.0, 4.0, 8.0, 12.0, 16.0]);
        assert!(w
            .iter()
            .all(|c| c.len() == 6 && c.motion_b[0].0[0] == -c.motion_a[0].0[0]));
    }

    #[test]
    fn loso_partitions_dataset() {
        let data = vec![
            clip(3, (1, 2)),
            clip(3, (2, 3)),
            clip(3, (3, 4)),
            clip(3, (1, 4)),
        ];
        for s in subjects(&data) {
            let fold = split_loso(&data, s).unwrap();
            assert_eq!(fold.train.len() + fold.test.len(), data.len());
            for c in &data {
                let in_test = fold.test.contains(c);
                let in_train = fold.train.contains(c);
                assert!(in_test ^ in_train);
                assert_eq!(in_test, c.involves(s));
            }
        }
        assert!(matches!(
            split_loso(&data, 9),
            Err(Error::UnknownSubject(9))
        ));
    }

    #[test]
    fn degenerate_fold_warns() {
        let data = vec![clip(3, (1, 2)), clip(3, (1, 3))];
        let fold = split_loso(&data, 1).unwrap();
        assert!(fold.train.is_empty());
        assert!(fold.warning.is_some());
    }
}
