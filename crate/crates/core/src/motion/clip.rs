//! The interaction clip and its canonical on-disk document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::pose::{Motion, Pose, POSE_DIM};

pub const CLIP_FORMAT_VERSION: u32 = 1;
pub const CLIP_EXTENSION: &str = "clip.json";

/// Paired A/B motion with its interaction class.
///
/// `label` is 1-based (`1..=N`); `N + 1` is reserved for "synthesized" in
/// the discriminator and never appears on a clip.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionClip {
    pub motion_a: Motion,
    pub motion_b: Motion,
    pub label: usize,
    pub class_name: String,
    pub subjects: (u32, u32),
    pub source: String,
    pub fps: f64,
}

impl InteractionClip {
    pub fn new(
        motion_a: Motion,
        motion_b: Motion,
        label: usize,
        subjects: (u32, u32),
        source: impl Into<String>,
    ) -> Result<Self> {
        let clip = InteractionClip {
            motion_a,
            motion_b,
            label,
            class_name: String::new(),
            subjects,
            source: source.into(),
            fps: 15.0,
        };
        clip.validate()?;
        Ok(clip)
    }

    pub fn with_class_name(mut self, name: impl Into<String>) -> Self {
        self.class_name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.motion_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motion_a.is_empty()
    }

    pub fn involves(&self, subject: u32) -> bool {
        self.subjects.0 == subject || self.subjects.1 == subject
    }

    pub fn validate(&self) -> Result<()> {
        if self.motion_a.len() != self.motion_b.len() {
            return Err(Error::LengthMismatch {
                left: self.motion_a.len(),
                right: self.motion_b.len(),
            });
        }
        if self.motion_a.len() < 2 {
            return Err(Error::Invalid(format!(
                "clip needs at least 2 frames, has {}",
                self.motion_a.len()
            )));
        }
        if self.label == 0 {
            return Err(Error::Invalid("class labels are 1-based".into()));
        }
        if !self
            .motion_a
            .iter()
            .chain(&self.motion_b)
            .all(Pose::is_finite)
        {
            return Err(Error::Invalid("non-finite joint coordinate".into()));
        }
        Ok(())
    }

    /// Checks the label against a class count `n` (labels must be `<= n`).
    pub fn validate_label(&self, n: usize) -> Result<()> {
        if self.label == 0 || self.label > n {
            return Err(Error::Invalid(format!(
                "label {} outside 1..={n}",
                self.label
            )));
        }
        Ok(())
    }
}

/// Serialized form of [`InteractionClip`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClipDocument {
    pub version: u32,
    pub source: String,
    pub label: usize,
    pub class_name: String,
    pub subjects: [u32; 2],
    pub fps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub frames_a: Vec<Vec<f64>>,
    pub frames_b: Vec<Vec<f64>>,
}

fn frames_to_rows(m: &[Pose]) -> Vec<Vec<f64>> {
    m.iter().map(|p| p.0.to_vec()).collect()
}

fn rows_to_frames(rows: &[Vec<f64>], which: &str) -> Result<Motion> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            Pose::from_slice(r).ok_or_else(|| {
                Error::Invalid(format!(
                    "{which} frame {i} has {} values, expected {POSE_DIM}",
                    r.len()
                ))
            })
        })
        .collect()
}

impl ClipDocument {
    pub fn from_clip(clip: &InteractionClip, config_hash: Option<&str>) -> Self {
        ClipDocument {
            version: CLIP_FORMAT_VERSION,
            source: clip.source.clone(),
            label: clip.label,
            class_name: clip.class_name.clone(),
            subjects: [clip.subjects.0, clip.subjects.1],
            fps: clip.fps,
            config_hash: config_hash.map(str::to_string),
            frames_a: frames_to_rows(&clip.motion_a),
            frames_b: frames_to_rows(&clip.motion_b),
        }
    }

    pub fn into_clip(self) -> Result<InteractionClip> {
        if self.version != CLIP_FORMAT_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported clip format version {}",
                self.version
            )));
        }
        let clip = InteractionClip {
            motion_a: rows_to_frames(&self.frames_a, "frames_a")?,
            motion_b: rows_to_frames(&self.frames_b, "frames_b")?,
            label: self.label,
            class_name: self.class_name,
            subjects: (self.subjects[0], self.subjects[1]),
            source: self.source,
            fps: self.fps,
        };
        clip.validate()?;
        Ok(clip)
    }
}

pub fn clip_to_string(clip: &InteractionClip, config_hash: Option<&str>) -> String {
    serde_json::to_string_pretty(&ClipDocument::from_clip(clip, config_hash))
        .expect("clip serializes")
}

pub fn clip_from_str(text: &str) -> Result<InteractionClip> {
    serde_json::from_str::<ClipDocument>(text)?.into_clip()
}

pub fn write_clip(
    path: impl AsRef<Path>,
    clip: &InteractionClip,
    config_hash: Option<&str>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, clip_to_string(clip, config_hash)).map_err(|e| Error::io(path, e))
}

pub fn read_clip(path: impl AsRef<Path>) -> Result<InteractionClip> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    clip_from_str(&text).map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::Invalid(format!("{}: {other}", path.display())),
    })
}

/// Clip files under `dir` (non-recursive), sorted by file name.
pub fn list_clip_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.to_string_lossy().ends_with(CLIP_EXTENSION))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads a single clip file, or every clip file in a directory.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<InteractionClip>> {
    let path = path.as_ref();
    if path.is_dir() {
        list_clip_files(path)?.iter().map(read_clip).collect()
    } else {
        Ok(vec![read_clip(path)?])
    }
}

/// Writes clips as `<prefix>_<index>.clip.json`, zero-padded so that file
/// order matches clip order.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    prefix: &str,
    clips: &[InteractionClip],
    config_hash: Option<&str>,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    clips
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let p = dir.join(format!("{prefix}_{i:05}.{CLIP_EXTENSION}"));
            write_clip(&p, c, config_hash).map(|_| p)
        })
        .collect()
}
