//! SBU Kinect Interaction text files.
//!
//! One frame per line: `frame_index, 45 floats for A, 45 floats for B`, where
//! A is the annotated active agent. Datasets are laid out as
//! `<category>/<participant-pair>/<take>/...txt`; the category directory is
//! either the SBU numeric code (`01`..`08`) or a class name, and the pair
//! directory looks like `s01s02`.

use std::fmt::Write as _;
use std::path::Path;

use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::motion::clip::InteractionClip;
use crate::motion::pose::{Motion, Pose, POSE_DIM};

pub const SBU_FIELDS: usize = 1 + 2 * POSE_DIM;

/// The six SBU classes kept for training, in label order (label = index + 1).
/// Approaching and departing are excluded: the reacting character stands still.
pub const SBU_CLASSES: [&str; 6] = ["kick", "push", "punch", "hug", "shake_hands", "exchange"];

/// Per-axis affine map `v' = scale·v + offset`, applied to every coordinate
/// at import time. Off by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisAffine {
    pub scale: [f64; 3],
    pub offset: [f64; 3],
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SbuImportOptions {
    pub prescale: Option<AxisAffine>,
}

fn parse_field(s: &str, line: usize, col: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("field {} is not a number: {:?}", col + 1, s.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("field {} is not finite", col + 1),
        });
    }
    Ok(v)
}

/// Parses one SBU take. Frame indices must be strictly increasing.
pub fn parse_sbu_clip(
    text: &str,
    label: usize,
    subjects: (u32, u32),
    options: &SbuImportOptions,
) -> Result<InteractionClip> {
    let mut a: Motion = Vec::new();
    let mut b: Motion = Vec::new();
    let mut last_index: Option<f64> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches(',').split(',').collect();
        if fields.len() != SBU_FIELDS {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {SBU_FIELDS} comma-separated fields, found {}",
                    fields.len()
                ),
            });
        }
        let index = parse_field(fields[0], line_no, 0)?;
        if let Some(prev) = last_index {
            if index <= prev {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("frame index {index} does not follow {prev}"),
                });
            }
        }
        last_index = Some(index);
        let mut values = [0.0; 2 * POSE_DIM];
        for (k, f) in fields[1..].iter().enumerate() {
            let mut v = parse_field(f, line_no, k + 1)?;
            if let Some(aff) = options.prescale {
                let axis = k % 3;
                v = aff.scale[axis] * v + aff.offset[axis];
            }
            values[k] = v;
        }
        a.push(Pose::from_slice(&values[..POSE_DIM]).unwrap());
        b.push(Pose::from_slice(&values[POSE_DIM..]).unwrap());
    }
    if a.len() < 2 {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("clip has {} frames, need at least 2", a.len()),
        });
    }
    InteractionClip::new(a, b, label, subjects, "sbu")
}

/// Writes a clip in SBU layout with 1-based frame indices. Shortest
/// round-trip float formatting makes `parse_sbu_clip` an exact inverse.
pub fn to_sbu_text(clip: &InteractionClip) -> String {
    let mut out = String::new();
    for (t, (pa, pb)) in clip.motion_a.iter().zip(&clip.motion_b).enumerate() {
        write!(out, "{}", t + 1).unwrap();
        for v in pa.0.iter().chain(pb.0.iter()) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Maps a category directory name to a 1-based label. `Ok(None)` means the
/// category is a known SBU class that is excluded from training.
pub fn sbu_category_label(dir: &str) -> Result<Option<usize>> {
    let name = dir.to_ascii_lowercase();
    let code: Option<u32> = if !name.is_empty() && name.bytes().all(|c| c.is_ascii_digit()) {
        name.parse().ok()
    } else {
        None
    };
    let class = match code {
        Some(1) | Some(2) => return Ok(None),
        Some(3) => "kick",
        Some(4) => "push",
        Some(5) => "shake_hands",
        Some(6) => "hug",
        Some(7) => "exchange",
        Some(8) => "punch",
        Some(other) => return Err(Error::Invalid(format!("unknown SBU category code {other}"))),
        None => match name.as_str() {
            "approach" | "approaching" | "depart" | "departing" => return Ok(None),
            "kick" | "kicking" => "kick",
            "push" | "pushing" => "push",
            "punch" | "punching" => "punch",
            "hug" | "hugging" => "hug",
            "shake_hands" | "shakehands" | "shaking_hands" | "shake" => "shake_hands",
            "exchange" | "exchanging" | "exchange_objects" | "exchanging_objects" => "exchange",
            _ => return Err(Error::Invalid(format!("unknown SBU category `{dir}`"))),
        },
    };
    Ok(Some(
        SBU_CLASSES.iter().position(|c| *c == class).unwrap() + 1,
    ))
}

/// Parses a participant-pair directory name such as `s01s02`.
pub fn parse_subject_pair(dir: &str) -> Result<(u32, u32)> {
    let lower = dir.to_ascii_lowercase();
    let nums: Vec<u32> = lower
        .split('s')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim_matches(|c: char| !c.is_ascii_digit()).parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Invalid(format!("cannot parse participant pair `{dir}`")))?;
    match nums.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Invalid(format!(
            "cannot parse participant pair `{dir}`"
        ))),
    }
}

/// Imports every take under `root`. Excluded categories are skipped. Clips
/// come back sorted by path.
pub fn import_sbu_dir(
    root: impl AsRef<Path>,
    options: &SbuImportOptions,
) -> Result<Vec<InteractionClip>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut clips = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Invalid(e.to_string()))?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "txt") {
            continue;
        }
        let rel = path.strip_prefix(root).unwrap();
        let comps: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        if comps.len() < 3 {
            continue;
        }
        let Some(label) = sbu_category_label(&comps[0])? else {
            continue;
        };
        let subjects = parse_subject_pair(&comps[1])?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let clip = parse_sbu_clip(&text, label, subjects, options).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })?;
        clips.push(clip.with_class_name(SBU_CLASSES[label - 1]));
    }
    Ok(clips)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(idx: usize, base: f64) -> String {
        let mut s = idx.to_string();
        for k in 0..90 {
            s.push_str(&format!(",{}", base + k as f64 * 0.01));
        }
        s
    }

    #[test]
    fn parses_two_frames_exactly() {
        let text = format!("{}\n{}\n", line(1, 0.5), line(2, 1.5));
        let clip = parse_sbu_clip(&text, 3, (1, 2), &Default::default()).unwrap();
        assert_eq!(clip.len(), 2);
        assert_eq!(clip.motion_a[0].0[0], 0.5);
        assert_eq!(clip.motion_b[1].0[0], 1.5 + 45.0 * 0.01);
        assert_eq!(clip.motion_b[1].0[44], 1.5 + 89.0 * 0.01);
    }

    #[test]
    fn short_line_names_the_line() {
        let mut bad = line(2, 0.0);
        bad.truncate(bad.rfind(',').unwrap());
        let text = format!("{}\n{}\n", line(1, 0.0), bad);
        match parse_sbu_clip(&text, 1, (1, 2), &Default::default()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("found 90"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_non_monotone_rejected() {
        let text = format!("{}\n{}\n", line(2, 0.0), line(1, 0.0));
        assert!(matches!(
            parse_sbu_clip(&text, 1, (1, 2), &Default::default()),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = format!(
            "{}\n{}\n",
            line(1, 0.0),
            line(2, 0.0).replacen(",0", ",x", 1)
        );
        assert!(matches!(
            parse_sbu_clip(&text, 1, (1, 2), &Default::default()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn prescale_applies_per_axis() {
        let text = format!("{}\n{}\n", line(1, 0.0), line(2, 0.0));
        let opts = SbuImportOptions {
            prescale: Some(AxisAffine {
                scale: [2.0, 1.0, 1.0],
                offset: [0.0, 0.0, 10.0],
            }),
        };
        let clip = parse_sbu_clip(&text, 1, (1, 2), &opts).unwrap();
        assert_eq!(clip.motion_a[0].0[0], 0.0);
        assert_eq!(clip.motion_a[0].0[3], 2.0 * 0.03);
        assert_eq!(clip.motion_a[0].0[2], 0.02 + 10.0);
    }

    #[test]
    fn categories_and_pairs() {
        assert_eq!(sbu_category_label("03").unwrap(), Some(1));
        assert_eq!(sbu_category_label("08").unwrap(), Some(3));
        assert_eq!(sbu_category_label("01").unwrap(), None);
        assert_eq!(sbu_category_label("hugging").unwrap(), Some(4));
        assert!(sbu_category_label("dance").is_err());
        assert_eq!(parse_subject_pair("s01s07").unwrap(), (1, 7));
        assert!(parse_subject_pair("pair").is_err());
    }
}
