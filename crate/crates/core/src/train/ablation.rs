//! Trains several configurations on the same split and tabulates AFD and
//! recognition accuracy per class.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::losses::LossSubset;
use crate::motion::clip::InteractionClip;
use crate::motion::pose::Motion;
use crate::train::config::TrainConfig;
use crate::train::gan::train_gan;
use crate::train::metrics::{afd_all, mean, mean_by_class, synthesize_all};
use crate::train::recognizer::{recognition_accuracy, Classifier};

#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub name: String,
    pub config: TrainConfig,
}

impl Variant {
    pub fn new(name: impl Into<String>, config: TrainConfig) -> Self {
        Variant {
            name: name.into(),
            config,
        }
    }
}

/// Plain seq2seq, part-based seq2seq, and part-based with attention.
pub fn generator_variants(base: &TrainConfig) -> Vec<Variant> {
    let with = |attention: bool, parts: bool| TrainConfig {
        disable_attention: !attention,
        disable_part_encoding: !parts,
        ..base.clone()
    };
    vec![
        Variant::new("seq2seq", with(false, false)),
        Variant::new("seq2seq_part", with(false, true)),
        Variant::new("seq2seq_part_attn", with(true, true)),
    ]
}

/// The four loss combinations from adversarial-only to all terms.
pub fn loss_variants(base: &TrainConfig) -> Vec<Variant> {
    LossSubset::ALL
        .iter()
        .map(|&s| {
            Variant::new(
                s.name(),
                TrainConfig {
                    loss_subset: s,
                    ..base.clone()
                },
            )
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub variant: String,
    pub afd_per_class: BTreeMap<usize, f64>,
    pub afd_mean: f64,
    /// Present when a classifier was supplied.
    pub accuracy_per_class: Option<BTreeMap<usize, f64>>,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationReport {
    /// Class names by label, from the test clips.
    pub classes: BTreeMap<usize, String>,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    /// Tab-separated table with a header row.
    pub fn to_tsv(&self) -> String {
        let name = |l: &usize| {
            let n = &self.classes[l];
            if n.is_empty() {
                format!("class{l}")
            } else {
                n.clone()
            }
        };
        let mut out = String::from("variant");
        for l in self.classes.keys() {
            write!(out, "\tafd_{}", name(l)).unwrap();
        }
        out.push_str("\tafd_mean");
        for l in self.classes.keys() {
            write!(out, "\tacc_{}", name(l)).unwrap();
        }
        out.push_str("\tacc_overall\n");
        let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.6}"));
        for r in &self.rows {
            out.push_str(&r.variant);
            for l in self.classes.keys() {
                write!(out, "\t{}", fmt(r.afd_per_class.get(l).copied())).unwrap();
            }
            write!(out, "\t{}", fmt(Some(r.afd_mean))).unwrap();
            for l in self.classes.keys() {
                let acc = r
                    .accuracy_per_class
                    .as_ref()
                    .and_then(|m| m.get(l).copied());
                write!(out, "\t{}", fmt(acc)).unwrap();
            }
            writeln!(out, "\t{}", fmt(r.accuracy)).unwrap();
        }
        out
    }
}

/// Trains every variant (each with its seed replaced by `seed`) on `train`
/// and evaluates on `test`.
pub fn run_ablation(
    train: &[InteractionClip],
    test: &[InteractionClip],
    variants: &[Variant],
    seed: u64,
    classifier: Option<&dyn Classifier>,
) -> Result<AblationReport> {
    if variants.is_empty() {
        return Err(Error::Invalid("no ablation variants".into()));
    }
    if test.is_empty() {
        return Err(Error::EmptyBatch("test set"));
    }
    let classes = test
        .iter()
        .map(|c| (c.label, c.class_name.clone()))
        .collect();
    let mut rows = Vec::with_capacity(variants.len());
    for v in variants {
        let config = TrainConfig {
            seed,
            ..v.config.clone()
        };
        let out = train_gan(train, &config)?;
        let preds = synthesize_all(&out.generator, test)?;
        let afds = afd_all(&preds, test, false)?;
        let (accuracy_per_class, accuracy) = match classifier {
            Some(c) => {
                let samples: Vec<(&Motion, &Motion, usize)> = test
                    .iter()
                    .zip(&preds)
                    .map(|(t, p)| (&t.motion_a, p, t.label))
                    .collect();
                let r = recognition_accuracy(c, &samples)?;
                let per = r
                    .per_class
                    .keys()
                    .map(|&l| (l, r.class_accuracy(l).unwrap()))
                    .collect();
                (Some(per), Some(r.overall()))
            }
            None => (None, None),
        };
        rows.push(AblationRow {
            variant: v.name.clone(),
            afd_per_class: mean_by_class(&afds, test),
            afd_mean: mean(&afds),
            accuracy_per_class,
            accuracy,
        });
    }
    Ok(AblationReport { classes, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_lists() {
        let base = TrainConfig::sbu();
        let g = generator_variants(&base);
        assert_eq!(g.len(), 3);
        assert!(g[0].config.disable_attention && g[0].config.disable_part_encoding);
        assert!(!g[2].config.disable_attention && !g[2].config.disable_part_encoding);
        let l = loss_variants(&base);
        assert_eq!(l.len(), 4);
        assert_eq!(l[0].config.effective_weights().gamma, 0.0);
    }

    #[test]
    fn tsv_layout() {
        let report = AblationReport {
            classes: [(1, "push".to_string()), (2, String::new())]
                .into_iter()
                .collect(),
            rows: vec![AblationRow {
                variant: "v".into(),
                afd_per_class: [(1, 0.5), (2, 0.25)].into_iter().collect(),
                afd_mean: 0.375,
                accuracy_per_class: None,
                accuracy: None,
            }],
        };
        let tsv = report.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(
            lines[0],
            "variant\tafd_push\tafd_class2\tafd_mean\tacc_push\tacc_class2\tacc_overall"
        );
        assert_eq!(lines[1], "v\t0.500000\t0.250000\t0.375000\tNA\tNA\tNA");
    }
}
