//! Per-epoch training records.
//!
//! `train_log.jsonl` holds one JSON object per completed epoch with the
//! fields of [`EpochRecord`]. Loss terms are means over the epoch's batches:
//!
//! - `loss_sup`, `loss_unsup`: the two adversarial terms from the
//!   discriminator step
//! - `loss_skl`, `loss_con`, `loss_l1`: bone, continuity and contractive
//!   terms of the generator step (per-clip sums, batch means)
//! - `d_objective`, `g_objective`: the minimized objectives
//! - `d_acc_real`, `d_acc_fake`: fraction of real motions with `D_b > 0.5`
//!   and of synthesized ones with `D_b < 0.5`
//!
//! Wall-clock time is deliberately not in this file, so identical runs give
//! byte-identical logs; it goes to a separate timing file.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss_sup: f64,
    pub loss_unsup: f64,
    pub loss_skl: f64,
    pub loss_con: f64,
    pub loss_l1: f64,
    pub d_objective: f64,
    pub g_objective: f64,
    pub d_acc_real: f64,
    pub d_acc_fake: f64,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(TrainLog { records })
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let log = TrainLog {
            records: vec![
                EpochRecord {
                    epoch: 1,
                    loss_l1: 0.1 + 0.2,
                    config_hash: "ab".into(),
                    ..Default::default()
                },
                EpochRecord {
                    epoch: 2,
                    d_acc_real: 1.0 / 3.0,
                    ..Default::default()
                },
            ],
        };
        let text = log.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(TrainLog::from_jsonl(&text).unwrap(), log);
    }
}
