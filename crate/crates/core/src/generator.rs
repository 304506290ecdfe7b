//! Part-based attentive sequence-to-sequence generator.
//!
//! The encoder runs one LSTM per body part over A's motion and concatenates
//! the five hidden states of each frame into `h_s`. The decoder starts from
//! an affine map of the last encoder state and emits one pose of B per
//! frame, feeding each pose back as the next input. With attention enabled,
//! every decoder step also receives the context vector `r_t = Σ_s α(s,t)·h_s`.
//!
//! Parameter names:
//!
//! | name | shape |
//! |---|---|
//! | `gen.enc.{p}.w`, `gen.enc.{p}.b` | part LSTM `p` (part encoding) |
//! | `gen.enc.w`, `gen.enc.b` | single 45-input LSTM (no part encoding) |
//! | `gen.attn.w` | `2H x d_a`, rows `0..H` act on `h_s`, rows `H..2H` on `ĥ_{t-1}` |
//! | `gen.attn.v` | `d_a x 1` |
//! | `gen.init.h.*`, `gen.init.c.*` | `H → H` affine maps of `h_S` |
//! | `gen.dec.w`, `gen.dec.b` | decoder LSTM on `[x̂_{t-1}, r_t, ĥ_{t-1}]` |
//! | `gen.dec.pose.*` | extra tanh row, only with `tanh_pose_head` |
//! | `gen.out.w`, `gen.out.b` | `H → 45` pose head |

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{Checkpoint, Graph, Initializer, ParamStore, Var};
use crate::error::{Error, Result};
use crate::motion::partition::{PartitionSpec, NUM_PARTS};
use crate::motion::pose::{Motion, Pose, POSE_DIM};
use crate::nn::{Linear, Lstm};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub h_part: usize,
    pub h_dec: usize,
    /// Attention hidden width `d_a`.
    pub attn_dim: usize,
    pub use_attention: bool,
    pub part_encoding: bool,
    /// Adds a tanh row to the decoder whose output feeds the pose head,
    /// instead of reading the pose off `ĥ_t`.
    pub tanh_pose_head: bool,
    pub partition: PartitionSpec,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::with_part_width(40)
    }
}

impl GeneratorConfig {
    /// Part width `h_part`, decoder width `5·h_part`, `d_a = h_dec`.
    pub fn with_part_width(h_part: usize) -> Self {
        GeneratorConfig {
            h_part,
            h_dec: NUM_PARTS * h_part,
            attn_dim: NUM_PARTS * h_part,
            use_attention: true,
            part_encoding: true,
            tanh_pose_head: false,
            partition: PartitionSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_dec == 0 || self.attn_dim == 0 || (self.part_encoding && self.h_part == 0) {
            return Err(Error::Invalid("generator widths must be positive".into()));
        }
        if self.part_encoding && self.h_dec != NUM_PARTS * self.h_part {
            return Err(Error::Invalid(format!(
                "decoder width {} must be {} x part width {} with part encoding",
                self.h_dec, NUM_PARTS, self.h_part
            )));
        }
        Ok(())
    }

    fn part_lstm(&self, p: usize) -> Lstm {
        Lstm::new(
            format!("gen.enc.{p}"),
            self.partition.part_dim(p),
            self.h_part,
        )
    }

    fn decoder(&self) -> Lstm {
        let input = POSE_DIM + if self.use_attention { self.h_dec } else { 0 };
        Lstm::new("gen.dec", input, self.h_dec)
    }
}

/// One step's gate activations and state, as plain vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GateState {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub u: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl GateState {
    /// State with given `h` and `c`; gates are zero.
    pub fn from_state(h: Vec<f64>, c: Vec<f64>) -> Self {
        let z = vec![0.0; h.len()];
        GateState {
            i: z.clone(),
            f: z.clone(),
            o: z.clone(),
            u: z,
            c,
            h,
        }
    }
}

/// `α(s, t)` for one clip: `S` rows (encoder frames of A) by `T` columns
/// (decoder frames of B), row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionMap {
    pub source_len: usize,
    pub target_len: usize,
    pub weights: Vec<f64>,
}

impl AttentionMap {
    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.weights[s * self.target_len + t]
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.source_len).map(|s| self.get(s, t)).collect()
    }

    /// Whitespace-separated matrix with a `#` header line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# attention S={} T={} rows=encoder frame s (A), cols=decoder frame t (B)\n",
            self.source_len, self.target_len
        );
        for s in 0..self.source_len {
            for t in 0..self.target_len {
                if t > 0 {
                    out.push(' ');
                }
                write!(out, "{}", self.get(s, t)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            rows.push(row);
        }
        let target_len = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != target_len) {
            return Err(Error::Invalid("ragged attention matrix".into()));
        }
        Ok(AttentionMap {
            source_len: rows.len(),
            target_len,
            weights: rows.concat(),
        })
    }
}

/// Per-step choice between the previous prediction and the ground truth as
/// the decoder's pose input. One coin flip per step, shared by the batch.
pub struct TeacherForcing<'a, R: Rng> {
    /// Ground-truth B frames, one `B x 45` tensor per frame.
    pub targets: &'a [Tensor],
    pub ratio: f64,
    pub rng: &'a mut R,
}

/// Nodes produced by [`Generator::build`].
#[derive(Clone, Debug)]
pub struct GeneratorNodes {
    /// One `B x 45` node per decoder frame.
    pub poses: Vec<Var>,
    /// One `B x S` node per decoder frame (empty without attention).
    pub attention: Vec<Var>,
    /// Encoder states `h_s`, one `B x H` node per frame.
    pub states: Vec<Var>,
}

/// Stacks equal-length motions into one `B x 45` tensor per frame.
pub fn stack_frames(motions: &[&Motion]) -> Result<Vec<Tensor>> {
    let first = motions.first().ok_or(Error::EmptyBatch("motions"))?;
    let len = first.len();
    if let Some(m) = motions.iter().find(|m| m.len() != len) {
        return Err(Error::LengthMismatch {
            left: len,
            right: m.len(),
        });
    }
    Ok((0..len)
        .map(|t| {
            let data = motions.iter().flat_map(|m| m[t].0).collect();
            Tensor::from_vec(motions.len(), POSE_DIM, data)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub config: GeneratorConfig,
    pub params: ParamStore,
}

impl Generator {
    pub fn new(config: GeneratorConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = Initializer::new(seed);
        let h = config.h_dec;
        if config.part_encoding {
            for p in 0..NUM_PARTS {
                config.part_lstm(p).init(&mut init);
            }
        } else {
            Lstm::new("gen.enc", POSE_DIM, h).init(&mut init);
        }
        if config.use_attention {
            init.uniform("gen.attn.w", 2 * h, config.attn_dim, 2 * h);
            init.uniform("gen.attn.v", config.attn_dim, 1, config.attn_dim);
        }
        Linear::new("gen.init.h", h, h).init(&mut init);
        Linear::new("gen.init.c", h, h).init(&mut init);
        let dec = config.decoder();
        dec.init(&mut init);
        if config.tanh_pose_head {
            Linear::new("gen.dec.pose", dec.input + h, h).init(&mut init);
        }
        Linear::new("gen.out", h, POSE_DIM).init(&mut init);
        Ok(Generator {
            params: init.finish(),
            config,
        })
    }

    /// Encoder states for a batch of A motions (frame-major `B x 45` inputs).
    pub fn build_encoder(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        frames: &[Tensor],
    ) -> Result<Vec<Var>> {
        let c = &self.config;
        if frames.len() < 2 {
            return Err(Error::Invalid(format!(
                "need at least 2 frames, got {}",
                frames.len()
            )));
        }
        if c.part_encoding {
            let mut per_part = Vec::with_capacity(NUM_PARTS);
            for p in 0..NUM_PARTS {
                let cols = c.partition.coordinate_indices(p);
                let xs: Vec<Var> = frames
                    .iter()
                    .map(|f| g.input(f.select_cols(&cols)))
                    .collect();
                per_part.push(c.part_lstm(p).run(g, store, &xs)?);
            }
            (0..frames.len())
                .map(|s| {
                    let blocks: Vec<Var> = per_part.iter().map(|hs| hs[s]).collect();
                    Ok(g.concat_cols(&blocks)?)
                })
                .collect()
        } else {
            let xs: Vec<Var> = frames.iter().map(|f| g.input(f.clone())).collect();
            Lstm::new("gen.enc", POSE_DIM, c.h_dec).run(g, store, &xs)
        }
    }

    /// Full forward pass. `store` must hold this generator's parameter
    /// names; it may be a merged store shared with a discriminator.
    pub fn build<R: Rng>(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        frames: &[Tensor],
        mut teacher: Option<TeacherForcing<'_, R>>,
    ) -> Result<GeneratorNodes> {
        let c = &self.config;
        let states = self.build_encoder(g, store, frames)?;
        let batch = frames[0].rows();
        let last = *states.last().unwrap();
        let mut h = Linear::new("gen.init.h", c.h_dec, c.h_dec).forward(g, store, last)?;
        let mut cell = Linear::new("gen.init.c", c.h_dec, c.h_dec).forward(g, store, last)?;

        // Split W into the h_s rows and the ĥ rows so h_s·W_h is computed once.
        let keys = if c.use_attention {
            let w = g.param(store, "gen.attn.w")?;
            let w_h = g.slice_rows(w, 0, c.h_dec)?;
            let w_d = g.slice_rows(w, c.h_dec, c.h_dec)?;
            let v = g.param(store, "gen.attn.v")?;
            let mut e = Vec::with_capacity(states.len());
            for &s in &states {
                e.push(g.matmul(s, w_h)?);
            }
            Some((e, w_d, v))
        } else {
            None
        };

        let dec = c.decoder();
        let pose_row = Linear::new("gen.dec.pose", dec.input + c.h_dec, c.h_dec);
        let out = Linear::new("gen.out", c.h_dec, POSE_DIM);
        let mut prev = g.input(Tensor::zeros(batch, POSE_DIM));
        let mut poses = Vec::with_capacity(frames.len());
        let mut attention = Vec::new();
        for t in 0..frames.len() {
            if t > 0 {
                if let Some(tf) = teacher.as_mut() {
                    if tf.ratio > 0.0 && tf.rng.random::<f64>() < tf.ratio {
                        prev = g.input(tf.targets[t - 1].clone());
                    }
                }
            }
            let x = if let Some((e, w_d, v)) = &keys {
                let alpha = attention_node(g, e, *w_d, *v, h)?;
                attention.push(alpha);
                let r = context_node(g, &states, alpha)?;
                g.concat_cols(&[prev, r])?
            } else {
                prev
            };
            let step = dec.step(g, store, x, h, cell)?;
            let pose = if c.tanh_pose_head {
                let xh = g.concat_cols(&[x, h])?;
                let row = pose_row.forward(g, store, xh)?;
                let row = g.tanh(row);
                out.forward(g, store, row)?
            } else {
                out.forward(g, store, step.h)?
            };
            h = step.h;
            cell = step.c;
            prev = pose;
            poses.push(pose);
        }
        Ok(GeneratorNodes {
            poses,
            attention,
            states,
        })
    }

    /// Synthesizes B for each A motion (all of equal length). Returns one
    /// motion and, with attention enabled, one attention map per input.
    pub fn synthesize_batch(
        &self,
        motions_a: &[&Motion],
    ) -> Result<Vec<(Motion, Option<AttentionMap>)>> {
        let frames = stack_frames(motions_a)?;
        let mut g = Graph::new();
        let nodes = self.build(
            &mut g,
            &self.params,
            &frames,
            None::<TeacherForcing<'_, ChaCha8Rng>>,
        )?;
        let (s_len, t_len) = (frames.len(), nodes.poses.len());
        Ok((0..motions_a.len())
            .map(|b| {
                let motion = nodes
                    .poses
                    .iter()
                    .map(|&p| Pose::from_slice(g.value(p).row_slice(b)).unwrap())
                    .collect();
                let map = (!nodes.attention.is_empty()).then(|| {
                    let mut weights = vec![0.0; s_len * t_len];
                    for (t, &a) in nodes.attention.iter().enumerate() {
                        for (s, &w) in g.value(a).row_slice(b).iter().enumerate() {
                            weights[s * t_len + t] = w;
                        }
                    }
                    AttentionMap {
                        source_len: s_len,
                        target_len: t_len,
                        weights,
                    }
                });
                (motion, map)
            })
            .collect())
    }

    pub fn synthesize(&self, motion_a: &Motion) -> Result<(Motion, Option<AttentionMap>)> {
        Ok(self.synthesize_batch(&[motion_a])?.pop().unwrap())
    }

    /// Encoder states `h_1..h_S` of one motion.
    pub fn encode(&self, motion_a: &Motion) -> Result<Vec<Vec<f64>>> {
        let frames = stack_frames(&[motion_a])?;
        let mut g = Graph::new();
        let states = self.build_encoder(&mut g, &self.params, &frames)?;
        Ok(states.iter().map(|&s| g.value(s).data().to_vec()).collect())
    }

    /// `α = softmax_s(v · tanh(W·[h_s; ĥ_prev]))`.
    pub fn attention_scores(&self, states: &[Vec<f64>], h_prev: &[f64]) -> Result<Vec<f64>> {
        if !self.config.use_attention {
            return Err(Error::Invalid("attention is disabled".into()));
        }
        if states.is_empty() {
            return Err(Error::EmptyBatch("encoder states"));
        }
        let mut g = Graph::new();
        let w = g.param(&self.params, "gen.attn.w")?;
        let h = self.config.h_dec;
        let w_h = g.slice_rows(w, 0, h)?;
        let w_d = g.slice_rows(w, h, h)?;
        let v = g.param(&self.params, "gen.attn.v")?;
        let mut keys = Vec::with_capacity(states.len());
        for s in states {
            let s = g.input(Tensor::row(s));
            keys.push(g.matmul(s, w_h)?);
        }
        let hp = g.input(Tensor::row(h_prev));
        let alpha = attention_node(&mut g, &keys, w_d, v, hp)?;
        Ok(g.value(alpha).data().to_vec())
    }

    /// One decoder step from explicit inputs. `r` is ignored (and may be
    /// empty) when attention is disabled.
    pub fn decode_step(
        &self,
        prev_pose: &Pose,
        prev: &GateState,
        r: &[f64],
    ) -> Result<(Pose, GateState)> {
        let c = &self.config;
        let mut g = Graph::new();
        let p = g.input(Tensor::row(&prev_pose.0));
        let x = if c.use_attention {
            let r = g.input(Tensor::row(r));
            g.concat_cols(&[p, r])?
        } else {
            p
        };
        let h = g.input(Tensor::row(&prev.h));
        let cell = g.input(Tensor::row(&prev.c));
        let step = c.decoder().step(&mut g, &self.params, x, h, cell)?;
        let out = Linear::new("gen.out", c.h_dec, POSE_DIM);
        let pose =
            if c.tanh_pose_head {
                let xh = g.concat_cols(&[x, h])?;
                let row = Linear::new("gen.dec.pose", c.decoder().input + c.h_dec, c.h_dec)
                    .forward(&mut g, &self.params, xh)?;
                let row = g.tanh(row);
                out.forward(&mut g, &self.params, row)?
            } else {
                out.forward(&mut g, &self.params, step.h)?
            };
        let v = |n: Var| g.value(n).data().to_vec();
        let state = GateState {
            i: v(step.i),
            f: v(step.f),
            o: v(step.o),
            u: v(step.u),
            c: v(step.c),
            h: v(step.h),
        };
        Ok((Pose::from_slice(g.value(pose).data()).unwrap(), state))
    }

    /// Decoder state before the first step, from the last encoder state.
    pub fn initial_state(&self, last_state: &[f64]) -> Result<GateState> {
        let h = self.config.h_dec;
        let mut g = Graph::new();
        let s = g.input(Tensor::row(last_state));
        let h0 = Linear::new("gen.init.h", h, h).forward(&mut g, &self.params, s)?;
        let c0 = Linear::new("gen.init.c", h, h).forward(&mut g, &self.params, s)?;
        Ok(GateState::from_state(
            g.value(h0).data().to_vec(),
            g.value(c0).data().to_vec(),
        ))
    }

    pub fn to_checkpoint(&self, config_hash: &str) -> Result<Checkpoint> {
        Ok(Checkpoint::new(
            self.params.clone(),
            config_hash,
            serde_json::to_string(&self.config)?,
        ))
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let config: GeneratorConfig = serde_json::from_str(&ck.metadata)?;
        let fresh = Generator::new(config, 0)?;
        check_params(&fresh.params, &ck.params)?;
        Ok(Generator {
            config: fresh.config,
            params: ck.params.clone(),
        })
    }
}

/// Every parameter of `want` must be in `got` with the same shape.
pub(crate) fn check_params(want: &ParamStore, got: &ParamStore) -> Result<()> {
    if want.len() != got.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} parameters, found {}",
            want.len(),
            got.len()
        )));
    }
    for (name, t) in want.iter() {
        match got.get(name) {
            Some(g) if g.shape() == t.shape() => {}
            Some(g) => {
                return Err(Error::Checkpoint(format!(
                    "{name}: shape {:?}, expected {:?}",
                    g.shape(),
                    t.shape()
                )))
            }
            None => return Err(Error::Checkpoint(format!("missing parameter {name}"))),
        }
    }
    Ok(())
}

fn attention_node(g: &mut Graph, keys: &[Var], w_d: Var, v: Var, h_prev: Var) -> Result<Var> {
    let q = g.matmul(h_prev, w_d)?;
    let mut scores = Vec::with_capacity(keys.len());
    for &k in keys {
        let a = g.add(k, q)?;
        let a = g.tanh(a);
        scores.push(g.matmul(a, v)?);
    }
    let scores = g.concat_cols(&scores)?;
    Ok(g.softmax(scores))
}

fn context_node(g: &mut Graph, states: &[Var], alpha: Var) -> Result<Var> {
    let mut terms = Vec::with_capacity(states.len());
    for (s, &h) in states.iter().enumerate() {
        let a = g.slice_cols(alpha, s, 1)?;
        terms.push(g.mul(a, h)?);
    }
    Ok(g.add_all(&terms)?)
}

/// `r = Σ_s α(s)·h_s`. `α` must sum to 1 within 1e-6.
pub fn context_vector(states: &[Vec<f64>], alpha: &[f64]) -> Result<Vec<f64>> {
    if states.len() != alpha.len() {
        return Err(Error::LengthMismatch {
            left: states.len(),
            right: alpha.len(),
        });
    }
    let total: f64 = alpha.iter().sum();
    if (total - 1.0).abs() > 1e-6 || alpha.iter().any(|&a| a < 0.0) {
        return Err(Error::Invalid(format!(
            "attention weights sum to {total}, not 1"
        )));
    }
    let width = states
        .first()
        .ok_or(Error::EmptyBatch("encoder states"))?
        .len();
    let mut r = vec![0.0; width];
    for (h, &a) in states.iter().zip(alpha) {
        for (acc, &v) in r.iter_mut().zip(h) {
            *acc += a * v;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::synthetic::synthetic_pose_a;

    fn tiny(attention: bool, parts: bool) -> GeneratorConfig {
        GeneratorConfig {
            use_attention: attention,
            part_encoding: parts,
            ..GeneratorConfig::with_part_width(3)
        }
    }

    fn motion(len: usize) -> Motion {
        (0..len).map(|t| synthetic_pose_a(2, t, len)).collect()
    }

    #[test]
    fn width_invariant() {
        let mut c = tiny(true, true);
        c.h_dec = 16;
        assert!(Generator::new(c.clone(), 0).is_err());
        c.part_encoding = false;
        assert!(Generator::new(c, 0).is_ok());
    }

    #[test]
    fn encoder_width() {
        let g = Generator::new(GeneratorConfig::default(), 1).unwrap();
        let states = g.encode(&motion(4)).unwrap();
        assert_eq!(states.len(), 4);
        assert!(states.iter().all(|s| s.len() == 200));
    }

    #[test]
    fn zero_params_give_zero_poses_and_uniform_attention() {
        let mut g = Generator::new(tiny(true, true), 2).unwrap();
        g.params.zero_all();
        let (poses, map) = g.synthesize(&motion(5)).unwrap();
        assert_eq!(poses.len(), 5);
        assert!(poses.iter().all(|p| *p == Pose::zeros()));
        assert!(map
            .unwrap()
            .weights
            .iter()
            .all(|&w| (w - 0.2).abs() < 1e-15));
    }

    #[test]
    fn ablations_build() {
        for (a, p) in [(false, false), (false, true), (true, false)] {
            let g = Generator::new(tiny(a, p), 3).unwrap();
            let (poses, map) = g.synthesize(&motion(4)).unwrap();
            assert_eq!(poses.len(), 4);
            assert_eq!(map.is_some(), a);
        }
    }

    #[test]
    fn step_api_matches_graph() {
        let g = Generator::new(tiny(true, true), 4).unwrap();
        let m = motion(6);
        let (poses, map) = g.synthesize(&m).unwrap();
        let map = map.unwrap();
        let states = g.encode(&m).unwrap();
        let mut state = g.initial_state(states.last().unwrap()).unwrap();
        let mut prev = Pose::zeros();
        for t in 0..m.len() {
            let alpha = g.attention_scores(&states, &state.h).unwrap();
            for (s, &a) in alpha.iter().enumerate() {
                assert!((a - map.get(s, t)).abs() < 1e-12);
            }
            let r = context_vector(&states, &alpha).unwrap();
            let (pose, next) = g.decode_step(&prev, &state, &r).unwrap();
            for (x, y) in pose.0.iter().zip(poses[t].0.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
            prev = pose;
            state = next;
        }
    }

    #[test]
    fn tanh_head_variant_runs() {
        let c = GeneratorConfig {
            tanh_pose_head: true,
            ..tiny(true, true)
        };
        let g = Generator::new(c, 5).unwrap();
        assert!(g.params.contains("gen.dec.pose.w"));
        assert_eq!(g.synthesize(&motion(4)).unwrap().0.len(), 4);
    }

    #[test]
    fn context_vector_checks() {
        let states = vec![vec![1.0], vec![3.0]];
        assert_eq!(context_vector(&states, &[0.5, 0.5]).unwrap(), vec![2.0]);
        assert!(context_vector(&states, &[0.5, 0.6]).is_err());
        assert!(context_vector(&states, &[1.0]).is_err());
    }

    #[test]
    fn attention_text_round_trip() {
        let map = AttentionMap {
            source_len: 2,
            target_len: 3,
            weights: vec![0.1, 0.2, 0.3, 0.9, 0.8, 0.7],
        };
        let text = map.to_text();
        assert!(text.starts_with("# attention S=2 T=3"));
        assert_eq!(AttentionMap::from_text(&text).unwrap(), map);
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = Generator::new(tiny(true, true), 6).unwrap();
        let ck = Checkpoint::from_bytes(&g.to_checkpoint("abc").unwrap().to_bytes()).unwrap();
        assert_eq!(Generator::from_checkpoint(&ck).unwrap(), g);
    }
}
