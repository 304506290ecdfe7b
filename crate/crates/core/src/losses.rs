//! Adversarial and auxiliary objectives.
//!
//! Graph-level functions (`*_node`) take batched nodes and are what training
//! differentiates. The plain functions wrap them for single values and are
//! what the tests check against hand arithmetic.
//!
//! Labels are 1-based. With `N` real classes, class probabilities are
//! `B x (N+1)` and the last column is "synthesized". Writing
//! `cond(y) = p_y / Σ_{j≤N} p_j`:
//!
//! - `L_sup = −mean_fake log(cond(y) / p_{N+1}) + mean_real log cond(y)`
//! - `L_unsup = mean_real log D_b + mean_fake log(1 − D_b)`
//!
//! Auxiliary terms are per-clip sums, averaged over the batch.

use serde::{Deserialize, Serialize};

use crate::diff::{Graph, Var};
use crate::discriminator::ClassDistribution;
use crate::error::{Error, Result};
use crate::motion::pose::{Pose, POSE_DIM};
use crate::motion::skeleton::{ReferenceSkeleton, NUM_BONES};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    /// Bone-length weight.
    pub alpha: f64,
    /// Continuity weight.
    pub beta: f64,
    /// Contractive (L1) weight.
    pub gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            alpha: 0.01,
            beta: 0.01,
            gamma: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuityParams {
    pub dt: usize,
    pub k: usize,
    pub lambda: f64,
    /// Drop the absolute value: `max(d1 − d2 + λ, 0)`.
    pub hinge: bool,
}

impl Default for ContinuityParams {
    fn default() -> Self {
        ContinuityParams {
            dt: 5,
            k: 2,
            lambda: 0.1,
            hinge: false,
        }
    }
}

impl ContinuityParams {
    pub fn validate(&self, frames: usize) -> Result<()> {
        if self.dt == 0 || self.k == 0 {
            return Err(Error::Invalid("continuity dt and k must be >= 1".into()));
        }
        if frames <= self.k * self.dt {
            return Err(Error::Invalid(format!(
                "continuity loss needs more than k*dt = {} frames, got {frames}",
                self.k * self.dt
            )));
        }
        Ok(())
    }
}

/// Which auxiliary terms the generator sees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossSubset {
    Adv,
    AdvSkl,
    AdvSklCon,
    #[default]
    Full,
}

impl LossSubset {
    pub const ALL: [LossSubset; 4] = [
        LossSubset::Adv,
        LossSubset::AdvSkl,
        LossSubset::AdvSklCon,
        LossSubset::Full,
    ];

    /// Zeroes the weights of excluded terms.
    pub fn apply(self, w: LossWeights) -> LossWeights {
        match self {
            LossSubset::Adv => LossWeights {
                alpha: 0.0,
                beta: 0.0,
                gamma: 0.0,
            },
            LossSubset::AdvSkl => LossWeights {
                beta: 0.0,
                gamma: 0.0,
                ..w
            },
            LossSubset::AdvSklCon => LossWeights { gamma: 0.0, ..w },
            LossSubset::Full => w,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossSubset::Adv => "adv",
            LossSubset::AdvSkl => "adv+skl",
            LossSubset::AdvSklCon => "adv+skl+con",
            LossSubset::Full => "adv+skl+con+l1",
        }
    }
}

fn check_labels(labels: &[usize], n: usize, what: &'static str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyBatch(what));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y == 0 || y > n) {
        return Err(Error::Invalid(format!("label {bad} outside 1..={n}")));
    }
    Ok(())
}

/// Per-row `log cond(y) = log p_y − log Σ_{j≤N} p_j`, plus `p_{N+1}`.
fn log_cond(g: &mut Graph, probs: Var, labels: &[usize]) -> Result<(Var, Var)> {
    let (rows, cols) = g.shape(probs);
    let n = cols - 1;
    if rows != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows,
            right: labels.len(),
        });
    }
    check_labels(labels, n, "labels")?;
    let mut onehot = Tensor::zeros(rows, cols);
    for (r, &y) in labels.iter().enumerate() {
        onehot.set(r, y - 1, 1.0);
    }
    let mut real_mask = Tensor::filled(1, cols, 1.0);
    real_mask.set(0, n, 0.0);
    let onehot = g.input(onehot);
    let real_mask = g.input(real_mask);
    let py = g.mul(probs, onehot)?;
    let py = g.row_sum(py);
    let sn = g.mul(probs, real_mask)?;
    let sn = g.row_sum(sn);
    let lpy = g.log(py);
    let lsn = g.log(sn);
    let fake = g.slice_cols(probs, n, 1)?;
    Ok((g.sub(lpy, lsn)?, fake))
}

/// `mean_real log cond(y)`.
pub fn sup_real_node(g: &mut Graph, probs: Var, labels: &[usize]) -> Result<Var> {
    let (lc, _) = log_cond(g, probs, labels)?;
    Ok(g.mean(lc))
}

/// `mean_fake log(cond(y) / p_{N+1})`, the quantity the generator lowers.
pub fn sup_fake_node(g: &mut Graph, probs: Var, labels: &[usize]) -> Result<Var> {
    let (lc, fake) = log_cond(g, probs, labels)?;
    let lf = g.log(fake);
    let d = g.sub(lc, lf)?;
    Ok(g.mean(d))
}

pub fn loss_sup_node(
    g: &mut Graph,
    real_probs: Var,
    real_labels: &[usize],
    fake_probs: Var,
    fake_labels: &[usize],
) -> Result<Var> {
    let real = sup_real_node(g, real_probs, real_labels)?;
    let fake = sup_fake_node(g, fake_probs, fake_labels)?;
    Ok(g.sub(real, fake)?)
}

/// `mean log D_b(real) + mean log(1 − D_b(fake))` with `B x 1` inputs.
pub fn loss_unsup_node(g: &mut Graph, real_db: Var, fake_db: Var) -> Result<Var> {
    let lr = g.log(real_db);
    let lr = g.mean(lr);
    let nf = g.one_minus(fake_db);
    let lf = g.log(nf);
    let lf = g.mean(lf);
    Ok(g.add(lr, lf)?)
}

/// Bone-difference matrix `45 x 3·NB` and squared-length aggregation
/// `3·NB x NB` for `skeleton`.
fn bone_matrices(skeleton: &ReferenceSkeleton) -> (Tensor, Tensor) {
    let nb = NUM_BONES;
    let mut diff = Tensor::zeros(POSE_DIM, 3 * nb);
    let mut agg = Tensor::zeros(3 * nb, nb);
    for (j, &(a, b)) in skeleton.bones().iter().enumerate() {
        for k in 0..3 {
            diff.set(3 * a + k, 3 * j + k, 1.0);
            diff.set(3 * b + k, 3 * j + k, -1.0);
            agg.set(3 * j + k, j, 1.0);
        }
    }
    (diff, agg)
}

/// Rows of `x` are poses (any number, any clip); returns `Σ |len − ref|`
/// over all rows and bones.
pub fn bone_sum_node(g: &mut Graph, x: Var, skeleton: &ReferenceSkeleton) -> Result<Var> {
    let (diff, agg) = bone_matrices(skeleton);
    let diff = g.input(diff);
    let agg = g.input(agg);
    let reference = g.input(Tensor::row(skeleton.reference()));
    let d = g.matmul(x, diff)?;
    let d = g.square(d);
    let sq = g.matmul(d, agg)?;
    let len = g.sqrt(sq);
    let err = g.sub(len, reference)?;
    let err = g.abs(err);
    Ok(g.sum(err))
}

/// Stacks frame nodes (`B x 45` each) into a frame-major `T·B x 45` node.
pub fn stack_node(g: &mut Graph, frames: &[Var]) -> Result<Var> {
    Ok(g.concat_rows(frames)?)
}

/// Batch mean of the bone loss over frames `B x 45` each.
pub fn bone_node(g: &mut Graph, frames: &[Var], skeleton: &ReferenceSkeleton) -> Result<Var> {
    let batch = g.shape(frames[0]).0;
    let x = stack_node(g, frames)?;
    let s = bone_sum_node(g, x, skeleton)?;
    Ok(g.scale(s, 1.0 / batch as f64))
}

/// Batch mean of the continuity loss.
pub fn continuity_node(g: &mut Graph, frames: &[Var], params: &ContinuityParams) -> Result<Var> {
    params.validate(frames.len())?;
    let batch = g.shape(frames[0]).0;
    let n = frames.len() - params.k * params.dt;
    let x = stack_node(g, frames)?;
    let x0 = g.slice_rows(x, 0, n * batch)?;
    let x1 = g.slice_rows(x, params.dt * batch, n * batch)?;
    let x2 = g.slice_rows(x, params.k * params.dt * batch, n * batch)?;
    let d1 = g.sub(x1, x0)?;
    let d1 = g.square(d1);
    let d1 = g.row_sum(d1);
    let d2 = g.sub(x2, x0)?;
    let d2 = g.square(d2);
    let d2 = g.row_sum(d2);
    let inner = g.sub(d1, d2)?;
    let inner = g.add_scalar(inner, params.lambda);
    let inner = if params.hinge { inner } else { g.abs(inner) };
    let terms = g.max_scalar(inner, 0.0);
    let s = g.sum(terms);
    Ok(g.scale(s, 1.0 / batch as f64))
}

/// Batch mean of `Σ_t Σ_c |x̂ − x|`.
pub fn contractive_node(g: &mut Graph, pred: &[Var], truth: &[Var]) -> Result<Var> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let batch = g.shape(pred[0]).0;
    let p = stack_node(g, pred)?;
    let t = stack_node(g, truth)?;
    let d = g.sub(p, t)?;
    let d = g.abs(d);
    let s = g.sum(d);
    Ok(g.scale(s, 1.0 / batch as f64))
}

/// Switches that shape the two objectives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveOptions {
    /// Use `−mean log D_b(fake)` instead of `mean log(1 − D_b(fake))`.
    pub non_saturating: bool,
    /// Leave the (N+1)-class terms out of both objectives.
    pub disable_multiclass: bool,
    /// Target for real samples in the binary term; 1.0 means none.
    pub smoothing: f64,
}

impl Default for ObjectiveOptions {
    fn default() -> Self {
        ObjectiveOptions {
            non_saturating: false,
            disable_multiclass: false,
            smoothing: 0.9,
        }
    }
}

/// Auxiliary terms already reduced to scalars.
#[derive(Clone, Copy, Debug)]
pub struct AuxNodes {
    pub skl: Var,
    pub con: Var,
    pub l1: Var,
}

/// `sup_fake + adversarial(D_b(fake)) + α·skl + β·con + γ·l1`, minimized by G.
pub fn generator_objective_node(
    g: &mut Graph,
    fake_probs: Var,
    fake_labels: &[usize],
    fake_db: Var,
    aux: AuxNodes,
    weights: &LossWeights,
    opts: &ObjectiveOptions,
) -> Result<Var> {
    let adv = if opts.non_saturating {
        let l = g.log(fake_db);
        let m = g.mean(l);
        g.neg(m)
    } else {
        let one = g.one_minus(fake_db);
        let l = g.log(one);
        g.mean(l)
    };
    let mut terms = vec![adv];
    if !opts.disable_multiclass {
        terms.push(sup_fake_node(g, fake_probs, fake_labels)?);
    }
    for (v, w) in [
        (aux.skl, weights.alpha),
        (aux.con, weights.beta),
        (aux.l1, weights.gamma),
    ] {
        terms.push(g.scale(v, w));
    }
    Ok(g.add_all(&terms)?)
}

/// `−(L_sup + L_unsup)` with the real binary term smoothed to
/// `s·log D_b + (1−s)·log(1 − D_b)`; minimized by D.
pub fn discriminator_objective_node(
    g: &mut Graph,
    real_probs: Var,
    real_labels: &[usize],
    fake_probs: Var,
    fake_labels: &[usize],
    real_db: Var,
    fake_db: Var,
    opts: &ObjectiveOptions,
) -> Result<Var> {
    let s = opts.smoothing;
    let lr = g.log(real_db);
    let lr = g.scale(lr, s);
    let nr = g.one_minus(real_db);
    let lnr = g.log(nr);
    let lnr = g.scale(lnr, 1.0 - s);
    let real = g.add(lr, lnr)?;
    let real = g.mean(real);
    let nf = g.one_minus(fake_db);
    let lf = g.log(nf);
    let fake = g.mean(lf);
    let mut total = g.add(real, fake)?;
    if !opts.disable_multiclass {
        let sup = loss_sup_node(g, real_probs, real_labels, fake_probs, fake_labels)?;
        total = g.add(total, sup)?;
    }
    Ok(g.neg(total))
}

fn probs_node(g: &mut Graph, dists: &[&ClassDistribution]) -> Result<Var> {
    let width = dists
        .first()
        .ok_or(Error::EmptyBatch("class distributions"))?
        .probs
        .len();
    if dists.iter().any(|d| d.probs.len() != width) {
        return Err(Error::Invalid(
            "class distributions of different widths".into(),
        ));
    }
    let rows: Vec<&[f64]> = dists.iter().map(|d| d.probs.as_slice()).collect();
    Ok(g.input(Tensor::from_rows(&rows)))
}

fn column_node(g: &mut Graph, values: &[f64], what: &'static str) -> Result<Var> {
    if values.is_empty() {
        return Err(Error::EmptyBatch(what));
    }
    Ok(g.input(Tensor::from_vec(values.len(), 1, values.to_vec())))
}

/// `L_sup` on explicit distributions and labels.
pub fn loss_sup(
    real: &[(&ClassDistribution, usize)],
    fake: &[(&ClassDistribution, usize)],
) -> Result<f64> {
    if real.is_empty() || fake.is_empty() {
        return Err(Error::EmptyBatch("loss_sup batch"));
    }
    let mut g = Graph::new();
    let rp = probs_node(&mut g, &real.iter().map(|r| r.0).collect::<Vec<_>>())?;
    let fp = probs_node(&mut g, &fake.iter().map(|r| r.0).collect::<Vec<_>>())?;
    let rl: Vec<usize> = real.iter().map(|r| r.1).collect();
    let fl: Vec<usize> = fake.iter().map(|r| r.1).collect();
    let v = loss_sup_node(&mut g, rp, &rl, fp, &fl)?;
    Ok(g.value(v).item())
}

/// `L_unsup` from `D_b` outputs.
pub fn loss_unsup(real_db: &[f64], fake_db: &[f64]) -> Result<f64> {
    let mut g = Graph::new();
    let r = column_node(&mut g, real_db, "real batch")?;
    let f = column_node(&mut g, fake_db, "fake batch")?;
    let v = loss_unsup_node(&mut g, r, f)?;
    Ok(g.value(v).item())
}

/// `L_unsup` written with `p(y_syn | x)`:
/// `mean_real log(1 − p_syn) + mean_fake log p_syn`.
pub fn loss_unsup_from_syn(real_syn: &[f64], fake_syn: &[f64]) -> Result<f64> {
    let mut g = Graph::new();
    let r = column_node(&mut g, real_syn, "real batch")?;
    let f = column_node(&mut g, fake_syn, "fake batch")?;
    let nr = g.one_minus(r);
    let lr = g.log(nr);
    let lr = g.mean(lr);
    let lf = g.log(f);
    let lf = g.mean(lf);
    let v = g.add(lr, lf)?;
    Ok(g.value(v).item())
}

fn motion_node(g: &mut Graph, m: &[Pose]) -> Result<Var> {
    if m.is_empty() {
        return Err(Error::EmptyBatch("motion"));
    }
    let data = m.iter().flat_map(|p| p.0).collect();
    Ok(g.input(Tensor::from_vec(m.len(), POSE_DIM, data)))
}

/// `Σ_t Σ_j |skl(x̂_t, j) − skl_ref(j)|`.
pub fn loss_bone(motion: &[Pose], skeleton: &ReferenceSkeleton) -> Result<f64> {
    let mut g = Graph::new();
    let x = motion_node(&mut g, motion)?;
    let v = bone_sum_node(&mut g, x, skeleton)?;
    Ok(g.value(v).item())
}

/// `Σ_{t=1}^{T−kΔt} max(| ‖x̂_{t+Δt} − x̂_t‖² − ‖x̂_{t+kΔt} − x̂_t‖² + λ |, 0)`.
pub fn loss_continuity(motion: &[Pose], params: &ContinuityParams) -> Result<f64> {
    let mut g = Graph::new();
    let frames: Vec<Var> = motion.iter().map(|p| g.input(Tensor::row(&p.0))).collect();
    let v = continuity_node(&mut g, &frames, params)?;
    Ok(g.value(v).item())
}

/// `Σ_t Σ_c |x̂ − x|`.
pub fn loss_contractive(pred: &[Pose], truth: &[Pose]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let mut g = Graph::new();
    let p = motion_node(&mut g, pred)?;
    let t = motion_node(&mut g, truth)?;
    let d = g.sub(p, t)?;
    let d = g.abs(d);
    let v = g.sum(d);
    Ok(g.value(v).item())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::pose::t_pose;

    #[test]
    fn uniform_sup_value() {
        let u = ClassDistribution::uniform(6);
        let v = loss_sup(&[(&u, 2)], &[(&u, 5)]).unwrap();
        assert!((v - ((1.0f64 / 6.0).ln() - (7.0f64 / 6.0).ln())).abs() < 1e-12);
    }

    #[test]
    fn unsup_half() {
        let v = loss_unsup(&[0.5], &[0.5]).unwrap();
        assert!((v - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!(loss_unsup(&[], &[0.5]).is_err());
    }

    #[test]
    fn bone_zero_on_template() {
        let m = vec![t_pose(); 3];
        assert!(loss_bone(&m, &ReferenceSkeleton::default()).unwrap() < 1e-12);
    }

    #[test]
    fn continuity_static() {
        let m = vec![Pose::zeros(); 16];
        let p = ContinuityParams::default();
        assert!((loss_continuity(&m, &p).unwrap() - 0.6).abs() < 1e-12);
        assert!(loss_continuity(&m[..10], &p).is_err());
    }

    #[test]
    fn subsets_zero_weights() {
        let w = LossWeights::default();
        assert_eq!(LossSubset::Adv.apply(w).gamma, 0.0);
        assert_eq!(LossSubset::AdvSkl.apply(w).alpha, 0.01);
        assert_eq!(LossSubset::AdvSklCon.apply(w).beta, 0.01);
        assert_eq!(LossSubset::Full.apply(w), w);
    }

    #[test]
    fn labels_checked() {
        let u = ClassDistribution::uniform(2);
        assert!(loss_sup(&[(&u, 3)], &[(&u, 1)]).is_err());
        assert!(loss_sup(&[(&u, 0)], &[(&u, 1)]).is_err());
    }
}
